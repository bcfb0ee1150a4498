import math

import numpy as np
import pytest

from src.core import DomainError, make_market, path_from_values
from src.hindsight import (alpha_beta, best_lambda, boundary_envelope_check, klinf,
                           medium_drift_envelope_check, objective, restricted_comparator,
                           sandwich_check, sign_check, solve_weighted, wstar_lower_bound,
                           wstar_lower_bound_check)
from src.models import Location


def _grid_objective(xs, m0, grid):
    bet = np.multiply.outer(grid, np.asarray(xs, float) - m0)
    with np.errstate(divide='ignore', invalid='ignore'):
        terms = np.log1p(-bet)
    terms[bet >= 1.0] = -np.inf
    return terms.sum(axis=1)

def _zoom_grid_oracle(xs, m0, lo, hi, points=201, levels=5):
    """Successive grid refinement of a concave objective; each level keeps the two cells around the best point."""
    best_lam, best_val = 0.0, -np.inf
    for _ in range(levels):
        grid = np.linspace(lo, hi, points)
        values = _grid_objective(xs, m0, grid)
        i = int(np.argmax(values))
        best_lam, best_val = float(grid[i]), float(values[i])
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, points - 1)]
    return best_lam, best_val


def test_objective_examples(market, path_110):
    assert objective(path_110, 0.0) == 0.0
    expected = 2.0 * math.log(4.0 / 3.0) + math.log(2.0 / 3.0)
    assert objective(path_110, -2.0 / 3.0) == pytest.approx(expected, abs=1e-15)
    assert expected == pytest.approx(0.169899, abs=1e-6)
    assert objective(path_from_values(market, [1]), 2.0) == -math.inf

def test_best_lambda_lower_boundary(path_111):
    result = best_lambda(path_111)
    assert result.location == Location.LOWER_BOUNDARY
    assert result.lambda_star == -2.0
    assert result.log_wstar == pytest.approx(3.0 * math.log(2.0), abs=1e-12)

def test_best_lambda_interior(path_110):
    result = best_lambda(path_110)
    assert result.location == Location.INTERIOR
    assert result.lambda_star == pytest.approx(-2.0 / 3.0, abs=1e-12)
    assert result.log_wstar == pytest.approx(0.169899, abs=1e-6)

def test_best_lambda_symmetric_path(market):
    result = best_lambda(path_from_values(market, [1, 0]))
    assert result.lambda_star == pytest.approx(0.0, abs=1e-12)
    assert result.log_wstar == pytest.approx(0.0, abs=1e-15)
    assert result.log_wstar >= 0.0

def test_best_lambda_degenerate_paths(market):
    for xs in ([], [0.5, 0.5, 0.5]):
        result = best_lambda(path_from_values(market, xs))
        assert result.location == Location.DEGENERATE
        assert result.lambda_star == 0.0
        assert result.log_wstar == 0.0

def test_restricted_comparator_clips_at_one(path_111):
    result = best_lambda(path_111, restricted_comparator())
    assert result.location == Location.LOWER_BOUNDARY
    assert result.lambda_star == -1.0
    assert result.log_wstar == pytest.approx(3.0 * math.log(1.5), abs=1e-12)

def test_comparator_must_contain_zero(path_110):
    with pytest.raises(DomainError):
        best_lambda(path_110, (0.5, 1.0))
    with pytest.raises(DomainError):
        best_lambda(path_110, (-3.0, 1.0))

def test_solver_matches_zoom_grid_oracle():
    rng = np.random.default_rng(2024)
    for trial in range(200):
        m0 = [0.25, 0.5, 0.7][trial % 3]
        cfg = make_market(m0)
        n = int(rng.integers(1, 51))
        xs = (rng.random(n) < rng.random()).astype(float) if trial % 2 else rng.random(n)
        path = path_from_values(cfg, xs)
        result = best_lambda(path)
        if result.location == Location.DEGENERATE:
            continue
        lam, val = _zoom_grid_oracle(xs, m0, cfg.lambda_min, cfg.lambda_max)
        assert abs(result.lambda_star - lam) <= 1e-4
        assert abs(result.log_wstar - val) <= 1e-8

def test_klinf_examples():
    assert klinf([0.0, 1.0], [0.5, 0.5], 0.5) == pytest.approx(0.0, abs=1e-12)
    expected = 0.8 * math.log(1.6) + 0.2 * math.log(0.4)
    assert klinf([0.0, 1.0], [0.2, 0.8], 0.5) == pytest.approx(expected, abs=1e-10)
    assert expected == pytest.approx(0.192745, abs=1e-6)
    assert klinf([1.0], [1.0], 0.5) == pytest.approx(math.log(2.0), abs=1e-9)

@pytest.mark.parametrize("q", [0.1 * k for k in range(1, 10)])
@pytest.mark.parametrize("m0", [0.1 * k for k in range(1, 10)])
def test_klinf_bernoulli_is_binary_kl(q, m0):
    binary_kl = q * math.log(q / m0) + (1 - q) * math.log((1 - q) / (1 - m0))
    assert klinf([0.0, 1.0], [1 - q, q], m0) == pytest.approx(binary_kl, abs=1e-8)

def test_klinf_of_empirical_law_scales_to_wstar():
    rng = np.random.default_rng(17)
    for _ in range(100):
        cfg = make_market(float(rng.choice([0.25, 0.5, 0.7])))
        path = path_from_values(cfg, rng.random(int(rng.integers(2, 40))))
        points, counts = path.support()
        assert path.n * klinf(points, counts / path.n, cfg.m0) == pytest.approx(best_lambda(path).log_wstar, abs=1e-9)

def test_klinf_rejects_bad_laws():
    with pytest.raises(DomainError):
        klinf([0.0, 1.0], [0.3, 0.3], 0.5)
    with pytest.raises(DomainError):
        klinf([0.0, 1.5], [0.5, 0.5], 0.5)
    with pytest.raises(DomainError):
        klinf([0.0, 1.0], [0.5, 0.5], 1.0)

def test_solve_weighted_ignores_zero_weights(market):
    result = solve_weighted(np.array([0.0, 1.0]), np.array([0.0, 1.0]), market)
    assert result.location == Location.LOWER_BOUNDARY

def test_wstar_lower_bound_examples(path_110, path_111):
    assert wstar_lower_bound(0.0, 0.0) == 0.0
    assert wstar_lower_bound(0.5, 0.75) == pytest.approx(3.0 / 26.0)
    assert wstar_lower_bound(0.5, 0.75) <= best_lambda(path_110).log_wstar
    assert wstar_lower_bound(1.5, 0.75) == pytest.approx(2.25 / 3.5)
    assert wstar_lower_bound(1.5, 0.75) <= best_lambda(path_111).log_wstar
    with pytest.raises(DomainError):
        wstar_lower_bound(0.1, -1.0)

def test_alpha_beta_follows_sign(skewed_market):
    assert alpha_beta(1.0, skewed_market) == (0.75, 0.25)
    assert alpha_beta(-1.0, skewed_market) == (0.25, 0.75)
    assert alpha_beta(0.0, skewed_market) is None

def test_envelopes_hold_on_random_paths():
    rng = np.random.default_rng(99)
    evaluated = 0
    for trial in range(300):
        cfg = make_market([0.25, 0.5, 0.7][trial % 3])
        n = int(rng.integers(1, 400))
        p = rng.random()
        xs = (rng.random(n) < p).astype(float) if trial % 2 else rng.beta(1 + 5 * p, 1 + 5 * (1 - p), n)
        path = path_from_values(cfg, xs)
        result = best_lambda(path)
        S, V = path.s, path.v
        for slack in (sign_check(result, S), sandwich_check(result, S, V, cfg),
                      boundary_envelope_check(result, S, V, cfg), medium_drift_envelope_check(result, S, V, cfg),
                      wstar_lower_bound_check(result, S, V)):
            if slack is not None:
                evaluated += 1
                assert slack >= -1e-9
    assert evaluated > 300
