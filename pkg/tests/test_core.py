import math

import numpy as np
import pytest

from src.core import (DomainError, PathState, check_bet, log_payoff, log_payoffs, make_market, observe,
                      path_from_values)


def test_make_market_symmetric():
    cfg = make_market(0.5)
    assert cfg.lambda_min == -2.0
    assert cfg.lambda_max == 2.0
    assert cfg.beta_l == cfg.beta_u == 0.5

def test_make_market_skewed():
    cfg = make_market(0.25)
    assert cfg.lambda_min == -4.0
    assert cfg.lambda_max == pytest.approx(4.0 / 3.0)
    assert cfg.beta_l == 0.25
    assert cfg.beta_u == 0.75

@pytest.mark.parametrize("m0", [0.0, 1.0, -0.1, 1.5, float('nan'), "abc"])
def test_make_market_rejects_out_of_domain(m0):
    with pytest.raises(DomainError):
        make_market(m0)

def test_observe_single_step(market):
    state = observe(PathState(market), 1)
    assert state.n == 1
    assert state.s == 0.5
    assert state.v == 0.25

def test_observe_is_pure(market):
    empty = PathState(market)
    observe(empty, 1)
    assert empty.n == 0
    assert empty.s == 0.0

def test_hand_sum_of_centered_values(path_110):
    assert path_110.s == 0.5
    assert path_110.v == 0.75

def test_null_values_leave_sums_at_zero(market):
    state = path_from_values(market, [0.5] * 7)
    assert state.n == 7
    assert state.s == 0.0
    assert state.v == 0.0

@pytest.mark.parametrize("x", [-0.01, 1.01, float('nan')])
def test_observe_rejects_values_outside_unit_interval(market, x):
    with pytest.raises(DomainError):
        PathState(market).observe(x)

def test_extend_matches_observe_and_exact_recompute(market):
    rng = np.random.default_rng(3)
    xs = rng.random(5000)
    batched = PathState(market).extend(xs)
    looped = path_from_values(market, xs)
    s_exact, v_exact = batched.recompute()
    assert batched.n == looped.n == 5000
    assert batched.s == pytest.approx(s_exact, abs=1e-12)
    assert looped.s == pytest.approx(s_exact, abs=1e-12)
    assert batched.v == pytest.approx(v_exact, rel=1e-15)

def test_histogram_mode_keeps_support_only(market):
    state = PathState(market, keep_values=False).extend([1, 0, 1, 1])
    points, counts = state.support()
    assert points.tolist() == [0.0, 1.0]
    assert counts.tolist() == [1.0, 3.0]
    with pytest.raises(DomainError):
        _ = state.values

def test_copy_is_independent(path_110):
    other = path_110.copy().observe(1)
    assert other.n == 4
    assert path_110.n == 3

def test_log_payoff_examples(market):
    assert log_payoff(0.0, 0.3, market) == 0.0
    assert log_payoff(-2.0, 1.0, market) == pytest.approx(math.log(2.0))
    assert log_payoff(2.0, 1.0, market) == -math.inf

def test_log_payoff_rejects_inadmissible_bet(market):
    with pytest.raises(DomainError):
        log_payoff(2.5, 1.0, market)
    with pytest.raises(DomainError):
        check_bet(-2.1, market)

def test_log_payoffs_vectorized_matches_scalar(skewed_market):
    lams = np.linspace(skewed_market.lambda_min, skewed_market.lambda_max, 11)
    vec = log_payoffs(lams, 0.0, skewed_market)
    scalar = [log_payoff(lam, 0.0, skewed_market) for lam in lams]
    assert vec[0] == -math.inf # lambda_min * (0 - m0) = 1
    np.testing.assert_allclose(vec[1:], scalar[1:], rtol=1e-15)

@pytest.mark.parametrize("m0", [0.25, 0.5, 0.7])
def test_log_payoff_stays_in_its_envelope(m0):
    cfg = make_market(m0)
    rng = np.random.default_rng(505)
    lams = rng.uniform(cfg.lambda_min, cfg.lambda_max, 2000)
    xs = rng.random(2000)
    for lam, x in zip(lams, xs):
        value = log_payoff(lam, x, cfg)
        reach = cfg.beta_u * abs(lam)
        assert value <= math.log1p(reach) + 1e-15
        if reach < 1.0:
            assert value >= math.log1p(-reach) - 1e-15
