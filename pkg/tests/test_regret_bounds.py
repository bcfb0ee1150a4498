import math

import numpy as np
import pytest

from src.core import DomainError, make_market, path_from_values
from src.hindsight import best_lambda, restricted_comparator
from src.mixture import MixtureEngine, aggregate_log_wealth
from src.models import Branch, Location, PriorKind
from src.priors import LN_66E, LNLN_66E, make_prior
from src.regret_bounds import (aggregate_bound, build_report, classify, classify_restricted,
                               lemma_a1_bound, lemma_a2_bound, oj_bound, oj_density_at_one,
                               path_wealth_lower_bound, regret, robbins_bound,
                               robbins_conditional_bound, uniform_bound)

LNLNLN_66E = math.log(LNLN_66E)


def test_regret_examples(market):
    assert regret(0.0, 0.0) == 0.0
    assert regret(math.log(2.0), 0.0) == pytest.approx(math.log(2.0))
    # V = 0 path against the Robbins mass 1/2
    assert regret(0.0, math.log(0.5)) == pytest.approx(math.log(2.0))
    assert regret(1.0, -math.inf) == math.inf
    with pytest.raises(DomainError):
        regret(math.inf, 0.0)

def test_classify_examples(market):
    assert classify(0.5, 0.75, Location.INTERIOR, market) == Branch.SMALL_DRIFT_INTERIOR
    assert classify(0.1, 0.75, Location.UPPER_BOUNDARY, market) == Branch.SMALL_DRIFT_BOUNDARY
    assert classify(1.5, 0.75, Location.LOWER_BOUNDARY, market) == Branch.LARGE_DRIFT
    assert classify(0.0, 0.0, Location.DEGENERATE, market) == Branch.DEGENERATE
    # sqrt(2 * 1000) ~ 44.7 <= 50 <= 0.1 * 1000
    assert classify(50.0, 1000.0, Location.INTERIOR, market) == Branch.MEDIUM_DRIFT

def test_classify_medium_boundary_is_inclusive(market):
    V = 1e4
    assert classify(market.beta_l / 5.0 * V, V, Location.INTERIOR, market) == Branch.MEDIUM_DRIFT
    assert classify(np.nextafter(market.beta_l / 5.0 * V, np.inf), V, Location.INTERIOR, market) == Branch.LARGE_DRIFT

def test_classify_restricted_uses_fixed_ratio(skewed_market):
    # beta_l / 5 = 0.05 would call this LargeDrift
    assert classify(150.0, 1000.0, Location.INTERIOR, skewed_market) == Branch.LARGE_DRIFT
    assert classify_restricted(150.0, 1000.0, Location.INTERIOR, skewed_market) == Branch.MEDIUM_DRIFT

def test_classifier_partition():
    rng = np.random.default_rng(1)
    cfg = make_market(0.3)
    for _ in range(10_000):
        V = float(rng.exponential(100.0)) + 1e-9
        S = float(rng.normal(0.0, 3.0 * math.sqrt(V))) if rng.random() < 0.5 else float(rng.uniform(-V, V))
        location = [Location.INTERIOR, Location.LOWER_BOUNDARY, Location.UPPER_BOUNDARY][int(rng.integers(3))]
        conditions = [
            abs(S) < math.sqrt(2 * V) and location == Location.INTERIOR,
            abs(S) < math.sqrt(2 * V) and location.is_boundary,
            math.sqrt(2 * V) <= abs(S) <= cfg.beta_l / 5 * V,
            abs(S) >= math.sqrt(2 * V) and abs(S) > cfg.beta_l / 5 * V,
        ]
        assert sum(conditions) == 1
        branch = classify(S, V, location, cfg)
        expected = [Branch.SMALL_DRIFT_INTERIOR, Branch.SMALL_DRIFT_BOUNDARY, Branch.MEDIUM_DRIFT, Branch.LARGE_DRIFT]
        assert branch == expected[conditions.index(True)]

def test_uniform_bound_examples(market):
    assert uniform_bound(0) == 1.0
    assert uniform_bound(10) == pytest.approx(math.log(11.0) + 1.0)
    assert uniform_bound(10) == pytest.approx(3.397895, abs=1e-6)
    with pytest.raises(DomainError):
        uniform_bound(-1)

def test_uniform_regret_one_step(market):
    engine = MixtureEngine(make_prior(PriorKind.UNIFORM, market), market, nodes_per_side=64)
    engine.step(1.0)
    path = path_from_values(market, [1])
    r = regret(best_lambda(path).log_wstar, engine.log_mixture_wealth())
    assert r == pytest.approx(math.log(2.0), abs=1e-9)
    assert r <= uniform_bound(1)

def test_robbins_small_drift_boundary_constant(market):
    bound = robbins_bound(Branch.SMALL_DRIFT_BOUNDARY, 0.1, 1.0, 0.0, market)
    assert bound == pytest.approx(4.0 + math.log(4.0 * LN_66E * LNLN_66E), rel=1e-12)
    assert bound == pytest.approx(6.505, abs=1e-3)

def test_robbins_large_drift_on_point_mass_path(market, path_111):
    log_wstar = 3.0 * math.log(2.0)
    expected = 1.5 * math.log(2.0) + math.log(4.0) + LNLN_66E + LNLNLN_66E + math.log(11.0)
    assert robbins_bound(Branch.LARGE_DRIFT, 1.5, 0.75, log_wstar, market) == pytest.approx(expected, rel=1e-12)
    engine = MixtureEngine(make_prior(PriorKind.ROBBINS, market), market, nodes_per_side=512)
    engine.step_many([1.0, 1.0, 1.0])
    assert regret(best_lambda(path_111).log_wstar, engine.log_mixture_wealth()) <= expected

def test_robbins_bound_not_applicable_on_degenerate(market):
    assert robbins_bound(Branch.DEGENERATE, 0.0, 0.0, 0.0, market) is None
    assert oj_bound(Branch.DEGENERATE, 0.0, 0.0, 0.0, market) is None

def test_robbins_bounds_grow_like_lnln(market):
    small = [robbins_bound(Branch.SMALL_DRIFT_INTERIOR, 0.0, V, 0.0, market) for V in (1e2, 1e4, 1e8)]
    assert small[0] < small[1] < small[2]
    assert small[2] - small[0] < 2.0

def test_conditional_bound_examples(market):
    expected = math.log(20.0) + 2.0 * (math.log(4.0) + LNLN_66E + LNLNLN_66E + math.log(11.0))
    for V in (10.0, 1e6):
        assert robbins_conditional_bound(Branch.LARGE_DRIFT, V, V, 0.05, market) == pytest.approx(expected, rel=1e-12)
    assert robbins_conditional_bound(Branch.SMALL_DRIFT_INTERIOR, 0.0, 10.0, 0.05, market) is None
    with pytest.raises(DomainError):
        robbins_conditional_bound(Branch.LARGE_DRIFT, 1.0, 1.0, 1.0, market)

def test_conditional_medium_bound_leading_coefficient(market):
    # bound / ln ln V decreases toward 4/3 from above
    ratios = [robbins_conditional_bound(Branch.MEDIUM_DRIFT, 0.0, v, 0.05, market) / math.log(math.log(v))
              for v in (1e10, 1e100, 1e300)]
    assert ratios[0] > ratios[1] > ratios[2] > 4.0 / 3.0

def test_prior_density_regret_bound_example(market):
    prior = make_prior(PriorKind.ROBBINS, market)
    log_wstar = 3.0 * math.log(2.0)
    expected = 1.5 * math.log(2.0) - math.log(1.0 / (8.0 * LN_66E * LNLN_66E) * 2.0)
    assert lemma_a1_bound(log_wstar, 2.0, prior, market) == pytest.approx(expected, rel=1e-12)
    assert lemma_a1_bound(log_wstar, -2.0, prior, market) == pytest.approx(expected, rel=1e-12)
    assert lemma_a1_bound(0.0, 0.0, prior, market) is None

def test_local_mass_bound_only_for_interior(market, path_110, path_111):
    prior = make_prior(PriorKind.ROBBINS, market)
    boundary = best_lambda(path_111)
    assert lemma_a2_bound(boundary.lambda_star, boundary.location, path_111.v, prior, market) is None
    interior = best_lambda(path_110)
    bound = lemma_a2_bound(interior.lambda_star, interior.location, path_110.v, prior, market)
    assert bound is not None
    lower = path_wealth_lower_bound(interior.log_wstar, interior.lambda_star, interior.location, path_110.v, prior, market)
    assert lower == pytest.approx(interior.log_wstar - bound)
    engine = MixtureEngine(prior, market, nodes_per_side=512)
    engine.step_many(path_110.values)
    assert engine.log_mixture_wealth() >= lower - 1e-8

def test_oj_constants(market):
    assert oj_density_at_one(market) == pytest.approx(1.0 / (2.0 * LN_66E * LNLN_66E), rel=1e-12)
    assert oj_density_at_one(market) == pytest.approx(0.163346, abs=1e-6)
    bound = oj_bound(Branch.SMALL_DRIFT_BOUNDARY, 0.1, 1.0, 0.0, market)
    assert bound == pytest.approx(2.0 + math.log(2.0 * LN_66E * LNLN_66E), rel=1e-12)
    assert bound == pytest.approx(3.811886, abs=1e-6)

def test_oj_regret_within_bound_on_point_mass(market):
    path = path_from_values(market, [1.0] * 200)
    restricted = best_lambda(path, restricted_comparator())
    engine = MixtureEngine(make_prior(PriorKind.ORABONA_JUN, market), market, nodes_per_side=512)
    engine.step_many(path.values)
    branch = classify_restricted(path.s, path.v, restricted.location, market)
    assert branch == Branch.LARGE_DRIFT
    r = regret(restricted.log_wstar, engine.log_mixture_wealth())
    assert r <= oj_bound(branch, path.s, path.v, restricted.log_wstar, market)

def test_aggregate_bound_examples():
    assert aggregate_bound(5.0, 2.0, 0.5) == pytest.approx(2.0 + math.log(2.0))
    assert aggregate_bound(0.0, 0.0, 0.5) == pytest.approx(math.log(2.0))
    assert aggregate_bound(0.0, 0.0, 0.9) == pytest.approx(math.log(10.0))
    with pytest.raises(DomainError):
        aggregate_bound(0.0, 0.0, 1.0)

def test_build_report_slack():
    report = build_report(10, 1.0, 2.0, Branch.LARGE_DRIFT, 1.5, 4.0, quad_slack=1e-9)
    assert report.slack == pytest.approx(2.5)
    assert report.quad_slack == 1e-9
    assert build_report(0, 0.0, 0.0, Branch.DEGENERATE, 0.0, None).slack is None

def test_aggregate_bound_dominates_aggregate_regret():
    rng = np.random.default_rng(606)
    for _ in range(1000):
        log_wstar = rng.uniform(0.0, 50.0)
        log_w1, log_w2 = rng.uniform(-20.0, log_wstar, 2)
        s0 = rng.uniform(0.01, 0.99)
        r1, r2 = log_wstar - log_w1, log_wstar - log_w2
        bound = aggregate_bound(r1, r2, s0)
        assert regret(log_wstar, aggregate_log_wealth(log_w1, log_w2, s0)) <= bound + 1e-12
        assert bound >= min(r1, r2) + math.log(2.0) - 1e-12
        assert bound <= max(r1, r2) + math.log(1.0 / min(s0, 1.0 - s0)) + 1e-12

def test_aggregate_regret_within_bound_on_a_path(market):
    xs = (np.random.default_rng(707).random(500) < 0.6).astype(float)
    path = path_from_values(market, xs)
    opt = best_lambda(path)
    engines = [MixtureEngine(make_prior(kind, market), market, nodes_per_side=256)
               for kind in (PriorKind.UNIFORM, PriorKind.ROBBINS)]
    for engine in engines:
        engine.step_many(xs)
    r1, r2 = (regret(opt.log_wstar, engine.log_mixture_wealth()) for engine in engines)
    aggregate = aggregate_log_wealth(engines[0].log_mixture_wealth(), engines[1].log_mixture_wealth(), 0.5)
    assert regret(opt.log_wstar, aggregate) <= aggregate_bound(r1, r2, 0.5) + 1e-12
    assert regret(opt.log_wstar, aggregate) <= uniform_bound(500) + math.log(2.0) + 1e-8
