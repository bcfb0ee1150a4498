import logging
import math
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from .core import DomainError, PathState, check_bet, make_market
from .models import HindsightResult, Interval, Location, MarketConfig

logger = logging.getLogger('VilleBet')

ENDPOINT_SHIFT = 1e-12 # endpoint test points sit this fraction of the interval inside it
ROOT_XTOL = 1e-15
ROOT_RTOL = 4 * np.finfo(float).eps


def restricted_comparator() -> Interval:
    return (-1.0, 1.0)


def full_comparator(cfg: MarketConfig) -> Interval:
    return (cfg.lambda_min, cfg.lambda_max)


def _weighted_objective(d: np.ndarray, w: np.ndarray, lam: float) -> float:
    bet = lam * d
    if np.any(bet >= 1.0):
        return -math.inf
    return math.fsum(w * np.log1p(-bet))


def _weighted_derivative(d: np.ndarray, w: np.ndarray, lam: float) -> float:
    return -math.fsum(w * d / (1.0 - lam * d))


def objective(path: PathState, lam: float) -> float:
    """f_n(lam) = sum_i ln(1 - lam (x_i - m0)), concave in lam; -inf once any factor hits zero."""
    lam = check_bet(lam, path.market)
    points, counts = path.support()
    if points.size == 0:
        return 0.0
    return _weighted_objective(points - path.market.m0, counts, lam)


def _check_comparator(comparator: Interval, cfg: MarketConfig) -> Tuple[float, float]:
    lo, hi = float(comparator[0]), float(comparator[1])
    check_bet(lo, cfg)
    check_bet(hi, cfg)
    if not (lo <= 0.0 <= hi) or lo >= hi:
        raise DomainError(f"Comparator [{lo}, {hi}] must be a nonempty interval containing 0")
    return max(lo, cfg.lambda_min), min(hi, cfg.lambda_max)


def solve_weighted(points: np.ndarray, weights: np.ndarray, cfg: MarketConfig,
                   comparator: Optional[Interval] = None) -> HindsightResult:
    """
    Maximizes sum_j w_j ln(1 - lam (x_j - m0)) over the comparator interval.

    One-sided derivative tests just inside each endpoint decide boundary optima; otherwise
    the root of the decreasing derivative is bracketed by the two test points.
    """
    lo, hi = _check_comparator(comparator or full_comparator(cfg), cfg)
    points = np.asarray(points, dtype=float)
    weights = np.asarray(weights, dtype=float)
    keep = weights > 0
    d, w = points[keep] - cfg.m0, weights[keep]
    if d.size == 0 or not np.any(d != 0.0):
        return HindsightResult(lambda_star=0.0, location=Location.DEGENERATE, log_wstar=0.0)

    shift = ENDPOINT_SHIFT * (hi - lo)
    lo_end, hi_end = lo + shift, hi - shift
    if _weighted_derivative(d, w, hi_end) > 0.0:
        return HindsightResult(hi, Location.UPPER_BOUNDARY, _weighted_objective(d, w, hi))
    if _weighted_derivative(d, w, lo_end) < 0.0:
        return HindsightResult(lo, Location.LOWER_BOUNDARY, _weighted_objective(d, w, lo))

    root = brentq(lambda lam: _weighted_derivative(d, w, lam), lo_end, hi_end,
                  xtol=ROOT_XTOL * (hi - lo), rtol=ROOT_RTOL, maxiter=500)
    # lambda = 0 is feasible, so the optimum is never below 0
    return HindsightResult(float(root), Location.INTERIOR, max(0.0, _weighted_objective(d, w, root)))


def best_lambda(path: PathState, comparator: Optional[Interval] = None) -> HindsightResult:
    points, counts = path.support()
    result = solve_weighted(points, counts, path.market, comparator)
    logger.debug(f"Hindsight optimum at n={path.n}: lambda*={result.lambda_star:.6g} ({result.location.value}), lnW*={result.log_wstar:.6g}")
    return result


def klinf(points, weights, m0: float) -> float:
    """
    KL_inf(Q, m0) through its dual: max over the bet interval of E_Q ln(1 - lam (X - m0)).

    Args:
        points: Support points of Q in [0, 1].
        weights: Nonnegative probabilities summing to 1.
        m0 (float): The null mean.
    """
    cfg = make_market(m0)
    points = np.asarray(points, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if points.shape != weights.shape:
        raise DomainError("points and weights must have the same shape")
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-9:
        raise DomainError(f"weights must be nonnegative and sum to 1, got sum {weights.sum()}")
    if np.any((points < 0) | (points > 1)):
        raise DomainError("support points must lie in [0, 1]")
    return solve_weighted(points, weights, cfg).log_wstar


def wstar_lower_bound(S: float, V: float) -> float:
    """S^2 / ((4/3)|S| + 2V), a lower bound on ln W*_n; 0 on the empty path."""
    if V < 0:
        raise DomainError(f"V must be nonnegative, got {V}")
    if S == 0.0:
        return 0.0
    if V == 0.0:
        raise DomainError("V = 0 forces S = 0")
    return S * S / (4.0 / 3.0 * abs(S) + 2.0 * V)


def alpha_beta(lambda_star: float, cfg: MarketConfig) -> Optional[Tuple[float, float]]:
    """(alpha_n, beta_n): the bet-side scale and its complement, following the sign of lambda*."""
    if lambda_star > 0:
        return 1.0 - cfg.m0, cfg.m0
    if lambda_star < 0:
        return cfg.m0, 1.0 - cfg.m0
    return None


# --- Envelope checks: each returns a slack (>= 0 when the envelope holds) or None ---

def sign_check(result: HindsightResult, S: float) -> Optional[float]:
    """lambda* and S_n have opposite signs."""
    if result.location == Location.DEGENERATE or S == 0.0:
        return None
    return -result.lambda_star * S


def sandwich_check(result: HindsightResult, S: float, V: float, cfg: MarketConfig) -> Optional[float]:
    """Interior optima: (|S|/V)(1-a|l|)^2 <= |l| <= (|S|/V)(1+b|l|)^2 and |l| >= |S|/(V + 2a|S|)."""
    if result.location != Location.INTERIOR or S == 0.0 or V == 0.0:
        return None
    ab = alpha_beta(result.lambda_star, cfg)
    if ab is None:
        return None
    a, b = ab
    mag = abs(result.lambda_star)
    ratio = abs(S) / V
    return min(
        mag - ratio * (1.0 - a * mag) ** 2,
        ratio * (1.0 + b * mag) ** 2 - mag,
        mag - abs(S) / (V + 2.0 * a * abs(S)),
    )


def boundary_envelope_check(result: HindsightResult, S: float, V: float, cfg: MarketConfig) -> Optional[float]:
    """Boundary optima: V/|S| <= |lambda*| <= max(1/m0, 1/(1-m0))."""
    if not result.location.is_boundary or S == 0.0:
        return None
    mag = abs(result.lambda_star)
    return min(mag - V / abs(S), max(1.0 / cfg.m0, 1.0 / (1.0 - cfg.m0)) - mag)


def medium_drift_envelope_check(result: HindsightResult, S: float, V: float, cfg: MarketConfig) -> Optional[float]:
    """When sqrt(2V) <= |S| <= (beta_l/5)V: |lambda*| <= |S|/V + 5 beta_n (|S|/V)^2."""
    if V == 0.0 or not (math.sqrt(2.0 * V) <= abs(S) <= cfg.beta_l / 5.0 * V):
        return None
    ab = alpha_beta(result.lambda_star, cfg)
    if ab is None:
        return None
    ratio = abs(S) / V
    return ratio + 5.0 * ab[1] * ratio ** 2 - abs(result.lambda_star)


def wstar_lower_bound_check(result: HindsightResult, S: float, V: float) -> Optional[float]:
    if result.location == Location.DEGENERATE:
        return None
    return result.log_wstar - wstar_lower_bound(S, V)
