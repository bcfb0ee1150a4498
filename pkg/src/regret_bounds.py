import logging
import math
from typing import Optional

from .core import DomainError
from .hindsight import alpha_beta
from .models import Branch, Location, MarketConfig, PriorKind, PriorSpec, RegretReport
from .priors import LN_66E, LNLN_66E, LNLNLN_66E, density, make_prior

logger = logging.getLogger('VilleBet')

E = math.e


def _lnln(z: float) -> float:
    return math.log(math.log(z))


def _lnlnln(z: float) -> float:
    return math.log(math.log(math.log(z)))


def regret(log_wstar: float, log_mixture: float) -> float:
    """R_n = ln W*_n - ln W_n; +inf when the mixture is fully bust."""
    if not math.isfinite(log_wstar):
        raise DomainError(f"log_wstar must be finite, got {log_wstar}")
    return log_wstar - log_mixture


def classify(S: float, V: float, location: Location, cfg: MarketConfig,
             medium_ratio: Optional[float] = None) -> Branch:
    """
    Drift regime of (S, V, lambda* location).

    SmallDrift: |S| < sqrt(2V), split on interior vs boundary lambda*. MediumDrift:
    sqrt(2V) <= |S| <= medium_ratio * V. LargeDrift: the rest. medium_ratio defaults to beta_l/5.
    """
    if V == 0.0:
        return Branch.DEGENERATE
    ratio = cfg.beta_l / 5.0 if medium_ratio is None else medium_ratio
    if abs(S) < math.sqrt(2.0 * V):
        if location.is_boundary:
            return Branch.SMALL_DRIFT_BOUNDARY
        return Branch.SMALL_DRIFT_INTERIOR
    if abs(S) <= ratio * V:
        return Branch.MEDIUM_DRIFT
    return Branch.LARGE_DRIFT


def classify_restricted(S: float, V: float, location: Location, cfg: MarketConfig) -> Branch:
    """Classifier for the [-1, 1] comparator: MediumDrift up to |S| <= V/5, boundary at |lambda*| = 1."""
    return classify(S, V, location, cfg, medium_ratio=0.2)


def uniform_bound(n: int) -> float:
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    return math.log1p(n) + 1.0


def robbins_bound(branch: Branch, S: float, V: float, log_wstar: float, cfg: MarketConfig) -> Optional[float]:
    """
    Path-wise regret bound of the Robbins mixture for the given branch.

    Returns:
        Optional[float]: The bound, or None for the Degenerate branch.
    """
    bl, bu = cfg.beta_l, cfg.beta_u
    if branch == Branch.SMALL_DRIFT_INTERIOR:
        z = 14.0 * E * bu / bl * math.sqrt(1.0 + V)
        return 2.0 / bl ** 2 + 1.0 + math.log(8.0 / LNLN_66E) + _lnln(z) + 2.0 * _lnlnln(z)
    if branch == Branch.SMALL_DRIFT_BOUNDARY:
        return 1.0 / bl ** 2 - math.log(LNLN_66E / (4.0 * LN_66E * LNLN_66E ** 2))
    if branch == Branch.MEDIUM_DRIFT:
        z = 14.0 * E / bl * (1.0 + math.sqrt(V))
        drift = 20.0 * abs(S) / (3.0 * math.sqrt(4.0 / 3.0 * abs(S) + 2.0 * V))
        return 1.0 + math.log(4.0 / LNLN_66E) + _lnln(z) + math.log(drift) + 2.0 * _lnlnln(z)
    if branch == Branch.LARGE_DRIFT:
        return 0.5 * log_wstar + math.log(4.0) + LNLN_66E + LNLNLN_66E + math.log(2.0 * bu + 5.0 / bl)
    logger.debug("Robbins bound not applicable on a degenerate path")
    return None


def robbins_conditional_bound(branch: Branch, S: float, V: float, alpha: float, cfg: MarketConfig) -> Optional[float]:
    """
    Regret bound of the Robbins mixture on paths whose wealth stayed at most 1/alpha.

    Only defined for the MediumDrift and LargeDrift branches; alpha_n is replaced by its
    worst case beta_l.
    """
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie strictly inside (0, 1), got {alpha}")
    bl, bu = cfg.beta_l, cfg.beta_u
    if branch == Branch.MEDIUM_DRIFT:
        z = 14.0 * E / bl * (1.0 + math.sqrt(V))
        return (math.log(1.0 / alpha) / 3.0 + 4.0 / 3.0 + 4.0 / 3.0 * math.log(20.0 / 3.0)
                + 4.0 / 3.0 * math.log(4.0 / LNLN_66E) + 4.0 / 3.0 * _lnln(z) + 8.0 / 3.0 * _lnlnln(z))
    if branch == Branch.LARGE_DRIFT:
        return math.log(1.0 / alpha) + 2.0 * (math.log(4.0) + LNLN_66E + LNLNLN_66E + math.log(2.0 * bu + 5.0 / bl))
    return None


def lemma_a1_bound(log_wstar: float, lambda_star: float, prior: PriorSpec, cfg: MarketConfig) -> Optional[float]:
    """(1/2) ln W* - ln(pi(lambda*) |lambda*|); None when lambda* = 0."""
    if lambda_star == 0.0:
        return None
    dens = density(prior, lambda_star, cfg)
    if dens <= 0.0:
        return None
    return 0.5 * log_wstar - math.log(dens * abs(lambda_star))


def lemma_a2_radius(lambda_star: float, V: float, cfg: MarketConfig) -> Optional[float]:
    ab = alpha_beta(lambda_star, cfg)
    if ab is None:
        return None
    return min(abs(lambda_star), (1.0 - ab[0] * abs(lambda_star)) / math.sqrt(1.0 + V))


def lemma_a2_bound(lambda_star: float, location: Location, V: float, prior: PriorSpec,
                   cfg: MarketConfig) -> Optional[float]:
    """
    rho^2 V / (2 (1 - a|l|)^2) - ln(min(rho, |l|) pi(l)) with rho = min(|l|, (1 - a|l|)/sqrt(1+V)).

    Only for interior lambda* != 0.
    """
    if location != Location.INTERIOR or lambda_star == 0.0:
        return None
    a = alpha_beta(lambda_star, cfg)[0]
    rho = lemma_a2_radius(lambda_star, V, cfg)
    shrink = 1.0 - a * abs(lambda_star)
    if shrink <= 0.0 or rho <= 0.0:
        return None
    dens = density(prior, lambda_star, cfg)
    if dens <= 0.0:
        return None
    return rho ** 2 * V / (2.0 * shrink ** 2) - math.log(min(rho, abs(lambda_star)) * dens)


def path_wealth_lower_bound(log_wstar: float, lambda_star: float, location: Location, V: float,
                            prior: PriorSpec, cfg: MarketConfig) -> Optional[float]:
    """Lower bound on ln W_n obtained by integrating the mixture only near lambda*."""
    bound = lemma_a2_bound(lambda_star, location, V, prior, cfg)
    return None if bound is None else log_wstar - bound


def oj_density_at_one(cfg: MarketConfig) -> float:
    return density(make_prior(PriorKind.ORABONA_JUN, cfg), 1.0, cfg)


def oj_bound(branch: Branch, S: float, V: float, log_wstar_restricted: float, cfg: MarketConfig) -> Optional[float]:
    """
    Path-wise regret bound of the OJ mixture against the best bet in [-1, 1].

    The branch must come from classify_restricted.
    """
    pi_one = oj_density_at_one(cfg)
    if branch == Branch.SMALL_DRIFT_INTERIOR:
        z = 14.0 * E * math.sqrt(1.0 + V)
        return 6.0 + math.log(2.0 / LNLN_66E) + _lnln(z) + 2.0 * _lnlnln(z)
    if branch == Branch.SMALL_DRIFT_BOUNDARY:
        return 2.0 + math.log(1.0 / pi_one)
    if branch == Branch.MEDIUM_DRIFT:
        z = 14.0 * E * (1.0 + math.sqrt(V))
        return (math.log(20.0 * math.sqrt(E) / 3.0) + math.log(2.0 / LNLN_66E) + _lnln(z)
                + math.log(abs(S) / math.sqrt(4.0 / 3.0 * abs(S) + 2.0 * V)) + 2.0 * _lnlnln(z))
    if branch == Branch.LARGE_DRIFT:
        return 0.5 * log_wstar_restricted - math.log(pi_one / 7.0)
    logger.debug("OJ bound not applicable on a degenerate path")
    return None


def aggregate_bound(r1: float, r2: float, s0: float) -> float:
    if not (0.0 < s0 < 1.0):
        raise DomainError(f"s0 must lie strictly inside (0, 1), got {s0}")
    return min(r1, r2) + math.log(1.0 / min(s0, 1.0 - s0))


def build_report(n: int, S: float, V: float, branch: Branch, regret_value: float,
                 bound: Optional[float], conditional_bound: Optional[float] = None,
                 quad_slack: float = 0.0) -> RegretReport:
    slack = None if bound is None else bound - regret_value
    return RegretReport(n=n, s=S, v=V, branch=branch, regret=regret_value, bound=bound,
                        slack=slack, conditional_bound=conditional_bound, quad_slack=quad_slack)
