import logging
import math
from typing import Tuple, Union

import numpy as np
from scipy.special import roots_legendre

from .core import DomainError
from .models import MarketConfig, NodeSet, PriorKind, PriorSpec

logger = logging.getLogger('VilleBet')

LN_66E = math.log(6.6 * math.e) # ln(6.6e) ~ 2.88707
LNLN_66E = math.log(LN_66E) # ln ln(6.6e) ~ 1.06024
LNLNLN_66E = math.log(LNLN_66E)

# Prior constant of the heavy-near-zero densities: c / (|lam| L (ln L)^2)
_HEAVY_CONSTANT = {
    PriorKind.ROBBINS: LNLN_66E / 4.0,
    PriorKind.ORABONA_JUN: LNLN_66E / 2.0,
}

MIN_NODES_PER_SIDE = 16


def make_prior(kind: Union[PriorKind, str], cfg: MarketConfig) -> PriorSpec:
    kind = PriorKind(kind)
    if kind == PriorKind.ORABONA_JUN:
        return PriorSpec(kind=kind, support_lo=-1.0, support_hi=1.0)
    return PriorSpec(kind=kind, support_lo=cfg.lambda_min, support_hi=cfg.lambda_max)


def _scale(prior: PriorSpec, sign: float, cfg: MarketConfig) -> float:
    """Per-side scale of the heavy densities: 1-m0 above zero and m0 below it for Robbins, 1 for OJ."""
    if prior.kind == PriorKind.ROBBINS:
        return (1.0 - cfg.m0) if sign > 0 else cfg.m0
    return 1.0


def density(prior: PriorSpec, lam: float, cfg: MarketConfig) -> float:
    """
    Prior density at lam. Zero outside the support.

    Raises:
        DomainError: lam == 0 for the Robbins or OJ prior, where the density is singular.
    """
    lam = float(lam)
    if lam < prior.support_lo or lam > prior.support_hi:
        return 0.0
    if prior.kind == PriorKind.UNIFORM:
        return cfg.m0 * (1.0 - cfg.m0)
    if lam == 0.0:
        raise DomainError(f"{prior.kind.value} density is singular at lambda = 0")
    scale = _scale(prior, lam, cfg)
    big_l = math.log(6.6 * math.e / (scale * abs(lam)))
    return _HEAVY_CONSTANT[prior.kind] / (abs(lam) * big_l * math.log(big_l) ** 2)


def total_mass(prior: PriorSpec, cfg: MarketConfig) -> float:
    """Closed-form prior mass: 1 for Uniform and OJ, 1/2 for the Robbins prior."""
    if prior.kind == PriorKind.UNIFORM:
        return cfg.m0 * (1.0 - cfg.m0) * (prior.support_hi - prior.support_lo)
    # Each side integrates to c / ln ln(6.6e) through the -1/ln v antiderivative
    return 2.0 * _HEAVY_CONSTANT[prior.kind] / LNLN_66E


def to_s(prior: PriorSpec, lam: float, cfg: MarketConfig) -> float:
    """Uniformizing coordinate s = 1 / ln ln(6.6e / (scale |lam|)); s(0) = 0."""
    if lam == 0.0:
        return 0.0
    scale = _scale(prior, lam, cfg)
    return 1.0 / math.log(math.log(6.6 * math.e / (scale * abs(lam))))


def from_s(prior: PriorSpec, s: np.ndarray, sign: float, cfg: MarketConfig) -> np.ndarray:
    """Inverse of to_s on one sign side: lam(s) = sign (6.6e/scale) exp(-exp(1/s))."""
    scale = _scale(prior, sign, cfg)
    s = np.asarray(s, dtype=float)
    with np.errstate(over='ignore', under='ignore', divide='ignore'):
        mag = (6.6 * math.e / scale) * np.exp(-np.exp(1.0 / s))
    return np.sign(sign) * mag


def mass_between(prior: PriorSpec, a: float, b: float, cfg: MarketConfig) -> float:
    """Exact prior mass of [a, b] (clipped to the support)."""
    a, b = max(a, prior.support_lo), min(b, prior.support_hi)
    if b <= a:
        return 0.0
    if prior.kind == PriorKind.UNIFORM:
        return cfg.m0 * (1.0 - cfg.m0) * (b - a)
    c = _HEAVY_CONSTANT[prior.kind]
    mass = 0.0
    if b > 0.0:
        mass += c * (to_s(prior, b, cfg) - to_s(prior, max(a, 0.0), cfg))
    if a < 0.0:
        mass += c * (to_s(prior, a, cfg) - to_s(prior, min(b, 0.0), cfg))
    return mass


def _panel_edges(a: float, b: float, n_panels: int, levels: int, grade_lo: bool, grade_hi: bool) -> np.ndarray:
    """Uniform panels on [a, b]; the end panels are split geometrically (ratio 1/2) toward graded ends."""
    edges = np.linspace(a, b, n_panels + 1)
    if levels <= 0:
        return edges
    h = (b - a) / n_panels
    halvings = h * 0.5 ** np.arange(1, levels + 1)
    extra = []
    if grade_lo:
        extra.append(a + halvings)
    if grade_hi:
        extra.append(b - halvings)
    return np.unique(np.concatenate([edges] + extra))


def _gauss_legendre(edges: np.ndarray, order: int) -> Tuple[np.ndarray, np.ndarray]:
    t, w = roots_legendre(order)
    mids = 0.5 * (edges[1:] + edges[:-1])
    halfs = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mids[:, None] + halfs[:, None] * t[None, :]).ravel()
    weights = (halfs[:, None] * w[None, :]).ravel()
    return nodes, weights


def build_nodes(prior: PriorSpec, cfg: MarketConfig, K: int = 2048,
                gl_order: int = 16, grading_levels: int = 24) -> NodeSet:
    """
    Builds fixed quadrature nodes for the mixture integral of a prior.

    Composite Gauss-Legendre panels of order gl_order, K // gl_order base panels per sign
    side. Uniform is integrated in lambda; the Robbins and OJ priors are integrated in the
    coordinate s (see to_s), where they have constant density, so every side carries its
    exact mass whatever K is. Panels touching the support boundary are graded geometrically
    so wealth piling up against the boundary stays resolved at large n.

    K sizes the base panels only. Each graded end adds levels = min(grading_levels,
    base panels // 2) extra panels, so a side holds (K // gl_order + levels * graded ends)
    * gl_order nodes: with the defaults, K = 2048 gives 2432 nodes per side for Robbins
    and OJ (one graded end) and 2816 for Uniform (two).

    Args:
        prior (PriorSpec): The prior to discretize.
        cfg (MarketConfig): The market.
        K (int): Base nodes per sign side before grading, at least 16; rounded down to
            whole panels.
        gl_order (int): Gauss-Legendre points per panel.
        grading_levels (int): Maximum number of geometric halvings at a graded end.

    Returns:
        NodeSet: lambdas ascending, with log weights.
    """
    if K < MIN_NODES_PER_SIDE:
        raise DomainError(f"Need at least {MIN_NODES_PER_SIDE} nodes per side, got {K}")
    n_panels = max(1, K // gl_order)
    levels = min(grading_levels, n_panels // 2)

    lam_parts, w_parts = [], []
    if prior.kind == PriorKind.UNIFORM:
        dens = cfg.m0 * (1.0 - cfg.m0)
        for lo, hi in ((prior.support_lo, 0.0), (0.0, prior.support_hi)):
            edges = _panel_edges(lo, hi, n_panels, levels, grade_lo=True, grade_hi=True)
            nodes, weights = _gauss_legendre(edges, gl_order)
            lam_parts.append(nodes)
            w_parts.append(dens * weights)
    else:
        c = _HEAVY_CONSTANT[prior.kind]
        s_max = 1.0 / LNLN_66E
        edges = _panel_edges(0.0, s_max, n_panels, levels, grade_lo=False, grade_hi=True)
        s_nodes, s_weights = _gauss_legendre(edges, gl_order)
        for sign in (-1.0, 1.0):
            # Tiny s underflows to lambda = 0.0, where the per-node wealth is exactly 1
            lam_parts.append(from_s(prior, s_nodes, sign, cfg))
            w_parts.append(c * s_weights)

    lambdas = np.clip(np.concatenate(lam_parts), prior.support_lo, prior.support_hi)
    weights = np.concatenate(w_parts)
    order = np.argsort(lambdas, kind='stable')
    node_set = NodeSet(lambdas=lambdas[order], log_weights=np.log(weights[order]), side_count=K)
    logger.debug(f"Built {len(node_set)} nodes for {prior.kind.value} prior (K={K}, panels/side={n_panels}, grading={levels})")
    return node_set
