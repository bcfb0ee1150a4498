import logging
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Union

import numpy as np
from scipy.special import logsumexp

from .core import DomainError, PathState, check_observation
from .models import MarketConfig, NodeSet, PriorSpec, VilleState
from .priors import build_nodes

logger = logging.getLogger('VilleBet')

DEFAULT_CHUNK = 256 # observations folded per vectorized block in step_many


def _payoff_rows(xs: np.ndarray, lambdas: np.ndarray, m0: float) -> np.ndarray:
    """Log payoffs, one row per observation and one column per node; bust entries are -inf."""
    bet = np.multiply.outer(xs - m0, lambdas)
    with np.errstate(divide='ignore', invalid='ignore'):
        rows = np.log1p(-bet)
    rows[bet >= 1.0] = -np.inf
    return rows


def _check_unit_interval(name: str, value: float) -> float:
    value = float(value)
    if not (0.0 < value < 1.0):
        raise DomainError(f"{name} must lie strictly inside (0, 1), got {value}")
    return value


class MixtureEngine:
    """
    Mixture wealth process over fixed quadrature nodes of a prior.

    Each node carries the running log-wealth of the constant bet lambda_k. The mixture is the
    log-sum-exp of node log-wealth plus node log-weight, so a fresh engine holds the prior's
    total mass. One writer at a time; independent engines share nothing.
    """

    def __init__(self, prior: PriorSpec, cfg: MarketConfig, nodes_per_side: int = 2048,
                 gl_order: int = 16, grading_levels: int = 24, nodes: Optional[NodeSet] = None,
                 chunk_size: int = DEFAULT_CHUNK):
        self.prior = prior
        self.cfg = cfg
        self.nodes = nodes if nodes is not None else build_nodes(prior, cfg, nodes_per_side, gl_order, grading_levels)
        self.chunk_size = max(1, int(chunk_size))
        self.node_log_wealth = np.zeros(len(self.nodes))
        self.n = 0
        self.initial_log_mass = self.log_mixture_wealth()
        self.running_max_log_mixture = self.initial_log_mass

    def log_mixture_wealth(self) -> float:
        with np.errstate(divide='ignore'):
            return float(logsumexp(self.node_log_wealth + self.nodes.log_weights))

    def step(self, x: float) -> 'MixtureEngine':
        """Folds one observation into every node; O(K)."""
        x = check_observation(x)
        self.node_log_wealth += _payoff_rows(np.array([x]), self.nodes.lambdas, self.cfg.m0)[0]
        self.n += 1
        current = self.log_mixture_wealth()
        if current > self.running_max_log_mixture:
            self.running_max_log_mixture = current
        return self

    def step_many(self, xs: Iterable[float]) -> np.ndarray:
        """
        Folds a batch of observations, in order, and returns the log-mixture after each one.

        Node log-wealth is accumulated with a sequential cumulative sum, the same fold order
        as repeated step calls.
        """
        arr = np.asarray(xs if isinstance(xs, np.ndarray) else list(xs), dtype=float).ravel()
        if arr.size == 0:
            return np.empty(0)
        if not np.all((arr >= 0.0) & (arr <= 1.0)):
            raise DomainError("Observations must lie in [0, 1]")
        out = np.empty(arr.size)
        for start in range(0, arr.size, self.chunk_size):
            chunk = arr[start:start + self.chunk_size]
            rows = _payoff_rows(chunk, self.nodes.lambdas, self.cfg.m0)
            rows[0] += self.node_log_wealth
            np.cumsum(rows, axis=0, out=rows)
            with np.errstate(divide='ignore'):
                out[start:start + chunk.size] = logsumexp(rows + self.nodes.log_weights, axis=1)
            self.node_log_wealth = rows[-1].copy()
        self.n += arr.size
        peak = float(out.max())
        if peak > self.running_max_log_mixture:
            self.running_max_log_mixture = peak
        return out

    def ville_state(self, alpha: float) -> VilleState:
        alpha = _check_unit_interval("alpha", alpha)
        return VilleState(
            inside=bool(self.running_max_log_mixture <= math.log(1.0 / alpha)),
            sup_log_wealth=self.running_max_log_mixture,
        )

    def copy(self) -> 'MixtureEngine':
        other = MixtureEngine.__new__(MixtureEngine)
        other.prior, other.cfg, other.nodes = self.prior, self.cfg, self.nodes
        other.chunk_size = self.chunk_size
        other.node_log_wealth = self.node_log_wealth.copy()
        other.n = self.n
        other.initial_log_mass = self.initial_log_mass
        other.running_max_log_mixture = self.running_max_log_mixture
        return other

    def __repr__(self):
        return (f"MixtureEngine(prior={self.prior.kind.value}, nodes={len(self.nodes)}, n={self.n}, "
                f"log_mixture={self.log_mixture_wealth():.6g})")


def step(engine: MixtureEngine, x: float) -> MixtureEngine:
    return engine.step(x)


def log_mixture_wealth(engine: MixtureEngine) -> float:
    return engine.log_mixture_wealth()


def ville_state(engine: MixtureEngine, alpha: float) -> VilleState:
    return engine.ville_state(alpha)


def aggregate_log_wealth(log_w1: float, log_w2: float, s0: float) -> float:
    """log(s0 exp(log_w1) + (1 - s0) exp(log_w2)), stable when either side is -inf."""
    s0 = _check_unit_interval("s0", s0)
    return float(np.logaddexp(math.log(s0) + log_w1, math.log1p(-s0) + log_w2))


@dataclass
class AggregateState:
    """Best-of-both-worlds convex combination of two mixture wealths."""
    s0: float
    log_w1: float = 0.0
    log_w2: float = 0.0

    @property
    def log_wealth(self) -> float:
        return aggregate_log_wealth(self.log_w1, self.log_w2, self.s0)


def refinement_gap(prior: PriorSpec, cfg: MarketConfig, path: Union[PathState, Iterable[float]],
                   K: int = 2048, gl_order: int = 16, grading_levels: int = 24) -> float:
    """
    |log-mixture with K nodes per side - log-mixture with 2K|, the quadrature error certificate.
    """
    values = path.values if isinstance(path, PathState) else np.asarray(list(path), dtype=float)
    if values.size == 0:
        return 0.0
    coarse = MixtureEngine(prior, cfg, K, gl_order, grading_levels)
    fine = MixtureEngine(prior, cfg, 2 * K, gl_order, grading_levels)
    coarse.step_many(values)
    fine.step_many(values)
    gap = abs(coarse.log_mixture_wealth() - fine.log_mixture_wealth())
    logger.debug(f"Refinement gap for {prior.kind.value} at n={values.size}, K={K}: {gap:.3e}")
    return gap
