import logging
import math
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from .models import MarketConfig

logger = logging.getLogger('VilleBet')

# Relative slack allowed when checking that a bet lies inside [lambda_min, lambda_max]
LAMBDA_TOL = 1e-12


class DomainError(ValueError):
    """An input lies outside the domain an operation is defined on."""
    pass


def make_market(m0: float) -> MarketConfig:
    """
    Builds the market for null mean m0.

    Args:
        m0 (float): The null mean, strictly inside (0, 1).

    Returns:
        MarketConfig: m0 with the admissible bet interval [-1/m0, 1/(1-m0)] and beta_l, beta_u.
    """
    try:
        m0 = float(m0)
    except (TypeError, ValueError) as e:
        raise DomainError(f"m0 must be a number, got {m0!r}") from e
    if not (0.0 < m0 < 1.0):
        raise DomainError(f"m0 must lie strictly inside (0, 1), got {m0}")
    return MarketConfig(
        m0=m0,
        lambda_min=-1.0 / m0,
        lambda_max=1.0 / (1.0 - m0),
        beta_l=min(m0, 1.0 - m0),
        beta_u=max(m0, 1.0 - m0),
    )


def check_observation(x: float) -> float:
    x = float(x)
    if not (0.0 <= x <= 1.0): # Also rejects NaN
        raise DomainError(f"Observation must lie in [0, 1], got {x}")
    return x


def check_bet(lam: float, cfg: MarketConfig) -> float:
    lam = float(lam)
    if not (cfg.lambda_min * (1.0 + LAMBDA_TOL) <= lam <= cfg.lambda_max * (1.0 + LAMBDA_TOL)):
        raise DomainError(f"Bet {lam} outside [{cfg.lambda_min}, {cfg.lambda_max}] for m0={cfg.m0}")
    return lam


def log_payoff(lam: float, x: float, cfg: MarketConfig) -> float:
    """
    Log of the one-round payoff factor 1 - lam*(x - m0).

    Returns -inf exactly when the factor is zero; a bust bet stays bust.
    """
    lam = check_bet(lam, cfg)
    x = check_observation(x)
    bet = lam * (x - cfg.m0)
    if bet >= 1.0:
        return -math.inf
    return math.log1p(-bet)


def log_payoffs(lams: np.ndarray, x: float, cfg: MarketConfig) -> np.ndarray:
    """Vectorized log_payoff over an array of bets already known to be admissible."""
    bet = np.asarray(lams, dtype=float) * (x - cfg.m0)
    out = np.full(bet.shape, -np.inf)
    alive = bet < 1.0
    out[alive] = np.log1p(-bet[alive])
    return out


def _neumaier_add(total: float, comp: float, value: float) -> Tuple[float, float]:
    t = total + value
    if abs(total) >= abs(value):
        comp += (total - t) + value
    else:
        comp += (value - t) + total
    return t, comp


class PathState:
    """
    Observed stream with compensated running sums S_n = sum(x_i - m0) and V_n = sum((x_i - m0)^2).

    With keep_values=False only a value -> count histogram is kept (exact for discrete
    streams, and all that hindsight optimization needs).
    """

    def __init__(self, market: MarketConfig, keep_values: bool = True):
        self.market = market
        self.keep_values = keep_values
        self.n = 0
        self.last_x: Optional[float] = None
        self._s, self._s_comp = 0.0, 0.0
        self._v, self._v_comp = 0.0, 0.0
        self._values: List[float] = []
        self._counts: Dict[float, int] = {}

    @property
    def s(self) -> float:
        return self._s + self._s_comp

    @property
    def v(self) -> float:
        return self._v + self._v_comp

    @property
    def values(self) -> np.ndarray:
        if not self.keep_values:
            raise DomainError("PathState was built with keep_values=False; only the histogram is available")
        return np.asarray(self._values, dtype=float)

    def observe(self, x: float) -> 'PathState':
        """Appends one observation in place and returns self."""
        x = check_observation(x)
        d = x - self.market.m0
        self._s, self._s_comp = _neumaier_add(self._s, self._s_comp, d)
        self._v, self._v_comp = _neumaier_add(self._v, self._v_comp, d * d)
        self.n += 1
        self.last_x = x
        if self.keep_values:
            self._values.append(x)
        else:
            self._counts[x] = self._counts.get(x, 0) + 1
        return self

    def extend(self, xs: Iterable[float]) -> 'PathState':
        """Appends a batch of observations in place; each batch sum is exactly rounded before folding in."""
        arr = np.asarray(list(xs) if not isinstance(xs, np.ndarray) else xs, dtype=float).ravel()
        if arr.size == 0:
            return self
        if not np.all((arr >= 0.0) & (arr <= 1.0)):
            bad = arr[~((arr >= 0.0) & (arr <= 1.0))][0]
            raise DomainError(f"Observation must lie in [0, 1], got {bad}")
        d = arr - self.market.m0
        self._s, self._s_comp = _neumaier_add(self._s, self._s_comp, math.fsum(d))
        self._v, self._v_comp = _neumaier_add(self._v, self._v_comp, math.fsum(d * d))
        self.n += arr.size
        self.last_x = float(arr[-1])
        if self.keep_values:
            self._values.extend(arr.tolist())
        else:
            points, counts = np.unique(arr, return_counts=True)
            for p, c in zip(points.tolist(), counts.tolist()):
                self._counts[p] = self._counts.get(p, 0) + c
        return self

    def support(self) -> Tuple[np.ndarray, np.ndarray]:
        """Distinct observed values (ascending) and their counts."""
        if self.keep_values:
            if not self._values:
                return np.empty(0), np.empty(0)
            points, counts = np.unique(np.asarray(self._values, dtype=float), return_counts=True)
            return points, counts.astype(float)
        if not self._counts:
            return np.empty(0), np.empty(0)
        points = np.array(sorted(self._counts), dtype=float)
        counts = np.array([self._counts[p] for p in points.tolist()], dtype=float)
        return points, counts

    def recompute(self) -> Tuple[float, float]:
        """S and V recomputed from scratch (exactly rounded); used to audit the running sums."""
        points, counts = self.support()
        d = points - self.market.m0
        return math.fsum(counts * d), math.fsum(counts * d * d)

    def copy(self) -> 'PathState':
        other = PathState(self.market, keep_values=self.keep_values)
        other.n = self.n
        other.last_x = self.last_x
        other._s, other._s_comp = self._s, self._s_comp
        other._v, other._v_comp = self._v, self._v_comp
        other._values = list(self._values)
        other._counts = dict(self._counts)
        return other

    def __repr__(self):
        return f"PathState(n={self.n}, s={self.s:.6g}, v={self.v:.6g}, m0={self.market.m0})"


def observe(state: PathState, x: float) -> PathState:
    """Returns a new state with x appended; the input state is left untouched."""
    return state.copy().observe(x)


def path_from_values(market: MarketConfig, xs: Iterable[float], keep_values: bool = True) -> PathState:
    state = PathState(market, keep_values=keep_values)
    for x in xs:
        state.observe(x)
    return state
