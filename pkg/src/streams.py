import logging
import math
from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy import stats
from scipy.special import logsumexp

from .config_service import ConfigValidationError
from .core import check_observation, log_payoff
from .models import MarketConfig, StreamKind, StreamSpec

logger = logging.getLogger('VilleBet')

BETA_DISCRETIZATION = 4096 # quantile cells used to stand in for a continuous Beta law


def spawn_generators(seed: int, count: int) -> List[np.random.Generator]:
    """Independent Philox generators, one per replication, split from a single SeedSequence."""
    children = np.random.SeedSequence(int(seed)).spawn(int(count))
    return [np.random.Generator(np.random.Philox(child)) for child in children]


def _require(params: Dict[str, Any], *keys: str):
    for key in keys:
        if key not in params:
            raise ConfigValidationError(f"Missing required stream parameter: {key}")


class StreamValidator:
    """Validates stream specifications against the market they will be played in."""
    @staticmethod
    def validate(spec: StreamSpec, market: MarketConfig):
        p = spec.params
        if spec.horizon < 0:
            raise ConfigValidationError(f"Horizon must be nonnegative, got {spec.horizon}")
        if spec.kind == StreamKind.BERNOULLI:
            _require(p, "p")
            if not (0.0 <= p["p"] <= 1.0):
                raise ConfigValidationError(f"Bernoulli p must lie in [0, 1], got {p['p']}")
        elif spec.kind == StreamKind.SCALED_BETA:
            _require(p, "a", "b")
            if p["a"] <= 0 or p["b"] <= 0:
                raise ConfigValidationError("Beta shape parameters must be positive")
        elif spec.kind == StreamKind.DISCRETE:
            _require(p, "points", "weights")
            points, weights = np.asarray(p["points"], float), np.asarray(p["weights"], float)
            if points.size == 0 or points.shape != weights.shape:
                raise ConfigValidationError("Discrete stream needs matching nonempty points and weights")
            if np.any((points < 0) | (points > 1)) or np.any(weights < 0) or weights.sum() <= 0:
                raise ConfigValidationError("Discrete points must lie in [0, 1] with nonnegative weights")
        elif spec.kind in (StreamKind.POINT_MASS, StreamKind.CONSTANT):
            _require(p, "x")
            if not (0.0 <= p["x"] <= 1.0):
                raise ConfigValidationError(f"Constant value must lie in [0, 1], got {p['x']}")
        elif spec.kind == StreamKind.CYCLE:
            _require(p, "values")
            values = list(p["values"])
            if not values or any(not (0.0 <= v <= 1.0) for v in values):
                raise ConfigValidationError("Cycle values must be a nonempty list in [0, 1]")
        elif spec.kind == StreamKind.NSM_ADVERSARY:
            _require(p, "delta")
            delta = p["delta"]
            l1, l2, pi = p.get("l1", 1.0), p.get("l2", -1.0), p.get("pi", 0.5)
            if not (0.0 < delta < market.beta_l):
                raise ConfigValidationError(f"Adversary delta must lie in (0, {market.beta_l}), got {delta}")
            if not (l1 > 0 > l2):
                raise ConfigValidationError(f"Adversary needs l1 > 0 > l2, got l1={l1}, l2={l2}")
            if l1 > market.lambda_max or l2 < market.lambda_min:
                raise ConfigValidationError("Adversary bets must lie inside the admissible bet interval")
            if not (0.0 < pi < 1.0):
                raise ConfigValidationError(f"Adversary mixing weight must lie in (0, 1), got {pi}")
        else:
            raise ConfigValidationError(f"Unknown stream kind: {spec.kind}")


class StreamGenerator(ABC):
    """Abstract base for data streams; one writer per generator."""
    def __init__(self, spec: StreamSpec, market: MarketConfig, rng: np.random.Generator):
        self.spec = spec
        self.market = market
        self.rng = rng
        self.n = 0

    @abstractmethod
    def next(self) -> float:
        pass

    def take(self, count: int) -> np.ndarray:
        out = np.empty(int(count))
        for i in range(out.size):
            out[i] = self.next()
        return out

    def path(self) -> np.ndarray:
        """The remaining stream up to its horizon."""
        return self.take(max(0, self.spec.horizon - self.n))


class BernoulliStream(StreamGenerator):
    def next(self) -> float:
        self.n += 1
        return float(self.rng.random() < self.spec.params["p"])

    def take(self, count: int) -> np.ndarray:
        self.n += int(count)
        return (self.rng.random(int(count)) < self.spec.params["p"]).astype(float)


class ScaledBetaStream(StreamGenerator):
    def next(self) -> float:
        self.n += 1
        return float(self.rng.beta(self.spec.params["a"], self.spec.params["b"]))

    def take(self, count: int) -> np.ndarray:
        self.n += int(count)
        return self.rng.beta(self.spec.params["a"], self.spec.params["b"], size=int(count))


class DiscreteStream(StreamGenerator):
    def __init__(self, spec: StreamSpec, market: MarketConfig, rng: np.random.Generator):
        super().__init__(spec, market, rng)
        self.points = np.asarray(spec.params["points"], dtype=float)
        weights = np.asarray(spec.params["weights"], dtype=float)
        self.cumulative = np.cumsum(weights / weights.sum())

    def _pick(self, u: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.cumulative, u, side='right')
        return self.points[np.minimum(idx, self.points.size - 1)]

    def next(self) -> float:
        return float(self.take(1)[0])

    def take(self, count: int) -> np.ndarray:
        self.n += int(count)
        return self._pick(self.rng.random(int(count)))


class ConstantStream(StreamGenerator):
    """Covers both PointMass(x) (iid law) and Constant(x) (deterministic path); no draws."""
    def next(self) -> float:
        self.n += 1
        return float(self.spec.params["x"])

    def take(self, count: int) -> np.ndarray:
        self.n += int(count)
        return np.full(int(count), float(self.spec.params["x"]))


class CycleStream(StreamGenerator):
    """Deterministic path repeating a fixed list of values."""
    def next(self) -> float:
        values = self.spec.params["values"]
        x = float(values[self.n % len(values)])
        self.n += 1
        return x


class NsmAdversaryStream(StreamGenerator):
    """
    Binary stream whose conditional mean is m0 + delta*sign(A_{n-1}), with
    A_{n-1} = pi W_{n-1}(l1) l1 + (1-pi) W_{n-1}(l2) l2.

    The tracked two-point mixture pi W(l1) + (1-pi) W(l2) is then a nonnegative
    supermartingale that loses exactly delta*|A_{n-1}| in conditional expectation each round.
    Passing a MixtureEngine switches A to sum_k w_k W(lambda_k) lambda_k over its nodes, and
    the engine becomes the tracked mixture.
    """

    def __init__(self, spec: StreamSpec, market: MarketConfig, rng: np.random.Generator, engine=None):
        super().__init__(spec, market, rng)
        p = spec.params
        self.delta = float(p["delta"])
        self.l1, self.l2 = float(p.get("l1", 1.0)), float(p.get("l2", -1.0))
        self.pi = float(p.get("pi", 0.5))
        self.engine = engine
        self.log_w1 = 0.0
        self.log_w2 = 0.0
        self.running_max_log_wealth = self.tracked_log_wealth()
        self.cumulative_decrement = 0.0
        self.last_a = 0.0
        self.last_shift = 0.0

    def tracked_log_wealth(self) -> float:
        if self.engine is not None:
            return self.engine.log_mixture_wealth()
        return float(np.logaddexp(math.log(self.pi) + self.log_w1, math.log1p(-self.pi) + self.log_w2))

    def current_a(self) -> float:
        """A_{n-1} for the round about to be played."""
        if self.engine is not None:
            log_terms = self.engine.node_log_wealth + self.engine.nodes.log_weights
            coeffs = self.engine.nodes.lambdas
        else:
            log_terms = np.array([self.log_w1, self.log_w2])
            coeffs = np.array([self.pi * self.l1, (1.0 - self.pi) * self.l2])
        with np.errstate(divide='ignore'):
            log_abs, sign = logsumexp(log_terms, b=coeffs, return_sign=True)
        if sign == 0 or not np.isfinite(log_abs):
            return 0.0
        return float(sign * math.exp(log_abs))

    def next(self) -> float:
        a = self.current_a()
        shift = self.delta * float(np.sign(a))
        decrement = self.delta * abs(a)
        self.last_a, self.last_shift = a, shift
        self.cumulative_decrement += decrement

        x = float(self.rng.random() < self.market.m0 + shift)
        if self.engine is not None:
            self.engine.step(x)
        else:
            self.log_w1 += log_payoff(self.l1, x, self.market)
            self.log_w2 += log_payoff(self.l2, x, self.market)
        self.n += 1
        current = self.tracked_log_wealth()
        if current > self.running_max_log_wealth:
            self.running_max_log_wealth = current
        return x


def adversary_decrement(adversary: NsmAdversaryStream) -> float:
    """delta * |A_{n-1}|: the conditional expected loss of the tracked mixture next round."""
    return adversary.delta * abs(adversary.current_a())


def get_stream(spec: StreamSpec, market: MarketConfig, rng: Optional[np.random.Generator] = None,
               engine=None) -> StreamGenerator:
    StreamValidator.validate(spec, market)
    if rng is None:
        rng = spawn_generators(spec.seed, 1)[0]
    if spec.kind == StreamKind.BERNOULLI:
        return BernoulliStream(spec, market, rng)
    elif spec.kind == StreamKind.SCALED_BETA:
        return ScaledBetaStream(spec, market, rng)
    elif spec.kind == StreamKind.DISCRETE:
        return DiscreteStream(spec, market, rng)
    elif spec.kind in (StreamKind.POINT_MASS, StreamKind.CONSTANT):
        return ConstantStream(spec, market, rng)
    elif spec.kind == StreamKind.CYCLE:
        return CycleStream(spec, market, rng)
    elif spec.kind == StreamKind.NSM_ADVERSARY:
        return NsmAdversaryStream(spec, market, rng, engine=engine)
    else:
        raise ConfigValidationError(f"Unknown stream kind: {spec.kind}")


def next_value(generator: StreamGenerator) -> Tuple[float, StreamGenerator]:
    x = generator.next()
    return check_observation(x), generator


# --- Parsing of "kind:key=value,key=value" stream descriptions ---

_SCALAR_PARAMS = {"delta", "l1", "l2", "pi", "p", "a", "b", "x"}


def _parse_number_list(text: str) -> List[float]:
    return [float(item) for item in text.split('/') if item.strip()]


def parse_stream(text: str, seed: int = 0, horizon: int = 1000) -> StreamSpec:
    """
    Parses a stream description such as "bernoulli:p=0.8", "beta:a=2,b=5", "pointmass:x=1",
    "nsm-adv:delta=0.1,l1=1,l2=-1,pi=0.5", "discrete:points=0/0.5/1,weights=0.2/0.3/0.5"
    or "cycle:values=1/1/0".
    """
    kind_text, _, param_text = text.strip().partition(':')
    try:
        kind = StreamKind(kind_text.strip().lower())
    except ValueError as e:
        raise ConfigValidationError(f"Unknown stream kind '{kind_text}' in '{text}'") from e
    params: Dict[str, Any] = {}
    for item in filter(None, (part.strip() for part in param_text.split(','))):
        key, sep, value = item.partition('=')
        key = key.strip().lower()
        if not sep:
            raise ConfigValidationError(f"Malformed stream parameter '{item}' in '{text}'")
        try:
            if key in ("points", "weights", "values"):
                params[key] = _parse_number_list(value)
            elif key in _SCALAR_PARAMS:
                params[key] = float(value)
            else:
                raise ConfigValidationError(f"Unknown stream parameter '{key}' in '{text}'")
        except ValueError as e:
            raise ConfigValidationError(f"Could not parse stream parameter '{item}': {e}") from e
    return StreamSpec(kind=kind, params=params, seed=int(seed), horizon=int(horizon))


# --- Known laws of iid streams ---

def stream_distribution(spec: StreamSpec) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """
    Support points and probabilities of an iid stream's law; None for non-iid streams.

    ScaledBeta is represented by the quantile midpoints of BETA_DISCRETIZATION equal-mass cells.
    """
    p = spec.params
    if spec.kind == StreamKind.BERNOULLI:
        return np.array([0.0, 1.0]), np.array([1.0 - p["p"], p["p"]])
    if spec.kind in (StreamKind.POINT_MASS, StreamKind.CONSTANT):
        return np.array([float(p["x"])]), np.array([1.0])
    if spec.kind == StreamKind.DISCRETE:
        weights = np.asarray(p["weights"], dtype=float)
        return np.asarray(p["points"], dtype=float), weights / weights.sum()
    if spec.kind == StreamKind.SCALED_BETA:
        probs = (np.arange(BETA_DISCRETIZATION) + 0.5) / BETA_DISCRETIZATION
        points = stats.beta.ppf(probs, p["a"], p["b"])
        return points, np.full(BETA_DISCRETIZATION, 1.0 / BETA_DISCRETIZATION)
    return None


def stream_moments(spec: StreamSpec) -> Optional[Tuple[float, float]]:
    """(mean, variance) of an iid stream's law; None for non-iid streams."""
    if spec.kind == StreamKind.SCALED_BETA:
        law = stats.beta(spec.params["a"], spec.params["b"])
        return float(law.mean()), float(law.var())
    dist = stream_distribution(spec)
    if dist is None:
        return None
    points, weights = dist
    mean = float(np.dot(weights, points))
    return mean, float(np.dot(weights, (points - mean) ** 2))
