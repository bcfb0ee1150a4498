from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, List, Dict, Any

import numpy as np

# Define types for clarity
LogWealth = float # Extended real: -inf means the wealth is exactly zero (bust)
Interval = tuple # (lo, hi) comparator interval for the hindsight bet


class PriorKind(str, Enum):
    UNIFORM = "uniform"
    ROBBINS = "robbins"
    ORABONA_JUN = "oj"


class Location(str, Enum):
    """Where the hindsight-optimal bet sits inside its comparator interval."""
    INTERIOR = "Interior"
    LOWER_BOUNDARY = "LowerBoundary"
    UPPER_BOUNDARY = "UpperBoundary"
    DEGENERATE = "Degenerate"

    @property
    def is_boundary(self) -> bool:
        return self in (Location.LOWER_BOUNDARY, Location.UPPER_BOUNDARY)


class Branch(str, Enum):
    """Drift regime of a path, selecting which closed-form regret bound applies."""
    SMALL_DRIFT_INTERIOR = "SmallDriftInterior"
    SMALL_DRIFT_BOUNDARY = "SmallDriftBoundary"
    MEDIUM_DRIFT = "MediumDrift"
    LARGE_DRIFT = "LargeDrift"
    DEGENERATE = "Degenerate"


class StreamKind(str, Enum):
    BERNOULLI = "bernoulli"
    SCALED_BETA = "beta"
    DISCRETE = "discrete"
    POINT_MASS = "pointmass"
    CONSTANT = "constant"
    CYCLE = "cycle"
    NSM_ADVERSARY = "nsm-adv"


@dataclass(frozen=True)
class MarketConfig:
    """The null mean m0 and everything derived from it. Build with core.make_market."""
    m0: float
    lambda_min: float # -1/m0
    lambda_max: float # 1/(1-m0)
    beta_l: float # min(m0, 1-m0)
    beta_u: float # max(m0, 1-m0)


@dataclass(frozen=True)
class PriorSpec:
    kind: PriorKind
    support_lo: float
    support_hi: float


@dataclass(frozen=True, eq=False)
class NodeSet:
    """Quadrature nodes of a prior, sorted by lambda ascending."""
    lambdas: np.ndarray
    log_weights: np.ndarray
    side_count: int # K requested per sign side, before boundary grading

    def __len__(self):
        return len(self.lambdas)


@dataclass(frozen=True)
class HindsightResult:
    lambda_star: float
    location: Location
    log_wstar: float


@dataclass(frozen=True)
class VilleState:
    inside: bool
    sup_log_wealth: LogWealth


@dataclass
class RegretReport:
    """Regret of one mixture at time n against the bound that applies to its branch."""
    n: int
    s: float
    v: float
    branch: Branch
    regret: float
    bound: Optional[float] = None # None when the bound is not applicable
    slack: Optional[float] = None # bound - regret
    conditional_bound: Optional[float] = None
    quad_slack: float = 0.0 # eps_quad certificate of the run


@dataclass(frozen=True)
class StreamSpec:
    kind: StreamKind
    params: Dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    horizon: int = 1000


@dataclass
class Violation:
    """A single failed path-wise assertion; reported, never raised."""
    check: str
    n: int
    value: float
    limit: float
    slack: float
    replication: int = 0
    detail: str = ""


@dataclass
class ExperimentConfig:
    market: MarketConfig
    stream: StreamSpec
    priors: List[PriorKind] = field(default_factory=lambda: list(PriorKind))
    s0: float = 0.5
    alpha: float = 0.05
    nodes_per_side: int = 2048
    replications: int = 1
    checkpoints: Optional[List[int]] = None # None -> geometric 1, 2, 4, ..., horizon
    certify: bool = True # run 2K shadow engines to measure eps_quad
    tolerance: float = 1e-8
    workers: int = 1
    gl_order: int = 16
    grading_levels: int = 24
    max_quadrature_gap: float = 1e-6 # eps_quad above this is reported as a violation
    corpus_size: Optional[int] = None # check_bounds: fill the stream corpus with seeded random laws up to this size
