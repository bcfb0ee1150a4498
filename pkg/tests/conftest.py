import pytest

from src.core import make_market, path_from_values
from src.models import ExperimentConfig, PriorKind, StreamKind, StreamSpec


@pytest.fixture
def market():
    return make_market(0.5)

@pytest.fixture
def skewed_market():
    return make_market(0.25)

@pytest.fixture
def path_110(market):
    # S = 0.5, V = 0.75; interior optimum at -2/3
    return path_from_values(market, [1, 1, 0])

@pytest.fixture
def path_111(market):
    # S = 1.5, V = 0.75; optimum on the lower boundary
    return path_from_values(market, [1, 1, 1])

@pytest.fixture
def small_config(market):
    """A short trace run that keeps every engine cheap."""
    def _make(stream_kind=StreamKind.BERNOULLI, params=None, horizon=200, priors=None, **overrides):
        stream = StreamSpec(kind=stream_kind, params=params if params is not None else {"p": 0.5},
                            seed=7, horizon=horizon)
        values = dict(market=market, stream=stream, priors=priors if priors is not None else list(PriorKind), nodes_per_side=256)
        values.update(overrides)
        return ExperimentConfig(**values)
    return _make
