import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from irrev.realization import StateSpaceModel, build_pair

settings.register_profile(
    "irrev",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("irrev")


@pytest.fixture
def ou_pair():
    """F = -1, G = sqrt(2), H = 1: unit-variance OU with Phi = 2/(1+lam^2)."""
    return build_pair(StateSpaceModel([[-1.0]], [[np.sqrt(2.0)]], [[1.0]]))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
