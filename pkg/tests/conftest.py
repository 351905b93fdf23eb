import math

import numpy as np
import pytest
from hypothesis import settings

from switchgrowth.core import SystemParams

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


def random_params(rng: np.random.Generator, lam_max: float = 0.9, offset: float = 2.0) -> SystemParams:
    """Draw |lambda| <= lam_max, theta uniform, offsets in [-offset, offset]^2."""
    lam = rng.uniform(-lam_max, lam_max)
    theta = rng.uniform(1e-3, 2 * math.pi - 1e-3)
    u0 = rng.uniform(-offset, offset, 2)
    u1 = rng.uniform(-offset, offset, 2)
    return SystemParams.from_offsets(lam, theta, u0, u1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def pi_params():
    """theta = pi, lambda = 0, A0 offset (0, 1), A1 offset (1, 0)."""
    return SystemParams.from_rational(0.0, 1, 1, a=0.0, b=1.0, r=1.0, phi=0.0)


@pytest.fixture
def stable_params():
    """theta = 2pi/3, lambda = 0, A0 offset zero, A1 offset (1, 0)."""
    return SystemParams.from_rational(0.0, 2, 3, a=0.0, b=0.0, r=1.0, phi=0.0)
