import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from athermal.channels import random_channel
from athermal.quantum import random_density, thermal_context

settings.register_profile(
    "default",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("default")

LN2 = float(np.log(2))

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=2, max_value=3)


def hermitian(rng, d, scale=1.0):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (a + a.conj().T) / 2


def random_ctx(d, seed, beta=None):
    rng = np.random.default_rng(seed)
    e = np.sort(rng.uniform(0, 2, size=d))
    return thermal_context(np.diag(e), beta if beta is not None else float(rng.uniform(0.3, 2.0)))


@pytest.fixture
def qubit_ctx():
    return thermal_context(np.diag([0.0, LN2]), 1.0)


@pytest.fixture
def flat2():
    return thermal_context(np.zeros((2, 2)), 1.0)


def pair(d, seed):
    return random_density(d, seed), random_density(d, seed + 7919)


def chan(din, dout, seed, env=None):
    return random_channel(din, dout, env, seed=seed)
