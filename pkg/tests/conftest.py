import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from uflab import LatticeSpec, build_lattice

# jit compilation makes first calls slow; deadlines would be noise
settings.register_profile("uflab", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("uflab")


@pytest.fixture(scope="session")
def lattices():
    cache = {}

    def get(kind, d, rounds=1):
        key = (kind, d, rounds)
        if key not in cache:
            cache[key] = build_lattice(LatticeSpec(kind, d, rounds))
        return cache[key]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
