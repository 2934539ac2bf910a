import numpy as np
import pytest

from penskew import DirectParams, sample


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)


def sn_sample(alpha, n, seed, xi=0.0, omega=1.0):
    """Shortcut: a univariate skew-normal sample as a Dataset."""
    return sample(DirectParams.scalar(xi, omega, alpha), n, seed)


def seeded(base, *key):
    return np.random.SeedSequence(base, spawn_key=tuple(int(k) for k in key))
