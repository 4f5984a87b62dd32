import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qpext import linalg as la

settings.register_profile("qpext", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("qpext")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_cq_blocks(rng, q, n):
    """Random trace-one PSD blocks of shape (n, q, q)."""
    bl = np.array([la.random_psd(rng, q) for _ in range(n)])
    return bl / sum(np.trace(b).real for b in bl)
