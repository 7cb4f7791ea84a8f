import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def random_spd(rng: np.random.Generator, d: int, lo: float = 0.2, hi: float = 3.0) -> np.ndarray:
    """Random SPD matrix with eigenvalues in [lo, hi]."""
    q, _ = np.linalg.qr(rng.normal(size=(d, d)))
    m = q @ np.diag(rng.uniform(lo, hi, size=d)) @ q.T
    return 0.5 * (m + m.T)


@pytest.fixture
def rng():
    return np.random.default_rng(20260416)
