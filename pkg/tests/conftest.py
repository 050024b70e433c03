import numpy as np
import pytest

from statcare import ModelSpec


@pytest.fixture
def reference_model() -> ModelSpec:
    """2-d AR(1) model used across the statistical tests."""
    return ModelSpec.var1(np.array([[0.5, 0.1], [0.1, 0.4]]), np.eye(2))


def random_spd(rng: np.random.Generator, n: int, lo: float = 0.3, hi: float = 3.0) -> np.ndarray:
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return (q * rng.uniform(lo, hi, n)) @ q.T


def random_symmetric(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    a = rng.standard_normal((n, n)) * scale
    return 0.5 * (a + a.T)
