import numpy as np
import pytest

from slidesum.operators import gamma_dtype


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_elements(rng, op, n):
    """Random inputs suited to ``op``: bounded ints, floats in [-1, 1), well-conditioned pairs."""
    if op.name == "gamma":
        out = np.empty(n, dtype=gamma_dtype(op.kind))
        out["u"] = rng.uniform(0.5, 1.5, n)
        out["v"] = rng.uniform(0.0, 1.0, n)
        return out
    if op.kind == "i64":
        return rng.integers(-(2**31), 2**31, n)
    return rng.uniform(-1, 1, n).astype(op.dtype)
