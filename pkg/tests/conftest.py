import numpy as np
import pytest

from csfkit.data import Dataset, Item


def table_items(n: int) -> Dataset:
    """Items 0..n-1 with empty payloads, for table-oracle tests."""
    return Dataset(tuple(Item(str(i), b"") for i in range(n)))


@pytest.fixture
def force_numpy(monkeypatch):
    """Route all dual-path kernels through the pure-numpy fallback."""
    monkeypatch.setenv("CSFKIT_NO_NUMBA", "1")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
