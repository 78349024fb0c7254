import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csfkit.compression import (
    Compressor,
    NcdMatrix,
    default_compressor,
    get_compressor,
    ncd,
    ncd_matrix,
    z_len,
)
from csfkit.data import Dataset
from csfkit.errors import CompressionError, DomainError, NumericError


def counting(backend="zlib"):
    inner = get_compressor(backend)
    calls = []
    return Compressor(backend, lambda d: (calls.append(1), inner.fn(d))[1]), calls


def test_known_backends_resolve():
    for name in ("zlib", "lzma", "bz2", "store"):
        assert get_compressor(name).name == name
    with pytest.raises(DomainError):
        get_compressor("nope")


def test_default_backend_env_override(monkeypatch):
    monkeypatch.delenv("CSFKIT_COMPRESSOR", raising=False)
    assert default_compressor().name == "zlib"
    monkeypatch.setenv("CSFKIT_COMPRESSOR", "store")
    assert default_compressor().name == "store"


def test_store_backend_arithmetic():
    store = get_compressor("store")
    assert z_len(store, b"abcd") == 4
    # identity sizes: (|x|+|y| - min)/max == 1 for any nonempty pair
    assert ncd(store, b"ab", b"wxyz") == 1.0
    with pytest.raises(NumericError):
        ncd(store, b"", b"")


def test_compressor_failure_is_wrapped():
    broken = Compressor("broken", lambda d: 1 / 0)
    with pytest.raises(CompressionError):
        broken.size(b"x")
    lies = Compressor("lies", lambda d: -3)
    with pytest.raises(CompressionError):
        lies.size(b"x")


@settings(max_examples=120, deadline=None)
@given(st.binary(max_size=40), st.binary(max_size=40))
def test_ncd_exactly_symmetric(x, y):
    if not x and not y:
        return
    comp = get_compressor("zlib")
    assert ncd(comp, x, y) == ncd(comp, y, x)
    assert ncd(comp, x, y) >= 0.0


def test_ncd_matrix_call_count_and_symmetry(rng):
    blobs = [rng.bytes(64) for _ in range(7)]
    comp, calls = counting()
    m = ncd_matrix(comp, Dataset.of(blobs))
    n = 7
    assert len(calls) == n + n * (n - 1) // 2
    assert np.array_equal(m.entries, m.entries.T)
    assert np.all(np.diag(m.entries) == 0.0)
    assert m.item_sizes == tuple(get_compressor("zlib").size(b) for b in blobs)


def test_ncd_matrix_empty_and_serialization():
    m = ncd_matrix(get_compressor("zlib"), Dataset.of([b"aaaa", b"abab"]))
    text = m.to_csv_text()
    assert len(text.splitlines()) == 2
    doc = m.to_json_dict()
    assert doc["n"] == 2 and doc["compressor"] == "zlib"


def test_ncd_matrix_validation():
    with pytest.raises(DomainError):
        NcdMatrix(compressor="x", entries=np.zeros((2, 3)))
    with pytest.raises(DomainError):
        NcdMatrix(compressor="x", entries=np.array([[0.0, 0.1], [0.2, 0.0]]))
    with pytest.raises(DomainError):
        NcdMatrix(compressor="x", entries=np.array([[0.0, 2.0], [2.0, 0.0]]))


def test_self_distance_small_on_compressible_data(rng):
    comp = get_compressor("zlib")
    x = rng.bytes(256)
    assert ncd(comp, x, x) <= 0.2
