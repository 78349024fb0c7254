"""Lossless compressors and the normalized compression distance.

NCD(x, y) = (Z(xy) - min(Z(x), Z(y))) / max(Z(x), Z(y)).

Concatenation order is canonicalized (lexicographically smaller payload
first), which makes ncd() exactly symmetric while costing a single
concatenation compression per unordered pair.  A full matrix therefore
performs exactly n singleton + n*(n-1)/2 pair compressions; the diagonal
is reported as zero.
"""

from __future__ import annotations

import bz2
import lzma
import os
import zlib
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .data import Dataset, Item
from .errors import CompressionError, DomainError, NumericError

DEFAULT_BACKEND = "zlib"
ENV_COMPRESSOR = "CSFKIT_COMPRESSOR"


@dataclass(frozen=True)
class Compressor:
    """A named, pure byte-string -> compressed-size function."""

    name: str
    fn: Callable[[bytes], int]

    def size(self, data: bytes) -> int:
        try:
            out = self.fn(data)
        except Exception as exc:  # backend blew up; surface uniformly
            raise CompressionError(f"{self.name} failed on {len(data)} bytes: {exc}") from exc
        if not isinstance(out, int) or out < 0:
            raise CompressionError(f"{self.name} returned invalid size {out!r}")
        return out


_BACKENDS: dict[str, Callable[[bytes], int]] = {
    "zlib": lambda d: len(zlib.compress(d, 9)),
    "lzma": lambda d: len(lzma.compress(d, preset=9)),
    "bz2": lambda d: len(bz2.compress(d, 9)),
    # identity-length "compressor"; handy as a predictable test backend
    "store": len,
}


def get_compressor(name: str) -> Compressor:
    try:
        return Compressor(name, _BACKENDS[name])
    except KeyError:
        raise DomainError(
            f"unknown compressor {name!r}; choose from {sorted(_BACKENDS)}"
        ) from None


def default_compressor() -> Compressor:
    """The default backend, overridable via the CSFKIT_COMPRESSOR env var."""
    return get_compressor(os.environ.get(ENV_COMPRESSOR) or DEFAULT_BACKEND)


def z_len(compressor: Compressor, x: Item | bytes) -> int:
    """Compressed length in bytes of one item's payload."""
    data = x.data if isinstance(x, Item) else x
    return compressor.size(data)


def _ncd_from_sizes(z_pair: int, zx: int, zy: int) -> float:
    hi = max(zx, zy)
    if hi == 0:
        raise NumericError("NCD undefined: both inputs compress to zero bytes")
    # real-world compressors can make the numerator epsilon-negative
    return max(0.0, (z_pair - min(zx, zy)) / hi)


def ncd(compressor: Compressor, x: Item | bytes, y: Item | bytes) -> float:
    """Symmetric NCD between two byte strings (canonical concatenation order)."""
    a = x.data if isinstance(x, Item) else x
    b = y.data if isinstance(y, Item) else y
    lo, hi_ = (a, b) if a <= b else (b, a)
    return _ncd_from_sizes(
        compressor.size(lo + hi_), compressor.size(a), compressor.size(b)
    )


@dataclass(frozen=True, eq=False)
class NcdMatrix:
    """Pairwise NCD matrix over a dataset, with per-item compressed sizes."""

    compressor: str
    entries: np.ndarray = field(repr=False)
    item_sizes: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        arr = np.asarray(self.entries, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DomainError(f"NCD matrix must be square, got {arr.shape}")
        if not np.array_equal(arr, arr.T):
            raise DomainError("NCD matrix must be exactly symmetric")
        if arr.size and (arr.min() < 0.0 or arr.max() > 1.1):
            raise DomainError(
                f"NCD entries outside [0, 1.1]: min {arr.min()}, max {arr.max()}"
            )
        object.__setattr__(self, "entries", arr)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def to_csv_text(self) -> str:
        lines = [
            ",".join(f"{v:.9g}" for v in row) for row in self.entries
        ]
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "compressor": self.compressor,
            "entries": [[float(f"{v:.9g}") for v in row] for row in self.entries],
        }


def ncd_matrix(compressor: Compressor, dataset: Dataset | Sequence[Item]) -> NcdMatrix:
    """Compute all pairwise NCDs.

    Per-item compressed sizes are computed once and cached, so the total
    compressor call count is exactly n + n*(n-1)/2.
    """
    items = list(dataset)
    n = len(items)
    z = [compressor.size(it.data) for it in items]
    entries = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            a, b = items[i].data, items[j].data
            lo, hi_ = (a, b) if a <= b else (b, a)
            entries[i, j] = entries[j, i] = _ncd_from_sizes(
                compressor.size(lo + hi_), z[i], z[j]
            )
    return NcdMatrix(compressor=compressor.name, entries=entries, item_sizes=tuple(z))
