"""Optimality deficiency of an item within a multiset.

delta(A, x) estimates K(A) + log2|A| - K(x): how far x is from being a
"typical" member of A.  Singletons and empty sets get deficiency 0 by
convention.  Three interchangeable complexity backends are provided:

* TableOracle      -- explicit per-item (and optional per-set) values;
* CompressorOracle -- compressed sizes stand in for complexities;
* CentroidOracle   -- for point data, K(A)-K(x) is approximated by the
                      Euclidean distance from x to the centroid of A.

Deviation statistics here use the scale sqrt(sum((v-mean)^2)) / n --
deliberately 1/sqrt(n) tighter than the usual population std; the
trimming rule and curve statistics elsewhere inherit this convention.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .compression import Compressor
from .data import Dataset, Item, PointSet, encode_multiset
from .errors import DomainError, OracleError


class ComplexityOracle:
    """Interface: complexity_gap(A, x) ~ K(A) - K(x) for x in multiset A."""

    #: when False, delta() omits the log2|A| term (replication escape hatch)
    include_log_term: bool = True

    def complexity_gap(self, A: Sequence[Item], x: Item) -> float:
        raise NotImplementedError


def _set_key(A: Sequence[Item]) -> str:
    return ",".join(sorted(it.id for it in A))


class TableOracle(ComplexityOracle):
    """Complexities looked up from explicit tables.

    Item values are required (missing id -> OracleError).  Set values may
    be given under comma-joined sorted-id keys; absent keys fall back to
    the maximum member complexity, which keeps deficiencies well behaved
    for arbitrary random tables.
    """

    def __init__(self, item_k: dict[str, float], set_k: dict[str, float] | None = None):
        for key, v in item_k.items():
            if v < 0:
                raise DomainError(f"item complexity for {key!r} must be >= 0, got {v}")
        if set_k:
            for key, v in set_k.items():
                if v < 0:
                    raise DomainError(f"set complexity for {key!r} must be >= 0, got {v}")
        self.item_k = dict(item_k)
        self.set_k = dict(set_k) if set_k else {}

    @classmethod
    def from_json(cls, path) -> "TableOracle":
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        if "items" not in doc:
            raise DomainError("table oracle JSON needs an 'items' mapping")
        return cls({str(k): float(v) for k, v in doc["items"].items()},
                   {str(k): float(v) for k, v in doc.get("sets", {}).items()})

    def item_complexity(self, x: Item) -> float:
        try:
            return self.item_k[x.id]
        except KeyError:
            raise OracleError(f"no complexity for item {x.id!r}") from None

    def set_complexity(self, A: Sequence[Item]) -> float:
        key = _set_key(A)
        if key in self.set_k:
            return self.set_k[key]
        return max(self.item_complexity(x) for x in A)

    def complexity_gap(self, A: Sequence[Item], x: Item) -> float:
        return self.set_complexity(A) - self.item_complexity(x)


class CompressorOracle(ComplexityOracle):
    """Compressed sizes as complexity proxies.

    Sizes are converted to bits (x8) before mixing with the log2|A| term;
    pass units="bytes" to reproduce raw byte-unit runs.  Set encodings are
    cached by member ids, so repeated statistics over the same part do not
    recompress.
    """

    def __init__(self, compressor: Compressor, mode: str = "concat", units: str = "bits"):
        if units not in ("bits", "bytes"):
            raise DomainError(f"units must be 'bits' or 'bytes', got {units!r}")
        self.compressor = compressor
        self.mode = mode
        self.units = units
        self._scale = 8.0 if units == "bits" else 1.0
        self._set_cache: dict[tuple[str, ...], int] = {}
        self._item_cache: dict[str, int] = {}

    def item_complexity(self, x: Item) -> float:
        if x.id not in self._item_cache:
            self._item_cache[x.id] = self.compressor.size(x.data)
        return self._scale * self._item_cache[x.id]

    def set_complexity(self, A: Sequence[Item]) -> float:
        key = tuple(sorted(it.id for it in A))
        if key not in self._set_cache:
            self._set_cache[key] = self.compressor.size(encode_multiset(A, self.mode))
        return self._scale * self._set_cache[key]

    def complexity_gap(self, A: Sequence[Item], x: Item) -> float:
        return self.set_complexity(A) - self.item_complexity(x)


def index_items(points: PointSet) -> Dataset:
    """Items whose ids are row indices of a point set (for CentroidOracle)."""
    return Dataset(tuple(Item(str(i), b"") for i in range(points.n)))


class CentroidOracle(ComplexityOracle):
    """Geometric stand-in for point data: gap(A, x) = ||p_x - centroid(A)||.

    Items must carry integer ids indexing rows of the point set (see
    index_items).  The log2|A| term can be dropped via include_log_term.
    """

    def __init__(self, points: PointSet, include_log_term: bool = True):
        self.points = points
        self.include_log_term = include_log_term

    def _row(self, x: Item) -> int:
        try:
            i = int(x.id)
        except ValueError:
            raise DomainError(f"centroid oracle needs integer item ids, got {x.id!r}") from None
        if not (0 <= i < self.points.n):
            raise DomainError(f"item id {i} outside point set of size {self.points.n}")
        return i

    def complexity_gap(self, A: Sequence[Item], x: Item) -> float:
        rows = [self._row(it) for it in A]
        centroid = self.points.points[rows].mean(axis=0)
        return float(np.linalg.norm(self.points.points[self._row(x)] - centroid))


def delta(oracle: ComplexityOracle, A: Sequence[Item], x: Item) -> float:
    """Optimality deficiency of x within A; 0.0 whenever |A| < 2."""
    A = list(A)
    if x not in A:
        raise DomainError(f"item {x.id!r} is not a member of the multiset")
    if len(A) < 2:
        return 0.0
    gap = oracle.complexity_gap(A, x)
    if oracle.include_log_term:
        gap += math.log2(len(A))
    return gap


@dataclass(frozen=True)
class DeficiencyStats:
    values: tuple[float, ...]
    mean: float
    std: float
    min: float
    max: float

    @property
    def bandwidth(self) -> float:
        return self.max - self.min


def deficiency_stats(oracle: ComplexityOracle, A: Sequence[Item]) -> DeficiencyStats:
    """Per-member deficiencies of A plus summary statistics."""
    A = list(A)
    if not A:
        raise DomainError("deficiency statistics need a nonempty multiset")
    vals = [delta(oracle, A, x) for x in A]
    mu = sum(vals) / len(vals)
    ss = sum((v - mu) ** 2 for v in vals)
    return DeficiencyStats(
        values=tuple(vals),
        mean=mu,
        std=math.sqrt(ss) / len(vals),
        min=min(vals),
        max=max(vals),
    )


def sigma_trim(oracle: ComplexityOracle, A: Sequence[Item]) -> tuple[Item, ...]:
    """Members whose deficiency lies within one deviation unit of the mean.

    Never returns empty: if the filter would discard everything, the
    member(s) with deficiency closest to the mean are kept instead.
    """
    A = list(A)
    stats = deficiency_stats(oracle, A)
    kept = [
        x for x, v in zip(A, stats.values) if abs(v - stats.mean) <= stats.std
    ]
    if kept:
        return tuple(kept)
    dist = [abs(v - stats.mean) for v in stats.values]
    best = min(dist)
    return tuple(x for x, d in zip(A, dist) if d == best)
