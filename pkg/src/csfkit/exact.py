"""Exhaustive ground-truth CSF curves for small datasets.

H(k) = min over all k-part partitions of a criterion f; partitions are
enumerated as restricted-growth strings in lexicographic order, and ties
keep the first witness in that order.  Hard cap n <= 12 (Bell(12) is
about 4.2 million partitions).

Criterion kinds
---------------
bandwidth_sum : sum over parts of (max - min) of the part's deficiencies
mean_avg      : mean over the k parts of the part's mean deficiency
sigma_max     : max over parts of the deficiency bandwidth restricted to
                the globally sigma-trimmed survivor set

The hot sweep carries a numba kernel with a batch-vectorized numpy
fallback (see _accel).  Both walk the identical enumeration order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from . import _accel
from ._accel import njit
from .data import Dataset, Item
from .deficiency import ComplexityOracle, TableOracle, deficiency_stats, delta, sigma_trim
from .errors import DomainError, SizeLimitError

MAX_N = 12
KINDS = ("bandwidth_sum", "mean_avg", "sigma_max")
_KIND_CODE = {name: i for i, name in enumerate(KINDS)}


def _check_n(n: int) -> None:
    if n < 1:
        raise DomainError("need at least one item")
    if n > MAX_N:
        raise SizeLimitError(f"exhaustive search capped at n={MAX_N}, got {n}")


def _rgs_stream(n: int) -> Iterator[np.ndarray]:
    """All restricted-growth strings of length n, lexicographically."""
    a = np.zeros(n, dtype=np.int64)
    m = np.zeros(n, dtype=np.int64)  # m[i] = max(a[:i]) for i >= 1
    while True:
        yield a
        i = n - 1
        while i > 0 and a[i] > m[i]:
            i -= 1
        if i == 0:
            return
        a[i] += 1
        for j in range(i + 1, n):
            a[j] = 0
            m[j] = max(m[j - 1], a[j - 1])


def partitions(n: int, k: int) -> Iterator[tuple[int, ...]]:
    """Stream the k-block set partitions of range(n) as canonical labels."""
    _check_n(n)
    if not (1 <= k <= n):
        raise DomainError(f"k must be in 1..{n}, got {k}")
    for a in _rgs_stream(n):
        if int(a.max()) + 1 == k:
            yield tuple(int(v) for v in a)


def criterion(
    assignment: Sequence[int],
    S: Dataset | Sequence[Item],
    oracle: ComplexityOracle,
    kind: str,
    _survivors: frozenset[str] | None = None,
) -> float:
    """Evaluate one partition (reference implementation, any oracle)."""
    if kind not in _KIND_CODE:
        raise DomainError(f"unknown criterion kind {kind!r}")
    items = list(S)
    labels = list(assignment)
    if len(labels) != len(items):
        raise DomainError("assignment length must match dataset size")
    k = max(labels) + 1
    parts: list[list[Item]] = [[] for _ in range(k)]
    for it, lab in zip(items, labels):
        parts[lab].append(it)
    if any(not p for p in parts):
        raise DomainError("assignment labels must be contiguous 0..k-1")

    if kind == "bandwidth_sum":
        return sum(deficiency_stats(oracle, p).bandwidth for p in parts)
    if kind == "mean_avg":
        return sum(deficiency_stats(oracle, p).mean for p in parts) / k
    # sigma_max: bandwidth within each part over the global survivor set
    if _survivors is None:
        _survivors = frozenset(it.id for it in sigma_trim(oracle, items))
    worst = 0.0
    for p in parts:
        kept = [x for x in p if x.id in _survivors]
        if len(kept) < 2 or len(p) < 2:
            continue
        vals = [delta(oracle, p, x) for x in kept]
        worst = max(worst, max(vals) - min(vals))
    return worst


@dataclass(frozen=True)
class ExactCsfCurve:
    """Minimum criterion value per part count, with minimizing witnesses."""

    kind: str
    values: tuple[float, ...]  # values[k-1] = H(k)
    witnesses: tuple[tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return len(self.values)


@njit(cache=True)
def _sweep_kernel(K, surv, log2tab, kind):  # pragma: no cover - numba path
    n = K.shape[0]
    best = np.full(n + 1, np.inf)
    witness = np.zeros((n + 1, n), dtype=np.int64)
    a = np.zeros(n, dtype=np.int64)
    m = np.zeros(n, dtype=np.int64)
    mn = np.empty(n, dtype=np.float64)
    mx = np.empty(n, dtype=np.float64)
    sm = np.empty(n, dtype=np.float64)
    cnt = np.empty(n, dtype=np.int64)
    scnt = np.empty(n, dtype=np.int64)
    while True:
        kmax = 0
        for i in range(n):
            if a[i] > kmax:
                kmax = a[i]
        k = kmax + 1
        for j in range(k):
            mn[j] = np.inf
            mx[j] = -np.inf
            sm[j] = 0.0
            cnt[j] = 0
            scnt[j] = 0
        for i in range(n):
            j = a[i]
            v = K[i]
            sm[j] += v
            cnt[j] += 1
            if kind == 2:
                if surv[i]:
                    if v < mn[j]:
                        mn[j] = v
                    if v > mx[j]:
                        mx[j] = v
                    scnt[j] += 1
            else:
                if v < mn[j]:
                    mn[j] = v
                if v > mx[j]:
                    mx[j] = v
        f = 0.0
        if kind == 0:
            for j in range(k):
                f += mx[j] - mn[j]
        elif kind == 1:
            for j in range(k):
                if cnt[j] >= 2:
                    f += mx[j] + log2tab[cnt[j]] - sm[j] / cnt[j]
            f = f / k
        else:
            for j in range(k):
                if scnt[j] >= 1 and cnt[j] >= 2:
                    b = mx[j] - mn[j]
                    if b > f:
                        f = b
        if f < best[k]:
            best[k] = f
            for i in range(n):
                witness[k, i] = a[i]
        # advance to the next restricted-growth string
        i = n - 1
        while i > 0 and a[i] > m[i]:
            i -= 1
        if i == 0:
            return best, witness
        a[i] += 1
        for j in range(i + 1, n):
            a[j] = 0
            mm = m[j - 1]
            if a[j - 1] > mm:
                mm = a[j - 1]
            m[j] = mm


def _sweep_numpy(K, surv, log2tab, kind, batch_size=65536):
    """Vectorized fallback: evaluate enumeration batches with numpy."""
    n = K.shape[0]
    best = np.full(n + 1, np.inf)
    witness = np.zeros((n + 1, n), dtype=np.int64)
    batch = np.empty((batch_size, n), dtype=np.int64)
    fill = 0

    def flush(rows: np.ndarray) -> None:
        nonlocal best, witness
        kvec = rows.max(axis=1) + 1
        acc = np.zeros(rows.shape[0])
        for j in range(n):
            mask = rows == j
            cntj = mask.sum(axis=1)
            if not cntj.any():
                break
            if kind == 2:
                smask = mask & surv[np.newaxis, :]
                mxj = np.where(smask, K, -np.inf).max(axis=1)
                mnj = np.where(smask, K, np.inf).min(axis=1)
                ok = (smask.sum(axis=1) >= 1) & (cntj >= 2)
                band = np.where(ok, mxj - mnj, 0.0)
                acc = np.maximum(acc, band)
            elif kind == 1:
                mxj = np.where(mask, K, -np.inf).max(axis=1)
                smj = np.where(mask, K, 0.0).sum(axis=1)
                mu = np.where(
                    cntj >= 2,
                    mxj + log2tab[cntj] - smj / np.maximum(cntj, 1),
                    0.0,
                )
                acc = acc + mu
            else:
                mxj = np.where(mask, K, -np.inf).max(axis=1)
                mnj = np.where(mask, K, np.inf).min(axis=1)
                acc = acc + np.where(cntj > 0, mxj - mnj, 0.0)
        f = acc / kvec if kind == 1 else acc
        for k in range(1, n + 1):
            idx = np.nonzero(kvec == k)[0]
            if idx.size == 0:
                continue
            local = idx[np.argmin(f[idx])]
            if f[local] < best[k]:
                best[k] = f[local]
                witness[k] = rows[local]

    for a in _rgs_stream(n):
        batch[fill] = a
        fill += 1
        if fill == batch_size:
            flush(batch)
            fill = 0
    if fill:
        flush(batch[:fill])
    return best, witness


def exact_csf(
    S: Dataset | Sequence[Item], oracle: ComplexityOracle, kind: str = "bandwidth_sum"
) -> ExactCsfCurve:
    """Brute-force H(k) for k = 1..n with minimizing witnesses.

    Table oracles without explicit set entries run on the fast sweep;
    anything else falls back to the per-partition reference criterion.
    """
    if kind not in _KIND_CODE:
        raise DomainError(f"unknown criterion kind {kind!r}")
    items = list(S)
    n = len(items)
    _check_n(n)
    code = _KIND_CODE[kind]

    fast = isinstance(oracle, TableOracle) and not oracle.set_k
    if fast:
        K = np.array([oracle.item_complexity(x) for x in items], dtype=np.float64)
        if kind == "sigma_max":
            kept = {id(x) for x in sigma_trim(oracle, items)}
            surv = np.array([id(x) in kept for x in items], dtype=np.bool_)
        else:
            surv = np.ones(n, dtype=np.bool_)
        log2tab = np.array([0.0] + [math.log2(c) for c in range(1, n + 1)])
        if _accel.use_numba():
            best, witness = _sweep_kernel(K, surv, log2tab, code)
        else:
            best, witness = _sweep_numpy(K, surv, log2tab, code)
        values = tuple(float(best[k]) for k in range(1, n + 1))
        wits = tuple(tuple(int(v) for v in witness[k]) for k in range(1, n + 1))
        return ExactCsfCurve(kind=kind, values=values, witnesses=wits)

    survivors = frozenset(it.id for it in sigma_trim(oracle, items)) if kind == "sigma_max" else None
    best: dict[int, float] = {}
    wits_d: dict[int, tuple[int, ...]] = {}
    for a in _rgs_stream(n):
        k = int(a.max()) + 1
        f = criterion(a.tolist(), items, oracle, kind, _survivors=survivors)
        if k not in best or f < best[k]:
            best[k] = f
            wits_d[k] = tuple(int(v) for v in a)
    values = tuple(best[k] for k in range(1, n + 1))
    return ExactCsfCurve(
        kind=kind,
        values=values,
        witnesses=tuple(wits_d[k] for k in range(1, n + 1)),
    )
