"""Seeded k-means with k-means++ starts.

Written from scratch so the whole pipeline's determinism contract holds:
for a fixed seed the restart schedule, tie-breaks (first index wins), and
the winning restart (strictly best inertia, ties to the lower restart
index) are all reproducible.  Empty clusters are repaired by relocating
the centroid to the most distant point; if a run still cannot populate
k clusters (fewer distinct points than k) the result is flagged and
optionally raised as degenerate.

Numba kernel with a numpy fallback; both consume identical pre-drawn
uniforms so the seeding decisions agree across paths.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _accel
from ._accel import njit
from .errors import DomainError, NumericError
from .seeding import TAG_KMEANS, spawn_rng


@dataclass(frozen=True, eq=False)
class KMeansResult:
    labels: np.ndarray = field(repr=False)
    centroids: np.ndarray = field(repr=False)
    inertia: float
    n_iter: int
    restart: int
    filled: int  # clusters actually populated


@njit(cache=True)
def _seed_lloyd_nb(X, k, u, max_iter):  # pragma: no cover - numba path
    n, d = X.shape
    cent = np.empty((k, d))
    idx = int(u[0] * n)
    if idx >= n:
        idx = n - 1
    for j in range(d):
        cent[0, j] = X[idx, j]
    closest = np.full(n, np.inf)
    for c in range(1, k):
        for i in range(n):
            dist = 0.0
            for j in range(d):
                diff = X[i, j] - cent[c - 1, j]
                dist += diff * diff
            if dist < closest[i]:
                closest[i] = dist
        tot = 0.0
        for i in range(n):
            tot += closest[i]
        if tot <= 0.0:
            idx = int(u[c] * n)
            if idx >= n:
                idx = n - 1
        else:
            target = u[c] * tot
            run = 0.0
            idx = n - 1
            for i in range(n):
                run += closest[i]
                if run > target:
                    idx = i
                    break
        for j in range(d):
            cent[c, j] = X[idx, j]

    labels = np.full(n, -1, dtype=np.int64)
    counts = np.zeros(k, dtype=np.int64)
    sums = np.zeros((k, d))
    it = 0
    for it in range(1, max_iter + 1):
        changed = False
        for i in range(n):
            best = np.inf
            bj = 0
            for c in range(k):
                dist = 0.0
                for j in range(d):
                    diff = X[i, j] - cent[c, j]
                    dist += diff * diff
                if dist < best:
                    best = dist
                    bj = c
            if bj != labels[i]:
                changed = True
            labels[i] = bj
        if not changed:
            break
        for c in range(k):
            counts[c] = 0
            for j in range(d):
                sums[c, j] = 0.0
        for i in range(n):
            c = labels[i]
            counts[c] += 1
            for j in range(d):
                sums[c, j] += X[i, j]
        for c in range(k):
            if counts[c] > 0:
                for j in range(d):
                    cent[c, j] = sums[c, j] / counts[c]
        # repair empties: move centroid onto the farthest point
        nempty = 0
        for c in range(k):
            if counts[c] == 0:
                nempty += 1
        if nempty > 0:
            far = np.empty(n)
            for i in range(n):
                dist = 0.0
                for j in range(d):
                    diff = X[i, j] - cent[labels[i], j]
                    dist += diff * diff
                far[i] = dist
            for c in range(k):
                if counts[c] == 0:
                    pick = 0
                    bestd = -1.0
                    for i in range(n):
                        if far[i] > bestd:
                            bestd = far[i]
                            pick = i
                    for j in range(d):
                        cent[c, j] = X[pick, j]
                    far[pick] = -1.0

    inertia = 0.0
    for i in range(n):
        c = labels[i]
        dist = 0.0
        for j in range(d):
            diff = X[i, j] - cent[c, j]
            dist += diff * diff
        inertia += dist
    filled = 0
    seen = np.zeros(k, dtype=np.int64)
    for i in range(n):
        seen[labels[i]] = 1
    for c in range(k):
        filled += seen[c]
    return labels, cent, inertia, it, filled


def _seed_lloyd_np(X, k, u, max_iter):
    n, d = X.shape
    cent = np.empty((k, d))
    idx = min(int(u[0] * n), n - 1)
    cent[0] = X[idx]
    closest = np.full(n, np.inf)
    for c in range(1, k):
        dist = ((X - cent[c - 1]) ** 2).sum(axis=1)
        np.minimum(closest, dist, out=closest)
        cum = np.cumsum(closest)
        tot = cum[-1]
        if tot <= 0.0:
            idx = min(int(u[c] * n), n - 1)
        else:
            idx = min(int(np.searchsorted(cum, u[c] * tot, side="right")), n - 1)
        cent[c] = X[idx]

    labels = np.full(n, -1, dtype=np.int64)
    it = 0
    for it in range(1, max_iter + 1):
        d2 = ((X[:, None, :] - cent[None, :, :]) ** 2).sum(axis=2)
        new_labels = np.argmin(d2, axis=1)
        if np.array_equal(new_labels, labels):
            labels = new_labels
            break
        labels = new_labels
        counts = np.bincount(labels, minlength=k)
        sums = np.zeros((k, d))
        np.add.at(sums, labels, X)
        nonzero = counts > 0
        cent[nonzero] = sums[nonzero] / counts[nonzero, None]
        if not nonzero.all():
            far = ((X - cent[labels]) ** 2).sum(axis=1)
            for c in np.nonzero(~nonzero)[0]:
                pick = int(np.argmax(far))
                cent[c] = X[pick]
                far[pick] = -1.0

    inertia = float(((X - cent[labels]) ** 2).sum())
    filled = int(np.unique(labels).size)
    return labels, cent, inertia, it, filled


def kmeans(
    points: np.ndarray,
    k: int,
    seed: int,
    restarts: int = 20,
    max_iter: int = 100,
    require_k: bool = False,
) -> KMeansResult:
    """Best-of-restarts k-means.

    require_k raises NumericError when no restart populates all k
    clusters (the caller may re-seed; see the gap statistic).
    """
    X = np.ascontiguousarray(np.asarray(points, dtype=np.float64))
    if X.ndim != 2:
        raise DomainError(f"points must be 2-D, got shape {X.shape}")
    n = X.shape[0]
    if not (1 <= k <= n):
        raise DomainError(f"k must be in 1..{n}, got {k}")
    if restarts < 1:
        raise DomainError("need at least one restart")
    u = spawn_rng(seed, TAG_KMEANS).random((restarts, k))
    runner = _seed_lloyd_nb if _accel.use_numba() else _seed_lloyd_np
    best: KMeansResult | None = None
    for r in range(restarts):
        labels, cent, inertia, n_iter, filled = runner(X, k, u[r], max_iter)
        if best is None or inertia < best.inertia:
            best = KMeansResult(
                labels=np.asarray(labels, dtype=np.int64),
                centroids=np.asarray(cent, dtype=np.float64),
                inertia=float(inertia),
                n_iter=int(n_iter),
                restart=r,
                filled=int(filled),
            )
    assert best is not None
    if require_k and best.filled < k:
        raise NumericError(
            f"k-means degenerate: only {best.filled} of {k} clusters populated"
        )
    return best
