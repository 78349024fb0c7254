"""Spectral clustering on affinity matrices.

Pipeline: Gaussian affinity from a distance matrix, symmetric normalized
graph operator, top-k eigenvectors from a cyclic Jacobi sweep written
here (not delegated), row normalization, then seeded k-means on the
embedding.  Labels are canonicalized by first occurrence so equal inputs
give equal outputs regardless of internal cluster numbering.
"""

from __future__ import annotations

import numpy as np

from . import _accel
from ._accel import njit
from .compression import NcdMatrix
from .errors import DomainError, NumericError
from .kmeans import kmeans
from .seeding import TAG_SPECTRAL, spawn_rng

_JACOBI_SWEEPS = 64
_JACOBI_RTOL = 1e-10
_DEGREE_FLOOR = 1e-12


def affinity_from_ncd(matrix, scale: float | None = None) -> np.ndarray:
    """exp(-d^2 / 2 sigma^2) with unit diagonal.

    sigma defaults to the median off-diagonal distance (1.0 when that
    median is zero, e.g. all-identical items).
    """
    if isinstance(matrix, NcdMatrix):
        D = np.asarray(matrix.entries, dtype=np.float64)
    else:
        D = np.asarray(matrix, dtype=np.float64)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise DomainError(f"distance matrix must be square, got shape {D.shape}")
    n = D.shape[0]
    if scale is None:
        if n > 1:
            off = D[~np.eye(n, dtype=bool)]
            med = float(np.median(off))
            scale = med if med > 0.0 else 1.0
        else:
            scale = 1.0
    if scale <= 0.0:
        raise DomainError(f"scale must be positive, got {scale}")
    A = np.exp(-(D * D) / (2.0 * scale * scale))
    np.fill_diagonal(A, 1.0)
    return A


@njit(cache=True)
def _jacobi_nb(M, max_sweeps, tol):  # pragma: no cover - numba path
    n = M.shape[0]
    A = M.copy()
    V = np.eye(n)
    for _ in range(max_sweeps):
        off = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                off += A[i, j] * A[i, j]
        off = np.sqrt(2.0 * off)
        if off <= tol:
            return np.diag(A).copy(), V, off
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                for i in range(n):
                    aip = A[i, p]
                    aiq = A[i, q]
                    A[i, p] = c * aip - s * aiq
                    A[i, q] = s * aip + c * aiq
                for i in range(n):
                    api = A[p, i]
                    aqi = A[q, i]
                    A[p, i] = c * api - s * aqi
                    A[q, i] = s * api + c * aqi
                A[p, q] = 0.0
                A[q, p] = 0.0
                for i in range(n):
                    vip = V[i, p]
                    viq = V[i, q]
                    V[i, p] = c * vip - s * viq
                    V[i, q] = s * vip + c * viq
    off = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            off += A[i, j] * A[i, j]
    off = np.sqrt(2.0 * off)
    return np.diag(A).copy(), V, off


def _jacobi_np(M, max_sweeps, tol):
    n = M.shape[0]
    A = M.copy()
    V = np.eye(n)
    for _ in range(max_sweeps):
        off = np.sqrt(2.0 * (np.triu(A, 1) ** 2).sum())
        if off <= tol:
            return np.diag(A).copy(), V, off
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                colp = A[:, p].copy()
                colq = A[:, q].copy()
                A[:, p] = c * colp - s * colq
                A[:, q] = s * colp + c * colq
                rowp = A[p, :].copy()
                rowq = A[q, :].copy()
                A[p, :] = c * rowp - s * rowq
                A[q, :] = s * rowp + c * rowq
                A[p, q] = 0.0
                A[q, p] = 0.0
                colp = V[:, p].copy()
                colq = V[:, q].copy()
                V[:, p] = c * colp - s * colq
                V[:, q] = s * colp + c * colq
    off = np.sqrt(2.0 * (np.triu(A, 1) ** 2).sum())
    return np.diag(A).copy(), V, off


def sym_eig(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi sweeps.

    Returns (eigenvalues, eigenvectors-as-columns) sorted by descending
    eigenvalue (stable), each eigenvector sign-fixed so its largest-
    magnitude entry (first such on ties) is non-negative.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DomainError(f"matrix must be square, got shape {M.shape}")
    scale = max(1.0, float(np.abs(M).max()) if M.size else 0.0)
    if not np.allclose(M, M.T, atol=1e-10 * scale, rtol=0.0):
        raise DomainError("matrix is not symmetric")
    n = M.shape[0]
    if n == 0:
        return np.empty(0), np.empty((0, 0))
    if n == 1:
        return M[0].copy(), np.ones((1, 1))
    M = np.ascontiguousarray(0.5 * (M + M.T))
    norm = float(np.linalg.norm(M))
    tol = _JACOBI_RTOL * max(norm, 1.0)
    runner = _jacobi_nb if _accel.use_numba() else _jacobi_np
    vals, vecs, off = runner(M, _JACOBI_SWEEPS, tol)
    if off > tol:
        raise NumericError(
            f"eigensolver did not converge: off-diagonal residual {off:.3e} > {tol:.3e}"
        )
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    vecs = vecs[:, order]
    for j in range(n):
        col = vecs[:, j]
        lead = int(np.argmax(np.abs(col)))
        if col[lead] < 0.0:
            vecs[:, j] = -col
    return vals, vecs


def canonical_labels(labels: np.ndarray) -> np.ndarray:
    """Relabel clusters in order of first occurrence (0, 1, 2, ...)."""
    labels = np.asarray(labels)
    out = np.empty(labels.shape[0], dtype=np.int64)
    seen: dict[int, int] = {}
    for i, lab in enumerate(labels):
        key = int(lab)
        if key not in seen:
            seen[key] = len(seen)
        out[i] = seen[key]
    return out


def spectral_cluster(
    affinity: np.ndarray,
    k: int,
    seed: int,
    restarts: int = 20,
) -> np.ndarray:
    """Normalized-cut style clustering of an affinity matrix into k parts."""
    A = np.asarray(affinity, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError(f"affinity must be square, got shape {A.shape}")
    n = A.shape[0]
    if not (1 <= k <= n):
        raise DomainError(f"k must be in 1..{n}, got {k}")
    if k == 1:
        return np.zeros(n, dtype=np.int64)
    deg = A.sum(axis=1)
    inv_sqrt = 1.0 / np.sqrt(np.maximum(deg, _DEGREE_FLOOR))
    L = A * inv_sqrt[:, None] * inv_sqrt[None, :]
    _, vecs = sym_eig(L)
    emb = vecs[:, :k].copy()
    norms = np.linalg.norm(emb, axis=1)
    nz = norms > 0.0
    emb[nz] /= norms[nz, None]
    result = kmeans(emb, k, seed=int(spawn_rng(seed, TAG_SPECTRAL).integers(2**31)), restarts=restarts)
    return canonical_labels(result.labels)
