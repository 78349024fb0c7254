"""Baseline cluster-count estimators: gap statistic, AIC, BIC.

All three ride on the seeded k-means engine.  Within-cluster dispersion
W_k is the k-means inertia: the half-of-mean-pairwise-squared-distances
form usually quoted for the gap statistic equals the sum of squared
distances to centroids, so no pairwise matrix is ever built.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .data import PointSet
from .errors import DomainError, NumericError
from .estimator import KEstimate
from .kmeans import KMeansResult, kmeans
from .seeding import TAG_GAP, TAG_REFERENCE, TAG_XIC, spawn_rng

_W_FLOOR = 1e-300
_VAR_FLOOR = 1e-12
_RESEEDS = 5


@dataclass(frozen=True)
class GapCurve:
    gap: tuple[float, ...]
    s: tuple[float, ...]
    logw: tuple[float, ...]
    B: int

    def __post_init__(self) -> None:
        if any(v < 0.0 for v in self.s):
            raise DomainError("reference spreads must be non-negative")


def _kmeans_retry(X: np.ndarray, k: int, seed: int, restarts: int) -> KMeansResult:
    """k-means that must fill all k clusters; re-seeds a few times first."""
    last: NumericError | None = None
    for attempt in range(_RESEEDS):
        try:
            return kmeans(X, k, seed=seed + attempt, restarts=restarts, require_k=True)
        except NumericError as exc:
            last = exc
    raise NumericError(f"k-means stayed degenerate over {_RESEEDS} re-seeds: {last}")


def _log_w(X: np.ndarray, kmax: int, seed: int, restarts: int) -> np.ndarray:
    out = np.empty(kmax)
    for k in range(1, kmax + 1):
        inertia = _kmeans_retry(X, k, seed=seed, restarts=restarts).inertia
        out[k - 1] = math.log(max(inertia, _W_FLOOR))
    return out


def gap_statistic(
    P: PointSet,
    kmax: int,
    B: int = 5,
    seed: int = 0,
    restarts: int = 10,
) -> tuple[KEstimate, GapCurve]:
    """Estimate K by comparing dispersion against uniform reference draws.

    gap[k] = mean_b log W_k(ref_b) - log W_k(data); the chosen K is the
    smallest k with gap[k] >= gap[k+1] - s[k+1], falling back to kmax.
    """
    if kmax < 1:
        raise DomainError(f"kmax must be >= 1, got {kmax}")
    if B < 2:
        raise DomainError(f"need B >= 2 reference sets, got {B}")
    X = P.points
    n = P.n
    if n < kmax:
        raise DomainError(f"kmax={kmax} exceeds dataset size {n}")
    data_seed = int(spawn_rng(seed, TAG_GAP, 0).integers(2**31))
    logw = _log_w(X, kmax, data_seed, restarts)

    lo = X.min(axis=0)
    hi = X.max(axis=0)
    ref_logw = np.empty((B, kmax))
    for b in range(B):
        rng = spawn_rng(seed, TAG_REFERENCE, b + 1)
        ref = lo + rng.random((n, P.d)) * (hi - lo)
        ref_seed = int(spawn_rng(seed, TAG_GAP, b + 1).integers(2**31))
        ref_logw[b] = _log_w(ref, kmax, ref_seed, restarts)

    gap = ref_logw.mean(axis=0) - logw
    sd = ref_logw.std(axis=0)  # population convention, per the method
    s = sd * math.sqrt(1.0 + 1.0 / B)

    chosen = kmax
    for k in range(1, kmax):
        if gap[k - 1] >= gap[k] - s[k]:
            chosen = k
            break
    curve = GapCurve(
        gap=tuple(float(v) for v in gap),
        s=tuple(float(v) for v in s),
        logw=tuple(float(v) for v in logw),
        B=B,
    )
    estimate = KEstimate(
        k=chosen,
        rule="gap",
        diagnostics={"gap": curve.gap, "s": curve.s},
    )
    return estimate, curve


def _mixture_loglik(X: np.ndarray, centroids: np.ndarray, var: float) -> float:
    """Log-likelihood of a uniform-weight spherical Gaussian mixture."""
    n, d = X.shape
    k = centroids.shape[0]
    d2 = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    log_norm = -0.5 * d * math.log(2.0 * math.pi * var)
    comp = log_norm - d2 / (2.0 * var)
    return float(np.sum(logsumexp(comp, axis=1) - math.log(k)))


def xic_scores(
    P: PointSet,
    kmax: int,
    seed: int = 0,
    restarts: int = 10,
) -> tuple[np.ndarray, np.ndarray, bool]:
    """(AIC[k], BIC[k]) for k = 1..kmax from shared k-means mixture fits.

    Returns a variance-floor flag so degenerate (all-identical) inputs
    are visible to callers.
    """
    if P.n <= kmax:
        raise DomainError(f"need more points than kmax={kmax}, got {P.n}")
    X = P.points
    n, d = X.shape
    aic = np.empty(kmax)
    bic = np.empty(kmax)
    floored = False
    for k in range(1, kmax + 1):
        fit_seed = int(spawn_rng(seed, TAG_XIC, k).integers(2**31))
        # degenerate fits (duplicate centroids) are tolerated here; the
        # variance floor keeps the likelihood finite and the extra
        # parameters push the criterion away from such k anyway
        fit = kmeans(X, k, seed=fit_seed, restarts=restarts)
        var = fit.inertia / (n * d)
        if var < _VAR_FLOOR:
            var = _VAR_FLOOR
            floored = True
        lnl = _mixture_loglik(X, fit.centroids, var)
        p = k * d + 1
        aic[k - 1] = 2.0 * p - 2.0 * lnl
        bic[k - 1] = p * math.log(n) - 2.0 * lnl
    return aic, bic, floored


def xic_select(P: PointSet, kmax: int, kind: str, seed: int = 0) -> KEstimate:
    """Pick K by information criterion over spherical mixture fits."""
    if kind not in ("aic", "bic"):
        raise DomainError(f"kind must be 'aic' or 'bic', got {kind!r}")
    aic, bic, floored = xic_scores(P, kmax, seed=seed)
    scores = aic if kind == "aic" else bic
    chosen = int(np.argmin(scores)) + 1  # first minimum on ties
    diagnostics: dict = {"scores": tuple(float(v) for v in scores)}
    if floored:
        diagnostics["note"] = "variance floored (near-identical points)"
    return KEstimate(k=chosen, rule=kind, diagnostics=diagnostics)
