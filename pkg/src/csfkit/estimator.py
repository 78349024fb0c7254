"""Subsampled cluster-structure-function curves and K selection.

The practical pipeline: cluster the full dataset once per K, then draw
many small subsamples, score each by the per-part deficiency bandwidth
term log2(max - min + 1), and summarize as a mean/std curve over K.
Two selection rules are provided: the one-standard-deviation drop rule
and the argmax of the log-ratio against a uniform reference curve.

Two data routes share the same arithmetic:
  * byte datasets with an NCD matrix (spectral clustering, any oracle);
  * point sets (k-means clustering, centroid oracle) with a compiled
    kernel for the per-sample scoring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _accel
from ._accel import njit
from .compression import NcdMatrix
from .data import Dataset, PointSet
from .deficiency import CentroidOracle, ComplexityOracle, delta, index_items
from .errors import DomainError, FormatError
from .kmeans import kmeans
from .seeding import TAG_CLUSTERING, TAG_REFERENCE, TAG_SUBSAMPLE, spawn_rng
from .spectral import affinity_from_ncd, spectral_cluster

_EPS_LOG = 1e-9
TRIMS = ("none", "sigma")
NORMALIZE = ("kmax", "parts")


@dataclass(frozen=True)
class CsfCurve:
    """Mean/std of the subsampled structure function for K = 1..kmax."""

    kmax: int
    means: tuple[float, ...]
    stds: tuple[float, ...]
    nsamples: int
    clamped: bool = False  # subsample size 5K ran into |S|

    def __post_init__(self) -> None:
        if self.kmax < 1 or len(self.means) != self.kmax or len(self.stds) != self.kmax:
            raise DomainError("curve needs one (mean, std) pair per K in 1..kmax")
        if any(m < -1e-12 for m in self.means) or any(s < 0.0 for s in self.stds):
            raise DomainError("curve means and stds must be non-negative")

    def mean(self, k: int) -> float:
        return self.means[k - 1]

    def std(self, k: int) -> float:
        return self.stds[k - 1]

    def feature_vector(self) -> tuple[float, ...]:
        """Means then stds, K ascending — 2*kmax reals."""
        return self.means + self.stds

    def to_csv_text(self) -> str:
        lines = ["K,mean,std"]
        for i in range(self.kmax):
            lines.append(f"{i + 1},{self.means[i]:.9g},{self.stds[i]:.9g}")
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {
            "kmax": self.kmax,
            "mean": list(self.means),
            "std": list(self.stds),
            "nsamples": self.nsamples,
            "clamped": self.clamped,
        }

    @classmethod
    def from_csv_text(cls, text: str, nsamples: int = 0) -> "CsfCurve":
        rows = [ln for ln in text.splitlines() if ln.strip()]
        if not rows or rows[0].strip().lower() != "k,mean,std":
            raise FormatError('curve CSV must start with header "K,mean,std"')
        means: list[float] = []
        stds: list[float] = []
        for lineno, ln in enumerate(rows[1:], start=2):
            cols = ln.split(",")
            if len(cols) != 3:
                raise FormatError(f"line {lineno}: expected 3 columns, got {len(cols)}")
            try:
                k = int(cols[0])
                mu = float(cols[1])
                sd = float(cols[2])
            except ValueError as exc:
                raise FormatError(f"line {lineno}: {exc}") from exc
            if k != len(means) + 1:
                raise FormatError(f"line {lineno}: expected K={len(means) + 1}, got {k}")
            means.append(mu)
            stds.append(sd)
        if not means:
            raise FormatError("curve CSV has no data rows")
        return cls(kmax=len(means), means=tuple(means), stds=tuple(stds), nsamples=nsamples)


@dataclass(frozen=True)
class KEstimate:
    k: int
    rule: str
    diagnostics: dict


def _band_term(vals: list[float], trim: str) -> float:
    """log2(bandwidth + 1) of a part's deficiencies, optionally trimmed.

    Trimming keeps values within one deviation unit (1/n convention) of
    the mean; if none survive, the values nearest the mean (all ties)
    stand in, so a part never trims to nothing.
    """
    n = len(vals)
    if n < 2:
        return 0.0
    if trim == "sigma":
        mu = 0.0
        for v in vals:
            mu += v
        mu /= n
        ss = 0.0
        for v in vals:
            ss += (v - mu) * (v - mu)
        sigma = math.sqrt(ss) / n
        kept = [v for v in vals if abs(v - mu) <= sigma]
        if not kept:
            best = min(abs(v - mu) for v in vals)
            kept = [v for v in vals if abs(v - mu) == best]
        vals = kept
    lo = vals[0]
    hi = vals[0]
    for v in vals[1:]:
        if v < lo:
            lo = v
        if v > hi:
            hi = v
    return math.log2(hi - lo + 1.0)


@njit(cache=True)
def _point_values_kernel(X, labels, sub, K, kmax, include_log, do_trim, per_parts):
    """Per-sample curve values for the point route.

    sub holds pre-drawn subsample row indices, one row per sample; the
    arithmetic (sequential sums, trim rule, normalization) mirrors the
    object route exactly.
    """
    nsamples, m = sub.shape
    d = X.shape[1]
    out = np.empty(nsamples)
    vals = np.empty(m)
    cent = np.empty(d)
    for s in range(nsamples):
        total = 0.0
        nparts = 0
        for p in range(K):
            cnt = 0
            for j in range(m):
                if labels[sub[s, j]] == p:
                    cnt += 1
            if cnt < 2:
                continue
            nparts += 1
            for t in range(d):
                cent[t] = 0.0
            for j in range(m):
                row = sub[s, j]
                if labels[row] == p:
                    for t in range(d):
                        cent[t] += X[row, t]
            for t in range(d):
                cent[t] /= cnt
            i = 0
            for j in range(m):
                row = sub[s, j]
                if labels[row] == p:
                    dist = 0.0
                    for t in range(d):
                        diff = X[row, t] - cent[t]
                        dist += diff * diff
                    v = np.sqrt(dist)
                    if include_log:
                        v += np.log2(cnt)
                    vals[i] = v
                    i += 1
            lo = vals[0]
            hi = vals[0]
            if do_trim:
                mu = 0.0
                for j in range(cnt):
                    mu += vals[j]
                mu /= cnt
                ss = 0.0
                for j in range(cnt):
                    ss += (vals[j] - mu) * (vals[j] - mu)
                sigma = np.sqrt(ss) / cnt
                kept = 0
                for j in range(cnt):
                    if abs(vals[j] - mu) <= sigma:
                        v = vals[j]
                        if kept == 0 or v < lo:
                            lo = v
                        if kept == 0 or v > hi:
                            hi = v
                        kept += 1
                if kept == 0:
                    best = abs(vals[0] - mu)
                    for j in range(1, cnt):
                        dd = abs(vals[j] - mu)
                        if dd < best:
                            best = dd
                    first = True
                    for j in range(cnt):
                        if abs(vals[j] - mu) == best:
                            v = vals[j]
                            if first or v < lo:
                                lo = v
                            if first or v > hi:
                                hi = v
                            first = False
            else:
                for j in range(1, cnt):
                    v = vals[j]
                    if v < lo:
                        lo = v
                    if v > hi:
                        hi = v
            total += np.log2(hi - lo + 1.0)
        if per_parts:
            denom = nparts if nparts > 0 else 1
            out[s] = total / denom
        else:
            out[s] = total / kmax
    return out


def _curve_stats(values: np.ndarray) -> tuple[float, float]:
    n = values.shape[0]
    mu = 0.0
    for v in values:
        mu += float(v)
    mu /= n
    ss = 0.0
    for v in values:
        ss += (float(v) - mu) ** 2
    return mu, math.sqrt(ss) / n


def _cluster_for_k(dist, k: int, seed: int, restarts: int) -> np.ndarray:
    child = int(spawn_rng(seed, TAG_CLUSTERING, k).integers(2**31))
    if isinstance(dist, PointSet):
        return kmeans(dist.points, k, seed=child, restarts=restarts).labels
    if isinstance(dist, NcdMatrix):
        return spectral_cluster(affinity_from_ncd(dist), k, seed=child, restarts=restarts)
    raise DomainError(f"unsupported distance structure: {type(dist).__name__}")


def csf_curve_from_labels(
    S: Dataset | None,
    dist,
    oracle: ComplexityOracle,
    labels_by_k,
    nsamples: int,
    seed: int,
    *,
    trim: str = "none",
    normalize: str = "kmax",
) -> CsfCurve:
    """Curve from externally supplied clusterings (one labeling per K).

    labels_by_k[K-1] assigns every dataset item a part in 0..K-1; a part
    that never reaches two members in a subsample contributes
    log2(0 + 1) = 0 to that sample.
    """
    if trim not in TRIMS:
        raise DomainError(f"trim must be one of {TRIMS}, got {trim!r}")
    if normalize not in NORMALIZE:
        raise DomainError(f"normalize must be one of {NORMALIZE}, got {normalize!r}")
    if nsamples < 2:
        raise DomainError("need nsamples >= 2 for a standard deviation")
    kmax = len(labels_by_k)
    if kmax < 1:
        raise DomainError("need at least one clustering (kmax >= 1)")

    points = dist.points if isinstance(dist, PointSet) else None
    if S is None:
        if points is None:
            raise DomainError("a Dataset is required unless dist is a PointSet")
        S = index_items(dist)
    n = S.n
    if n < 2:
        raise DomainError("need at least 2 items")

    fast = isinstance(oracle, CentroidOracle) and points is not None
    per_parts = normalize == "parts"
    clamped = 5 * kmax > n
    means: list[float] = []
    stds: list[float] = []
    for k in range(1, kmax + 1):
        labels = np.asarray(labels_by_k[k - 1], dtype=np.int64)
        if labels.shape != (n,):
            raise DomainError(f"labels for K={k} must have shape ({n},)")
        if labels.min() < 0 or labels.max() >= k:
            raise DomainError(f"labels for K={k} must lie in 0..{k - 1}")
        m = min(5 * k, n)
        rng = spawn_rng(seed, TAG_SUBSAMPLE, k)
        sub = np.empty((nsamples, m), dtype=np.int64)
        for s in range(nsamples):
            sub[s] = rng.choice(n, size=m, replace=False)
        if fast:
            values = _point_values_kernel(
                points, labels, sub, k, kmax,
                oracle.include_log_term, trim == "sigma", per_parts,
            )
        else:
            values = np.empty(nsamples)
            for s in range(nsamples):
                total = 0.0
                nparts = 0
                for p in range(k):
                    part = [S[int(row)] for row in sub[s] if labels[row] == p]
                    if len(part) < 2:
                        continue
                    nparts += 1
                    vals = [delta(oracle, part, x) for x in part]
                    total += _band_term(vals, trim)
                if per_parts:
                    values[s] = total / max(nparts, 1)
                else:
                    values[s] = total / kmax
        mu, sd = _curve_stats(values)
        means.append(mu)
        stds.append(sd)
    return CsfCurve(
        kmax=kmax,
        means=tuple(means),
        stds=tuple(stds),
        nsamples=nsamples,
        clamped=clamped,
    )


def subsampled_csf(
    S: Dataset | None,
    dist,
    oracle: ComplexityOracle,
    kmax: int = 10,
    nsamples: int = 1000,
    seed: int = 0,
    *,
    trim: str = "none",
    normalize: str = "kmax",
    cluster_restarts: int = 10,
) -> CsfCurve:
    """Full-pipeline curve: cluster at each K, then score subsamples.

    Point sets are clustered with k-means on the coordinates; NCD
    matrices with spectral clustering on the derived affinity.  Each K
    draws nsamples subsamples of size 5K (clamped to |S|) without
    replacement; see csf_curve_from_labels for the scoring.
    """
    if kmax < 1:
        raise DomainError(f"kmax must be >= 1, got {kmax}")
    n = dist.n if isinstance(dist, (PointSet, NcdMatrix)) else 0
    if isinstance(dist, NcdMatrix) and (S is None or S.n != n):
        raise DomainError("dataset and NCD matrix sizes must agree")
    if n and kmax > n:
        raise DomainError(f"kmax={kmax} exceeds dataset size {n}")
    labels_by_k = [
        _cluster_for_k(dist, k, seed, cluster_restarts) for k in range(1, kmax + 1)
    ]
    return csf_curve_from_labels(
        S, dist, oracle, labels_by_k, nsamples, seed, trim=trim, normalize=normalize
    )


def select_k_one_std(curve: CsfCurve) -> KEstimate:
    """Smallest K whose mean drops more than one std below its predecessor."""
    if curve.kmax < 2:
        raise DomainError("one-std rule needs kmax >= 2")
    margins = tuple(
        (curve.means[i - 1] - curve.stds[i - 1]) - curve.means[i]
        for i in range(1, curve.kmax)
    )
    for i, margin in enumerate(margins):
        if margin > 0.0:
            return KEstimate(k=i + 2, rule="one_std", diagnostics={"margins": margins})
    return KEstimate(
        k=1,
        rule="one_std",
        diagnostics={"margins": margins, "note": "no significant drop"},
    )


def uniform_reference(P: PointSet, seed: int) -> PointSet:
    """Reference points spread uniformly over the range spanned by P.

    One dimension gets the deterministic construction (midpoints of n
    equal subintervals of [min, max]); higher dimensions fall back to
    seeded uniform draws inside the axis-aligned bounding box.
    """
    X = P.points
    n = P.n
    if n < 1:
        raise DomainError("need at least one point")
    if P.d == 1:
        lo = float(X[:, 0].min())
        hi = float(X[:, 0].max())
        width = (hi - lo) / n
        mids = lo + width * (np.arange(n) + 0.5)
        return PointSet(mids.reshape(-1, 1))
    rng = spawn_rng(seed, TAG_REFERENCE)
    lo = X.min(axis=0)
    hi = X.max(axis=0)
    return PointSet(lo + rng.random((n, P.d)) * (hi - lo))


def select_k_logratio(curve_S: CsfCurve, curve_ref: CsfCurve) -> KEstimate:
    """Argmax of log2(ref mean) - log2(data mean); ties to the smallest K."""
    if curve_S.kmax != curve_ref.kmax:
        raise DomainError(
            f"curves disagree on kmax: {curve_S.kmax} vs {curve_ref.kmax}"
        )
    ratios = tuple(
        math.log2(max(curve_ref.means[i], _EPS_LOG))
        - math.log2(max(curve_S.means[i], _EPS_LOG))
        for i in range(curve_S.kmax)
    )
    best = 0
    for i in range(1, len(ratios)):
        if ratios[i] > ratios[best]:
            best = i
    return KEstimate(k=best + 1, rule="log_ratio", diagnostics={"logratio": ratios})
