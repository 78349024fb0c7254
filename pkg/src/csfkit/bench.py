"""Synthetic benchmark: cluster-count accuracy on 2-D Gaussian mixtures.

Three unit-variance clusters sit at (0,0), (r,0), (2r,0); as the
spacing r shrinks the components merge and every estimator degrades.
run_bench scores four methods per trial -- the subsampled curve with a
centroid oracle ("csf"), the gap statistic, AIC and BIC -- and reports
the fraction of trials recovering K=3 with bootstrap confidence bands.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .baselines import gap_statistic, xic_scores
from .data import PointSet
from .deficiency import CentroidOracle
from .errors import DomainError
from .estimator import (
    select_k_logratio,
    select_k_one_std,
    subsampled_csf,
    uniform_reference,
)
from .seeding import TAG_BENCH, TAG_BOOTSTRAP, TAG_MIXTURE, spawn_rng

METHODS = ("csf", "gap", "aic", "bic")
RULES = ("one_std", "log_ratio")
DESK_SPACINGS = (0.5, 0.75, 1.0, 1.25, 1.5)

TRUE_K = 3
_BOOT_RESAMPLES = 1000
_GAP_REFS = 5


@dataclass(frozen=True)
class BenchConfig:
    """Sweep definition: spacings to test plus per-trial sizes and seed."""

    spacings: tuple[float, ...] = DESK_SPACINGS
    points_per_cluster: int = 1000
    trials: int = 30
    kmax: int = 10
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "spacings", tuple(float(r) for r in self.spacings))
        if any(r <= 0.0 for r in self.spacings):
            raise DomainError("spacings must be > 0")
        if self.points_per_cluster < 1:
            raise DomainError("points_per_cluster must be >= 1")
        if self.trials < 1:
            raise DomainError("trials must be >= 1")
        if self.kmax < 2:
            raise DomainError("kmax must be >= 2")

    @classmethod
    def desk(cls, seed: int = 0) -> "BenchConfig":
        """Minutes-scale default sweep."""
        return cls(seed=seed)

    @classmethod
    def full_scale(cls, seed: int = 0) -> "BenchConfig":
        """Hours-scale sweep: 1e4 points per cluster, 100 trials."""
        return cls(points_per_cluster=10000, trials=100, seed=seed)


@dataclass(frozen=True)
class BenchReport:
    """Per (method, spacing): accuracy, bootstrap 95% CI, pick histogram."""

    config: BenchConfig
    rule: str
    accuracy: dict = field(repr=False)
    ci_lo: dict = field(repr=False)
    ci_hi: dict = field(repr=False)
    histogram: dict = field(repr=False)

    def rows(self) -> list[tuple[str, float, float, float, float]]:
        out = []
        for method in METHODS:
            for r in self.config.spacings:
                key = (method, r)
                out.append(
                    (method, r, self.accuracy[key], self.ci_lo[key], self.ci_hi[key])
                )
        return out

    def to_csv_text(self) -> str:
        lines = ["method,spacing,accuracy,ci_lo,ci_hi"]
        for method, r, acc, lo, hi in self.rows():
            lines.append(f"{method},{r:.9g},{acc:.9g},{lo:.9g},{hi:.9g}")
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {
            "config": {
                "spacings": list(self.config.spacings),
                "points_per_cluster": self.config.points_per_cluster,
                "trials": self.config.trials,
                "kmax": self.config.kmax,
                "seed": self.config.seed,
            },
            "rule": self.rule,
            "true_k": TRUE_K,
            "results": [
                {
                    "method": method,
                    "spacing": r,
                    "accuracy": acc,
                    "ci_lo": lo,
                    "ci_hi": hi,
                    "histogram": list(self.histogram[(method, r)]),
                }
                for method, r, acc, lo, hi in self.rows()
            ],
        }


def gen_mixture(r: float, n_per_cluster: int, seed: int) -> tuple[PointSet, np.ndarray]:
    """Three isotropic unit-variance 2-D clusters spaced r apart on the x axis.

    Returns the pooled points and the generating-component labels
    (0/1/2 in blocks).  r=0 is allowed and collapses the clusters.
    """
    if n_per_cluster < 1:
        raise DomainError("n_per_cluster must be >= 1")
    rng = spawn_rng(seed, TAG_MIXTURE)
    centers = np.array([[0.0, 0.0], [r, 0.0], [2.0 * r, 0.0]])
    blocks = [rng.normal(loc=c, scale=1.0, size=(n_per_cluster, 2)) for c in centers]
    labels = np.repeat(np.arange(3), n_per_cluster)
    return PointSet(np.concatenate(blocks)), labels


def _csf_pick(
    P: PointSet, kmax: int, nsamples: int, seed: int, rule: str, restarts: int
) -> int:
    curve = subsampled_csf(
        None,
        P,
        CentroidOracle(P),
        kmax=kmax,
        nsamples=nsamples,
        seed=seed,
        trim="sigma",
        normalize="parts",
        cluster_restarts=restarts,
    )
    if rule == "one_std":
        return select_k_one_std(curve).k
    ref = uniform_reference(P, seed)
    ref_curve = subsampled_csf(
        None,
        ref,
        CentroidOracle(ref),
        kmax=kmax,
        nsamples=nsamples,
        seed=seed,
        trim="sigma",
        normalize="parts",
        cluster_restarts=restarts,
    )
    return select_k_logratio(curve, ref_curve).k


def _run_trial(
    cfg: BenchConfig, si: int, trial: int, rule: str, nsamples: int, restarts: int
) -> np.ndarray:
    """K picked by each method (in METHODS order) for one generated mixture."""
    tseed = int(spawn_rng(cfg.seed, TAG_BENCH, si, trial).integers(2**31))
    P, _ = gen_mixture(cfg.spacings[si], cfg.points_per_cluster, tseed)
    picks = np.empty(len(METHODS), dtype=np.int64)
    picks[0] = _csf_pick(P, cfg.kmax, nsamples, tseed, rule, restarts)
    gap_est, _ = gap_statistic(P, cfg.kmax, B=_GAP_REFS, seed=tseed, restarts=restarts)
    picks[1] = gap_est.k
    aic, bic, _ = xic_scores(P, cfg.kmax, seed=tseed, restarts=restarts)
    picks[2] = int(np.argmin(aic)) + 1
    picks[3] = int(np.argmin(bic)) + 1
    return picks


def run_bench(
    cfg: BenchConfig,
    *,
    rule: str = "one_std",
    nsamples: int = 1000,
    cluster_restarts: int = 10,
    threads: int = 1,
) -> BenchReport:
    """Score every method at every spacing over cfg.trials seeded mixtures.

    Trials are independent with derived seeds, so any thread count
    reproduces the serial report.  rule selects how the curve is read:
    the one-std drop rule (default) or the log ratio against a uniform
    reference.
    """
    if rule not in RULES:
        raise DomainError(f"rule must be one of {RULES}, got {rule!r}")
    if threads < 1:
        raise DomainError("threads must be >= 1")
    spacings = cfg.spacings
    picks = np.zeros((len(spacings), cfg.trials, len(METHODS)), dtype=np.int64)
    jobs = [(si, t) for si in range(len(spacings)) for t in range(cfg.trials)]
    if threads == 1:
        for si, t in jobs:
            picks[si, t] = _run_trial(cfg, si, t, rule, nsamples, cluster_restarts)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futs = {
                pool.submit(
                    _run_trial, cfg, si, t, rule, nsamples, cluster_restarts
                ): (si, t)
                for si, t in jobs
            }
            for fut, (si, t) in futs.items():
                picks[si, t] = fut.result()

    accuracy: dict = {}
    ci_lo: dict = {}
    ci_hi: dict = {}
    histogram: dict = {}
    for mi, method in enumerate(METHODS):
        for si, r in enumerate(spacings):
            hits = (picks[si, :, mi] == TRUE_K).astype(np.float64)
            key = (method, r)
            accuracy[key] = float(hits.mean())
            rng = spawn_rng(cfg.seed, TAG_BOOTSTRAP, mi, si)
            idx = rng.integers(0, cfg.trials, size=(_BOOT_RESAMPLES, cfg.trials))
            boot = hits[idx].mean(axis=1)
            ci_lo[key] = float(np.percentile(boot, 2.5))
            ci_hi[key] = float(np.percentile(boot, 97.5))
            counts = np.bincount(picks[si, :, mi], minlength=cfg.kmax + 1)[1:]
            histogram[key] = tuple(int(c) for c in counts)
    return BenchReport(
        config=cfg,
        rule=rule,
        accuracy=accuracy,
        ci_lo=ci_lo,
        ci_hi=ci_hi,
        histogram=histogram,
    )
