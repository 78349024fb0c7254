"""csfkit command line: reproducible cluster-count runs with artifacts.

Every subcommand resolves a seed (the --seed flag, or recorded entropy
when omitted), digests its input files, and writes its results next to
a manifest so the exact run can be repeated.  Exit codes: 0 success,
2 usage error, 1 runtime error.
"""

from __future__ import annotations

import argparse
import secrets
import sys
from pathlib import Path

from . import __version__
from .baselines import gap_statistic
from .bench import DESK_SPACINGS, BenchConfig, run_bench
from .compression import default_compressor, get_compressor, ncd_matrix
from .data import load_idx, load_points_csv
from .deficiency import CentroidOracle, CompressorOracle, TableOracle
from .ensemble import read_candidates_json, read_pgm, run_ensemble, scores_to_csv_text
from .errors import CsfkitError
from .estimator import (
    CsfCurve,
    select_k_logratio,
    select_k_one_std,
    subsampled_csf,
    uniform_reference,
)
from .exact import KINDS, exact_csf
from .reports import RunManifest, emit_report, sha256_file
from .spectral import affinity_from_ncd, spectral_cluster

_RULES = {"one-std": "one_std", "log-ratio": "log_ratio"}


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--seed", type=int, default=None, help="base seed (default: recorded entropy)")
    sub.add_argument("--out", default=".", help="directory for output artifacts")
    sub.add_argument("--threads", type=int, default=1, help="parallelism cap; outputs match --threads 1")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="csfkit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"csfkit {__version__}")
    subs = p.add_subparsers(dest="subcommand", required=True)

    s = subs.add_parser("ncd", help="pairwise NCD matrix of a dataset")
    s.add_argument("--input", required=True, help="IDX dataset file")
    s.add_argument("--compressor", default=None, help="backend (default: env CSFKIT_COMPRESSOR or zlib)")
    _add_common(s)
    s.set_defaults(func=_cmd_ncd)

    s = subs.add_parser("cluster", help="spectral clustering of an NCD matrix")
    s.add_argument("--matrix", required=True, help="square NCD matrix CSV")
    s.add_argument("--k", type=int, required=True, help="number of clusters")
    _add_common(s)
    s.set_defaults(func=_cmd_cluster)

    s = subs.add_parser("csf", help="subsampled structure-function curve")
    s.add_argument("--input", required=True, help="IDX dataset, or points CSV for --oracle centroid")
    s.add_argument("--kmax", type=int, default=10)
    s.add_argument("--samples", type=int, default=1000, help="subsamples per K")
    s.add_argument(
        "--oracle",
        default="compressor",
        help="complexity source: compressor | centroid | table:FILE",
    )
    s.add_argument("--compressor", default=None, help="backend for compressor oracle and clustering")
    _add_common(s)
    s.set_defaults(func=_cmd_csf)

    s = subs.add_parser("estimate-k", help="read a curve and pick K")
    s.add_argument("--curve", required=True, help="curve CSV (header K,mean,std)")
    s.add_argument("--rule", choices=sorted(_RULES), default="one-std")
    s.add_argument(
        "--reference",
        default="auto",
        help="log-ratio reference: curve CSV path, or 'auto' to build one from --input points",
    )
    s.add_argument("--input", default=None, help="points CSV for --reference auto")
    s.add_argument("--samples", type=int, default=1000, help="subsamples per K for the auto reference")
    _add_common(s)
    s.set_defaults(func=_cmd_estimate_k)

    s = subs.add_parser("exact-csf", help="brute-force curve with witnesses (small n)")
    s.add_argument("--input", required=True, help="IDX dataset file")
    s.add_argument("--table", required=True, help="table-oracle JSON (items keyed by dataset ids)")
    s.add_argument("--kind", choices=KINDS, default="bandwidth_sum")
    _add_common(s)
    s.set_defaults(func=_cmd_exact_csf)

    s = subs.add_parser("bench-synth", help="Gaussian-mixture benchmark vs Gap/AIC/BIC")
    s.add_argument("--spacing", type=float, action="append", help="cluster spacing; repeatable")
    s.add_argument("--points-per-cluster", type=int, default=None)
    s.add_argument("--trials", type=int, default=None)
    s.add_argument("--kmax", type=int, default=10)
    s.add_argument("--rule", choices=sorted(_RULES), default="one-std", help="curve reading for the csf method")
    s.add_argument("--full-scale", action="store_true", help="1e4 points/cluster, 100 trials")
    _add_common(s)
    s.set_defaults(func=_cmd_bench)

    s = subs.add_parser("ensemble", help="score and select candidate segmentations")
    s.add_argument("--image", required=True, help="grayscale PGM (P5)")
    s.add_argument("--candidates", required=True, help="candidate JSON list")
    s.add_argument("--window", type=int, default=9, help="threshold window (odd; ~2*radius+1)")
    s.add_argument("--mode", choices=("greedy", "exact"), default="greedy")
    _add_common(s)
    s.set_defaults(func=_cmd_ensemble)
    return p


def _resolve_run(args, input_flags: tuple[str, ...]) -> tuple[int, Path, RunManifest]:
    """Seed, output directory and manifest shared by every subcommand."""
    if args.seed is not None:
        seed, source = int(args.seed), "flag"
    else:
        seed, source = secrets.randbits(32), "entropy"
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    flags = {k: v for k, v in vars(args).items() if k not in ("func", "subcommand")}
    flags["seed"] = seed
    inputs = {}
    for flag in input_flags:
        path = getattr(args, flag, None)
        if path is not None and Path(str(path)).is_file():
            inputs[flag] = {"path": str(path), "sha256": sha256_file(path)}
    manifest = RunManifest(
        subcommand=args.subcommand,
        flags=flags,
        seed=seed,
        seed_source=source,
        version=__version__,
        inputs=inputs,
    )
    return seed, out_dir, manifest


def _compressor(name: str | None):
    return get_compressor(name) if name else default_compressor()


def _cmd_ncd(args) -> int:
    _, out_dir, manifest = _resolve_run(args, ("input",))
    dataset = load_idx(args.input)
    matrix = ncd_matrix(_compressor(args.compressor), dataset)
    emit_report(matrix, "csv", out_dir / "ncd.csv")
    emit_report(matrix, "json", out_dir / "ncd.json", manifest)
    print(f"ncd: n={matrix.n} compressor={matrix.compressor} -> {out_dir / 'ncd.csv'}")
    return 0


def _read_matrix_csv(path):
    import numpy as np

    from .compression import NcdMatrix

    rows = [
        [float(tok) for tok in line.split(",")]
        for line in Path(path).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    return NcdMatrix(compressor="file", entries=np.array(rows))


def _cmd_cluster(args) -> int:
    seed, out_dir, manifest = _resolve_run(args, ("matrix",))
    matrix = _read_matrix_csv(args.matrix)
    labels = spectral_cluster(affinity_from_ncd(matrix), args.k, seed=seed)
    text = "index,label\n" + "\n".join(f"{i},{l}" for i, l in enumerate(labels)) + "\n"
    emit_report(text, "csv", out_dir / "labels.csv")
    emit_report(
        {"k": args.k, "labels": [int(l) for l in labels]},
        "json",
        out_dir / "labels.json",
        manifest,
    )
    sizes = [int((labels == c).sum()) for c in range(args.k)]
    print(f"cluster: k={args.k} sizes={sizes} -> {out_dir / 'labels.csv'}")
    return 0


def _cmd_csf(args) -> int:
    oracle_spec = args.oracle
    table_path = oracle_spec[len("table:"):] if oracle_spec.startswith("table:") else None
    args.table = table_path  # digested when present
    seed, out_dir, manifest = _resolve_run(args, ("input", "table"))
    if oracle_spec == "centroid":
        points = load_points_csv(args.input)
        curve = subsampled_csf(
            None, points, CentroidOracle(points), kmax=args.kmax,
            nsamples=args.samples, seed=seed,
        )
    elif oracle_spec == "compressor" or table_path is not None:
        dataset = load_idx(args.input)
        comp = _compressor(args.compressor)
        matrix = ncd_matrix(comp, dataset)
        oracle = (
            TableOracle.from_json(table_path)
            if table_path is not None
            else CompressorOracle(comp)
        )
        curve = subsampled_csf(
            dataset, matrix, oracle, kmax=args.kmax, nsamples=args.samples, seed=seed
        )
    else:
        raise CsfkitError(
            f"unknown oracle {oracle_spec!r}; use compressor, centroid or table:FILE"
        )
    emit_report(curve, "csv", out_dir / "csf_curve.csv")
    emit_report(curve, "json", out_dir / "csf_curve.json", manifest)
    print(f"csf: kmax={args.kmax} samples={args.samples} -> {out_dir / 'csf_curve.csv'}")
    return 0


def _cmd_estimate_k(args) -> int:
    args.reference_file = args.reference if args.reference != "auto" else None
    seed, out_dir, manifest = _resolve_run(args, ("curve", "reference_file", "input"))
    curve = CsfCurve.from_csv_text(Path(args.curve).read_text(encoding="utf-8"))
    rule = _RULES[args.rule]
    if rule == "one_std":
        est = select_k_one_std(curve)
    else:
        if args.reference_file is not None:
            ref_curve = CsfCurve.from_csv_text(
                Path(args.reference_file).read_text(encoding="utf-8")
            )
        elif args.input is not None:
            points = load_points_csv(args.input)
            ref = uniform_reference(points, seed)
            ref_curve = subsampled_csf(
                None, ref, CentroidOracle(ref), kmax=curve.kmax,
                nsamples=args.samples, seed=seed,
            )
        else:
            raise CsfkitError(
                "log-ratio needs --reference FILE or --input points for the auto reference"
            )
        est = select_k_logratio(curve, ref_curve)
    emit_report(
        {"k": est.k, "rule": est.rule, "diagnostics": est.diagnostics},
        "json",
        out_dir / "estimate.json",
        manifest,
    )
    print(f"K={est.k}")
    note = est.diagnostics.get("note")
    if note:
        print(f"note: {note}")
    return 0


def _cmd_exact_csf(args) -> int:
    _, out_dir, manifest = _resolve_run(args, ("input", "table"))
    dataset = load_idx(args.input)
    oracle = TableOracle.from_json(args.table)
    curve = exact_csf(dataset, oracle, kind=args.kind)
    text = "k,value\n" + "\n".join(
        f"{k + 1},{v:.9g}" for k, v in enumerate(curve.values)
    ) + "\n"
    emit_report(text, "csv", out_dir / "exact_curve.csv")
    emit_report(
        {
            "kind": curve.kind,
            "values": list(curve.values),
            "witnesses": [list(w) for w in curve.witnesses],
        },
        "json",
        out_dir / "exact_curve.json",
        manifest,
    )
    print(f"exact-csf: n={curve.n} kind={curve.kind} H(n)={curve.values[-1]:.9g}")
    return 0


def _cmd_bench(args) -> int:
    seed, out_dir, manifest = _resolve_run(args, ())
    points = args.points_per_cluster
    trials = args.trials
    if points is None:
        points = 10000 if args.full_scale else 1000
    if trials is None:
        trials = 100 if args.full_scale else 30
    cfg = BenchConfig(
        spacings=tuple(args.spacing) if args.spacing else DESK_SPACINGS,
        points_per_cluster=points,
        trials=trials,
        kmax=args.kmax,
        seed=seed,
    )
    report = run_bench(cfg, rule=_RULES[args.rule], threads=args.threads)
    emit_report(report, "csv", out_dir / "bench.csv")
    emit_report(report, "json", out_dir / "bench.json", manifest)
    print(
        f"bench-synth: {len(cfg.spacings)} spacings x {cfg.trials} trials "
        f"-> {out_dir / 'bench.csv'}"
    )
    for method, r, acc, lo, hi in report.rows():
        print(f"  {method} r={r:g}: accuracy={acc:.3f} ci=[{lo:.3f},{hi:.3f}]")
    return 0


def _cmd_ensemble(args) -> int:
    _, out_dir, manifest = _resolve_run(args, ("image", "candidates"))
    img = read_pgm(args.image)
    candidates = read_candidates_json(Path(args.candidates).read_text(encoding="utf-8"))
    selected, rows = run_ensemble(img, candidates, args.window, args.mode)
    emit_report(scores_to_csv_text(rows), "csv", out_dir / "scores.csv")
    emit_report(
        {"selected": selected, "mode": args.mode, "window": args.window},
        "json",
        out_dir / "selection.json",
        manifest,
    )
    print(
        f"ensemble: selected {len(selected)}/{len(candidates)} candidates "
        f"-> {out_dir / 'selection.json'}"
    )
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    except CsfkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
