"""csfkit: compression-based cluster-count estimation.

Builds cluster structure function (CSF) curves from complexity oracles
(compressed sizes, explicit tables, or centroid distances), clusters via
NCD + spectral embedding, and estimates the number of clusters; ships
exhaustive small-n ground truth and Gap/AIC/BIC baselines.
"""

__version__ = "0.1.0"

from .data import Dataset, Item, PointSet, encode_multiset, decode_multiset, load_idx, load_points_csv
from .compression import Compressor, NcdMatrix, get_compressor, default_compressor, ncd, ncd_matrix, z_len
from .deficiency import (
    CentroidOracle,
    ComplexityOracle,
    CompressorOracle,
    DeficiencyStats,
    TableOracle,
    delta,
    deficiency_stats,
    index_items,
    sigma_trim,
)
from .exact import ExactCsfCurve, criterion, exact_csf, partitions
from .kmeans import KMeansResult, kmeans
from .spectral import affinity_from_ncd, canonical_labels, spectral_cluster, sym_eig
from .estimator import (
    CsfCurve,
    KEstimate,
    csf_curve_from_labels,
    select_k_logratio,
    select_k_one_std,
    subsampled_csf,
    uniform_reference,
)
from .baselines import GapCurve, gap_statistic, xic_scores, xic_select
from .bench import BenchConfig, BenchReport, gen_mixture, run_bench
from .ensemble import (
    Bucket,
    CandidateSegment,
    GrayImage,
    adaptive_threshold,
    make_buckets,
    read_candidates_json,
    read_pgm,
    run_ensemble,
    score_candidate,
    select_ensemble,
    write_pgm,
)
from .reports import RunManifest, emit_report, sha256_file

__all__ = [
    "Dataset",
    "Item",
    "PointSet",
    "encode_multiset",
    "decode_multiset",
    "load_idx",
    "load_points_csv",
    "Compressor",
    "NcdMatrix",
    "get_compressor",
    "default_compressor",
    "ncd",
    "ncd_matrix",
    "z_len",
    "ComplexityOracle",
    "TableOracle",
    "CompressorOracle",
    "CentroidOracle",
    "DeficiencyStats",
    "delta",
    "deficiency_stats",
    "sigma_trim",
    "index_items",
    "ExactCsfCurve",
    "criterion",
    "exact_csf",
    "partitions",
    "KMeansResult",
    "kmeans",
    "affinity_from_ncd",
    "canonical_labels",
    "spectral_cluster",
    "sym_eig",
    "CsfCurve",
    "KEstimate",
    "csf_curve_from_labels",
    "select_k_logratio",
    "select_k_one_std",
    "subsampled_csf",
    "uniform_reference",
    "GapCurve",
    "gap_statistic",
    "xic_scores",
    "xic_select",
    "BenchConfig",
    "BenchReport",
    "gen_mixture",
    "run_bench",
    "Bucket",
    "CandidateSegment",
    "GrayImage",
    "adaptive_threshold",
    "make_buckets",
    "read_candidates_json",
    "read_pgm",
    "run_ensemble",
    "score_candidate",
    "select_ensemble",
    "write_pgm",
    "RunManifest",
    "emit_report",
    "sha256_file",
]
