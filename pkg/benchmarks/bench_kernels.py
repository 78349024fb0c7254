"""Time the numba kernels against their pure-numpy fallbacks.

The package selects between the two implementations at call time via
the CSFKIT_NO_NUMBA environment variable, so one process can measure
both paths and check they agree.

Usage: python benchmarks/bench_kernels.py [--repeats 3] [--sweep-n 11]
"""

import argparse
import os
import time

import numpy as np

from csfkit.data import Dataset, Item
from csfkit.deficiency import TableOracle
from csfkit.exact import exact_csf
from csfkit.kmeans import kmeans
from csfkit.spectral import sym_eig


def timed(fn, repeats):
    best = float("inf")
    out = None
    for _ in range(repeats):
        start = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - start)
    return best, out


def both_paths(fn, repeats):
    """(numba_seconds, numpy_seconds, results) for one workload."""
    os.environ["CSFKIT_NO_NUMBA"] = "0"
    fn()  # JIT warmup
    t_nb, r_nb = timed(fn, repeats)
    os.environ["CSFKIT_NO_NUMBA"] = "1"
    t_np, r_np = timed(fn, repeats)
    os.environ["CSFKIT_NO_NUMBA"] = "0"
    return t_nb, t_np, (r_nb, r_np)


def bench_sweep(n, repeats):
    rng = np.random.default_rng(0)
    ks = rng.uniform(0.0, 32.0, size=n)
    S = Dataset(tuple(Item(str(i), b"") for i in range(n)))
    oracle = TableOracle({str(i): float(k) for i, k in enumerate(ks)})
    t_nb, t_np, (a, b) = both_paths(
        lambda: exact_csf(S, oracle, kind="bandwidth_sum"), repeats
    )
    assert a.values == b.values
    return f"partition sweep n={n}", t_nb, t_np


def bench_kmeans(repeats):
    rng = np.random.default_rng(1)
    X = np.concatenate(
        [rng.normal(c, 0.5, size=(4000, 2)) for c in ((0, 0), (4, 0), (0, 4), (4, 4))]
    )
    t_nb, t_np, (a, b) = both_paths(
        lambda: kmeans(X, 8, seed=7, restarts=4), repeats
    )
    assert np.array_equal(a.labels, b.labels)
    return f"k-means n={X.shape[0]} k=8 x4 restarts", t_nb, t_np


def bench_jacobi(n, repeats):
    rng = np.random.default_rng(2)
    M = rng.normal(size=(n, n))
    M = M + M.T
    t_nb, t_np, (a, b) = both_paths(lambda: sym_eig(M), repeats)
    assert np.allclose(a[0], b[0], atol=1e-9)
    return f"jacobi eigensolver n={n}", t_nb, t_np


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=3, help="best-of timing runs")
    ap.add_argument("--sweep-n", type=int, default=11, help="items for the partition sweep")
    ap.add_argument("--jacobi-n", type=int, default=120, help="matrix size for the eigensolver")
    args = ap.parse_args()

    rows = [
        bench_sweep(args.sweep_n, args.repeats),
        bench_kmeans(args.repeats),
        bench_jacobi(args.jacobi_n, args.repeats),
    ]
    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'numba':>9}  {'numpy':>9}  speedup")
    for name, t_nb, t_np in rows:
        print(
            f"{name:<{width}}  {t_nb * 1e3:8.2f}ms  {t_np * 1e3:8.2f}ms  "
            f"{t_np / t_nb:6.1f}x"
        )


if __name__ == "__main__":
    main()
