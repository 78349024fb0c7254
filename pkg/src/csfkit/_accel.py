"""Numba acceleration switch.

Hot kernels (the exhaustive partition sweep, k-means, and the Jacobi
eigensolver) each ship two implementations: a numba @njit version and a
pure-numpy fallback.  The fallback is selected automatically when numba
is not importable, or explicitly by setting the environment variable
``CSFKIT_NO_NUMBA`` to a non-empty value other than ``0``.

``benchmarks/bench_kernels.py`` times the two paths against each other.
"""

from __future__ import annotations

import os

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        """Stand-in decorator so kernel modules import cleanly without numba."""
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


ENV_FLAG = "CSFKIT_NO_NUMBA"


def use_numba() -> bool:
    """True when jitted kernels should run; checked at call time so tests
    can flip the env var without reloading modules."""
    if not HAS_NUMBA:
        return False
    flag = os.environ.get(ENV_FLAG, "")
    return flag in ("", "0")
