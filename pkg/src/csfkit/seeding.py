"""Deterministic RNG derivation.

Every stochastic routine takes a base seed and derives independent
streams through SeedSequence with small integer tags, so runs are
reproducible and sub-computations are order-independent.
"""

from __future__ import annotations

import numpy as np

# stream tags (arbitrary distinct constants)
TAG_KMEANS = 11
TAG_SPECTRAL = 12
TAG_SUBSAMPLE = 13
TAG_CLUSTERING = 14
TAG_REFERENCE = 15
TAG_GAP = 16
TAG_XIC = 17
TAG_MIXTURE = 18
TAG_BOOTSTRAP = 19
TAG_BENCH = 20


def spawn_rng(*parts: int) -> np.random.Generator:
    """A Generator seeded from an ordered tuple of integers."""
    return np.random.default_rng(np.random.SeedSequence([int(p) for p in parts]))
