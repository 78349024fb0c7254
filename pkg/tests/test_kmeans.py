import numpy as np
import pytest

from csfkit.errors import NumericError
from csfkit.kmeans import kmeans


def blobs(rng, centers, n_per, scale=0.3):
    parts = [rng.normal(c, scale, (n_per, len(centers[0]))) for c in centers]
    return np.concatenate(parts)


def test_recovers_separated_blobs(rng):
    X = blobs(rng, [(0, 0), (10, 0), (0, 10)], 40)
    res = kmeans(X, 3, seed=5)
    sizes = sorted(np.bincount(res.labels, minlength=3))
    assert sizes == [40, 40, 40]
    assert res.filled == 3


def test_deterministic_per_seed(rng):
    X = blobs(rng, [(0, 0), (4, 4)], 25)
    a = kmeans(X, 2, seed=9)
    b = kmeans(X, 2, seed=9)
    assert np.array_equal(a.labels, b.labels)
    assert np.array_equal(a.centroids, b.centroids)
    assert a.inertia == b.inertia


def test_labels_are_nearest_centroid_and_inertia_consistent(rng):
    X = rng.random((60, 3))
    res = kmeans(X, 4, seed=2)
    d2 = ((X[:, None, :] - res.centroids[None]) ** 2).sum(axis=2)
    assert np.array_equal(res.labels, np.argmin(d2, axis=1))
    assert res.inertia == pytest.approx(d2[np.arange(60), res.labels].sum())


def test_k_equals_n_is_exact(rng):
    X = rng.random((5, 2))
    res = kmeans(X, 5, seed=0)
    assert res.inertia == pytest.approx(0.0, abs=1e-24)
    assert sorted(res.labels.tolist()) == [0, 1, 2, 3, 4]


def test_require_k_on_duplicate_points():
    X = np.zeros((6, 2))
    res = kmeans(X, 3, seed=0)  # tolerated: clusters collapse
    assert res.filled < 3 or res.inertia == 0.0
    with pytest.raises(NumericError):
        kmeans(X, 3, seed=0, require_k=True)


def test_numba_and_numpy_paths_agree(rng, force_numpy):
    import os

    X = blobs(rng, [(0, 0), (6, 1), (3, 7)], 30)
    plain = kmeans(X, 3, seed=11, restarts=5)
    os.environ.pop("CSFKIT_NO_NUMBA", None)
    jitted = kmeans(X, 3, seed=11, restarts=5)
    assert np.array_equal(plain.labels, jitted.labels)
    assert np.allclose(plain.centroids, jitted.centroids, atol=1e-12)
    assert plain.inertia == pytest.approx(jitted.inertia, rel=1e-12)
