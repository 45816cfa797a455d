import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from brmds.errors import DimensionError, ZeroDissimilarity
from brmds.mds import (
    classical_scaling,
    pairwise_distances,
    raw_stress,
    sammon_gradient,
    sammon_mds,
    sammon_stress,
)


def test_two_points():
    emb = classical_scaling(np.array([[0.0, 2.0], [2.0, 0.0]]), 1)
    np.testing.assert_allclose(np.sort(emb.coords[:, 0]), [-1.0, 1.0], atol=1e-12)


def test_equilateral_triangle():
    D = 1.0 - np.eye(3)
    emb = classical_scaling(D, 2)
    np.testing.assert_allclose(emb.distances(), D, atol=1e-10)


def test_classical_recovers_points_and_centres(rng):
    X = rng.normal(size=(10, 3))
    emb = classical_scaling(pairwise_distances(X), 3)
    np.testing.assert_allclose(emb.distances(), pairwise_distances(X), atol=1e-8)
    np.testing.assert_allclose(emb.coords.mean(axis=0), 0.0, atol=1e-10)


def test_dimension_checked():
    with pytest.raises(DimensionError):
        classical_scaling(1.0 - np.eye(3), 3)


def test_stress_examples():
    X = np.array([[0.0], [3.0]])
    D = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert raw_stress(X, D) == pytest.approx(4.0)
    assert sammon_stress(np.array([[0.0], [2.0]]), D) == pytest.approx(1.0)
    assert raw_stress(X, pairwise_distances(X)) == 0.0


def test_sammon_is_weighted_raw_stress(rng):
    X = rng.normal(size=(8, 2))
    D = pairwise_distances(rng.normal(size=(8, 3)))
    W = np.zeros_like(D)
    off = ~np.eye(8, dtype=bool)
    W[off] = 1.0 / D[off]
    assert sammon_stress(X, D) == pytest.approx(raw_stress(X, D, W), rel=1e-13)


def test_stress_rotation_invariant(rng):
    X = rng.normal(size=(8, 2))
    D = pairwise_distances(rng.normal(size=(8, 2)))
    a = 0.7
    R = np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])
    assert sammon_stress(X @ R.T, D) == pytest.approx(sammon_stress(X, D), rel=1e-12)


def test_zero_dissimilarity_rejected():
    with pytest.raises(ZeroDissimilarity):
        sammon_stress(np.zeros((2, 1)) + [[0.0], [1.0]], np.zeros((2, 2)))


def test_sammon_exact_when_realizable(rng):
    X = rng.normal(size=(20, 2))
    emb = sammon_mds(pairwise_distances(X), 2)
    assert emb.stress < 1e-6
    line = np.array([[0.0], [1.0], [2.5]])
    assert sammon_mds(pairwise_distances(line), 1).stress < 1e-10


def test_sammon_beats_classical_start(rng):
    D = pairwise_distances(rng.normal(size=(30, 5)))
    start = classical_scaling(D, 2)
    emb = sammon_mds(D, 2)
    assert emb.stress < sammon_stress(start.coords, D)
    assert sammon_stress(emb.coords, D) == emb.stress


def test_gradient_matches_finite_differences(rng):
    X = rng.normal(size=(9, 3))
    D = pairwise_distances(rng.normal(size=(9, 4)))
    g = sammon_gradient(X, D)
    fd = np.zeros_like(X)
    h = 1e-6
    for idx in np.ndindex(X.shape):
        Xp, Xm = X.copy(), X.copy()
        Xp[idx] += h
        Xm[idx] -= h
        fd[idx] = (sammon_stress(Xp, D) - sammon_stress(Xm, D)) / (2 * h)
    assert np.max(np.abs(g - fd)) / np.max(np.abs(g)) < 1e-6


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 1000), d=st.integers(1, 3))
def test_sammon_never_worse_than_initializer(seed, d):
    r = np.random.default_rng(seed)
    D = pairwise_distances(r.normal(size=(12, 4)))
    init = r.normal(size=(12, d))
    emb = sammon_mds(D, d, init=init)
    assert emb.stress <= sammon_stress(init, D)
