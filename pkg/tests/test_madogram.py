import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from brmds.errors import DimensionMismatch
from brmds.madogram import extremal_matrix, f_madogram_theta, theta_mse
from brmds.simulator import SimSpec, simulate_field, true_theta_matrix


def test_identical_columns_give_one(rng):
    x = rng.uniform(size=50)
    assert f_madogram_theta(x, x) == 1.0


def test_rank_reversal_clamped():
    x = np.arange(1.0, 101.0)
    # raw ratio is 151/51 > 2
    assert f_madogram_theta(x, x[::-1]) == 2.0


def test_independent_pairs_near_two():
    r = np.random.default_rng(2)
    th = f_madogram_theta(r.uniform(size=100_000), r.uniform(size=100_000))
    assert 1.95 <= th <= 2.0


def test_matrix_small_cases(rng):
    assert extremal_matrix(rng.uniform(size=(10, 1))).tolist() == [[1.0]]
    v = rng.uniform(size=(30, 3))
    v[:, 2] = v[:, 0]
    th = extremal_matrix(v)
    assert th[0, 2] == 1.0 and th[2, 0] == 1.0
    np.testing.assert_array_equal(th, th.T)
    assert np.all((th >= 1) & (th <= 2))


def test_matrix_tracks_simulated_truth():
    x = np.linspace(0, 4, 8)
    spec = SimSpec(np.column_stack([x, np.zeros_like(x)]), 2.0, p=500, seed=5)
    th = extremal_matrix(simulate_field(spec))
    iu = np.triu_indices(8, 1)
    assert np.mean(np.abs(th - true_theta_matrix(spec))[iu]) < 0.06


def test_theta_mse_examples():
    a = np.array([[1.0, 1.5], [1.5, 1.0]])
    b = np.array([[1.0, 1.7], [1.7, 1.0]])
    assert theta_mse(a, a) == 0.0
    assert theta_mse(a, b) == pytest.approx(0.02, abs=1e-15)
    with pytest.raises(DimensionMismatch):
        theta_mse(a, np.ones((3, 3)))


def test_theta_mse_permutation_invariant(rng):
    a = rng.uniform(1, 2, (6, 6))
    b = rng.uniform(1, 2, (6, 6))
    perm = rng.permutation(6)
    assert theta_mse(a[np.ix_(perm, perm)], b[np.ix_(perm, perm)]) == pytest.approx(theta_mse(a, b), rel=1e-14)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), power=st.floats(0.2, 5))
def test_invariant_to_monotone_transform(seed, power):
    r = np.random.default_rng(seed)
    x, y = r.uniform(0.1, 10, 40), r.uniform(0.1, 10, 40)
    assert f_madogram_theta(x, y) == f_madogram_theta(np.log(x), y**power)
