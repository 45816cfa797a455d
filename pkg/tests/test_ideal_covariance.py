import numpy as np
import pytest

from brmds.brown_resnick import extremal_coefficient
from brmds.covariance import CovFunction, cov_value
from brmds.errors import ValidationError
from brmds.ideal_covariance import (
    CAP,
    EPSILON,
    IdealCovCache,
    ideal_cov_method1,
    ideal_cov_method2,
    ideal_distances,
    pair_loglik_profile,
)
from brmds.simulator import SimSpec, simulate_field


def pair_data(k, p, seed, sigma=2.0):
    corr = np.array([[1.0, k], [k, 1.0]])
    return simulate_field(SimSpec(None, sigma, p=p, seed=seed, corr=corr))


def test_method1_floor_cap_and_inversion():
    th = np.array([[1.0, 2.0, 1.0, 2 * 0.8413447460685429], [2.0, 1.0, 1.3, 1.5], [1.0, 1.3, 1.0, 1.9], [1.682689492137086, 1.5, 1.9, 1.0]])
    K = ideal_cov_method1(th, 2.0).K
    assert K[0, 1] == pytest.approx(np.exp(-3.0))
    assert K[0, 2] == CAP
    assert K[0, 3] == pytest.approx(0.5, abs=1e-12)
    np.testing.assert_array_equal(K, K.T)
    np.testing.assert_array_equal(np.diag(K), 1.0)
    inside = (K > EPSILON) & (K < CAP)
    np.testing.assert_allclose(extremal_coefficient(2.0, K[inside]), th[inside], atol=1e-9)


def test_epsilon_changes_only_floored_entries(rng):
    th = rng.uniform(1.1, 2.0, (6, 6))
    th = np.triu(th, 1) + np.triu(th, 1).T + np.eye(6)
    a = ideal_cov_method1(th, 1.5, epsilon=0.05).K
    b = ideal_cov_method1(th, 1.5, epsilon=0.1).K
    changed = a != b
    assert np.all(a[changed] < 0.1)


def test_method2_identical_columns_hit_cap(rng):
    x = 1.0 / -np.log(rng.uniform(size=300))
    K = ideal_cov_method2(np.column_stack([x, x]), 2.0).K
    assert K[0, 1] == pytest.approx(CAP, abs=1e-6)


def test_method2_independent_columns_low(rng):
    z = 1.0 / -np.log(rng.uniform(size=(2000, 2)))
    assert ideal_cov_method2(z, 2.0).K[0, 1] < 0.15


def test_method2_recovers_simulated_correlation():
    K = ideal_cov_method2(pair_data(0.6, 5000, seed=3), 2.0).K
    assert abs(K[0, 1] - 0.6) < 0.05


def test_method2_beats_reference_grid():
    data = pair_data(0.4, 400, seed=9)
    k = ideal_cov_method2(data, 2.0).K[0, 1]
    grid = np.linspace(EPSILON, CAP, 200)
    cols = data.values[:, 0], data.values[:, 1]
    prof = pair_loglik_profile(*cols, 2.0, grid)
    assert pair_loglik_profile(*cols, 2.0, [k])[0] >= prof.max()
    assert abs(grid[np.argmax(prof)] - k) <= grid[1] - grid[0]


def test_profile_of_identical_columns_increasing(rng):
    x = 1.0 / -np.log(rng.uniform(size=200))
    prof = pair_loglik_profile(x, x, 2.0, np.linspace(0, CAP, 100))
    assert np.all(np.isfinite(prof))
    assert np.all(np.diff(prof) > 0)


def test_profile_grid_checked(rng):
    with pytest.raises(ValidationError):
        pair_loglik_profile(np.ones(3), np.ones(3), 2.0, [1.0])


def test_ideal_distances_examples():
    K = np.array([[1.0, np.exp(-3.0)], [np.exp(-3.0), 1.0]])
    assert ideal_distances(K, CovFunction.powexp(1.0))[0, 1] == pytest.approx(3.0)
    K = np.array([[1.0, 0.99], [0.99, 1.0]])
    D = ideal_distances(K, CovFunction.powexp(2.0))
    assert D[0, 1] == pytest.approx(np.sqrt(-np.log(0.99)), rel=1e-14)
    np.testing.assert_allclose(cov_value(CovFunction.powexp(2.0), D), K, atol=1e-10)


def test_cache_writes_once(tmp_path, rng):
    z = 1.0 / -np.log(rng.uniform(size=(50, 3)))
    cache = IdealCovCache(tmp_path, ["a", "b", "c"])
    first = cache.get(z, 2.0)
    path = tmp_path / IdealCovCache.filename(2, 2.0)
    assert path.name == "K2_sigma2.0.csv" and path.exists()
    again = IdealCovCache(tmp_path, ["a", "b", "c"]).get(z, 2.0)
    np.testing.assert_array_equal(first.K, again.K)
    with pytest.raises(ValidationError):
        IdealCovCache(tmp_path, ["x", "y", "z"]).get(z, 2.0)
