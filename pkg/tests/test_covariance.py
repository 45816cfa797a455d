import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from brmds.covariance import CovFunction, cov_inverse, cov_value, matrix_inverse_map
from brmds.errors import OutOfRange, ValidationError

KINDS = [CovFunction.powexp(a) for a in (0.5, 1.0, 1.72, 2.0)] + [CovFunction.matern32(), CovFunction.matern52()]


def test_values():
    for f in KINDS:
        assert cov_value(f, 0.0) == 1.0
        assert cov_inverse(f, 1.0) == 0.0
    assert cov_value(CovFunction.powexp(2.0), 1.0) == pytest.approx(np.exp(-1.0), rel=1e-15)
    assert cov_value(CovFunction.matern32(), 1.0) == pytest.approx(2 * np.exp(-1.0), rel=1e-15)
    assert cov_inverse(CovFunction.powexp(2.0), np.exp(-4.0)) == pytest.approx(2.0, rel=1e-15)
    f = CovFunction.matern52()
    assert cov_inverse(f, cov_value(f, 1.7)) == pytest.approx(1.7, abs=1e-10)


def test_bad_inputs():
    with pytest.raises(ValidationError):
        CovFunction.powexp(2.5)
    with pytest.raises(OutOfRange):
        cov_inverse(CovFunction.matern32(), 0.0)
    with pytest.raises(OutOfRange):
        cov_value(CovFunction.matern32(), -1.0)


@pytest.mark.parametrize("f", KINDS, ids=lambda f: f.label())
def test_strictly_decreasing_positive(f):
    h = np.linspace(0, 6, 5001)
    c = cov_value(f, h)
    assert np.all(np.diff(c) < 0) and np.all(c > 0)


@pytest.mark.parametrize("f", KINDS, ids=lambda f: f.label())
def test_roundtrip_on_range(f):
    h = np.linspace(0, 50, 2001)
    c = cov_value(f, h)
    # beyond the normal-double range the correlation is not invertible
    ok = c >= np.finfo(float).tiny
    np.testing.assert_allclose(cov_inverse(f, c[ok]), h[ok], rtol=0, atol=1e-10 * 50)


def test_matrix_inverse_examples():
    K = np.full((3, 3), np.exp(-1.0))
    np.fill_diagonal(K, 1.0)
    D = matrix_inverse_map(CovFunction.powexp(1.0), K)
    np.testing.assert_allclose(D, 1.0 - np.eye(3), rtol=1e-15)
    K[0, 1] = K[1, 0] = np.exp(-3.0)
    D = matrix_inverse_map(CovFunction.powexp(1.0), K)
    assert D[0, 1] == pytest.approx(3.0, rel=1e-15)


@settings(max_examples=40, deadline=None)
@given(c=st.floats(1e-8, 1.0), kind=st.sampled_from(KINDS))
def test_inverse_property(c, kind):
    assert cov_value(kind, cov_inverse(kind, c)) == pytest.approx(c, rel=1e-10)
