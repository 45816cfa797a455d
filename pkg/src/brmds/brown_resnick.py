"""Brown-Resnick (geometric Gaussian) bivariate model.

For a pair of sites with Gaussian correlation ``k`` and model parameter
``sigma`` the dependence is summarised by ``nu = sqrt(sigma**2 (1 - k) / 2)``.
The bivariate distribution on unit-Fréchet margins is of Hüsler-Reiss type::

    F(x, y) = exp(-V(x, y)),
    V(x, y) = Phi(q1) / x + Phi(q2) / y,
    q1 = nu + log(y / x) / (2 nu),   q2 = nu - log(y / x) / (2 nu).

Because ``phi(q1) / x == phi(q2) / y`` the partial derivatives collapse to
``V_x = -Phi(q1) / x**2``, ``V_y = -Phi(q2) / y**2`` and
``V_xy = -phi(q1) / (2 nu x**2 y)``, which gives the density
``f = F * (V_x V_y - V_xy)`` used below.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, ndtr, ndtri

from .errors import DegenerateDependence, DimensionMismatch, OutOfRange, ValidationError

NU_MIN = 1e-6
_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


@dataclass(frozen=True)
class BrParams:
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValidationError(f"Brown-Resnick sigma must be positive, got {self.sigma}")


def _check_sigma(sigma):
    if not np.all(np.asarray(sigma) > 0):
        raise ValidationError(f"Brown-Resnick sigma must be positive, got {sigma}")


def _scalar(x):
    return x if np.ndim(x) else float(x)


def nu_from_cov(sigma, k):
    """Pair dependence ``nu`` from the Gaussian correlation ``k <= 1``."""
    _check_sigma(sigma)
    k = np.asarray(k, dtype=float)
    if np.any(k > 1.0 + 1e-12):
        raise OutOfRange("correlation must not exceed 1")
    return _scalar(np.sqrt(np.asarray(sigma) ** 2 * np.maximum(1.0 - k, 0.0) / 2.0))


def extremal_coefficient(sigma, k):
    """Pairwise extremal coefficient ``2 Phi(nu)``, in [1, 2)."""
    return _scalar(2.0 * ndtr(nu_from_cov(sigma, k)))


def cov_from_theta(sigma, theta):
    """Invert :func:`extremal_coefficient`; ``theta = 2`` maps to ``-inf``."""
    _check_sigma(sigma)
    theta = np.asarray(theta, dtype=float)
    if np.any(~(theta >= 1.0) | ~(theta <= 2.0)):
        raise OutOfRange("extremal coefficient must lie in [1, 2]")
    with np.errstate(over="ignore"):
        q = ndtri(theta / 2.0)
        out = 1.0 - (2.0 / np.asarray(sigma) ** 2) * q * q
    return _scalar(out)


def exponent_function(z_i, z_j, nu):
    """Bivariate exponent function ``V``; complete dependence below ``NU_MIN``."""
    z_i, z_j, nu = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (z_i, z_j, nu)))
    small = nu < NU_MIN
    safe_nu = np.where(small, 1.0, nu)
    L = np.log(z_j) - np.log(z_i)
    half = L / (2.0 * safe_nu)
    V = ndtr(safe_nu + half) / z_i + ndtr(safe_nu - half) / z_j
    V = np.where(small, 1.0 / np.minimum(z_i, z_j), V)
    return _scalar(V)


def bivariate_cdf(z_i, z_j, nu):
    """Joint distribution function of a unit-Fréchet Brown-Resnick pair."""
    return _scalar(np.exp(-np.asarray(exponent_function(z_i, z_j, nu))))


def bivariate_log_density(z_i, z_j, nu):
    """Log of the mixed second derivative of :func:`bivariate_cdf`.

    Exactly symmetric in ``(z_i, z_j)``. Raises DegenerateDependence when
    ``nu <= NU_MIN``.
    """
    z_i, z_j, nu = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (z_i, z_j, nu)))
    if np.any(nu <= NU_MIN):
        raise DegenerateDependence(f"nu must exceed {NU_MIN} for a proper density")
    return _scalar(log_density_from_logs(np.log(z_i), np.log(z_j), nu))


def log_density_from_logs(lx, ly, nu):
    """Log density given ``log z_i``, ``log z_j``; no validation of ``nu``."""
    L = ly - lx
    half = L / (2.0 * nu)
    q1 = nu + half
    q2 = nu - half
    V = ndtr(q1) * np.exp(-lx) + ndtr(q2) * np.exp(-ly)
    slog = lx + ly
    log_a = log_ndtr(q1) + log_ndtr(q2) - 2.0 * slog
    log_b = -0.5 * nu * nu - L * L / (8.0 * nu * nu) - _HALF_LOG_2PI - np.log(2.0 * nu) - 1.5 * slog
    return -V + np.logaddexp(log_a, log_b)


def _as_values(data):
    values = getattr(data, "values", data)
    return np.asarray(values, dtype=float)


def _check_cov(cov, n):
    cov = np.asarray(cov, dtype=float)
    if cov.shape != (n, n):
        raise DimensionMismatch(f"covariance must be {n} x {n}, got {cov.shape}")
    if not np.allclose(cov, cov.T, rtol=0, atol=1e-12):
        raise ValidationError("covariance matrix must be symmetric")
    if not np.allclose(np.diag(cov), 1.0, rtol=0, atol=1e-12):
        raise ValidationError("covariance matrix must have a unit diagonal")
    return cov


def _log_phi(q):
    """``log Phi(q)``; the plain form is accurate away from the left tail and much cheaper."""
    with np.errstate(divide="ignore"):
        out = np.log(ndtr(q))
    tail = q < -5.0
    if np.any(tail):
        out[tail] = log_ndtr(q[tail])
    return out


class PairData:
    """Log-data of station pairs, shaped (p, m), reused across many likelihood calls.

    By default all pairs ``i < j`` are taken in ``triu_indices`` order.
    """

    def __init__(self, data, iu=None, ju=None):
        z = _as_values(data)
        if iu is None:
            iu, ju = np.triu_indices(z.shape[1], 1)
        self.iu, self.ju = np.asarray(iu), np.asarray(ju)
        logz = np.log(z)
        self.lx = logz[:, self.iu]
        self.ly = logz[:, self.ju]
        # nu-independent pieces of the log density
        self._L = self.ly - self.lx
        self._L2 = self._L * self._L
        self._slog = self.lx + self.ly

    def terms_nu(self, nu):
        nu = np.asarray(nu, dtype=float)
        if np.any(nu <= NU_MIN):
            raise DegenerateDependence(f"nu must exceed {NU_MIN} for a proper density")
        nu = np.broadcast_to(nu, self.iu.shape)[None, :]
        half = self._L * (0.5 / nu)
        l1 = _log_phi(nu + half)
        l2 = _log_phi(nu - half)
        V = np.exp(l1 - self.lx) + np.exp(l2 - self.ly)
        log_a = l1 + l2 - 2.0 * self._slog
        log_b = (-0.5 * nu * nu - _HALF_LOG_2PI - np.log(2.0 * nu)) - self._L2 * (0.125 / (nu * nu)) - 1.5 * self._slog
        return (np.logaddexp(log_a, log_b) - V).sum(axis=0)

    def terms(self, sigma, k):
        """Per-pair ``l_ij`` at correlations ``k`` (one per pair)."""
        return self.terms_nu(nu_from_cov(sigma, np.broadcast_to(k, self.iu.shape)))


def pair_loglik_terms(data, cov, sigma):
    """Per-pair contributions ``l_ij`` in ``triu_indices(n, 1)`` order."""
    z = _as_values(data)
    cov = _check_cov(cov, z.shape[1])
    pairs = PairData(z)
    return pairs.terms(sigma, cov[pairs.iu, pairs.ju])


def pairwise_loglik(data, cov, sigma) -> float:
    """Pairwise composite log-likelihood summed over all pairs and years."""
    return float(np.sum(pair_loglik_terms(data, cov, sigma)))


def pair_loglik_matrix(data, cov, sigma):
    """Symmetric n x n matrix of ``l_ij`` with a zero diagonal."""
    terms = pair_loglik_terms(data, cov, sigma)
    n = _as_values(data).shape[1]
    out = np.zeros((n, n))
    iu, ju = np.triu_indices(n, 1)
    out[iu, ju] = terms
    out[ju, iu] = terms
    return out
