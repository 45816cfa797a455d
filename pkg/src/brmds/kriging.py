"""Ordinary kriging with a separable anisotropic exponential covariance.

The covariance between points ``x`` and ``x'`` is
``s2 * (exp(-sum_k |x_k - x'_k| / r_k) + nugget * [x == x'])``; the nugget
is a relative jitter that enters the kernel at zero distance, so the
predictor still interpolates the training values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg, optimize

from .errors import NonConvergence, SingularCovariance, ValidationError

NUGGET = 1e-8
RANGE_BOUNDS = (1e-2, 1e4)
N_STARTS = 5


def _corr(A, B, ranges):
    diff = np.abs(A[:, None, :] - B[None, :, :]) / ranges
    return np.exp(-diff.sum(axis=2))


@dataclass
class OrdinaryKriging:
    """Fitted ordinary-kriging predictor of one scalar field."""

    X: np.ndarray
    y: np.ndarray
    ranges: np.ndarray
    nugget: float = NUGGET

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        self.ranges = np.asarray(self.ranges, dtype=float)
        n = self.X.shape[0]
        C = _corr(self.X, self.X, self.ranges) + self.nugget * np.eye(n)
        try:
            self._cho = linalg.cho_factor(C, lower=True)
        except linalg.LinAlgError:
            raise SingularCovariance("kriging covariance is not positive definite") from None
        ones = np.ones(n)
        ci1 = linalg.cho_solve(self._cho, ones)
        self.mean = float(ci1 @ self.y / (ci1 @ ones))
        self._weights = linalg.cho_solve(self._cho, self.y - self.mean)
        resid = self.y - self.mean
        self.variance = float(resid @ self._weights / n)

    def predict(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        r = _corr(points, self.X, self.ranges)
        r[np.all(points[:, None, :] == self.X[None, :, :], axis=2)] += self.nugget
        return self.mean + r @ self._weights

    def loo_residuals(self) -> np.ndarray:
        """Leave-one-out prediction errors at fixed covariance parameters."""
        n = self.X.shape[0]
        out = np.empty(n)
        for i in range(n):
            keep = np.arange(n) != i
            sub = OrdinaryKriging(self.X[keep], self.y[keep], self.ranges, self.nugget)
            out[i] = sub.predict(self.X[i])[0] - self.y[i]
        return out


def concentrated_nll(log_ranges, X, y, nugget=NUGGET) -> float:
    """Negative log-likelihood with mean and variance profiled out (up to constants)."""
    n = X.shape[0]
    C = _corr(X, X, np.exp(log_ranges)) + nugget * np.eye(n)
    try:
        cho = linalg.cho_factor(C, lower=True)
    except linalg.LinAlgError:
        return np.inf
    ones = np.ones(n)
    ci1 = linalg.cho_solve(cho, ones)
    mu = ci1 @ y / (ci1 @ ones)
    e = y - mu
    s2 = e @ linalg.cho_solve(cho, e) / n
    if not s2 > 0:
        return np.inf
    logdet = 2.0 * np.sum(np.log(np.diag(cho[0])))
    return float(0.5 * n * np.log(s2) + 0.5 * logdet)


def fit_kriging(X, y, nugget=NUGGET, bounds=RANGE_BOUNDS, n_starts=N_STARTS, seed=0) -> OrdinaryKriging:
    """Maximum-likelihood ranges by multi-start Nelder-Mead on log-ranges."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValidationError("kriging inputs must be n x m points with n values")
    n, m = X.shape
    if n < 2:
        raise ValidationError("kriging needs at least two points")
    rounded = {tuple(row) for row in X}
    if len(rounded) < n:
        raise SingularCovariance("two training locations coincide")
    lo, hi = np.log(bounds[0]), np.log(bounds[1])
    spread = np.ptp(X, axis=0)
    base = np.clip(np.log(np.where(spread > 0, spread, 1.0)), lo, hi)
    if np.ptp(y) == 0:
        return OrdinaryKriging(X, y, np.exp(base), nugget)

    rng = np.random.default_rng(seed)
    starts = [base, base - np.log(3.0)]
    while len(starts) < n_starts:
        starts.append(base + rng.uniform(-2.0, 1.0, size=m))
    best = None
    for s0 in starts:
        s0 = np.clip(s0, lo, hi)
        res = optimize.minimize(
            concentrated_nll,
            s0,
            args=(X, y, nugget),
            method="Nelder-Mead",
            bounds=[(lo, hi)] * m,
            options={"xatol": 1e-4, "fatol": 1e-8, "maxiter": 2000},
        )
        if np.isfinite(res.fun) and (best is None or res.fun < best.fun):
            best = res
    if best is None:
        raise NonConvergence("no kriging range optimization produced a finite likelihood")
    return OrdinaryKriging(X, y, np.exp(np.clip(best.x, lo, hi)), nugget)
