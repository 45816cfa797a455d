"""Ideal covariance matrices K* and the ideal distance matrix D* = k^{-1}(K*)."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .brown_resnick import PairData, cov_from_theta
from .covariance import CovFunction, matrix_inverse_map
from .errors import DegenerateDependence, ValidationError

log = logging.getLogger(__name__)

EPSILON = float(np.exp(-3.0))
CAP = 0.99
N_COARSE = 50
GOLDEN_TOL = 1e-7
_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class IdealCovMatrix:
    K: np.ndarray
    method: int
    sigma: float
    epsilon: float = EPSILON

    def __post_init__(self):
        K = np.asarray(self.K, dtype=float)
        if K.ndim != 2 or K.shape[0] != K.shape[1]:
            raise ValidationError("ideal covariance must be square")
        object.__setattr__(self, "K", K)


def _check_args(sigma, epsilon):
    if not sigma > 0:
        raise ValidationError(f"sigma must be positive, got {sigma}")
    if not 0 < epsilon < CAP:
        raise ValidationError(f"epsilon must lie in (0, {CAP}), got {epsilon}")


def ideal_cov_method1(theta_hat, sigma: float, epsilon: float = EPSILON) -> IdealCovMatrix:
    """Invert each estimated extremal coefficient, then clamp into [epsilon, 0.99]."""
    _check_args(sigma, epsilon)
    theta_hat = np.asarray(theta_hat, dtype=float)
    K = np.clip(cov_from_theta(sigma, np.clip(theta_hat, 1.0, 2.0)), epsilon, CAP)
    K = 0.5 * (K + K.T)
    np.fill_diagonal(K, 1.0)
    return IdealCovMatrix(K, 1, float(sigma), float(epsilon))


def pair_loglik_profile(col_i, col_j, sigma: float, k_grid) -> np.ndarray:
    """``l_ij(k)`` for a single pair at every grid value of the correlation."""
    k_grid = np.asarray(k_grid, dtype=float)
    if np.any(k_grid < 0) or np.any(k_grid > CAP):
        raise ValidationError(f"profile grid must lie within [0, {CAP}]")
    values = np.column_stack([np.asarray(col_i, dtype=float), np.asarray(col_j, dtype=float)])
    pairs = PairData(values, np.zeros(k_grid.size, dtype=int), np.ones(k_grid.size, dtype=int))
    return pairs.terms(sigma, k_grid)


def _argmax_pairs(pairs: PairData, sigma, lo, hi, n_coarse=N_COARSE, tol=GOLDEN_TOL):
    """Coarse grid then golden-section refinement, vectorized over pairs."""
    m = pairs.lx.shape[1]
    grid = np.linspace(lo, hi, n_coarse)
    vals = np.empty((n_coarse, m))
    for g, k in enumerate(grid):
        vals[g] = pairs.terms(sigma, np.full(m, k))
    best = np.argmax(vals, axis=0)
    best_k = grid[best]
    best_v = vals[best, np.arange(m)]
    a = grid[np.maximum(best - 1, 0)]
    b = grid[np.minimum(best + 1, n_coarse - 1)]
    x1 = b - _INVPHI * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1 = pairs.terms(sigma, x1)
    f2 = pairs.terms(sigma, x2)
    while np.max(b - a) > tol:
        left = f1 >= f2
        # keep [a, x2] where f1 wins, [x1, b] otherwise
        b = np.where(left, x2, b)
        a = np.where(left, a, x1)
        new_x1 = b - _INVPHI * (b - a)
        new_x2 = a + _INVPHI * (b - a)
        fresh = pairs.terms(sigma, np.where(left, new_x1, new_x2))
        x1, x2 = np.where(left, new_x1, x2), np.where(left, x1, new_x2)
        f1, f2 = np.where(left, fresh, f2), np.where(left, f1, fresh)
    mid = 0.5 * (a + b)
    cand_k = np.vstack([best_k, x1, x2, mid])
    cand_v = np.vstack([best_v, f1, f2, pairs.terms(sigma, mid)])
    pick = np.argmax(cand_v, axis=0)
    return cand_k[pick, np.arange(m)], cand_v[pick, np.arange(m)]


def ideal_cov_method2(data, sigma: float, epsilon: float = EPSILON) -> IdealCovMatrix:
    """Per-pair maximizer of the pairwise likelihood contribution over [epsilon, 0.99]."""
    _check_args(sigma, epsilon)
    values = np.asarray(getattr(data, "values", data), dtype=float)
    n = values.shape[1]
    iu, ju = np.triu_indices(n, 1)
    K = np.eye(n)
    if iu.size:
        pairs = PairData(values, iu, ju)
        with np.errstate(all="ignore"):
            k_best, v_best = _argmax_pairs(pairs, sigma, max(epsilon, 0.0), CAP)
        if not np.all(np.isfinite(v_best)):
            raise DegenerateDependence("pair likelihood not finite on the search interval")
        k_best = np.maximum(k_best, epsilon)
        K[iu, ju] = k_best
        K[ju, iu] = k_best
    return IdealCovMatrix(K, 2, float(sigma), float(epsilon))


def ideal_distances(K, f: CovFunction) -> np.ndarray:
    """Ideal interdistances ``k^{-1}(K*)``; off-diagonal entries are positive."""
    K = K.K if isinstance(K, IdealCovMatrix) else np.asarray(K, dtype=float)
    return matrix_inverse_map(f, K)


def build_ideal_cov(method: int, sigma: float, data=None, theta_hat=None, epsilon: float = EPSILON) -> IdealCovMatrix:
    if method == 1:
        if theta_hat is None:
            raise ValidationError("method 1 needs estimated extremal coefficients")
        return ideal_cov_method1(theta_hat, sigma, epsilon)
    if method == 2:
        if data is None:
            raise ValidationError("method 2 needs Fréchet-scale data")
        return ideal_cov_method2(data, sigma, epsilon)
    raise ValidationError(f"unknown method {method!r}")


class IdealCovCache:
    """Write-once, read-many store of method-2 matrices, one CSV per sigma.

    Files are named ``K2_sigma<sigma:.1f>.csv`` inside ``directory``; with
    ``directory=None`` the cache lives in memory only.
    """

    def __init__(self, directory=None, station_ids=None, epsilon: float = EPSILON):
        self.directory = None if directory is None else Path(directory)
        self.station_ids = None if station_ids is None else list(station_ids)
        self.epsilon = epsilon
        self._mem: dict[str, IdealCovMatrix] = {}

    @staticmethod
    def filename(method: int, sigma: float) -> str:
        return f"K{method}_sigma{sigma:.1f}.csv"

    def get(self, data, sigma: float) -> IdealCovMatrix:
        from .io import read_square_matrix, write_square_matrix

        key = self.filename(2, sigma)
        if key in self._mem:
            return self._mem[key]
        ids = self.station_ids
        if ids is None:
            ids = getattr(data, "station_ids", None) or range(np.shape(data)[1])
        ids = [str(i) for i in ids]
        path = None if self.directory is None else self.directory / key
        if path is not None and path.exists():
            K, file_ids = read_square_matrix(path)
            if file_ids != ids:
                raise ValidationError(f"cached matrix {path} was built for different stations")
            out = IdealCovMatrix(K, 2, float(sigma), self.epsilon)
        else:
            out = ideal_cov_method2(data, sigma, self.epsilon)
            if path is not None:
                path.parent.mkdir(parents=True, exist_ok=True)
                write_square_matrix(path, out.K, ids)
                log.info("cached %s", path)
        self._mem[key] = out
        return out
