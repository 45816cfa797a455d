"""Classical scaling and Sammon mapping."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DimensionMismatch, NonFiniteGradient, ValidationError, ZeroDissimilarity

log = logging.getLogger(__name__)

JITTER = 1e-9


@dataclass(frozen=True)
class Embedding:
    coords: np.ndarray
    stress: float = float("nan")
    n_iter: int = 0

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        if coords.ndim != 2 or coords.shape[1] < 1:
            raise DimensionError("embedding must be an n x d array with d >= 1")
        if not np.all(np.isfinite(coords)):
            raise ValidationError("embedding coordinates must be finite")
        object.__setattr__(self, "coords", coords)

    @property
    def d(self) -> int:
        return self.coords.shape[1]

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    def distances(self) -> np.ndarray:
        return pairwise_distances(self.coords)


def pairwise_distances(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    diff = X[:, None, :] - X[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def check_dissimilarity(D) -> np.ndarray:
    D = np.asarray(D, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise DimensionMismatch(f"dissimilarity matrix must be square, got {D.shape}")
    if not np.all(np.isfinite(D)) or np.any(D < 0):
        raise ValidationError("dissimilarities must be finite and nonnegative")
    if not np.allclose(D, D.T, rtol=0, atol=1e-12):
        raise ValidationError("dissimilarity matrix must be symmetric")
    if np.any(np.diag(D) != 0):
        raise ValidationError("dissimilarity matrix must have a zero diagonal")
    return D


def _coords(X):
    return X.coords if isinstance(X, Embedding) else np.asarray(X, dtype=float)


def classical_scaling(D, d: int) -> Embedding:
    """Torgerson scaling: top-``d`` eigenpairs of the double-centred squared distances.

    Negative eigenvalues are clamped to zero, so non-Euclidean targets still
    produce a (degenerate-direction) embedding.
    """
    D = check_dissimilarity(D)
    n = D.shape[0]
    if not 1 <= d <= n - 1:
        raise DimensionError(f"dimension must be in [1, {n - 1}], got {d}")
    J = np.eye(n) - np.full((n, n), 1.0 / n)
    B = -0.5 * J @ (D * D) @ J
    B = 0.5 * (B + B.T)
    evals, evecs = np.linalg.eigh(B)
    order = np.argsort(evals)[::-1][:d]
    lam = np.maximum(evals[order], 0.0)
    X = evecs[:, order] * np.sqrt(lam)
    X -= X.mean(axis=0)
    return Embedding(X)


def raw_stress(X, D, weights=None) -> float:
    X = _coords(X)
    D = np.asarray(D, dtype=float)
    if D.shape != (X.shape[0], X.shape[0]):
        raise DimensionMismatch(f"embedding has {X.shape[0]} points, dissimilarity is {D.shape}")
    iu = np.triu_indices(X.shape[0], 1)
    resid = pairwise_distances(X)[iu] - D[iu]
    w = 1.0 if weights is None else np.asarray(weights, dtype=float)[iu]
    return float(np.sum(w * resid**2))


def _check_positive(D):
    n = D.shape[0]
    off = ~np.eye(n, dtype=bool)
    if np.any(D[off] <= 0):
        raise ZeroDissimilarity("Sammon stress needs strictly positive off-diagonal dissimilarities")


def sammon_stress(X, D) -> float:
    """Sum over pairs of ``(d_ij - D_ij)**2 / D_ij``."""
    X = _coords(X)
    D = np.asarray(D, dtype=float)
    if D.shape != (X.shape[0], X.shape[0]):
        raise DimensionMismatch(f"embedding has {X.shape[0]} points, dissimilarity is {D.shape}")
    _check_positive(D)
    iu = np.triu_indices(X.shape[0], 1)
    resid = pairwise_distances(X)[iu] - D[iu]
    return float(np.sum(resid**2 / D[iu]))


def _grad_hess(X, D, dist):
    n = X.shape[0]
    Dsafe = D + np.eye(n)
    dsafe = dist + np.eye(n)
    diff = X[:, None, :] - X[None, :, :]
    coef = 2.0 * (dist - D) / (Dsafe * dsafe)
    np.fill_diagonal(coef, 0.0)
    grad = np.einsum("ij,ijk->ik", coef, diff)
    inv3 = 1.0 / dsafe**3
    np.fill_diagonal(inv3, 0.0)
    hess = coef.sum(axis=1)[:, None] + 2.0 * np.einsum("ij,ijk->ik", inv3, diff**2)
    return grad, hess


def sammon_gradient(X, D) -> np.ndarray:
    """Analytic gradient of :func:`sammon_stress` with respect to the coordinates."""
    X = _coords(X)
    D = np.asarray(D, dtype=float)
    _check_positive(D)
    return _grad_hess(X, D, pairwise_distances(X))[0]


def _separate(X):
    """Nudge coincident points apart by a deterministic 1e-9 offset."""
    X = X.copy()
    n = X.shape[0]
    for _ in range(n):
        dist = pairwise_distances(X) + np.eye(n)
        hits = np.argwhere(np.triu(dist == 0, 1))
        if not len(hits):
            return X
        j = hits[0, 1]
        X[j, j % X.shape[1]] += JITTER * (1 + j)
    raise NonFiniteGradient("could not separate coincident points")


def sammon_mds(D, d: int, max_iter: int = 500, tol: float = 1e-9, step: float = 0.3, max_halvings: int = 20, init=None) -> Embedding:
    """Sammon mapping started from classical scaling.

    Uses Sammon's pseudo-Newton update ``X -= step * grad / |diag hess|``;
    a step that would raise the stress is halved, and iteration stops when
    the relative improvement falls below ``tol`` or no halving helps.
    """
    D = check_dissimilarity(D)
    _check_positive(D)
    X = classical_scaling(D, d).coords if init is None else np.array(_coords(init), dtype=float)
    X = _separate(X)
    iu = np.triu_indices(D.shape[0], 1)
    Dv = D[iu]

    def stress_of(dist):
        return float(np.sum((dist[iu] - Dv) ** 2 / Dv))

    dist = pairwise_distances(X)
    E = stress_of(dist)
    it = 0
    for it in range(1, max_iter + 1):
        if E == 0.0:
            break
        grad, hess = _grad_hess(X, D, dist)
        if not (np.all(np.isfinite(grad)) and np.all(np.isfinite(hess))):
            raise NonFiniteGradient("Sammon gradient is not finite")
        direction = -grad / np.maximum(np.abs(hess), 1e-300)
        s = step
        accepted = False
        for _ in range(max_halvings + 1):
            X_new = X + s * direction
            dist_new = pairwise_distances(X_new)
            if np.any(dist_new[iu] == 0):
                X_new = _separate(X_new)
                dist_new = pairwise_distances(X_new)
            E_new = stress_of(dist_new)
            if E_new <= E:
                accepted = True
                break
            s *= 0.5
        if not accepted:
            break
        improvement = (E - E_new) / E
        X, dist, E = X_new, dist_new, E_new
        if improvement < tol:
            break
    return Embedding(X, stress=E, n_iter=it)
