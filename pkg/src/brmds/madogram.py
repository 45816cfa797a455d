"""F-madogram estimates of pairwise extremal coefficients."""

from __future__ import annotations

import numpy as np
from scipy.stats import rankdata

from .errors import DimensionMismatch, ValidationError


def _ecdf(values):
    """Plotting-position ranks ``rank / (p + 1)`` column by column (average ties)."""
    values = np.asarray(values, dtype=float)
    return rankdata(values, axis=0, method="average") / (values.shape[0] + 1)


def _theta_from_madogram(nu_f):
    with np.errstate(divide="ignore"):
        theta = (1.0 + 2.0 * nu_f) / (1.0 - 2.0 * nu_f)
    return np.clip(theta, 1.0, 2.0)


def f_madogram_theta(col_i, col_j) -> float:
    col_i = np.asarray(col_i, dtype=float)
    col_j = np.asarray(col_j, dtype=float)
    if col_i.shape != col_j.shape or col_i.ndim != 1:
        raise DimensionMismatch("columns must be 1-D and of equal length")
    if col_i.size < 2:
        raise ValidationError("need at least two observations")
    F = _ecdf(np.column_stack([col_i, col_j]))
    nu_f = 0.5 * np.mean(np.abs(F[:, 0] - F[:, 1]))
    return float(_theta_from_madogram(nu_f))


def extremal_matrix(data) -> np.ndarray:
    """Symmetric matrix of F-madogram estimates clamped to [1, 2], unit diagonal."""
    values = np.asarray(getattr(data, "values", data), dtype=float)
    if values.ndim != 2 or values.shape[0] < 2:
        raise ValidationError("need a p x n table with p >= 2")
    F = _ecdf(values)
    n = F.shape[1]
    out = np.ones((n, n))
    for i in range(n - 1):
        nu_f = 0.5 * np.mean(np.abs(F[:, i + 1 :] - F[:, [i]]), axis=0)
        row = _theta_from_madogram(nu_f)
        out[i, i + 1 :] = row
        out[i + 1 :, i] = row
    return out


def theta_mse(model_theta, theta_hat) -> float:
    """Mean squared extremal-coefficient misfit over all n**2 entries."""
    a = np.asarray(model_theta, dtype=float)
    b = np.asarray(theta_hat, dtype=float)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} do not match")
    n = a.shape[0]
    return float(np.sum((a - b) ** 2) / n**2)
