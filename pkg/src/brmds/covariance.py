"""Isotropic correlation functions usable in any dimension, and their inverses."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import OutOfRange, ValidationError


class CovKind(str, Enum):
    POWER_EXPONENTIAL = "powexp"
    MATERN32 = "matern32"
    MATERN52 = "matern52"


@dataclass(frozen=True)
class CovFunction:
    kind: CovKind = CovKind.POWER_EXPONENTIAL
    alpha: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "kind", CovKind(self.kind))
        if self.kind is CovKind.POWER_EXPONENTIAL and not 0 < self.alpha <= 2:
            raise ValidationError(f"power-exponential exponent must be in (0, 2], got {self.alpha}")

    @classmethod
    def powexp(cls, alpha):
        return cls(CovKind.POWER_EXPONENTIAL, float(alpha))

    @classmethod
    def matern32(cls):
        return cls(CovKind.MATERN32, float("nan"))

    @classmethod
    def matern52(cls):
        return cls(CovKind.MATERN52, float("nan"))

    def label(self) -> str:
        if self.kind is CovKind.POWER_EXPONENTIAL:
            return f"powexp(alpha={self.alpha:g})"
        return self.kind.value


def _log_cov(f: CovFunction, h):
    if f.kind is CovKind.POWER_EXPONENTIAL:
        return -np.power(h, f.alpha)
    if f.kind is CovKind.MATERN32:
        return np.log1p(h) - h
    return np.log1p(h + h * h / 3.0) - h


def cov_value(f: CovFunction, h):
    h = np.asarray(h, dtype=float)
    if np.any(h < 0):
        raise OutOfRange("distances must be nonnegative")
    out = np.exp(_log_cov(f, h))
    return out if out.ndim else float(out)


def _bisect_log(f, target, n_iter=200):
    """Vectorized monotone bisection of ``log k(h) = target`` (target <= 0)."""
    hi = np.ones_like(target)
    while True:
        short = _log_cov(f, hi) > target
        if not short.any():
            break
        hi = np.where(short, hi * 2.0, hi)
    lo = np.zeros_like(target)
    for _ in range(n_iter):
        mid = 0.5 * (lo + hi)
        above = _log_cov(f, mid) > target
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
        if np.all(hi - lo <= 1e-15 * np.maximum(hi, 1.0)):
            break
    return 0.5 * (lo + hi)


def cov_inverse(f: CovFunction, c):
    """Distance ``h >= 0`` with ``cov_value(f, h) == c`` for ``c`` in (0, 1]."""
    c = np.asarray(c, dtype=float)
    if np.any(~(c > 0) | ~(c <= 1)):
        raise OutOfRange("correlation must lie in (0, 1]")
    target = np.log(c)
    if f.kind is CovKind.POWER_EXPONENTIAL:
        out = np.power(-target, 1.0 / f.alpha)
    else:
        out = _bisect_log(f, np.atleast_1d(target)).reshape(target.shape)
    out = np.where(c == 1.0, 0.0, out)
    return out if out.ndim else float(out)


def matrix_inverse_map(f: CovFunction, K) -> np.ndarray:
    """Elementwise :func:`cov_inverse` of a correlation matrix; zero diagonal."""
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValidationError("expected a square matrix")
    D = np.asarray(cov_inverse(f, K), dtype=float)
    D = 0.5 * (D + D.T)
    np.fill_diagonal(D, 0.0)
    return D
