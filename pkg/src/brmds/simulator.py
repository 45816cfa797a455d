"""Truncated spectral simulation of the geometric-Gaussian max-stable process.

Each replicate is ``max_i eta_i * exp(sigma * W_i - sigma**2 / 2)`` where
``eta_i = 1 / Gamma_i`` are the points of a unit-rate Poisson process mapped
to intensity ``z**-2 dz`` and ``W_i`` are independent Gaussian vectors with
the stations' correlation matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .brown_resnick import extremal_coefficient
from .covariance import CovFunction, cov_value
from .data import FrechetMatrix, StationSet
from .errors import SingularCovariance, ValidationError
from .mds import pairwise_distances

W_MAX = 6.0
JITTER = 1e-10
BLOCK = 128


@dataclass(frozen=True)
class SimSpec:
    """Simulation settings.

    ``coords`` are the points at which the Gaussian process is stationary
    (physical or latent); ``corr`` may be given instead to fix the
    correlation matrix directly.
    """

    coords: np.ndarray | None
    sigma: float
    cov: CovFunction = field(default_factory=lambda: CovFunction.powexp(1.0))
    p: int = 100
    truncation: int = 1000
    seed: int = 0
    station_ids: list | None = None
    corr: np.ndarray | None = None

    def __post_init__(self):
        if isinstance(self.coords, StationSet):
            if self.station_ids is None:
                object.__setattr__(self, "station_ids", list(self.coords.ids))
            object.__setattr__(self, "coords", self.coords.coords)
        if self.coords is None and self.corr is None:
            raise ValidationError("give either coordinates or a correlation matrix")
        if not self.sigma > 0:
            raise ValidationError("sigma must be positive")
        if self.p < 1:
            raise ValidationError("need at least one replicate")
        if self.truncation < 1:
            raise ValidationError("truncation must be positive")

    def correlation(self) -> np.ndarray:
        if self.corr is not None:
            return np.asarray(self.corr, dtype=float)
        coords = np.asarray(self.coords, dtype=float)
        if coords.ndim == 1:
            coords = coords[:, None]
        return np.asarray(cov_value(self.cov, pairwise_distances(coords)))

    @property
    def n(self) -> int:
        return self.correlation().shape[0]


def _factor(C):
    """Cholesky factor of the correlation among distinct sites, plus the site map.

    Sites with correlation exactly 1 share one Gaussian draw, so perfectly
    dependent stations produce identical columns.
    """
    n = C.shape[0]
    rep = np.arange(n)
    for j in range(n):
        for i in range(j):
            if rep[i] == i and C[i, j] >= 1.0:
                rep[j] = i
                break
    uniq = np.unique(rep)
    Cu = C[np.ix_(uniq, uniq)] + JITTER * np.eye(uniq.size)
    try:
        L = np.linalg.cholesky(Cu)
    except np.linalg.LinAlgError:
        raise SingularCovariance("Gaussian correlation matrix is not positive definite") from None
    col = np.searchsorted(uniq, rep)
    return L, col


def _replicate(rng, L, col, sigma, truncation):
    m = L.shape[0]
    shift = sigma * sigma / 2.0
    bound = np.exp(sigma * W_MAX - shift)
    z = np.zeros(m)
    gamma = 0.0
    used = 0
    while used < truncation:
        e = rng.standard_exponential(BLOCK)
        g = rng.standard_normal((BLOCK, m))
        take = min(BLOCK, truncation - used)
        arrivals = gamma + np.cumsum(e[:take])
        if used and bound / (gamma + e[0]) < z.min():
            break
        W = g[:take] @ L.T
        z = np.maximum(z, (np.exp(sigma * W - shift) / arrivals[:, None]).max(axis=0))
        gamma = arrivals[-1]
        used += take
    return z[col]


def simulate_field(spec: SimSpec) -> FrechetMatrix:
    """Simulate ``spec.p`` independent replicates; one RNG stream per replicate."""
    C = spec.correlation()
    L, col = _factor(C)
    streams = np.random.SeedSequence(spec.seed).spawn(spec.p)
    out = np.empty((spec.p, C.shape[0]))
    for k, ss in enumerate(streams):
        out[k] = _replicate(np.random.default_rng(ss), L, col, spec.sigma, spec.truncation)
    ids = spec.station_ids or [f"S{i + 1:03d}" for i in range(C.shape[0])]
    return FrechetMatrix(out, ids, list(range(1, spec.p + 1)))


def true_theta_matrix(spec: SimSpec) -> np.ndarray:
    """Analytic pairwise extremal coefficients of the simulated model."""
    C = np.clip(spec.correlation(), None, 1.0)
    theta = np.asarray(extremal_coefficient(spec.sigma, C))
    np.fill_diagonal(theta, 1.0)
    return theta


@dataclass(frozen=True)
class Scenario:
    stations: StationSet
    latent: np.ndarray
    spec: SimSpec


def helix_warp(coords, scale=200.0, wavelength=60.0, amplitude=1.2):
    """Smooth map of (easting, northing) km into 4-D.

    The easting axis is wound into a helix, so stations one wavelength apart
    are closer in the latent space than stations half a wavelength apart:
    dependence that no rotated/stretched 3-D Euclidean distance reproduces.
    """
    coords = np.asarray(coords, dtype=float)
    x, y = coords[:, 0], coords[:, 1]
    phase = 2.0 * np.pi * x / wavelength
    return np.column_stack(
        [x / scale, y / scale, amplitude * np.cos(phase), amplitude * np.sin(phase)]
    )


def nonstationary_scenario(
    nx=10, ny=6, spacing=20.0, sigma=2.5, alpha=2.0, p=200, seed=0, truncation=1000
) -> Scenario:
    """Stations on a planar grid whose true dependence lives in a 4-D warp.

    With the default spacing every third column is in phase on the helix,
    so dependence is periodic in easting and no stationary model fits it.
    """
    gx, gy = np.meshgrid(np.arange(nx) * spacing, np.arange(ny) * spacing, indexing="xy")
    xy = np.column_stack([gx.ravel(), gy.ravel()])
    elevation = 500.0 + 300.0 * np.sin(xy[:, 0] / 70.0) * np.cos(xy[:, 1] / 50.0)
    ids = [f"S{i + 1:03d}" for i in range(xy.shape[0])]
    stations = StationSet(ids, np.column_stack([xy, elevation]))
    latent = helix_warp(xy)
    spec = SimSpec(latent, sigma, CovFunction.powexp(alpha), p=p, truncation=truncation, seed=seed, station_ids=ids)
    return Scenario(stations, latent, spec)
