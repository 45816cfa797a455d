"""Extend an MDS embedding to arbitrary locations by kriging each latent coordinate."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .covariance import CovFunction, cov_value
from .data import StationSet
from .errors import InsufficientStations
from .kriging import OrdinaryKriging, fit_kriging
from .mds import Embedding


@dataclass(frozen=True)
class WarpModel:
    predictors: tuple[OrdinaryKriging, ...]
    stations: StationSet
    embedding: Embedding

    @property
    def d(self) -> int:
        return len(self.predictors)


def fit_warp(stations: StationSet, emb: Embedding, seed: int = 0) -> WarpModel:
    """One ordinary-kriging model per latent coordinate, fitted by maximum likelihood."""
    n, d = emb.coords.shape
    if n != len(stations):
        raise InsufficientStations(f"embedding has {n} rows for {len(stations)} stations")
    if n < d + 2:
        raise InsufficientStations(f"need at least d + 2 = {d + 2} stations, got {n}")
    predictors = tuple(fit_kriging(stations.coords, emb.coords[:, j], seed=seed + j) for j in range(d))
    return WarpModel(predictors, stations, emb)


def fixed_warp(stations: StationSet, emb: Embedding, ranges) -> WarpModel:
    """Rebuild a warp from stored kriging ranges (no re-optimization)."""
    ranges = np.asarray(ranges, dtype=float).reshape(emb.d, -1)
    predictors = tuple(OrdinaryKriging(stations.coords, emb.coords[:, j], ranges[j]) for j in range(emb.d))
    return WarpModel(predictors, stations, emb)


def warp(model: WarpModel, location) -> np.ndarray:
    """Latent position(s) of 3-D location(s); shape (d,) or (m, d)."""
    loc = np.asarray(location, dtype=float)
    pts = np.atleast_2d(loc)
    out = np.column_stack([p.predict(pts) for p in model.predictors])
    return out[0] if loc.ndim == 1 else out


def model_cov(model: WarpModel, f: CovFunction, loc_a, loc_b):
    """Correlation of the latent Gaussian process between two physical locations."""
    ya = warp(model, loc_a)
    yb = warp(model, loc_b)
    h = np.linalg.norm(np.atleast_2d(ya) - np.atleast_2d(yb), axis=1)
    out = cov_value(f, h)
    return float(out[0]) if np.ndim(loc_a) == 1 and np.ndim(loc_b) == 1 else out
