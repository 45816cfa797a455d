"""Gridded maps of the pairwise extremal coefficient with a reference point."""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from .brown_resnick import extremal_coefficient
from .covariance import cov_value
from .data import StationSet
from .errors import UnknownStation, ValidationError
from .io import write_rows
from .kriging import fit_kriging

DEFAULT_ELEVATION = 500.0
MAP_HEADER = ["easting", "northing", "elevation", "theta"]


def map_grid(bbox, resolution: float) -> np.ndarray:
    """Regular (easting, northing) grid over ``bbox = (e_min, e_max, n_min, n_max)``, row-major in northing."""
    e0, e1, n0, n1 = map(float, bbox)
    if not all(np.isfinite([e0, e1, n0, n1])) or e1 < e0 or n1 < n0:
        raise ValidationError(f"bad bounding box {bbox}")
    if not resolution > 0:
        raise ValidationError("map resolution must be positive")
    es = np.arange(e0, e1 + 0.5 * resolution, resolution)
    ns = np.arange(n0, n1 + 0.5 * resolution, resolution)
    E, N = np.meshgrid(es, ns, indexing="xy")
    return np.column_stack([E.ravel(), N.ravel()])


def grid_elevation(xy, elevation=DEFAULT_ELEVATION) -> np.ndarray:
    """Elevation at grid points: a constant, or nearest node of a raster given as columns."""
    xy = np.asarray(xy, dtype=float)
    if np.isscalar(elevation):
        return np.full(xy.shape[0], float(elevation))
    raster = np.column_stack([elevation["easting"], elevation["northing"]])
    _, idx = cKDTree(raster).query(xy)
    return np.asarray(elevation["elevation"], dtype=float)[idx]


def _reference_location(stations: StationSet | None, reference) -> np.ndarray:
    if isinstance(reference, str):
        if stations is None or reference not in stations.ids:
            raise UnknownStation(f"unknown reference station {reference!r}")
        return stations.coords[stations.index(reference)]
    ref = np.asarray(reference, dtype=float)
    if ref.shape != (3,):
        raise ValidationError("reference must be a station id or an (easting, northing, elevation) vector")
    return ref


def theta_map_values(model, reference, points) -> np.ndarray:
    """Model extremal coefficient between ``reference`` and each 3-D point."""
    ref = _reference_location(model.stations, reference)
    y_ref = model.locate(ref)
    y = model.locate(points)
    h = np.linalg.norm(y - y_ref, axis=1)
    return np.asarray(extremal_coefficient(model.sigma, cov_value(model.cov, h)), dtype=float)


def observed_theta_map_values(theta_hat, stations: StationSet, reference: str, points, seed: int = 0) -> np.ndarray:
    """Krige the reference station's row of estimated coefficients, clamped to [1, 2]."""
    if reference not in stations.ids:
        raise UnknownStation(f"unknown reference station {reference!r}")
    row = np.asarray(theta_hat, dtype=float)[stations.index(reference)]
    krig = fit_kriging(stations.coords, row, seed=seed)
    return np.clip(krig.predict(points), 1.0, 2.0)


def _grid_points(bbox, resolution, elevation):
    xy = map_grid(bbox, resolution)
    return np.column_stack([xy, grid_elevation(xy, elevation)])


def _write_map(path, pts, theta):
    if path is not None:
        write_rows(path, MAP_HEADER, [(*p, t) for p, t in zip(pts.tolist(), theta.tolist())])


def export_theta_map(path, model, reference, resolution, bbox, elevation=DEFAULT_ELEVATION):
    """Write ``easting,northing,elevation,theta`` for the fitted model; returns (points, theta)."""
    pts = _grid_points(bbox, resolution, elevation)
    theta = theta_map_values(model, reference, pts)
    _write_map(path, pts, theta)
    return pts, theta


def export_observed_theta_map(path, theta_hat, stations, reference, resolution, bbox, elevation=DEFAULT_ELEVATION):
    """Kriged map of the observed coefficients, same layout as :func:`export_theta_map`."""
    pts = _grid_points(bbox, resolution, elevation)
    theta = observed_theta_map_values(theta_hat, stations, reference, pts)
    _write_map(path, pts, theta)
    return pts, theta
