"""In-memory containers for station metadata and block-maxima tables."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, MissingData, ValidationError


@dataclass(frozen=True)
class StationSet:
    """Station identifiers with planar coordinates.

    ``coords`` columns are easting (km), northing (km) and elevation (m).
    """

    ids: list[str]
    coords: np.ndarray

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        if coords.ndim != 2 or coords.shape[1] != 3:
            raise DimensionMismatch(f"station coordinates must be n x 3, got {coords.shape}")
        if len(self.ids) != coords.shape[0]:
            raise DimensionMismatch("number of ids does not match number of coordinate rows")
        if len(set(self.ids)) != len(self.ids):
            raise ValidationError("station ids must be distinct")
        if not np.all(np.isfinite(coords)):
            raise ValidationError("station coordinates must be finite")
        object.__setattr__(self, "ids", [str(s) for s in self.ids])
        object.__setattr__(self, "coords", coords)

    def __len__(self):
        return len(self.ids)

    def index(self, station_id: str) -> int:
        return self.ids.index(station_id)

    def subset(self, idx) -> StationSet:
        idx = np.asarray(idx, dtype=int)
        return StationSet([self.ids[i] for i in idx], self.coords[idx])


def _check_table(values, station_ids, years, positive=True):
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        raise DimensionMismatch(f"expected a p x n table, got shape {values.shape}")
    p, n = values.shape
    if len(station_ids) != n:
        raise DimensionMismatch(f"{len(station_ids)} station ids for {n} columns")
    if len(years) != p:
        raise DimensionMismatch(f"{len(years)} years for {p} rows")
    bad = ~np.isfinite(values)
    if bad.any():
        k, i = np.argwhere(bad)[0]
        raise MissingData(
            f"missing or non-finite value for station {station_ids[i]} in year {years[k]}",
            station=station_ids[i],
            year=years[k],
        )
    if positive and (values <= 0).any():
        k, i = np.argwhere(values <= 0)[0]
        raise ValidationError(
            f"non-positive value {values[k, i]} for station {station_ids[i]} in year {years[k]}"
        )
    return values


@dataclass(frozen=True)
class MaximaMatrix:
    """p years by n stations of block maxima (mm/day)."""

    values: np.ndarray
    station_ids: list[str]
    years: list = field(default_factory=list)

    def __post_init__(self):
        years = list(self.years) if len(self.years) else list(range(1, np.shape(self.values)[0] + 1))
        ids = [str(s) for s in self.station_ids]
        object.__setattr__(self, "years", years)
        object.__setattr__(self, "station_ids", ids)
        object.__setattr__(self, "values", _check_table(self.values, ids, years))

    @property
    def p(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def subset(self, idx):
        idx = np.asarray(idx, dtype=int)
        return type(self)(self.values[:, idx], [self.station_ids[i] for i in idx], self.years)


@dataclass(frozen=True)
class FrechetMatrix(MaximaMatrix):
    """Block maxima rescaled to unit-Fréchet margins."""
