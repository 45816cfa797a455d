"""CSV ingestion and export.

All files are UTF-8, comma separated, '.' decimal, with a mandatory header.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .data import MaximaMatrix, StationSet
from .errors import MissingData, ParseError, SchemaMismatch
from .gev_margins import GevParams, MarginFit
from .mds import Embedding

STATION_HEADER = ["station_id", "easting", "northing", "elevation"]


def _read_rows(path):
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(f"{path}: empty file", line=1)
    return rows


def _float(text, line, column, path):
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"{path}: cannot parse {text!r} as a number", line=line, column=column) from None
    if not math.isfinite(value):
        raise ParseError(f"{path}: non-finite value {text!r}", line=line, column=column)
    return value


def _fmt(x) -> str:
    return repr(float(x))


def ingest_stations(path) -> StationSet:
    """Read ``station_id,easting,northing,elevation`` (km, km, m)."""
    rows = _read_rows(path)
    header = [h.strip() for h in rows[0]]
    if header != STATION_HEADER:
        raise ParseError(f"{path}: expected header {','.join(STATION_HEADER)}", line=1)
    ids, coords = [], []
    for ln, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 4:
            raise ParseError(f"{path}: expected 4 fields, got {len(row)}", line=ln)
        ids.append(row[0].strip())
        coords.append([_float(row[c], ln, c + 1, path) for c in (1, 2, 3)])
    if len(set(ids)) != len(ids):
        raise ParseError(f"{path}: duplicate station ids")
    return StationSet(ids, np.array(coords, dtype=float).reshape(-1, 3))


def ingest_maxima(path, stations: StationSet | None = None, cls=MaximaMatrix) -> MaximaMatrix:
    """Read ``year,<id_1>,...,<id_n>``; an empty cell raises MissingData."""
    rows = _read_rows(path)
    header = [h.strip() for h in rows[0]]
    if not header or header[0] != "year":
        raise ParseError(f"{path}: first header column must be 'year'", line=1, column=1)
    ids = header[1:]
    if len(set(ids)) != len(ids):
        raise ParseError(f"{path}: duplicate station ids in header", line=1)
    years, values = [], []
    for ln, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"{path}: expected {len(header)} fields, got {len(row)}", line=ln)
        year = row[0].strip()
        try:
            year = int(year)
        except ValueError:
            raise ParseError(f"{path}: bad year {year!r}", line=ln, column=1) from None
        vals = []
        for c, cell in enumerate(row[1:], start=2):
            if not cell.strip():
                raise MissingData(
                    f"{path}: missing maximum for station {ids[c - 2]} in year {year}",
                    station=ids[c - 2],
                    year=year,
                )
            vals.append(_float(cell, ln, c, path))
        years.append(year)
        values.append(vals)
    if stations is not None:
        check_station_agreement(stations.ids, ids)
    return cls(np.array(values, dtype=float).reshape(len(years), len(ids)), ids, years)


def check_station_agreement(station_ids, data_ids):
    missing = sorted(set(station_ids) - set(data_ids))
    extra = sorted(set(data_ids) - set(station_ids))
    if missing or extra:
        parts = []
        if missing:
            parts.append(f"stations without maxima: {', '.join(missing)}")
        if extra:
            parts.append(f"maxima columns without station metadata: {', '.join(extra)}")
        raise SchemaMismatch("; ".join(parts), missing=missing, extra=extra)


def write_stations(path, stations: StationSet):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(STATION_HEADER)
        for sid, c in zip(stations.ids, stations.coords):
            w.writerow([sid, *map(_fmt, c)])


def write_maxima(path, data: MaximaMatrix):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["year", *data.station_ids])
        for year, row in zip(data.years, data.values):
            w.writerow([year, *map(_fmt, row)])


def write_square_matrix(path, matrix, ids):
    matrix = np.asarray(matrix, dtype=float)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["station_id", *ids])
        for sid, row in zip(ids, matrix):
            w.writerow([sid, *map(_fmt, row)])


def read_square_matrix(path):
    """Return ``(matrix, ids)`` from a square CSV with id header row and column."""
    rows = _read_rows(path)
    ids = [h.strip() for h in rows[0][1:]]
    body = [r for r in rows[1:] if r]
    if len(body) != len(ids):
        raise ParseError(f"{path}: expected {len(ids)} rows, got {len(body)}")
    out = np.empty((len(ids), len(ids)))
    for r, row in enumerate(body):
        ln = r + 2
        if len(row) != len(ids) + 1:
            raise ParseError(f"{path}: expected {len(ids) + 1} fields", line=ln)
        if row[0].strip() != ids[r]:
            raise ParseError(f"{path}: row id {row[0]!r} does not match column {ids[r]!r}", line=ln, column=1)
        out[r] = [_float(c, ln, c_i + 2, path) for c_i, c in enumerate(row[1:])]
    return out, ids


def write_gev_params(path, fits):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["station_id", "mu", "sigma", "xi", "J"])
        for f in fits:
            p = f.params
            w.writerow([f.station_id, _fmt(p.mu), _fmt(p.sigma_gev), _fmt(p.xi), int(f.J)])


def read_gev_params(path) -> list[MarginFit]:
    rows = _read_rows(path)
    if [h.strip() for h in rows[0]] != ["station_id", "mu", "sigma", "xi", "J"]:
        raise ParseError(f"{path}: expected header station_id,mu,sigma,xi,J", line=1)
    out = []
    for ln, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 5:
            raise ParseError(f"{path}: expected 5 fields", line=ln)
        mu, sig, xi = (_float(row[c], ln, c + 1, path) for c in (1, 2, 3))
        try:
            J = int(row[4])
        except ValueError:
            raise ParseError(f"{path}: bad neighbour count {row[4]!r}", line=ln, column=5) from None
        out.append(MarginFit(row[0].strip(), GevParams(mu, sig, xi), J, float("nan")))
    return out


def write_embedding(path, emb: Embedding, ids):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["station_id", *[f"y{j + 1}" for j in range(emb.d)]])
        for sid, row in zip(ids, emb.coords):
            w.writerow([sid, *map(_fmt, row)])


def read_embedding(path):
    """Return ``(Embedding, ids)``."""
    rows = _read_rows(path)
    d = len(rows[0]) - 1
    ids, coords = [], []
    for ln, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != d + 1:
            raise ParseError(f"{path}: expected {d + 1} fields", line=ln)
        ids.append(row[0].strip())
        coords.append([_float(c, ln, k + 2, path) for k, c in enumerate(row[1:])])
    return Embedding(np.array(coords, dtype=float).reshape(-1, d)), ids


def write_rows(path, header, rows):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def read_grid_csv(path):
    """Read a gridded ``easting,northing,elevation,...`` CSV into a dict of columns."""
    rows = _read_rows(path)
    header = [h.strip() for h in rows[0]]
    cols = {h: [] for h in header}
    for ln, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(f"{path}: expected {len(header)} fields", line=ln)
        for h, c, cell in zip(header, range(1, len(header) + 1), row):
            cols[h].append(_float(cell, ln, c, path))
    return {h: np.array(v) for h, v in cols.items()}
