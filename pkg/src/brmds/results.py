"""Saving fitted models and the per-grid-cell results ledger."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .covariance import CovFunction, CovKind
from .data import StationSet
from .errors import ParseError
from .fit_pipeline import ClimateTransform, FittedModel, GridRecord
from .io import _read_rows, write_rows
from .latent_warp import fixed_warp
from .mds import Embedding

LEDGER_HEADER = ["method", "d", "sigma", "alpha", "theta_mse", "loglik", "stress"]


def model_to_dict(model: FittedModel) -> dict:
    out = {
        "method": model.method,
        "d": model.d,
        "sigma": model.sigma,
        "cov": {"kind": model.cov.kind.value, "alpha": model.cov.alpha},
        "station_ids": list(model.station_ids),
        "loglik": model.loglik,
        "theta_mse": model.theta_mse,
        "trace": list(model.trace),
    }
    if model.stations is not None:
        out["stations"] = {"ids": list(model.stations.ids), "coords": model.stations.coords.tolist()}
    if model.embedding is not None:
        out["embedding"] = {"coords": model.embedding.coords.tolist(), "stress": model.embedding.stress}
    if model.warp is not None:
        out["warp_ranges"] = [p.ranges.tolist() for p in model.warp.predictors]
    if model.climate is not None:
        c = model.climate
        out["climate"] = {"beta": c.beta, "c1": c.c1, "c2": c.c2, "c3": c.c3}
    return out


def model_from_dict(obj: dict) -> FittedModel:
    try:
        cov = CovFunction(CovKind(obj["cov"]["kind"]), obj["cov"]["alpha"])
        stations = None
        if "stations" in obj:
            stations = StationSet(obj["stations"]["ids"], np.array(obj["stations"]["coords"], dtype=float))
        emb = None
        if "embedding" in obj:
            emb = Embedding(np.array(obj["embedding"]["coords"], dtype=float), obj["embedding"]["stress"])
        model = FittedModel(
            obj["sigma"],
            cov,
            obj["method"],
            obj["d"],
            stations,
            obj["station_ids"],
            embedding=emb,
            loglik=obj["loglik"],
            theta_mse=obj["theta_mse"],
            trace=obj.get("trace", []),
        )
        if "climate" in obj:
            model.climate = ClimateTransform(**obj["climate"])
        if "warp_ranges" in obj:
            model.warp = fixed_warp(stations, emb, obj["warp_ranges"])
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed model file: {exc}") from None
    return model


def save_model(path, model: FittedModel):
    Path(path).write_text(json.dumps(model_to_dict(model), indent=1), encoding="utf-8")


def load_model(path) -> FittedModel:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg}", line=exc.lineno, column=exc.colno) from None
    return model_from_dict(obj)


def write_ledger(path, records):
    """One row per evaluated (method, d, sigma, alpha)."""
    write_rows(path, LEDGER_HEADER, [(str(r.method), r.d, r.sigma, r.alpha, r.theta_mse, r.loglik, r.stress) for r in records])


def read_ledger(path) -> list[GridRecord]:
    rows = _read_rows(path)
    if [h.strip() for h in rows[0]] != LEDGER_HEADER:
        raise ParseError(f"{path}: expected header {','.join(LEDGER_HEADER)}", line=1)
    out = []
    for row in rows[1:]:
        if not row:
            continue
        method = int(row[0]) if row[0].isdigit() else row[0]
        out.append(GridRecord(method, int(row[1]), *(float(v) for v in row[2:])))
    return out

