"""``brmds`` command-line entry point."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .config import COMMANDS, RunConfig, load_config
from .covariance import CovFunction
from .data import FrechetMatrix
from .errors import BrmdsError, ValidationError
from .fit_pipeline import (
    GridSpec,
    fit_all_dimensions,
    fit_classical,
    fit_mds_model,
    holdout_experiment,
)
from .gev_margins import fit_margins, to_frechet
from .ideal_covariance import EPSILON, IdealCovCache
from .madogram import extremal_matrix
from .maps import export_observed_theta_map, export_theta_map
from .results import load_model, save_model, write_ledger
from .simulator import SimSpec, nonstationary_scenario, simulate_field

log = logging.getLogger("brmds")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="brmds", description="Max-stable dependence models in MDS-built latent spaces.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="key = value run manifest; flags override it")
        # defaults stay None so that unset flags do not mask config-file values
        for key in RunConfig.keys():
            if key == "command":
                continue
            p.add_argument("--" + key.replace("_", "-"), dest=key, default=None)
    return parser


def _need(cfg, *keys):
    for key in keys:
        if getattr(cfg, key) in (None, ""):
            raise ValidationError(f"{cfg.command} needs --{key.replace('_', '-')}")
        path = getattr(cfg, key)
        if key in ("stations", "maxima", "frechet", "model", "elevation_raster") and not Path(path).exists():
            raise ValidationError(f"{key} file {path} does not exist")


def _out(cfg, name) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out / name


def _grid(cfg) -> GridSpec:
    base = GridSpec()
    return GridSpec(
        sigma_grid=cfg.sigma_grid or base.sigma_grid,
        alpha_grid=cfg.alpha_grid or base.alpha_grid,
        d_set=cfg.d_set or base.d_set,
        r1=cfg.r1,
        r2=cfg.r2,
    )


def _load_frechet(cfg, stations=None) -> FrechetMatrix:
    return io.ingest_maxima(cfg.frechet, stations, cls=FrechetMatrix)


def cmd_fit_margins(cfg):
    _need(cfg, "stations", "maxima")
    stations = io.ingest_stations(cfg.stations)
    data = io.ingest_maxima(cfg.maxima, stations)
    fits = fit_margins(data, stations, seed=cfg.seed)
    io.write_gev_params(_out(cfg, "gev_params.csv"), fits)
    io.write_maxima(_out(cfg, "frechet.csv"), to_frechet(data, fits))


def cmd_estimate_theta(cfg):
    _need(cfg, "frechet")
    data = _load_frechet(cfg)
    io.write_square_matrix(_out(cfg, "theta_hat.csv"), extremal_matrix(data), data.station_ids)


def cmd_fit_mds(cfg):
    _need(cfg, "frechet", "stations")
    if cfg.method not in ("1", "2"):
        raise ValidationError("fit-mds needs --method 1 or 2")
    method = int(cfg.method)
    stations = io.ingest_stations(cfg.stations)
    data = _load_frechet(cfg, stations)
    eps = EPSILON if cfg.epsilon is None else cfg.epsilon
    theta_hat = extremal_matrix(data)
    grid = _grid(cfg)
    cache = IdealCovCache(cfg.cache_dir, data.station_ids, eps) if method == 2 else None
    st = stations.subset([stations.index(s) for s in data.station_ids])
    if cfg.d is not None:
        model = fit_mds_model(method, data, theta_hat, grid, cfg.d, st, eps, cache, seed=cfg.seed)
        records = model.records
    else:
        chosen, models = fit_all_dimensions(method, data, theta_hat, grid, st, cache, eps, seed=cfg.seed)
        model = models[chosen]
        records = [r for m in models.values() for r in m.records]
    save_model(_out(cfg, f"model_method{method}.json"), model)
    write_ledger(_out(cfg, f"ledger_method{method}.csv"), records)
    io.write_embedding(_out(cfg, f"embedding_method{method}.csv"), model.embedding, data.station_ids)
    print(f"method {method}: d={model.d} sigma={model.sigma:g} alpha={model.cov.alpha:g} "
          f"loglik={model.loglik:.6g} theta_mse={model.theta_mse:.6g}")


def cmd_fit_classical(cfg):
    _need(cfg, "frechet", "stations")
    stations = io.ingest_stations(cfg.stations)
    data = _load_frechet(cfg, stations)
    model = fit_classical(data, stations)
    save_model(_out(cfg, "model_classical.json"), model)
    print(f"classical: sigma={model.sigma:g} alpha={model.cov.alpha:g} "
          f"loglik={model.loglik:.6g} theta_mse={model.theta_mse:.6g}")


def cmd_simulate(cfg):
    if cfg.stations:
        _need(cfg, "stations")
        stations = io.ingest_stations(cfg.stations)
        spec = SimSpec(stations, cfg.sigma, CovFunction.powexp(cfg.alpha), p=cfg.p, truncation=cfg.truncation, seed=cfg.seed)
    else:
        scen = nonstationary_scenario(p=cfg.p, seed=cfg.seed, truncation=cfg.truncation)
        stations, spec = scen.stations, scen.spec
        io.write_stations(_out(cfg, "stations.csv"), stations)
    io.write_maxima(_out(cfg, "frechet.csv"), simulate_field(spec))


def cmd_holdout(cfg):
    _need(cfg, "stations")
    if not (cfg.frechet or cfg.maxima):
        raise ValidationError("holdout needs --frechet or --maxima")
    stations = io.ingest_stations(cfg.stations)
    if cfg.frechet:
        _need(cfg, "frechet")
        data = _load_frechet(cfg, stations)
    else:
        _need(cfg, "maxima")
        data = io.ingest_maxima(cfg.maxima, stations)
    if cfg.method not in ("1", "2"):
        raise ValidationError("holdout needs --method 1 or 2")
    grid = _grid(cfg)
    d = cfg.d if cfg.d is not None else grid.d_set[0]
    res = holdout_experiment(data, stations, (cfg.n2_min, cfg.n2_max), cfg.seed, int(cfg.method), d, grid)
    header = ["n2", "loglik", "theta_mse", "train_pair_mse", "test_pair_mse", "cross_pair_mse"]
    row = [res.n2, res.loglik, res.theta_mse, res.train_pair_mse, res.test_pair_mse, res.cross_pair_mse]
    io.write_rows(_out(cfg, "holdout.csv"), header, [row])
    print(", ".join(f"{h}={v:.6g}" for h, v in zip(header, row)))


def cmd_theta_map(cfg):
    _need(cfg, "reference")
    if len(cfg.bbox) != 4:
        raise ValidationError("theta-map needs --bbox 'e_min e_max n_min n_max'")
    elevation = cfg.elevation
    if cfg.elevation_raster:
        _need(cfg, "elevation_raster")
        elevation = io.read_grid_csv(cfg.elevation_raster)
    if cfg.observed:
        _need(cfg, "frechet", "stations")
        stations = io.ingest_stations(cfg.stations)
        data = _load_frechet(cfg, stations)
        st = stations.subset([stations.index(s) for s in data.station_ids])
        export_observed_theta_map(_out(cfg, "theta_map_observed.csv"), extremal_matrix(data), st, cfg.reference,
                                  cfg.resolution, cfg.bbox, elevation)
    else:
        _need(cfg, "model")
        model = load_model(cfg.model)
        export_theta_map(_out(cfg, "theta_map.csv"), model, _reference(cfg.reference), cfg.resolution, cfg.bbox, elevation)


def _reference(text):
    parts = text.replace(",", " ").split()
    if len(parts) == 3:
        try:
            return np.array([float(v) for v in parts])
        except ValueError:
            pass
    return text


HANDLERS = {
    "fit-margins": cmd_fit_margins,
    "estimate-theta": cmd_estimate_theta,
    "fit-mds": cmd_fit_mds,
    "fit-classical": cmd_fit_classical,
    "simulate": cmd_simulate,
    "holdout": cmd_holdout,
    "theta-map": cmd_theta_map,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # usage errors are validation failures; exit code 2 is reserved for numerics
        return 1 if exc.code == 2 else exc.code
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        overrides = {k: v for k, v in vars(args).items() if k not in ("config", "verbose")}
        cfg = load_config(args.config, overrides)
        HANDLERS[cfg.command](cfg)
    except BrmdsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
