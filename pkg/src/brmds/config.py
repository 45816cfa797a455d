"""Run configuration: a flat ``key = value`` file, overridable from the command line."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .errors import ParseError, ValidationError

COMMANDS = ("fit-margins", "estimate-theta", "fit-mds", "fit-classical", "simulate", "holdout", "theta-map")


def _floats(text):
    if isinstance(text, (list, tuple)):
        return tuple(float(v) for v in text)
    return tuple(float(v) for v in str(text).replace(",", " ").split())


def _ints(text):
    return tuple(int(v) for v in _floats(text))


def _range_grid(text):
    """``start:stop:step`` or an explicit list."""
    if isinstance(text, str) and ":" in text:
        start, stop, step = (float(v) for v in text.split(":"))
        n = int(round((stop - start) / step)) + 1
        return tuple(round(start + i * step, 10) for i in range(n))
    return _floats(text)


def _bool(text):
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_str(text):
    return None if text in (None, "") else str(text)


@dataclass
class RunConfig:
    command: str | None = None
    stations: str | None = None
    maxima: str | None = None
    frechet: str | None = None
    model: str | None = None
    output_dir: str = "out"
    method: str = "2"
    d: int | None = None
    sigma_grid: tuple = ()
    alpha_grid: tuple = ()
    d_set: tuple = ()
    r1: float = 0.05
    r2: float = 0.00025
    epsilon: float | None = None
    seed: int = 0
    reference: str | None = None
    resolution: float = 5.0
    bbox: tuple = ()
    elevation: float = 500.0
    elevation_raster: str | None = None
    observed: bool = False
    sigma: float = 2.0
    alpha: float = 1.0
    p: int = 100
    truncation: int = 1000
    n2_min: int = 25
    n2_max: int = 50
    cache_dir: str | None = None

    _CONVERT = {
        "command": _opt_str,
        "stations": _opt_str,
        "maxima": _opt_str,
        "frechet": _opt_str,
        "model": _opt_str,
        "output_dir": str,
        "method": str,
        "d": lambda v: None if v in (None, "") else int(v),
        "sigma_grid": _range_grid,
        "alpha_grid": _range_grid,
        "d_set": _ints,
        "r1": float,
        "r2": float,
        "epsilon": lambda v: None if v in (None, "") else float(v),
        "seed": int,
        "reference": _opt_str,
        "resolution": float,
        "bbox": _floats,
        "elevation": float,
        "elevation_raster": _opt_str,
        "observed": _bool,
        "sigma": float,
        "alpha": float,
        "p": int,
        "truncation": int,
        "n2_min": int,
        "n2_max": int,
        "cache_dir": _opt_str,
    }

    @classmethod
    def keys(cls) -> list[str]:
        return [f.name for f in dataclasses.fields(cls)]

    @classmethod
    def from_mapping(cls, values: dict) -> RunConfig:
        known = set(cls.keys())
        out = {}
        for raw_key, raw in values.items():
            key = raw_key.strip().replace("-", "_")
            if key not in known:
                raise ValidationError(f"unknown configuration key {raw_key!r}")
            try:
                out[key] = cls._CONVERT[key](raw)
            except ValueError as exc:
                raise ValidationError(f"bad value for {raw_key}: {exc}") from None
        cfg = cls(**out)
        cfg.validate()
        return cfg

    def validate(self):
        if self.command is not None and self.command not in COMMANDS:
            raise ValidationError(f"unknown command {self.command!r}")
        if self.method not in ("1", "2", "classical"):
            raise ValidationError(f"method must be 1, 2 or classical, got {self.method!r}")
        if self.bbox and len(self.bbox) != 4:
            raise ValidationError("bbox needs four numbers: e_min e_max n_min n_max")
        if self.n2_min > self.n2_max:
            raise ValidationError("n2_min exceeds n2_max")


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    text = Path(path).read_text(encoding="utf-8")
    for ln, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"{path}: expected key = value", line=ln)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ParseError(f"{path}: empty key", line=ln)
        out[key] = value
    return out


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    """File values first, then non-None overrides on top."""
    values = read_config_file(path) if path else {}
    norm = {k.replace("-", "_"): v for k, v in values.items()}
    for k, v in (overrides or {}).items():
        if v is not None:
            norm[k.replace("-", "_")] = v
    return RunConfig.from_mapping(norm)
