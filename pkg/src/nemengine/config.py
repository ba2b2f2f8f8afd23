# src/nemengine/config.py
"""
Run configuration: one flat, validated record shared by every CLI subcommand.

Values come from (lowest to highest precedence) a named preset, a key = value
config file and command-line flags. Radii may carry length units ("2 cm").
"""
from __future__ import annotations

import hashlib
import json
import math
import os
from functools import lru_cache
from pathlib import Path
from typing import Any, Literal

import pint
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import ConfigError
from .types import (
    EPS_B, MIN_NODES, ElasticConstants, FlowParams, PeriodicGrid, TorusShape, WindingIndex,
)

OUTPUT_DIR_ENV = "NEMCLI_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "nem-out"

InitialKind = Literal["constant", "noisy", "band", "file"]

# Keys that do not influence any computed number.
_UNHASHED = {"output_dir", "workers", "emit_field", "emit_trace", "emit_director"}


@lru_cache(maxsize=1)
def _units() -> pint.UnitRegistry:
    return pint.UnitRegistry()


def _as_quantity(value: Any):
    if isinstance(value, str):
        return _units().Quantity(value.strip())
    return value


def _default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV, DEFAULT_OUTPUT_DIR))


def _split_list(value: Any) -> Any:
    if isinstance(value, str):
        return [item for item in (part.strip() for part in value.split(",")) if item]
    return value


class RunConfig(BaseModel):
    """
    Every numeric choice of a run.

    R, r            : torus radii (plain numbers or length strings, same unit after parsing)
    K1, K2, K3      : splay / twist / bend moduli (constant-state analysis, full energy)
    kappa           : one-constant modulus driving the flow
    n_theta, n_phi  : grid nodes
    dt              : explicit time step, or None for cfl_safety times the stability bound
    h_theta, h_phi  : winding sector of the initial datum
    initial_kind    : constant | noisy | band | file
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    R: float = 2.0
    r: float = 1.0
    K1: float = Field(1.0, ge=0)
    K2: float = Field(1.0, ge=0)
    K3: float = Field(1.0, ge=0)
    kappa: float = Field(1.0, gt=0)

    n_theta: int = Field(64, ge=MIN_NODES)
    n_phi: int = Field(64, ge=MIN_NODES)

    dt: float | None = Field(None, gt=0)
    cfl_safety: float = Field(0.9, gt=0, lt=1)
    stop_tol: float = Field(1e-4, gt=0)
    max_steps: int = Field(100_000, gt=0)
    snapshot_every: int = Field(10, gt=0)

    h_theta: int = 0
    h_phi: int = 0

    initial_kind: InitialKind = "noisy"
    initial_value: float = math.pi / 2
    amplitude: float = Field(0.01, ge=0)
    band_low: float = math.pi / 2
    band_high: float = 3 * math.pi / 2
    seed: int = Field(0, ge=0, lt=2**64)
    initial_file: Path | None = None

    sweep_h_theta: tuple[int, ...] = (0, 1, 2, 3)
    sweep_h_phi: tuple[int, ...] = (0, 1, 2, 3)

    b_values: tuple[float, ...] = ()
    alpha_samples: int = Field(361, ge=2)
    lambda_min: float = Field(0.0, ge=0)
    lambda_max: float = Field(3.25, gt=0)
    lambda_samples: int = Field(131, ge=2)

    b_low: float = 1.3
    b_high: float = 1.8
    b_tol: float = Field(5e-3, gt=0)

    output_dir: Path = Field(default_factory=_default_output_dir)
    emit_field: bool = True
    emit_trace: bool = True
    emit_director: bool = False
    workers: int = Field(1, ge=1)

    @model_validator(mode="before")
    @classmethod
    def _parse_radii(cls, data: Any) -> Any:
        if not isinstance(data, dict) or ("R" not in data and "r" not in data):
            return data
        data = dict(data)
        quantities = {k: _as_quantity(data[k]) for k in ("R", "r") if k in data}
        unit = None
        for q in quantities.values():
            if isinstance(q, pint.Quantity) and not q.dimensionless:
                if not q.check("[length]"):
                    raise ValueError(f"radius '{q}' is not a length.")
                unit = unit or q.units
        for key, q in quantities.items():
            if isinstance(q, pint.Quantity):
                data[key] = float(q.to(unit).magnitude) if (unit is not None and not q.dimensionless) else float(q.magnitude)
            else:
                data[key] = q
        return data

    @field_validator("dt", "initial_file", mode="before")
    @classmethod
    def _auto_is_none(cls, value: Any) -> Any:
        if isinstance(value, str) and value.strip().lower() in ("", "auto", "none"):
            return None
        return value

    @field_validator("sweep_h_theta", "sweep_h_phi", "b_values", mode="before")
    @classmethod
    def _comma_lists(cls, value: Any) -> Any:
        return _split_list(value)

    @model_validator(mode="after")
    def _check_consistency(self) -> "RunConfig":
        if not (self.r > 0):
            raise ValueError(f"r must be > 0 (got {self.r}).")
        if not (self.R > self.r):
            raise ValueError(f"R must be > r (got R={self.R}, r={self.r}).")
        if not (self.R / self.r > 1 + EPS_B):
            raise ValueError(f"R/r must exceed 1 + {EPS_B:g}.")
        if not (self.K1 > 0 or self.K2 > 0 or self.K3 > 0):
            raise ValueError("at least one of K1, K2, K3 must be > 0.")
        if not (self.band_low < self.band_high):
            raise ValueError(f"band_low must be < band_high (got {self.band_low}, {self.band_high}).")
        if self.initial_kind == "file" and self.initial_file is None:
            raise ValueError("initial_kind=file needs initial_file.")
        if any(b <= 1 for b in self.b_values):
            raise ValueError("every entry of b_values must be > 1.")
        if not (self.lambda_min < self.lambda_max):
            raise ValueError("lambda_min must be < lambda_max.")
        if not (1 < self.b_low < self.b_high):
            raise ValueError(f"need 1 < b_low < b_high (got {self.b_low}, {self.b_high}).")
        return self

    # --------------------------
    # Domain views
    # --------------------------
    def shape(self) -> TorusShape:
        return TorusShape(R=self.R, r=self.r)

    def constants(self) -> ElasticConstants:
        return ElasticConstants(K1=self.K1, K2=self.K2, K3=self.K3, kappa=self.kappa)

    def grid(self) -> PeriodicGrid:
        return PeriodicGrid(self.n_theta, self.n_phi)

    def flow_params(self) -> FlowParams:
        return FlowParams(dt=self.dt, cfl_safety=self.cfl_safety, stop_tol=self.stop_tol,
                          max_steps=self.max_steps, snapshot_every=self.snapshot_every)

    def index(self) -> WindingIndex:
        return WindingIndex(self.h_theta, self.h_phi)

    def echo(self) -> dict:
        return self.model_dump(mode="json")

    def config_hash(self) -> str:
        """First 16 hex digits of sha256 over the canonical JSON of the computing keys."""
        payload = {k: v for k, v in self.echo().items() if k not in _UNHASHED}
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


PRESETS: dict[str, dict[str, Any]] = {
    "fig2-splay": {"K1": 1.0, "K2": 0.0, "K3": 0.0, "R": 2.0, "r": 1.0,
                   "b_values": "1.1,1.1547005383792517,1.25,1.6,2,2.5"},
    "fig2-twist": {"K1": 0.0, "K2": 1.0, "K3": 0.0, "R": 2.0, "r": 1.0,
                   "b_values": "1.1,1.1547005383792517,1.25,1.6,2,2.5"},
    "fig2-bend": {"K1": 0.0, "K2": 0.0, "K3": 1.0, "R": 2.0, "r": 1.0,
                  "b_values": "1.1,1.1547005383792517,1.25,1.6,2,2.5"},
    "fig2-one-constant": {"K1": 1.0, "K2": 1.0, "K3": 1.0, "R": 2.0, "r": 1.0,
                          "b_values": "1.1547005383792517,1.25,2,2.5"},
    "fig3": {"K1": 1.0, "K2": 1.0, "K3": 1.0, "R": 1.25, "r": 1.0,
             "lambda_min": 0.0, "lambda_max": 3.25, "lambda_samples": 131},
    "fig6-left": {"R": 2.5, "r": 1.0, "n_theta": 64, "n_phi": 64, "initial_kind": "noisy",
                  "initial_value": math.pi / 2, "amplitude": 0.01, "stop_tol": 1e-10, "max_steps": 200_000},
    "fig6-right": {"R": 1.33, "r": 1.0, "n_theta": 64, "n_phi": 64, "initial_kind": "noisy",
                   "initial_value": math.pi / 2 - 0.1, "amplitude": 0.05, "stop_tol": 1e-10, "max_steps": 400_000},
    "fig7": {"R": 1.2, "r": 1.0, "n_theta": 64, "n_phi": 64, "initial_kind": "noisy",
             "initial_value": math.pi / 2 - 0.1, "amplitude": 0.05, "stop_tol": 1e-10, "max_steps": 400_000},
    "table1": {"R": 2.0, "r": 1.0, "n_theta": 128, "n_phi": 128, "dt": 0.00025, "max_steps": 30_000,
               "stop_tol": 1e-12, "initial_kind": "noisy", "initial_value": math.pi / 2, "amplitude": 0.01,
               "sweep_h_theta": "0,1,2,3", "sweep_h_phi": "0,1,2,3"},
    "threshold": {"r": 1.0, "R": 1.5, "n_theta": 128, "n_phi": 128, "stop_tol": 1e-10, "max_steps": 400_000,
                  "b_low": 1.3, "b_high": 1.8, "b_tol": 0.005, "amplitude": 0.05, "seed": 0},
}


def parse_config_file(path: Path | str) -> dict[str, str]:
    """Flat `key = value` lines; '#' starts a comment; dashes in keys read as underscores."""
    values: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"config: cannot read '{path}' ({exc.strerror or exc}).") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value' (got '{raw.strip()}').")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def build_config(preset: str | None = None, config_file: Path | str | None = None,
                 overrides: dict[str, Any] | None = None) -> RunConfig:
    """Merge preset < file < overrides and validate; failures raise ConfigError with one diagnostic."""
    data: dict[str, Any] = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"preset: unknown preset '{preset}' (choose from {', '.join(sorted(PRESETS))}).")
        data.update(PRESETS[preset])
    if config_file is not None:
        data.update(parse_config_file(config_file))
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return RunConfig(**data)
    except ValidationError as exc:
        raise ConfigError(_first_diagnostic(exc)) from None
    except (ValueError, AttributeError, pint.errors.PintError) as exc:
        raise ConfigError(str(exc)) from None


def _first_diagnostic(exc: ValidationError) -> str:
    err = exc.errors()[0]
    where = ".".join(str(part) for part in err.get("loc", ())) or "config"
    message = err.get("msg", "invalid value").removeprefix("Value error, ")
    return f"{where}: {message}"
