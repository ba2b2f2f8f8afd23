# src/nemengine/simulate.py
"""
Run orchestration behind the CLI subcommands.

Compute functions (`compute_flow`, `_sector_job`) are pure and safe to run in worker
processes; every file is written by the calling process, in a fixed order.
"""
from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig
from .energy import (
    constant_energy_derivative, constant_energy_second_derivative, energy_constant_closed_form,
    energy_full, energy_one_constant,
)
from .errors import ConfigError, EnergyIncreased, NemEngineError
from .initial import band_datum, constant_datum, noisy_datum
from .io import (
    base_metadata, export_director_field, import_director_field, write_csv, write_field_snapshot,
    write_json, write_summary, write_trace,
)
from .solvers import classify_final, run_flow
from .stationary import (
    bifurcation_branches, constant_state_analysis, el_residual_one_constant, parallel_instability_threshold,
    stability_transitions_in_b, stability_transitions_in_lambda, threshold_search,
)
from .types import (
    Classification, ConstantState, FlowOutcome, FlowResult, RunSummary, SectorField, ThresholdResult, TorusShape,
)

logger = logging.getLogger(__name__)

INDEX_CONVENTION = "row = h_phi, column = h_theta"
B_SCAN_MAX = 4.0


def build_initial(config: RunConfig) -> SectorField:
    """Initial datum of a run, in the sector (h_theta, h_phi) of the config."""
    shape, grid, index = config.shape(), config.grid(), config.index()
    kind = config.initial_kind
    if kind == "constant":
        return constant_datum(config.initial_value, shape, grid, index)
    if kind == "noisy":
        return noisy_datum(config.initial_value, config.amplitude, config.seed, shape, grid, index)
    if kind == "band":
        band = band_datum(config.band_low, config.band_high, config.seed, shape, grid)
        return SectorField(u=band.u, index=index, shape=shape, grid=grid)
    if kind == "file":
        field = import_director_field(config.initial_file, shape)
        if field.grid != grid:
            raise ConfigError(
                f"initial_file: grid {field.grid.n_theta}x{field.grid.n_phi} does not match "
                f"n_theta x n_phi = {grid.n_theta}x{grid.n_phi}."
            )
        return field
    raise ConfigError(f"initial_kind: unknown kind '{kind}'.")


def classification_dict(cls: Classification) -> dict:
    if isinstance(cls, ConstantState):
        return {"kind": "ConstantState", "value": cls.value}
    return {"kind": "NonConstant", "range": cls.range}


@dataclass(frozen=True, eq=False)
class FlowRun:
    summary: RunSummary
    result: FlowResult


def compute_flow(config: RunConfig) -> FlowRun:
    """Relax the configured datum and summarize the final state. Writes nothing."""
    t0 = time.perf_counter()
    initial = build_initial(config)
    result = run_flow(initial, config.kappa, config.flow_params())
    final = result.final
    residual = el_residual_one_constant(final)
    energy = {
        "one_constant": energy_one_constant(final, config.constants()).as_dict(),
        "full": energy_full(final, config.constants()).as_dict(),
    }
    summary = RunSummary(
        config=config.echo(),
        config_hash=config.config_hash(),
        outcome=result.outcome.value,
        classification=classification_dict(classify_final(final)),
        energy=energy,
        winding=result.trace.windings[-1].as_tuple(),
        residual_max=residual.max_norm,
        residual_l2=residual.l2_norm,
        steps=result.steps,
        dt=result.dt,
        seed=config.seed,
        version=__version__,
        wall_time=time.perf_counter() - t0,
    )
    return FlowRun(summary=summary, result=result)


def write_flow_artifacts(run: FlowRun, config: RunConfig, out_dir: Path) -> dict[str, Path]:
    meta = base_metadata(run.summary.config_hash, config.seed)
    paths = {"summary": write_summary(out_dir / "summary.json", run.summary)}
    if config.emit_trace:
        paths["trace"] = write_trace(out_dir / "trace.csv", run.result.trace, meta)
    if config.emit_field:
        paths["field"] = write_field_snapshot(out_dir / "field.csv", run.result.final, meta)
    if config.emit_director:
        paths["director"] = export_director_field(run.result.final, out_dir / "director.csv", meta)
    return paths


def run_single(config: RunConfig) -> RunSummary:
    """run-flow: one relaxation, then field snapshot, energy trace and summary under output_dir."""
    out_dir = Path(config.output_dir)
    try:
        run = compute_flow(config)
    except EnergyIncreased as exc:
        if exc.trace is not None and config.emit_trace:
            write_trace(out_dir / "trace.csv", exc.trace, base_metadata(config.config_hash(), config.seed))
        raise
    write_flow_artifacts(run, config, out_dir)
    s = run.summary
    logger.info("run-flow: %s, %s, E/pi^2=%.6f, winding=%s",
                s.outcome, s.classification["kind"], s.energy["one_constant"]["total_over_pi2"], s.winding)
    return s


# --------------------------
# Winding-sector sweep
# --------------------------
def _sector_job(config: RunConfig) -> tuple[tuple[int, int], FlowRun | None, str]:
    """Top-level so it pickles into worker processes. Failures become a status string."""
    key = (config.h_theta, config.h_phi)
    try:
        return key, compute_flow(config), "ok"
    except EnergyIncreased as exc:
        return key, None, f"{FlowOutcome.ENERGY_INCREASED.value}: {exc}"
    except (NemEngineError, ValueError) as exc:
        return key, None, f"Failed: {type(exc).__name__}: {exc}"


def run_sector_sweep(config: RunConfig) -> list[dict]:
    """
    sweep-sectors: one flow per (h_theta, h_phi) of the sweep lists.

    Writes per-cell artifacts under sectors/, a long-form table sector_energies.csv
    and the matrix sector_table.csv (energy / pi^2, row = h_phi, column = h_theta).
    A failed cell is recorded and the sweep continues.
    """
    jobs = [config.model_copy(update={"h_theta": ht, "h_phi": hp})
            for hp in config.sweep_h_phi for ht in config.sweep_h_theta]
    logger.info("sweep-sectors: %d cells, %d worker(s)", len(jobs), config.workers)

    results: dict[tuple[int, int], tuple[FlowRun | None, str]] = {}
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as ex:
            futures = [ex.submit(_sector_job, job) for job in jobs]
            for fut in as_completed(futures):
                key, run, status = fut.result()
                results[key] = (run, status)
                logger.info("sector h=%s: %s", key, status)
    else:
        for job in jobs:
            key, run, status = _sector_job(job)
            results[key] = (run, status)
            logger.info("sector h=%s: %s", key, status)

    out_dir = Path(config.output_dir)
    rows = []
    for (ht, hp) in sorted(results, key=lambda k: (k[1], k[0])):
        run, status = results[(ht, hp)]
        if run is None:
            rows.append({"h_phi": hp, "h_theta": ht, "energy": math.nan, "energy_over_pi2": math.nan,
                         "outcome": status.split(":", 1)[0], "status": status})
            continue
        cell = config.model_copy(update={"h_theta": ht, "h_phi": hp})
        write_flow_artifacts(run, cell, out_dir / "sectors" / f"h_{ht}_{hp}")
        e = run.summary.energy["one_constant"]
        rows.append({"h_phi": hp, "h_theta": ht, "energy": e["total"], "energy_over_pi2": e["total_over_pi2"],
                     "outcome": run.summary.outcome, "status": status})

    meta = {**base_metadata(config.config_hash(), config.seed), "index_convention": INDEX_CONVENTION}
    header = ("h_phi", "h_theta", "energy", "energy_over_pi2", "outcome", "status")
    write_csv(out_dir / "sector_energies.csv", header, ([row[k] for k in header] for row in rows), meta)

    h_thetas = sorted(set(config.sweep_h_theta))
    by_key = {(row["h_theta"], row["h_phi"]): row["energy_over_pi2"] for row in rows}
    matrix = ([hp, *(by_key[(ht, hp)] for ht in h_thetas)] for hp in sorted(set(config.sweep_h_phi)))
    write_csv(out_dir / "sector_table.csv", ("h_phi", *(f"h_theta={ht}" for ht in h_thetas)), matrix, meta)
    return rows


# --------------------------
# Constant deviations
# --------------------------
def run_constant_analysis(config: RunConfig) -> dict[str, Path]:
    """
    constant-analysis: plot data for constant deviation angles.

    constant_energy.csv       : alpha, W, W/pi^2, W', W'' per aspect ratio in b_values
    critical_points.csv       : critical angles, discriminant and stability per aspect ratio
    bifurcation_branches.csv  : the K1 = K3 = lambda K2 family at the configured aspect ratio
    transitions.csv           : aspect ratios and lambdas where a stability flag flips
    """
    out_dir = Path(config.output_dir)
    meta = base_metadata(config.config_hash(), config.seed)
    constants = config.constants()
    b_values = config.b_values or (config.shape().b,)
    alphas = np.linspace(0.0, math.pi, config.alpha_samples)

    energy_rows, critical_rows = [], []
    for b in b_values:
        shape = TorusShape.from_aspect(b, config.r)
        W = energy_constant_closed_form(shape, constants, alphas)
        dW = constant_energy_derivative(shape, constants, alphas)
        d2W = constant_energy_second_derivative(shape, constants, alphas)
        energy_rows.extend(zip([b] * len(alphas), alphas.tolist(), W.tolist(), (W / math.pi**2).tolist(),
                               dW.tolist(), d2W.tolist()))
        report = constant_state_analysis(shape, constants)
        critical_rows.extend((b, p.family, p.angle, p.discriminant, p.stability)
                             for p in report.critical_angles)

    paths = {
        "energy": write_csv(out_dir / "constant_energy.csv",
                            ("b", "alpha", "energy", "energy_over_pi2", "d_energy", "d2_energy"), energy_rows, meta),
        "critical": write_csv(out_dir / "critical_points.csv",
                              ("b", "family", "angle", "discriminant", "stability"), critical_rows, meta),
    }

    b = config.shape().b
    K2 = config.K2 or 1.0
    lambdas = np.linspace(config.lambda_min, config.lambda_max, config.lambda_samples)
    branch_rows = ((lam, p.family, p.angle, p.discriminant, p.stability)
                   for lam, p in bifurcation_branches(b, lambdas, K2))
    paths["branches"] = write_csv(out_dir / "bifurcation_branches.csv",
                                  ("lambda", "family", "angle", "discriminant", "stability"), branch_rows,
                                  {**meta, "b": b, "K2": K2})

    b_hi = max(B_SCAN_MAX, *b_values)
    transitions = [("b", family, value) for family, value in stability_transitions_in_b(constants, 1.0 + 1e-6, b_hi)]
    transitions += [("lambda", family, value) for family, value
                    in stability_transitions_in_lambda(b, config.lambda_min, config.lambda_max, K2)]
    paths["transitions"] = write_csv(out_dir / "transitions.csv", ("parameter", "family", "value"), transitions,
                                     {**meta, "b": b, "K2": K2})
    logger.info("constant-analysis: %d aspect ratio(s), %d transition(s)", len(b_values), len(transitions))
    return paths


# --------------------------
# Aspect-ratio threshold
# --------------------------
def run_threshold(config: RunConfig) -> ThresholdResult:
    """threshold: bisection on b, with the per-step classifications and the linearized threshold."""
    result = threshold_search(config.b_low, config.b_high, config.kappa, config.grid(), config.flow_params(),
                              r=config.r, tol=config.b_tol, seed=config.seed, amplitude=config.amplitude)
    out_dir = Path(config.output_dir)
    meta = base_metadata(config.config_hash(), config.seed)
    rows = []
    for step in result.history:
        c = classification_dict(step.classification)
        rows.append((step.b, c["kind"], c.get("value", c.get("range")), step.outcome.value, step.steps,
                     step.energy, step.energy / math.pi**2))
    write_csv(out_dir / "threshold_history.csv",
              ("b", "classification", "value_or_range", "outcome", "steps", "energy", "energy_over_pi2"), rows, meta)
    write_json(out_dir / "threshold.json", {
        "config": config.echo(),
        "config_hash": config.config_hash(),
        "version": __version__,
        "seed": config.seed,
        "b_low": result.b_low,
        "b_high": result.b_high,
        "steps": len(result.history),
        "unconverged_b": list(result.unconverged),
        "linearized_threshold": parallel_instability_threshold(config.n_theta),
    })
    logger.info("threshold: b* in [%.6f, %.6f]", result.b_low, result.b_high)
    return result


def run_export(config: RunConfig) -> Path:
    """export: director CSV of the configured datum (use initial_kind=file to export a saved field)."""
    field = build_initial(config)
    return export_director_field(field, Path(config.output_dir) / "director.csv",
                                 base_metadata(config.config_hash(), config.seed))
