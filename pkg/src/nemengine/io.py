# src/nemengine/io.py
"""
Deterministic file formats.

CSV files start with '#'-prefixed `key: value` metadata lines (config hash, version,
seed, plus whatever describes the payload), then a header row and data rows.
Floats are written with repr precision so values read back bit-for-bit.
"""
from __future__ import annotations

import csv
import json
import logging
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from . import __version__
from .errors import OutputError
from .geometry import director_from_alpha, embedding
from .sectors import decompose, total_alpha
from .types import FlowTrace, PeriodicGrid, RunSummary, SectorField, TorusShape, WindingIndex

logger = logging.getLogger(__name__)

DIRECTOR_COLUMNS = ("theta", "phi", "alpha", "x", "y", "z", "nx", "ny", "nz")


def base_metadata(config_hash: str, seed: int | None) -> dict[str, Any]:
    return {"config_hash": config_hash, "version": __version__, "seed": seed}


def field_metadata(field: SectorField) -> dict[str, Any]:
    return {
        "R": field.shape.R, "r": field.shape.r,
        "n_theta": field.grid.n_theta, "n_phi": field.grid.n_phi,
        "h_theta": field.index.h_theta, "h_phi": field.index.h_phi,
    }


def write_csv(path: Path | str, header: Sequence[str], rows: Iterable[Sequence[Any]],
              meta: dict[str, Any]) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as fh:
            for key, value in meta.items():
                fh.write(f"# {key}: {value}\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise OutputError(path, exc.strerror or str(exc)) from exc
    logger.debug("wrote %s", path)
    return path


def read_csv(path: Path | str) -> tuple[dict[str, str], list[str], list[list[str]]]:
    """(metadata, header, rows) of a file written by write_csv."""
    path = Path(path)
    meta: dict[str, str] = {}
    try:
        with path.open("r", encoding="utf-8", newline="") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise OutputError(path, exc.strerror or str(exc)) from exc
    body = []
    for line in lines:
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            meta[key.strip()] = value.strip()
        elif line:
            body.append(line)
    if not body:
        raise OutputError(path, "no header row")
    records = list(csv.reader(body))
    return meta, records[0], records[1:]


def write_json(path: Path | str, payload: dict) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OutputError(path, exc.strerror or str(exc)) from exc
    logger.debug("wrote %s", path)
    return path


def write_summary(path: Path | str, summary: RunSummary) -> Path:
    return write_json(path, summary.to_dict())


def read_summary(path: Path | str) -> RunSummary:
    path = Path(path)
    try:
        return RunSummary.from_dict(json.loads(path.read_text(encoding="utf-8")))
    except OSError as exc:
        raise OutputError(path, exc.strerror or str(exc)) from exc


def write_field_snapshot(path: Path | str, field: SectorField, meta: dict[str, Any]) -> Path:
    """Columns theta, phi, u, alpha; rows in theta-major order."""
    theta, phi = field.grid.mesh()
    alpha = total_alpha(field)
    rows = zip(theta.ravel().tolist(), phi.ravel().tolist(), field.u.ravel().tolist(), alpha.ravel().tolist())
    return write_csv(path, ("theta", "phi", "u", "alpha"), rows, {**meta, **field_metadata(field)})


def write_trace(path: Path | str, trace: FlowTrace, meta: dict[str, Any]) -> Path:
    rows = (
        (s, t, e, e / np.pi**2, res, w.h_theta, w.h_phi)
        for s, t, e, res, w in zip(trace.steps, trace.times, trace.energies, trace.residuals, trace.windings)
    )
    header = ("step", "time", "energy", "energy_over_pi2", "residual_max", "h_theta", "h_phi")
    return write_csv(path, header, rows, meta)


def export_director_field(field: SectorField, path: Path | str, meta: dict[str, Any] | None = None) -> Path:
    """
    One row per grid node: theta, phi, alpha, embedding point X and director n.
    """
    theta, phi = field.grid.mesh()
    alpha = total_alpha(field)
    X = embedding(field.shape, theta, phi).reshape(-1, 3)
    n = director_from_alpha(field.shape, theta, alpha, phi).reshape(-1, 3)
    rows = (
        (t, p, a, *x, *d)
        for t, p, a, x, d in zip(theta.ravel().tolist(), phi.ravel().tolist(), alpha.ravel().tolist(),
                                 X.tolist(), n.tolist())
    )
    return write_csv(path, DIRECTOR_COLUMNS, rows, {**(meta or {}), **field_metadata(field)})


def import_director_field(path: Path | str, shape: TorusShape | None = None) -> SectorField:
    """
    Read a field snapshot or a director export back into a SectorField.

    The periodic part comes from the `u` column when present, otherwise the `alpha`
    column is decomposed with the winding index from the metadata lines.
    """
    meta, header, rows = read_csv(path)
    try:
        grid = PeriodicGrid(int(meta["n_theta"]), int(meta["n_phi"]))
        index = WindingIndex(int(meta["h_theta"]), int(meta["h_phi"]))
        if shape is None:
            shape = TorusShape(R=float(meta["R"]), r=float(meta["r"]))
        periodic = "u" in header
        col = header.index("u" if periodic else "alpha")
    except (KeyError, ValueError) as exc:
        raise OutputError(path, f"missing or malformed field metadata ({exc})") from exc
    if len(rows) != grid.n_theta * grid.n_phi:
        raise OutputError(path, f"expected {grid.n_theta * grid.n_phi} rows, found {len(rows)}")
    values = np.array([float(row[col]) for row in rows]).reshape(grid.shape)
    if periodic:
        return SectorField(u=values, index=index, shape=shape, grid=grid)
    return decompose(values, shape, grid, index=index)
