# src/nemengine/initial.py
from __future__ import annotations

import math

import numpy as np

from .types import ZERO_INDEX, PeriodicGrid, SectorField, TorusShape, WindingIndex


def constant_datum(value: float, shape: TorusShape, grid: PeriodicGrid,
                   index: WindingIndex = ZERO_INDEX) -> SectorField:
    """
    Periodic part identically equal to `value` on top of the lift for `index`.
    Example: value=pi/2, index=(0,0) is the parallel state n = e2.
    """
    _validate_finite("value", value)
    return SectorField(u=np.full(grid.shape, float(value)), index=index, shape=shape, grid=grid)


def noisy_datum(value: float, amplitude: float, seed: int, shape: TorusShape, grid: PeriodicGrid,
                index: WindingIndex = ZERO_INDEX) -> SectorField:
    """
    value + amplitude * uniform(-1, 1) noise, drawn from numpy's default generator seeded with `seed`.

    amplitude : half-width of the noise (rad); 0 gives a constant datum
    seed      : 64-bit seed, recorded in every run summary
    """
    _validate_finite("value", value)
    _validate_non_negative("amplitude", amplitude)
    _validate_seed(seed)
    rng = np.random.default_rng(seed)
    u = float(value) + float(amplitude) * rng.uniform(-1.0, 1.0, size=grid.shape)
    return SectorField(u=u, index=index, shape=shape, grid=grid)


def band_datum(low: float, high: float, seed: int, shape: TorusShape, grid: PeriodicGrid,
               modes: int = 3) -> SectorField:
    """
    Smooth non-constant sector-(0,0) datum whose values fill the band [low, high].

    A random trigonometric polynomial with `modes` harmonics per direction is rescaled
    affinely onto the band, so both endpoints are attained.
    """
    _validate_finite("low", low)
    _validate_finite("high", high)
    if not (high > low):
        raise ValueError(f"band must satisfy low < high (got [{low}, {high}]).")
    _validate_positive_int("modes", modes)
    _validate_seed(seed)
    rng = np.random.default_rng(seed)
    theta, phi = grid.mesh()
    f = np.zeros(grid.shape)
    for k in range(modes + 1):
        for m in range(-modes, modes + 1):
            if k == 0 and m <= 0:
                continue
            a, c = rng.normal(size=2) / (1.0 + k * k + m * m)
            f += a * np.cos(k * theta + m * phi) + c * np.sin(k * theta + m * phi)
    f = (f - f.min()) / (f.max() - f.min())
    return SectorField(u=low + (high - low) * f, index=ZERO_INDEX, shape=shape, grid=grid)


# --------------------------
# Small input validators
# --------------------------
def _validate_finite(name: str, x: float) -> None:
    if not math.isfinite(x):
        raise ValueError(f"{name} must be finite (got {x}).")

def _validate_non_negative(name: str, x: float) -> None:
    if not (x >= 0):
        raise ValueError(f"{name} must be >= 0 (got {x}).")

def _validate_positive_int(name: str, x: int) -> None:
    if not (isinstance(x, int) and x > 0):
        raise ValueError(f"{name} must be a positive integer (got {x}).")

def _validate_seed(seed: int) -> None:
    if not (isinstance(seed, (int, np.integer)) and 0 <= seed < 2**64):
        raise ValueError(f"seed must be an integer in [0, 2^64) (got {seed}).")
