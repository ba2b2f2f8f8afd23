# src/nemengine/sectors.py
"""
Winding sectors of the deviation angle.

A director field in sector h = (h_theta, h_phi) is stored as alpha = u + psi_h with u
periodic and psi_h the explicit harmonic lift

    psi_h(theta, phi) = h_theta sqrt(b^2 - 1) F(theta) + h_phi phi,   F' = 1 / (b + cos),

so psi_h(theta + 2pi, phi) = psi_h + 2pi h_theta and psi_h(theta, phi + 2pi) = psi_h + 2pi h_phi.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import NonIntegerWinding, SeamMismatch
from .types import PeriodicGrid, ScalarField, SectorField, TorusShape, WindingIndex

WINDING_TOL = 0.1
SEAM_TOL = 1e-10


def primitive(b: float, theta):
    """
    Continuous antiderivative of 1/(b + cos s) with F(0) = 0, valid for all real theta.

    Whole periods each add 2pi/sqrt(b^2-1). The core is the atan2 form of
    2/s atan((b-1)/s tan(t/2)), continuous on (-2pi, 2pi), so rounding in the reduction
    t = theta - 2pi k never lands on a branch cut.
    """
    theta = np.asarray(theta, dtype=float)
    s = math.sqrt(b * b - 1.0)
    k = np.floor((theta + math.pi) / (2 * math.pi))
    t = theta - 2 * math.pi * k  # in [-pi, pi) up to rounding
    core = (2.0 / s) * np.arctan2((b - 1.0) * np.sin(0.5 * t), s * np.cos(0.5 * t))
    return core + 2 * math.pi * k / s


def harmonic_lift(shape: TorusShape, index: WindingIndex, theta, phi):
    """psi_h at unreduced angles (theta, phi); scalars or arrays."""
    b = shape.b
    out = index.h_phi * np.asarray(phi, dtype=float)
    if index.h_theta:
        out = out + index.h_theta * math.sqrt(b * b - 1.0) * primitive(b, theta)
    return out


def lift_on_grid(shape: TorusShape, index: WindingIndex, grid: PeriodicGrid, closed: bool = False) -> np.ndarray:
    theta, phi = grid.mesh(closed=closed)
    return np.asarray(harmonic_lift(shape, index, theta, phi), dtype=float) + np.zeros_like(theta)


def total_alpha(field: SectorField) -> ScalarField:
    """alpha = u + psi_h on the open grid."""
    return field.u + lift_on_grid(field.shape, field.index, field.grid)


def closed_total(field: SectorField) -> np.ndarray:
    """alpha on the (n_theta + 1) x (n_phi + 1) grid that includes the identified edges."""
    u_closed = np.pad(field.u, ((0, 1), (0, 1)), mode="wrap")
    return u_closed + lift_on_grid(field.shape, field.index, field.grid, closed=True)


def winding_of(alpha: np.ndarray, grid: PeriodicGrid, tol: float = WINDING_TOL) -> tuple[WindingIndex, tuple[float, float]]:
    """
    Winding index of closed samples of a total deviation.

    h_theta is the phi-average of (1/2pi) sum_i (alpha[i+1, j] - alpha[i, j]) along each meridian,
    h_phi likewise along each parallel. Both are rounded to the nearest integer; the second
    return value holds the distances to those integers.
    """
    alpha = np.asarray(alpha, dtype=float)
    expected = (grid.n_theta + 1, grid.n_phi + 1)
    if alpha.shape != expected:
        raise ValueError(f"winding needs closed samples of shape {expected} (got {alpha.shape}).")
    raw_t = float(np.mean(np.sum(np.diff(alpha[:, :-1], axis=0), axis=0))) / (2 * math.pi)
    raw_p = float(np.mean(np.sum(np.diff(alpha[:-1, :], axis=1), axis=1))) / (2 * math.pi)
    h_t, h_p = round(raw_t), round(raw_p)
    residual = (abs(raw_t - h_t), abs(raw_p - h_p))
    if max(residual) > tol:
        raise NonIntegerWinding((raw_t, raw_p), tol)
    return WindingIndex(h_t, h_p), residual


def field_winding(field: SectorField) -> WindingIndex:
    index, _ = winding_of(closed_total(field), field.grid)
    return index


def decompose(alpha: np.ndarray, shape: TorusShape, grid: PeriodicGrid,
              index: WindingIndex | None = None) -> SectorField:
    """
    Split sampled total deviation into (u, h).

    Closed samples, shape (n_theta + 1, n_phi + 1): h is measured and the periodic part is
    checked at both seams. Open samples, shape (n_theta, n_phi): h must be given.
    """
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape == (grid.n_theta + 1, grid.n_phi + 1):
        measured, _ = winding_of(alpha, grid)
        if index is not None and index != measured:
            raise ValueError(f"samples wind as {measured.as_tuple()}, not {index.as_tuple()}.")
        u = alpha - lift_on_grid(shape, measured, grid, closed=True)
        scale = 1.0 + float(np.max(np.abs(alpha)))
        gap_t = float(np.max(np.abs(u[-1, :] - u[0, :])))
        gap_p = float(np.max(np.abs(u[:, -1] - u[:, 0])))
        if gap_t > SEAM_TOL * scale:
            raise SeamMismatch("theta", gap_t, SEAM_TOL)
        if gap_p > SEAM_TOL * scale:
            raise SeamMismatch("phi", gap_p, SEAM_TOL)
        return SectorField(u=u[:-1, :-1], index=measured, shape=shape, grid=grid)
    if alpha.shape == grid.shape:
        if index is None:
            raise ValueError("open samples carry no seam information; pass the winding index.")
        return SectorField(u=alpha - lift_on_grid(shape, index, grid), index=index, shape=shape, grid=grid)
    raise ValueError(f"alpha has shape {alpha.shape}, expected {grid.shape} or closed samples.")


def two_odd_mirror(u: np.ndarray) -> np.ndarray:
    """Samples of u(-theta, -phi): grid map (i, j) -> (-i mod n_theta, -j mod n_phi)."""
    return np.roll(u[::-1, ::-1], 1, axis=(0, 1))


def two_odd_defect(u: np.ndarray) -> float:
    """max |u(theta, phi) + u(-theta, -phi)|; zero for 2-odd fields."""
    return float(np.max(np.abs(u + two_odd_mirror(u))))
