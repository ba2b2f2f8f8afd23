# src/nemengine/solvers.py
from __future__ import annotations

import logging
import math

import numpy as np

from .errors import EnergyIncreased
from .geometry import eta_potential, grid_geometry
from .helpers import forward_differences
from .metrics import angular_range, circular_mean
from .models.one_constant import geometric_constant, laplacian_from_differences, one_constant_terms
from .sectors import field_winding, lift_on_grid, total_alpha
from .types import (
    Classification, ConstantState, FlowOutcome, FlowParams, FlowResult, FlowTrace,
    NonConstant, PeriodicGrid, ScalarField, SectorField, TorusShape,
)

logger = logging.getLogger(__name__)

# Allowed per-step energy rise, relative to 1 + |E|, before a step counts as an increase.
MONOTONE_RTOL = 1e-12
CONSTANT_RANGE_TOL = 1e-2


def discrete_laplacian(field: SectorField) -> ScalarField:
    """Laplace-Beltrami of the total deviation u + psi_h with jump-corrected seams."""
    geo = grid_geometry(field.shape, field.grid)
    d_t, d_p = forward_differences(total_alpha(field), field.index)
    return laplacian_from_differences(d_t, d_p, geo)


def flow_rhs(field: SectorField, kappa: float) -> ScalarField:
    """kappa Lap(alpha) + kappa eta sin(2 alpha); equals -(1/w) dE/dalpha of the discrete energy."""
    geo = grid_geometry(field.shape, field.grid)
    _, _, rhs = one_constant_terms(total_alpha(field), field.index, geo, kappa)
    return rhs


def cfl_max_dt(shape: TorusShape, grid: PeriodicGrid, kappa: float, max_eta: float | None = None) -> float:
    """
    Forward-Euler stability bound
        dt_max = 1 / (2 kappa (1/(r d_theta)^2 + 1/((R - r) d_phi)^2) + 2 kappa max|eta|).
    The parallel spacing is taken at the inner equator, where it is smallest.
    """
    if max_eta is None:
        max_eta = float(np.max(np.abs(eta_potential(shape, grid.theta))))
    diffusion = 1.0 / (shape.r * grid.d_theta) ** 2 + 1.0 / ((shape.R - shape.r) * grid.d_phi) ** 2
    return 1.0 / (2.0 * kappa * diffusion + 2.0 * kappa * abs(max_eta))


def run_flow(initial: SectorField, kappa: float, params: FlowParams = FlowParams()) -> FlowResult:
    """
    Forward-Euler L2 gradient flow of the one-constant energy inside the sector of `initial`.

    Every step checks E_{k+1} <= E_k + 1e-12 (1 + |E_k|) and raises EnergyIncreased otherwise.
    Every `snapshot_every` steps the energy, the residual max-norm and the winding are
    recorded, and the run stops once the energy dropped by less than stop_tol since the
    previous snapshot.
    """
    if not (kappa > 0):
        raise ValueError(f"kappa must be > 0 (got {kappa}).")
    shape, grid, index = initial.shape, initial.grid, initial.index
    geo = grid_geometry(shape, grid)
    dt_max = cfl_max_dt(shape, grid, kappa, float(np.max(np.abs(geo.eta))))
    if params.dt is None:
        dt = params.cfl_safety * dt_max
    else:
        dt = params.dt
        if dt > dt_max:
            logger.warning("dt=%.3e exceeds the stability bound %.3e; energy may increase.", dt, dt_max)

    psi = lift_on_grid(shape, index, grid)
    const = geometric_constant(shape.b, kappa)

    def evaluate(u):
        dirichlet, potential, rhs = one_constant_terms(u + psi, index, geo, kappa)
        return dirichlet + potential + const, rhs

    u = initial.u.copy()
    energy, rhs = evaluate(u)
    trace = FlowTrace()
    trace.record(0, 0.0, energy, float(np.max(np.abs(rhs))) / kappa, field_winding(initial))
    logger.info("flow start: b=%.6g h=%s grid=%dx%d dt=%.3e E=%.10g",
                shape.b, index.as_tuple(), grid.n_theta, grid.n_phi, dt, energy)

    outcome = FlowOutcome.MAX_STEPS
    snapshot_energy = energy
    step = 0
    while step < params.max_steps:
        u = u + dt * rhs
        step += 1
        new_energy, rhs = evaluate(u)
        if new_energy > energy + MONOTONE_RTOL * (1.0 + abs(energy)):
            raise EnergyIncreased(step, energy, new_energy, trace)
        energy = new_energy

        if step % params.snapshot_every == 0 or step == params.max_steps:
            trace.record(step, step * dt, energy, float(np.max(np.abs(rhs))) / kappa,
                         field_winding(initial.with_u(u)))
            if logger.isEnabledFor(logging.DEBUG):
                logger.debug("step %d: E=%.12g |res|=%.3e", step, energy, trace.residuals[-1])
            if abs(snapshot_energy - energy) < params.stop_tol:
                outcome = FlowOutcome.CONVERGED
                break
            snapshot_energy = energy

    logger.info("flow end: %s after %d steps, E=%.10g (E/pi^2=%.6f)",
                outcome.value, step, energy, energy / math.pi**2)
    return FlowResult(final=initial.with_u(u), trace=trace, outcome=outcome, steps=step, dt=dt)


def classify_final(final: SectorField, tol: float = CONSTANT_RANGE_TOL) -> Classification:
    """ConstantState(circular mean) when max(alpha) - min(alpha) < tol, else NonConstant(range)."""
    alpha = total_alpha(final)
    spread = angular_range(alpha)
    if spread < tol:
        return ConstantState(value=circular_mean(alpha))
    return NonConstant(range=spread)
