# src/nemengine/stationary.py
"""
Stationary states: Euler-Lagrange residuals, second variation, the critical points of the
constant-deviation energy and the aspect-ratio threshold of the parallel state.

Residuals carry the sign of the gradient-flow velocity, -(1/w) dE/dalpha.
"""
from __future__ import annotations

import logging
import math
from typing import Callable, Iterable

import numpy as np
from scipy.linalg import eigh
from scipy.optimize import brentq

from .energy import bifurcation_scalars
from .errors import BracketInvalid, FlowNotConverged
from .geometry import eta_potential, grid_geometry
from .helpers import row_weighted_sum
from .metrics import max_norm, weighted_l2
from .models.frank import frank_terms
from .models.one_constant import one_constant_terms
from .sectors import total_alpha
from .solvers import classify_final, run_flow
from .types import (
    MIN_NODES, ZERO_INDEX, ConstantState, CriticalPoint, ElasticConstants, FlowOutcome, FlowParams, Model,
    NonConstant, PeriodicGrid, ResidualReport, ScalarField, SectorField, Stability,
    StabilityReport, ThresholdResult, ThresholdStep, TorusShape,
)

logger = logging.getLogger(__name__)

DEAD_BAND = 1e-12
SIGN_XTOL = 1e-12
# |cos 2 alpha| this close to 1 puts the second type on the meridian or parallel state
SECOND_TYPE_EDGE = 1e-12


# --------------------------
# Residuals
# --------------------------
def residual_field(field: SectorField, constants: ElasticConstants | None = None,
                   model: Model = "one_constant") -> ScalarField:
    """
    Pointwise discrete Euler-Lagrange residual.

    one_constant : Lap(alpha) + eta sin(2 alpha)
    full         : div-flux terms of f_g minus f_alpha / 2, i.e. -(1/w) dE_full/dalpha
    """
    geo = grid_geometry(field.shape, field.grid)
    alpha = total_alpha(field)
    if model == "one_constant":
        return one_constant_terms(alpha, field.index, geo, 1.0)[2]
    if model == "full":
        if constants is None:
            raise ValueError("the full residual needs elastic constants.")
        return frank_terms(alpha, field.index, geo, constants)[3]
    raise ValueError(f"unknown energy model '{model}'.")


def _report(res: ScalarField, field: SectorField, model: Model) -> ResidualReport:
    geo = grid_geometry(field.shape, field.grid)
    return ResidualReport(max_norm=max_norm(res), l2_norm=weighted_l2(res, geo.weights), model=model)


def el_residual_one_constant(field: SectorField) -> ResidualReport:
    return _report(residual_field(field), field, "one_constant")


def el_residual_full(field: SectorField, constants: ElasticConstants) -> ResidualReport:
    return _report(residual_field(field, constants, "full"), field, "full")


def second_variation(field: SectorField, direction: ScalarField, kappa: float) -> float:
    """kappa sum [ |grad omega|^2 - 2 eta cos(2 alpha) omega^2 ] w, the exact discrete Hessian form."""
    omega = np.asarray(direction, dtype=float)
    if omega.shape != field.grid.shape:
        raise ValueError(f"direction has shape {omega.shape}, grid expects {field.grid.shape}.")
    geo = grid_geometry(field.shape, field.grid)
    dirichlet, _, _ = one_constant_terms(omega, ZERO_INDEX, geo, kappa)
    alpha = total_alpha(field)
    potential = row_weighted_sum(2 * geo.eta[:, None] * np.cos(2 * alpha) * omega**2, geo.weights)
    return 2.0 * dirichlet - kappa * potential


# --------------------------
# Constant deviations
# --------------------------
def _stability(discriminant: float, dead_band: float) -> Stability:
    if discriminant > dead_band:
        return "Stable"
    if discriminant < -dead_band:
        return "Unstable"
    return "Marginal"


def meridian_discriminant(b: float, constants: ElasticConstants) -> float:
    """A (K3-K1) + B (K2-K3) - C K3; alpha = m pi is a stable minimum when positive."""
    sc = bifurcation_scalars(b)
    K1, K2, K3 = constants.K1, constants.K2, constants.K3
    return sc.A * (K3 - K1) + sc.B * (K2 - K3) - sc.C * K3


def parallel_discriminant(b: float, constants: ElasticConstants) -> float:
    """-A (K3-K1) + B (K2-K3) + C K3; alpha = (2m+1) pi/2 is a stable minimum when positive."""
    sc = bifurcation_scalars(b)
    K1, K2, K3 = constants.K1, constants.K2, constants.K3
    return -sc.A * (K3 - K1) + sc.B * (K2 - K3) + sc.C * K3


def constant_state_analysis(shape: TorusShape, constants: ElasticConstants,
                            dead_band: float = DEAD_BAND) -> StabilityReport:
    """
    Critical angles of the constant-deviation energy over one period [0, pi).

    W' factors through sin(2 alpha), giving the meridian (0) and parallel (pi/2) states;
    a second type solves cos(2 alpha) = (C K3 - A (K3-K1)) / (B (K2-K3)) when K2 != K3 and
    the right side lies strictly inside (-1, 1); at |cos 2 alpha| = 1 they merge into the first
    type and are not listed. Second-type points are minima exactly when K3 > K2.
    """
    b = shape.b
    sc = bifurcation_scalars(b)
    K1, K2, K3 = constants.K1, constants.K2, constants.K3
    d_m = meridian_discriminant(b, constants)
    d_p = parallel_discriminant(b, constants)
    points = [
        CriticalPoint(angle=0.0, family="Meridian", discriminant=d_m, stability=_stability(d_m, dead_band)),
        CriticalPoint(angle=math.pi / 2, family="Parallel", discriminant=d_p, stability=_stability(d_p, dead_band)),
    ]

    argument = None
    if K2 != K3:
        argument = (sc.C * K3 - sc.A * (K3 - K1)) / (sc.B * (K2 - K3))
        if abs(argument) < 1.0 - SECOND_TYPE_EDGE:
            half = 0.5 * math.acos(argument)
            d_s = sc.B * (K3 - K2) * (1.0 - argument**2)
            for angle in (half, math.pi - half):
                points.append(CriticalPoint(angle=angle, family="SecondType", discriminant=d_s,
                                            stability=_stability(d_s, dead_band)))

    return StabilityReport(
        critical_angles=tuple(points),
        bifurcation=sc,
        meridian_discriminant=d_m,
        parallel_discriminant=d_p,
        second_type_argument=argument,
    )


def locate_sign_change(f: Callable[[float], float], lo: float, hi: float, xtol: float = SIGN_XTOL) -> float:
    """Root of f on [lo, hi]; f(lo) and f(hi) must differ in sign."""
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if np.sign(f_lo) == np.sign(f_hi):
        raise ValueError(f"no sign change on [{lo}, {hi}] (f={f_lo:.3e}, {f_hi:.3e}).")
    return float(brentq(f, lo, hi, xtol=xtol))


def _scan_transitions(functions: dict[str, Callable[[float], float]], values: np.ndarray,
                      xtol: float) -> list[tuple[str, float]]:
    found = []
    for name, f in functions.items():
        signs = np.sign([f(x) for x in values])
        for k in range(len(values) - 1):
            if signs[k] == 0:
                found.append((name, float(values[k])))
            elif signs[k + 1] != 0 and signs[k] != signs[k + 1]:
                found.append((name, locate_sign_change(f, float(values[k]), float(values[k + 1]), xtol)))
    return sorted(found, key=lambda item: item[1])


def stability_transitions_in_b(constants: ElasticConstants, b_lo: float, b_hi: float,
                               samples: int = 400, xtol: float = SIGN_XTOL) -> list[tuple[str, float]]:
    """Aspect ratios in (b_lo, b_hi) where the meridian or parallel stability flag flips."""
    values = np.linspace(b_lo, b_hi, samples)
    return _scan_transitions({
        "Meridian": lambda b: meridian_discriminant(b, constants),
        "Parallel": lambda b: parallel_discriminant(b, constants),
    }, values, xtol)


def stability_transitions_in_lambda(b: float, lam_lo: float, lam_hi: float, K2: float = 1.0,
                                    samples: int = 400, xtol: float = SIGN_XTOL) -> list[tuple[str, float]]:
    """Ratios lambda = K3/K2 (with K1 = K3) where the meridian or parallel flag flips."""
    def constants(lam: float) -> ElasticConstants:
        return ElasticConstants(K1=lam * K2, K2=K2, K3=lam * K2)

    values = np.linspace(lam_lo, lam_hi, samples)
    return _scan_transitions({
        "Meridian": lambda lam: meridian_discriminant(b, constants(lam)),
        "Parallel": lambda lam: parallel_discriminant(b, constants(lam)),
    }, values, xtol)


def bifurcation_branches(b: float, lambdas: Iterable[float], K2: float = 1.0) -> list[tuple[float, CriticalPoint]]:
    """(lambda, critical point) rows of the K1 = K3 = lambda K2 family at fixed aspect ratio."""
    shape = TorusShape.from_aspect(b)
    rows = []
    for lam in lambdas:
        report = constant_state_analysis(shape, ElasticConstants(K1=lam * K2, K2=K2, K3=lam * K2))
        rows.extend((float(lam), point) for point in report.critical_angles)
    return rows


# --------------------------
# Aspect-ratio threshold
# --------------------------
def threshold_datum(grid: PeriodicGrid, seed: int = 0, amplitude: float = 0.05) -> np.ndarray:
    """pi/2 + amplitude * uniform(-1, 1) noise; identical for every b of a search."""
    rng = np.random.default_rng(seed)
    return math.pi / 2 + amplitude * rng.uniform(-1.0, 1.0, size=grid.shape)


def threshold_search(b_lo: float, b_hi: float, kappa: float, grid: PeriodicGrid,
                     params: FlowParams = FlowParams(), *, r: float = 1.0, tol: float = 5e-3,
                     seed: int = 0, amplitude: float = 0.05) -> ThresholdResult:
    """
    Bisection on b for the transition between a non-constant (b_lo) and a constant (b_hi)
    limit of the sector-(0,0) flow, started from the same perturbed parallel datum at every b.

    Both endpoint flows must converge (FlowNotConverged otherwise). An interior flow that hits
    the step cap is still classified by its final state, logged, and listed in
    ``ThresholdResult.unconverged``.
    """
    if not (1.0 < b_lo < b_hi):
        raise BracketInvalid(f"need 1 < b_lo < b_hi (got {b_lo}, {b_hi}).")
    if not (tol > 0):
        raise ValueError(f"tol must be > 0 (got {tol}).")
    datum = threshold_datum(grid, seed, amplitude)
    history: list[ThresholdStep] = []

    def classify(b: float, endpoint: bool = False):
        shape = TorusShape.from_aspect(b, r)
        initial = SectorField(u=datum, index=ZERO_INDEX, shape=shape, grid=grid)
        result = run_flow(initial, kappa, params)
        cls = classify_final(result.final)
        history.append(ThresholdStep(b=b, classification=cls, outcome=result.outcome,
                                     steps=result.steps, energy=result.trace.energies[-1]))
        logger.info("threshold: b=%.6f -> %s (%s, %d steps)", b, type(cls).__name__, result.outcome.value, result.steps)
        if result.outcome is not FlowOutcome.CONVERGED:
            if endpoint:
                raise FlowNotConverged(b, result.steps)
            logger.warning("threshold: flow at b=%.6f stopped at the step cap; classified from its last state", b)
        return cls

    if not isinstance(classify(b_lo, endpoint=True), NonConstant):
        raise BracketInvalid(f"flow at b_lo={b_lo} converges to a constant state.")
    if not isinstance(classify(b_hi, endpoint=True), ConstantState):
        raise BracketInvalid(f"flow at b_hi={b_hi} does not converge to a constant state.")

    lo, hi = b_lo, b_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if isinstance(classify(mid), ConstantState):
            hi = mid
        else:
            lo = mid
    return ThresholdResult(b_low=lo, b_high=hi, history=tuple(history))


def parallel_lowest_mode(b: float, n_theta: int = 256) -> float:
    """
    Lowest eigenvalue of the second variation at alpha = pi/2 relative to the dVol mass.

    At alpha = pi/2 the Hessian -Lap + 2 eta does not depend on phi, and phi-modes only add
    k^2 / rho^2 >= 0, so the theta-only problem H w = mu M w decides stability.
    """
    shape = TorusShape.from_aspect(b)
    grid = PeriodicGrid(n_theta, MIN_NODES)
    geo = grid_geometry(shape, grid)
    w = geo.weights
    face = geo.face_weights / (shape.r * grid.d_theta) ** 2
    H = np.diag(face + np.roll(face, 1) + 2 * eta_potential(shape, grid.theta) * w)
    idx = np.arange(n_theta)
    H[idx, (idx + 1) % n_theta] -= face
    H[(idx + 1) % n_theta, idx] -= face
    return float(eigh(H, np.diag(w), eigvals_only=True, subset_by_index=[0, 0])[0])


def parallel_instability_threshold(n_theta: int = 256, xtol: float = SIGN_XTOL) -> float:
    """Aspect ratio in (2/sqrt(3), 2] below which alpha = pi/2 has a descent direction."""
    b_lo = 2.0 / math.sqrt(3.0) + 1e-9
    return locate_sign_change(lambda b: parallel_lowest_mode(b, n_theta), b_lo, 2.0, xtol)
