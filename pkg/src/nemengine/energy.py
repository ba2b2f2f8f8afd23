# src/nemengine/energy.py
"""
Energies of a deviation field on the torus.

Discrete energies use node weights sqrt(g) d_theta d_phi and the jump-corrected
differences of helpers.forward_differences, so that the flow and residuals in
solvers/stationary are their exact gradients. Closed forms for constant
deviations and the scalar integrals they are built from live here as well.
"""
from __future__ import annotations

import math

import numpy as np

from .geometry import grid_geometry
from .models.frank import frank_terms
from .models.one_constant import geometric_constant, one_constant_terms
from .sectors import total_alpha
from .types import BifurcationScalars, ElasticConstants, EnergyBreakdown, Model, SectorField, TorusShape


def energy_one_constant(field: SectorField, constants: ElasticConstants) -> EnergyBreakdown:
    """
    (kappa/2) int |grad alpha|^2 + (kappa/2) int eta cos(2 alpha) + kappa pi^2 ((2 - b^2)/sqrt(b^2 - 1) + 2b).
    """
    kappa = constants.kappa
    geo = grid_geometry(field.shape, field.grid)
    dirichlet, potential, _ = one_constant_terms(total_alpha(field), field.index, geo, kappa)
    const = geometric_constant(field.shape.b, kappa)
    return EnergyBreakdown(
        model="one_constant",
        total=dirichlet + potential + const,
        dirichlet=dirichlet,
        potential=potential,
        geometric_const=const,
    )


def energy_full(field: SectorField, constants: ElasticConstants) -> EnergyBreakdown:
    """1/2 int K1 kappa_t^2 + K2 tau_n^2 + K3 (kappa_n^2 + c_n^2) dVol, split per modulus."""
    geo = grid_geometry(field.shape, field.grid)
    splay, twist, bend, _ = frank_terms(total_alpha(field), field.index, geo, constants)
    return EnergyBreakdown(model="full", total=splay + twist + bend, splay=splay, twist=twist, bend=bend)


def evaluate_energy(field: SectorField, constants: ElasticConstants, model: Model) -> EnergyBreakdown:
    if model == "one_constant":
        return energy_one_constant(field, constants)
    if model == "full":
        return energy_full(field, constants)
    raise ValueError(f"unknown energy model '{model}'.")


# --------------------------
# Constant deviations
# --------------------------
def bifurcation_scalars(b: float) -> BifurcationScalars:
    """A, B, C and eta = C/B of the constant-state analysis; lambda1 = 1/(1+eta), lambda2 = 1/(1-eta)."""
    _validate_aspect(b)
    s = math.sqrt(b * b - 1.0)
    A = 1.0 / (b + s)  # b - s without cancellation
    B = b * b / s
    C = 2.0 * b - B
    eta = C / B
    return BifurcationScalars(A=A, B=B, C=C, eta_scalar=eta, lambda1=1.0 / (1.0 + eta), lambda2=1.0 / (1.0 - eta))


def energy_constant_closed_form(shape: TorusShape, constants: ElasticConstants, alpha):
    """
    W(alpha) = pi^2 [(K1+K3) A + (K2+K3) B/2]
             + pi^2 cos(2 alpha) [(K1-K3) A + K3 C]
             + pi^2 cos^2(2 alpha) (K3-K2) B/2

    alpha may be a float or an array.
    """
    sc = bifurcation_scalars(shape.b)
    K1, K2, K3 = constants.K1, constants.K2, constants.K3
    c = np.cos(2 * np.asarray(alpha, dtype=float))
    W = math.pi**2 * (
        (K1 + K3) * sc.A + 0.5 * (K2 + K3) * sc.B
        + c * ((K1 - K3) * sc.A + K3 * sc.C)
        + c**2 * 0.5 * (K3 - K2) * sc.B
    )
    return float(W) if np.ndim(W) == 0 else W


def constant_energy_derivative(shape: TorusShape, constants: ElasticConstants, alpha):
    """W'(alpha) = 2 pi^2 sin(2 alpha) [A (K3-K1) + B cos(2 alpha) (K2-K3) - C K3]."""
    sc = bifurcation_scalars(shape.b)
    K1, K2, K3 = constants.K1, constants.K2, constants.K3
    a2 = 2 * np.asarray(alpha, dtype=float)
    dW = 2 * math.pi**2 * np.sin(a2) * (sc.A * (K3 - K1) + sc.B * np.cos(a2) * (K2 - K3) - sc.C * K3)
    return float(dW) if np.ndim(dW) == 0 else dW


def constant_energy_second_derivative(shape: TorusShape, constants: ElasticConstants, alpha):
    """W''(alpha) = 4 pi^2 [(A (K3-K1) - C K3) cos(2 alpha) + B (K2-K3) cos(4 alpha)]."""
    sc = bifurcation_scalars(shape.b)
    K1, K2, K3 = constants.K1, constants.K2, constants.K3
    a = np.asarray(alpha, dtype=float)
    d2W = 4 * math.pi**2 * ((sc.A * (K3 - K1) - sc.C * K3) * np.cos(2 * a) + sc.B * (K2 - K3) * np.cos(4 * a))
    return float(d2W) if np.ndim(d2W) == 0 else d2W


# --------------------------
# Scalar integrals over one period
# --------------------------
def integral_oracles(b: float) -> tuple[float, float, float]:
    """
    Closed forms over [0, 2pi]:
      int sin^2 t / (b + cos t)   = 2 pi (b - sqrt(b^2 - 1))
      int cos^2 t / (b + cos t)   = 2 pi b (b / sqrt(b^2 - 1) - 1)
      int 1 / (b + cos t)         = 2 pi / sqrt(b^2 - 1)
    """
    _validate_aspect(b)
    s = math.sqrt(b * b - 1.0)
    return 2 * math.pi / (b + s), 2 * math.pi * b * (b / s - 1.0), 2 * math.pi / s


def eta_integral(b: float) -> float:
    """int_Q eta dVol = 2 pi^2 b (2 - b / sqrt(b^2 - 1)); depends on the aspect ratio only."""
    _validate_aspect(b)
    return 2 * math.pi**2 * b * (2.0 - b / math.sqrt(b * b - 1.0))


def _validate_aspect(b: float) -> None:
    if not (b > 1):
        raise ValueError(f"aspect ratio b must be > 1 (got {b}).")
