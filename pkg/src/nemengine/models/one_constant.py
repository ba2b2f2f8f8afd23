# src/nemengine/models/one_constant.py
import math

import numpy as np

from ..geometry import GridGeometry
from ..helpers import backward, forward_differences, row_weighted_sum
from ..types import WindingIndex


def geometric_constant(b: float, kappa: float) -> float:
    """Alpha-independent part of the one-constant energy on the torus."""
    s = math.sqrt(b * b - 1.0)
    return kappa * math.pi**2 * ((2.0 - b * b) / s + 2.0 * b)


def laplacian_from_differences(d_t: np.ndarray, d_p: np.ndarray, geo: GridGeometry) -> np.ndarray:
    """
    Conservative Laplace-Beltrami from forward differences.

    theta part: (F_{i+1/2} - F_{i-1/2}) / w_i with face fluxes F = w_face d_t / (r d_theta)^2,
    phi part:   a_pp (d_p[j] - d_p[j-1]) / d_phi^2.
    """
    grid = geo.grid
    flux = (geo.face_weights / (geo.shape.r * grid.d_theta) ** 2)[:, None] * d_t
    lap_t = (flux - backward(flux, 0)) / geo.weights[:, None]
    lap_p = (geo.a_pp / grid.d_phi**2)[:, None] * (d_p - backward(d_p, 1))
    return lap_t + lap_p


def one_constant_terms(alpha: np.ndarray, index: WindingIndex, geo: GridGeometry, kappa: float):
    """
    Discrete one-constant energy and its L2(dVol) gradient-flow velocity.

    Parameters:
      alpha : total deviation on the open grid
      index : winding sector of alpha (seam jumps)
      geo   : per-row geometry of the grid
      kappa : one-constant modulus

    Returns (dirichlet, potential, rhs) where
      dirichlet = kappa/2 sum [w_face (D_theta alpha / r d_theta)^2 + w (D_phi alpha / rho d_phi)^2]
      potential = kappa/2 sum w eta cos(2 alpha)
      rhs       = kappa Lap(alpha) + kappa eta sin(2 alpha) = -(1/w) dE/dalpha
    """
    grid = geo.grid
    d_t, d_p = forward_differences(alpha, index)

    grad_t2 = (d_t / (geo.shape.r * grid.d_theta)) ** 2
    grad_p2 = (geo.a_pp / grid.d_phi**2)[:, None] * d_p**2
    dirichlet = 0.5 * kappa * (row_weighted_sum(grad_t2, geo.face_weights) + row_weighted_sum(grad_p2, geo.weights))
    potential = 0.5 * kappa * row_weighted_sum(geo.eta[:, None] * np.cos(2 * alpha), geo.weights)

    rhs = kappa * (laplacian_from_differences(d_t, d_p, geo) + geo.eta[:, None] * np.sin(2 * alpha))
    return dirichlet, potential, rhs
