# src/nemengine/geometry.py
"""
Closed-form geometry of the torus

    X(theta, phi) = ((R + r cos theta) cos phi, (R + r cos theta) sin phi, r sin theta)

with the orthonormal frame e1 = X_theta / r, e2 = X_phi / (R + r cos theta) and the
inner normal nu. Everything depends on theta only, except the frame itself.

Functions accept scalars or numpy arrays for the angles and broadcast.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .types import (
    DarbouxInvariants, GeometrySample, PeriodicGrid, SurfacePoint, TorusShape,
)


def _rho(shape: TorusShape, theta):
    """Distance from the symmetry axis, R + r cos theta."""
    return shape.R + shape.r * np.cos(theta)


def principal_curvatures(shape: TorusShape, theta):
    """(c1, c2) with respect to the inner normal; c1 = 1/r everywhere."""
    theta = np.asarray(theta, dtype=float)
    c1 = np.full_like(theta, 1.0 / shape.r)
    c2 = np.cos(theta) / _rho(shape, theta)
    return c1, c2


def geodesic_curvatures(shape: TorusShape, theta):
    """(kappa1, kappa2) of the meridians and parallels; meridians are geodesics."""
    theta = np.asarray(theta, dtype=float)
    return np.zeros_like(theta), -np.sin(theta) / _rho(shape, theta)


def spin_connection(shape: TorusShape, theta):
    """Frame components (A_theta, A_phi) of A = -kappa1 e1 - kappa2 e2."""
    k1, k2 = geodesic_curvatures(shape, theta)
    return -k1, -k2


def area_density(shape: TorusShape, theta):
    return shape.r * _rho(shape, theta)


def inverse_metric(shape: TorusShape, theta):
    theta = np.asarray(theta, dtype=float)
    return np.full_like(theta, 1.0 / shape.r**2), 1.0 / _rho(shape, theta) ** 2


def eta_potential(shape: TorusShape, theta):
    """
    eta = (c1^2 - c2^2) / 2.

    Since c1^2 - c2^2 = r^-2 b (b + 2 cos theta) / (b + cos theta)^2, eta has the sign of b + 2 cos theta.
    """
    c1, c2 = principal_curvatures(shape, theta)
    return 0.5 * (c1**2 - c2**2)


def laplace_beltrami_coeffs(shape: TorusShape, theta):
    """(a_tt, a_t, a_pp) with Laplace-Beltrami = a_tt d_tt + a_t d_t + a_pp d_pp."""
    theta = np.asarray(theta, dtype=float)
    rho = _rho(shape, theta)
    a_tt = np.full_like(theta, 1.0 / shape.r**2)
    a_t = -np.sin(theta) / (shape.r * rho)
    a_pp = 1.0 / rho**2
    return a_tt, a_t, a_pp


def frame(theta, phi):
    """e1, e2, nu as arrays with a trailing axis of length 3."""
    theta, phi = np.broadcast_arrays(np.asarray(theta, dtype=float), np.asarray(phi, dtype=float))
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    e1 = np.stack([-st * cp, -st * sp, ct], axis=-1)
    e2 = np.stack([-sp, cp, np.zeros_like(theta)], axis=-1)
    nu = np.stack([-ct * cp, -ct * sp, -st], axis=-1)
    return e1, e2, nu


def embedding(shape: TorusShape, theta, phi):
    """Point X(theta, phi) in R^3 (trailing axis of length 3)."""
    theta, phi = np.broadcast_arrays(np.asarray(theta, dtype=float), np.asarray(phi, dtype=float))
    rho = _rho(shape, theta)
    return np.stack([rho * np.cos(phi), rho * np.sin(phi), shape.r * np.sin(theta)], axis=-1)


def geometry_at(shape: TorusShape, p: SurfacePoint) -> GeometrySample:
    c1, c2 = principal_curvatures(shape, p.theta)
    k1, k2 = geodesic_curvatures(shape, p.theta)
    _, a_phi = spin_connection(shape, p.theta)
    gi_t, gi_p = inverse_metric(shape, p.theta)
    e1, e2, nu = frame(p.theta, p.phi)
    return GeometrySample(
        c1=float(c1), c2=float(c2),
        kappa1=float(k1), kappa2=float(k2),
        spin_A_phi=float(a_phi),
        area_density=float(area_density(shape, p.theta)),
        g_inv_theta=float(gi_t), g_inv_phi=float(gi_p),
        e1=tuple(float(x) for x in e1),
        e2=tuple(float(x) for x in e2),
        nu=tuple(float(x) for x in nu),
    )


def orthonormal_gradient(shape: TorusShape, theta, grad_alpha):
    """Convert coordinate partials (d_theta alpha, d_phi alpha) into e1/e2 components."""
    d_t, d_p = grad_alpha
    return np.asarray(d_t, dtype=float) / shape.r, np.asarray(d_p, dtype=float) / _rho(shape, theta)


def _theta_of(p):
    return p.theta if isinstance(p, SurfacePoint) else np.asarray(p, dtype=float)


def darboux_invariants(shape: TorusShape, p, alpha, grad_alpha) -> DarbouxInvariants:
    """
    Darboux invariants of n = cos(alpha) e1 + sin(alpha) e2.

    p may be a SurfacePoint or an array of theta values (the invariants do not depend on phi).
    grad_alpha holds coordinate partials (d_theta alpha, d_phi alpha).
    With G = grad_s(alpha) - A and t = (sin alpha, -cos alpha):
        kappa_n = G.n, kappa_t = G.t,
        c_n = c1 cos^2 + c2 sin^2, tau_n = (c1 - c2) cos sin.
    """
    theta = _theta_of(p)
    alpha = np.asarray(alpha, dtype=float)
    g1, g2 = orthonormal_gradient(shape, theta, grad_alpha)
    a_t, a_p = spin_connection(shape, theta)
    c1, c2 = principal_curvatures(shape, theta)
    G1, G2 = g1 - a_t, g2 - a_p
    ca, sa = np.cos(alpha), np.sin(alpha)
    return DarbouxInvariants(
        kappa_n=G1 * ca + G2 * sa,
        kappa_t=G1 * sa - G2 * ca,
        c_n=c1 * ca**2 + c2 * sa**2,
        tau_n=(c1 - c2) * ca * sa,
    )


def director_from_alpha(shape: TorusShape, p, alpha, phi=None):
    """
    n = cos(alpha) e1 + sin(alpha) e2 as a unit tangent 3-vector.

    p is a SurfacePoint, or an array of theta values together with the matching phi.
    """
    if isinstance(p, SurfacePoint):
        theta, phi = p.theta, p.phi
    else:
        theta = np.asarray(p, dtype=float)
    e1, e2, _ = frame(theta, phi)
    alpha = np.asarray(alpha, dtype=float)[..., None]
    return np.cos(alpha) * e1 + np.sin(alpha) * e2


def surface_gradient(shape: TorusShape, theta, phi, alpha, grad_alpha):
    """
    Cartesian 3x3 matrix of grad_s n = (D_e1 n) (x) e1 + (D_e2 n) (x) e2.

    In the frame (e1, e2, nu), with m = (-sin alpha, cos alpha):
        D_e1 n = g1 m + c1 cos(alpha) nu
        D_e2 n = (g2 - A_phi) m + c2 sin(alpha) nu
    """
    e1, e2, nu = frame(theta, phi)
    alpha = np.asarray(alpha, dtype=float)
    g1, g2 = orthonormal_gradient(shape, theta, grad_alpha)
    _, a_p = spin_connection(shape, theta)
    c1, c2 = principal_curvatures(shape, theta)
    m = -np.sin(alpha)[..., None] * e1 + np.cos(alpha)[..., None] * e2
    d1 = np.asarray(g1)[..., None] * m + (c1 * np.cos(alpha))[..., None] * nu
    d2 = np.asarray(g2 - a_p)[..., None] * m + (c2 * np.sin(alpha))[..., None] * nu
    return d1[..., :, None] * e1[..., None, :] + d2[..., :, None] * e2[..., None, :]


def surface_gradient_norm2(shape: TorusShape, theta, phi, alpha, grad_alpha):
    """|grad_s n|^2 (Frobenius) from the explicit matrix."""
    M = surface_gradient(shape, theta, phi, alpha, grad_alpha)
    return np.sum(M**2, axis=(-2, -1))


@dataclass(frozen=True)
class GridGeometry:
    """
    Per-theta-row geometry of a periodic grid, shape (n_theta,) for every array.

    weights      : node weights sqrt(g) d_theta d_phi (trapezoid rule on the torus)
    face_weights : theta-face weights (w_i + w_{i+1}) / 2 between rows i and i+1
    """
    shape: TorusShape
    grid: PeriodicGrid
    theta: np.ndarray
    rho: np.ndarray
    c1: np.ndarray
    c2: np.ndarray
    eta: np.ndarray
    a_phi: np.ndarray
    a_pp: np.ndarray
    weights: np.ndarray
    face_weights: np.ndarray

    @property
    def volume(self) -> float:
        return float(np.sum(self.weights)) * self.grid.n_phi


def grid_geometry(shape: TorusShape, grid: PeriodicGrid) -> GridGeometry:
    theta = grid.theta
    rho = _rho(shape, theta)
    c1, c2 = principal_curvatures(shape, theta)
    _, a_phi = spin_connection(shape, theta)
    w = area_density(shape, theta) * grid.d_theta * grid.d_phi
    return GridGeometry(
        shape=shape, grid=grid, theta=theta, rho=rho, c1=c1, c2=c2,
        eta=eta_potential(shape, theta), a_phi=a_phi, a_pp=1.0 / rho**2,
        weights=w, face_weights=0.5 * (w + np.roll(w, -1)),
    )
