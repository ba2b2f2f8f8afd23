import math

import numpy as np
import pytest
from scipy.integrate import quad

from nemengine.energy import eta_integral
from nemengine.geometry import (
    area_density, darboux_invariants, director_from_alpha, embedding, eta_potential, frame,
    geometry_at, laplace_beltrami_coeffs, principal_curvatures, surface_gradient, surface_gradient_norm2,
)
from nemengine.types import SurfacePoint, TorusShape


SHAPE = TorusShape(R=2.0, r=1.0)


def test_geometry_at_closed_forms():
    """Curvatures, spin connection and area density at the points worked out by hand (R=2, r=1)."""
    g0 = geometry_at(SHAPE, SurfacePoint(0.0, 0.0))
    assert np.isclose(g0.c1, 1.0) and np.isclose(g0.c2, 1.0 / 3.0)

    gpi = geometry_at(SHAPE, SurfacePoint(math.pi, 0.3))
    assert np.isclose(gpi.c2, -1.0)
    assert np.isclose(gpi.kappa2, 0.0, atol=1e-15)
    assert gpi.kappa1 == 0.0

    ghalf = geometry_at(SHAPE, SurfacePoint(math.pi / 2, 1.0))
    assert np.isclose(ghalf.spin_A_phi, 0.5)
    assert np.isclose(ghalf.area_density, 2.0)
    assert np.isclose(ghalf.g_inv_theta, 1.0) and np.isclose(ghalf.g_inv_phi, 0.25)


def test_surface_point_reduces_angles():
    p = SurfacePoint(2 * math.pi + 0.5, -0.25)
    assert np.isclose(p.theta, 0.5)
    assert np.isclose(p.phi, 2 * math.pi - 0.25)


def test_torus_shape_rejects_degenerate_radii():
    with pytest.raises(ValueError):
        TorusShape(R=1.0, r=1.0)
    with pytest.raises(ValueError):
        TorusShape(R=2.0, r=0.0)
    with pytest.raises(ValueError):
        TorusShape(R=1.0 + 1e-12, r=1.0)


def test_frame_is_orthonormal():
    """e1, e2, nu are orthonormal to 1e-14 at random points."""
    rng = np.random.default_rng(1)
    theta = rng.uniform(0, 2 * math.pi, 200)
    phi = rng.uniform(0, 2 * math.pi, 200)
    e1, e2, nu = frame(theta, phi)
    for a, b in ((e1, e2), (e1, nu), (e2, nu)):
        assert np.max(np.abs(np.sum(a * b, axis=-1))) < 1e-14
    for v in (e1, e2, nu):
        assert np.max(np.abs(np.linalg.norm(v, axis=-1) - 1.0)) < 1e-14


def test_frame_matches_embedding_derivatives():
    """e1 = X_theta / r and e2 = X_phi / rho, checked by central differences of the embedding."""
    theta, phi, h = 0.7, 2.1, 1e-5
    e1, e2, _ = frame(theta, phi)
    X_t = (embedding(SHAPE, theta + h, phi) - embedding(SHAPE, theta - h, phi)) / (2 * h)
    X_p = (embedding(SHAPE, theta, phi + h) - embedding(SHAPE, theta, phi - h)) / (2 * h)
    rho = SHAPE.R + SHAPE.r * math.cos(theta)
    assert np.allclose(X_t / SHAPE.r, e1, atol=1e-8)
    assert np.allclose(X_p / rho, e2, atol=1e-8)


def test_eta_potential_examples():
    assert np.isclose(eta_potential(TorusShape(2.0, 1.0), math.pi), 0.0, atol=1e-15)
    assert np.isclose(eta_potential(TorusShape(2.0, 1.0), 0.0), 4.0 / 9.0)
    theta = np.linspace(0, 2 * math.pi, 101)
    assert np.all(eta_potential(TorusShape(3.0, 1.0), theta) > 0)


def test_eta_sign_follows_b_plus_two_cos():
    theta = np.linspace(0, 2 * math.pi, 257)
    shape = TorusShape(1.4, 1.0)
    sign = np.sign(shape.b + 2 * np.cos(theta))
    mask = sign != 0
    assert np.all(np.sign(eta_potential(shape, theta))[mask] == sign[mask])


def test_laplace_beltrami_coeffs():
    a = laplace_beltrami_coeffs(SHAPE, 0.0)
    assert np.allclose(a, (1.0, 0.0, 1.0 / 9.0))
    a = laplace_beltrami_coeffs(SHAPE, math.pi / 2)
    assert np.allclose(a, (1.0, -0.5, 0.25))

    theta = 0.9
    tt, t, pp = laplace_beltrami_coeffs(SHAPE, theta)
    tt2, t2, pp2 = laplace_beltrami_coeffs(SHAPE, 2 * math.pi - theta)
    assert np.isclose(tt, tt2) and np.isclose(t, -t2) and np.isclose(pp, pp2)


def test_darboux_invariants_special_angles():
    """c_n and tau_n reduce to the principal curvatures at alpha = 0 and pi/2."""
    theta = np.linspace(0, 2 * math.pi, 33)
    c1, c2 = principal_curvatures(SHAPE, theta)
    d0 = darboux_invariants(SHAPE, theta, 0.0, (0.0, 0.0))
    assert np.allclose(d0.c_n, c1) and np.allclose(d0.tau_n, 0.0)
    d90 = darboux_invariants(SHAPE, theta, math.pi / 2, (0.0, 0.0))
    assert np.allclose(d90.c_n, c2) and np.allclose(d90.tau_n, 0.0, atol=1e-15)

    # n = e1 at theta = pi/2 on b = 2: kappa_n = kappa1 = 0 and kappa_t = A_phi = 1/2
    d = darboux_invariants(SHAPE, SurfacePoint(math.pi / 2, 0.0), 0.0, (0.0, 0.0))
    assert np.isclose(d.kappa_n, 0.0)
    assert np.isclose(d.kappa_t, 0.5)


def test_darboux_identity_against_one_constant_integrand():
    """kappa_t^2 + tau_n^2 + kappa_n^2 + c_n^2 = |grad alpha - A|^2 + c1^2 cos^2 + c2^2 sin^2 at random samples."""
    rng = np.random.default_rng(7)
    n = 1000
    theta = rng.uniform(0, 2 * math.pi, n)
    alpha = rng.uniform(-4, 4, n)
    grad = (rng.normal(size=n), rng.normal(size=n))
    shape = TorusShape(2.3, 0.8)

    d = darboux_invariants(shape, theta, alpha, grad)
    rho = shape.R + shape.r * np.cos(theta)
    g1, g2 = grad[0] / shape.r, grad[1] / rho
    a_phi = np.sin(theta) / rho
    c1, c2 = principal_curvatures(shape, theta)
    expected = g1**2 + (g2 - a_phi) ** 2 + c1**2 * np.cos(alpha) ** 2 + c2**2 * np.sin(alpha) ** 2
    assert np.allclose(d.sum_of_squares(), expected, rtol=1e-12, atol=1e-12)


def test_surface_gradient_norm_matches_darboux_sum():
    rng = np.random.default_rng(3)
    theta = rng.uniform(0, 2 * math.pi, 300)
    phi = rng.uniform(0, 2 * math.pi, 300)
    alpha = rng.uniform(-3, 3, 300)
    grad = (rng.normal(size=300), rng.normal(size=300))
    d = darboux_invariants(SHAPE, theta, alpha, grad)
    assert np.allclose(surface_gradient_norm2(SHAPE, theta, phi, alpha, grad), d.sum_of_squares(), rtol=1e-12)


def test_surface_gradient_matches_embedded_differences():
    """
    For alpha(theta, phi) = a0 + p theta + q phi, the directional derivatives of the
    embedded director along e1 and e2 equal the columns of the explicit matrix.
    """
    a0, p, q = 0.4, 1.3, -2.0
    theta, phi, h = 1.1, 0.6, 1e-5

    def n_at(t, f):
        return director_from_alpha(SHAPE, np.array(t), a0 + p * t + q * f, np.array(f))

    e1, e2, _ = frame(theta, phi)
    M = surface_gradient(SHAPE, theta, phi, a0 + p * theta + q * phi, (p, q))
    rho = SHAPE.R + SHAPE.r * math.cos(theta)
    d1 = (n_at(theta + h, phi) - n_at(theta - h, phi)) / (2 * h * SHAPE.r)
    d2 = (n_at(theta, phi + h) - n_at(theta, phi - h)) / (2 * h * rho)
    assert np.allclose(M @ e1, d1, atol=1e-8)
    assert np.allclose(M @ e2, d2, atol=1e-8)


@pytest.mark.parametrize("alpha", [0.0, math.pi / 2, math.pi, math.pi / 4, -2.2])
def test_director_is_unit_and_tangent(alpha):
    rng = np.random.default_rng(11)
    theta = rng.uniform(0, 2 * math.pi, 100)
    phi = rng.uniform(0, 2 * math.pi, 100)
    n = director_from_alpha(SHAPE, theta, np.full(100, alpha), phi)
    _, _, nu = frame(theta, phi)
    assert np.max(np.abs(np.linalg.norm(n, axis=-1) - 1.0)) < 1e-14
    assert np.max(np.abs(np.sum(n * nu, axis=-1))) < 1e-14


def test_director_special_angles():
    p = SurfacePoint(0.8, 2.4)
    e1, e2, _ = frame(p.theta, p.phi)
    assert np.allclose(director_from_alpha(SHAPE, p, 0.0), e1)
    assert np.allclose(director_from_alpha(SHAPE, p, math.pi / 2), e2)
    assert np.allclose(director_from_alpha(SHAPE, p, math.pi), -e1)


def test_gauss_bonnet_zero():
    """int c1 c2 sqrt(g) over the parameter square vanishes."""
    for shape in (SHAPE, TorusShape(1.1, 1.0), TorusShape(5.0, 0.5)):
        def integrand(t):
            c1, c2 = principal_curvatures(shape, t)
            return float(c1 * c2 * area_density(shape, t))
        value = 2 * math.pi * quad(integrand, 0, 2 * math.pi, epsabs=1e-13, limit=200)[0]
        assert abs(value) < 1e-10


@pytest.mark.parametrize("b", [1.05, 1.25, 2.0, 3.7])
def test_eta_integral_by_quadrature(b):
    shape = TorusShape.from_aspect(b)
    value = 2 * math.pi * quad(lambda t: float(eta_potential(shape, t) * area_density(shape, t)),
                               0, 2 * math.pi, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
    assert np.isclose(value, eta_integral(b), rtol=1e-11, atol=1e-10)
