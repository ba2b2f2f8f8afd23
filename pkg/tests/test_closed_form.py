import math

import numpy as np
import pytest
from scipy.integrate import quad

from nemengine.energy import (
    bifurcation_scalars, constant_energy_derivative, constant_energy_second_derivative,
    energy_constant_closed_form, integral_oracles,
)
from nemengine.geometry import area_density, darboux_invariants
from nemengine.models.one_constant import geometric_constant
from nemengine.types import ElasticConstants, TorusShape

B_VALUES = [1.1, 2 / math.sqrt(3), 1.25, 1.6, 2.0, 2.5]
K_VALUES = [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0), (1.0, 1.0, 1.0)]


def constant_energy_by_quadrature(shape: TorusShape, K: ElasticConstants, alpha: float) -> float:
    """1/2 int (K1 kappa_t^2 + K2 tau_n^2 + K3 (kappa_n^2 + c_n^2)) dVol for a constant deviation."""
    def integrand(t):
        d = darboux_invariants(shape, t, alpha, (0.0, 0.0))
        f = K.K1 * d.kappa_t**2 + K.K2 * d.tau_n**2 + K.K3 * (d.kappa_n**2 + d.c_n**2)
        return float(f * area_density(shape, t))
    return 0.5 * 2 * math.pi * quad(integrand, 0, 2 * math.pi, epsabs=1e-13, epsrel=1e-13, limit=200)[0]


@pytest.mark.parametrize("b", B_VALUES)
@pytest.mark.parametrize("K", K_VALUES)
def test_closed_form_matches_quadrature(b, K):
    """The constant-deviation closed form agrees with direct quadrature of the Frank integrand."""
    shape = TorusShape.from_aspect(b)
    constants = ElasticConstants(*K)
    for alpha in np.linspace(0, math.pi, 36, endpoint=False):
        W = energy_constant_closed_form(shape, constants, alpha)
        Q = constant_energy_by_quadrature(shape, constants, alpha)
        assert abs(Q - W) / (1 + abs(W)) < 1e-8


def test_closed_form_parallel_state_one_constant():
    """alpha = pi/2 on b = 2 with kappa = 1 costs 2 pi^2 / sqrt(3)."""
    W = energy_constant_closed_form(TorusShape(2.0, 1.0), ElasticConstants.one_constant(), math.pi / 2)
    assert np.isclose(W / math.pi**2, 2 / math.sqrt(3), rtol=1e-12)


def test_closed_form_is_scale_invariant():
    K = ElasticConstants(1.0, 0.4, 2.0)
    alpha = np.linspace(0, math.pi, 9)
    assert np.allclose(energy_constant_closed_form(TorusShape(2.0, 1.0), K, alpha),
                       energy_constant_closed_form(TorusShape(4.0, 2.0), K, alpha), rtol=1e-12)


def test_one_constant_closed_form_is_flat_at_critical_aspect():
    """At b = 2/sqrt(3) every constant deviation has the same one-constant energy."""
    shape = TorusShape.from_aspect(2 / math.sqrt(3))
    W = energy_constant_closed_form(shape, ElasticConstants.one_constant(), np.linspace(0, math.pi, 50))
    assert np.ptp(W) < 1e-10 * abs(W[0])


def test_pure_twist_has_quarter_period():
    shape = TorusShape.from_aspect(1.6)
    K = ElasticConstants(0.0, 1.0, 0.0)
    alpha = np.linspace(0, math.pi, 101)
    assert np.allclose(energy_constant_closed_form(shape, K, alpha),
                       energy_constant_closed_form(shape, K, alpha + math.pi / 2), rtol=1e-12, atol=1e-12)


def test_closed_form_derivatives_match_differences():
    shape = TorusShape.from_aspect(1.4)
    K = ElasticConstants(0.7, 1.3, 2.1)
    alpha = np.linspace(-1.0, 4.0, 40)
    h = 1e-5
    dW = (energy_constant_closed_form(shape, K, alpha + h) - energy_constant_closed_form(shape, K, alpha - h)) / (2 * h)
    d2W = (constant_energy_derivative(shape, K, alpha + h) - constant_energy_derivative(shape, K, alpha - h)) / (2 * h)
    assert np.allclose(constant_energy_derivative(shape, K, alpha), dW, rtol=1e-6, atol=1e-6)
    assert np.allclose(constant_energy_second_derivative(shape, K, alpha), d2W, rtol=1e-6, atol=1e-6)


def test_closed_form_accepts_scalars_and_arrays():
    shape = TorusShape(2.0, 1.0)
    K = ElasticConstants.one_constant()
    assert isinstance(energy_constant_closed_form(shape, K, 0.3), float)
    assert energy_constant_closed_form(shape, K, np.zeros(4)).shape == (4,)


@pytest.mark.parametrize("b", B_VALUES)
def test_bifurcation_scalars_relations(b):
    sc = bifurcation_scalars(b)
    s = math.sqrt(b * b - 1)
    assert sc.A > 0 and sc.B > 0
    assert np.isclose(sc.A, b - s, rtol=1e-12)
    assert np.isclose(sc.B + sc.C, 2 * b, rtol=1e-14)
    assert -1 < sc.eta_scalar < 1
    assert np.isclose(sc.eta_scalar, 2 * s / b - 1, rtol=1e-12, atol=1e-15)


def test_bifurcation_points_at_b_five_quarters():
    sc = bifurcation_scalars(1.25)
    assert np.isclose(sc.eta_scalar, 0.2, rtol=1e-13)
    assert np.isclose(sc.lambda1, 5.0 / 6.0, rtol=1e-13)
    assert np.isclose(sc.lambda2, 1.25, rtol=1e-13)


def test_bifurcation_scalars_reject_degenerate_aspect():
    with pytest.raises(ValueError):
        bifurcation_scalars(1.0)


def test_integral_oracles_by_quadrature():
    """Adaptive quadrature of the three period integrals matches their closed forms for 50 aspect ratios."""
    opts = dict(epsabs=0.0, epsrel=1e-13, limit=400, points=[math.pi])
    for b in np.geomspace(1.01, 10.0, 50):
        closed = integral_oracles(b)
        numeric = (
            quad(lambda t: math.sin(t) ** 2 / (b + math.cos(t)), 0, 2 * math.pi, **opts)[0],
            quad(lambda t: math.cos(t) ** 2 / (b + math.cos(t)), 0, 2 * math.pi, **opts)[0],
            quad(lambda t: 1.0 / (b + math.cos(t)), 0, 2 * math.pi, **opts)[0],
        )
        assert np.allclose(numeric, closed, rtol=1e-12, atol=0)


def test_geometric_constant_matches_closed_form():
    """One-constant closed form = geometric constant + (kappa/2) cos(2 alpha) int eta."""
    b, kappa = 1.7, 2.5
    shape = TorusShape.from_aspect(b)
    K = ElasticConstants.one_constant(kappa)
    for alpha in (0.0, 0.4, math.pi / 2):
        W = energy_constant_closed_form(shape, K, alpha)
        eta_int = 2 * math.pi**2 * b * (2 - b / math.sqrt(b * b - 1))
        assert np.isclose(W, geometric_constant(b, kappa) + 0.5 * kappa * math.cos(2 * alpha) * eta_int, rtol=1e-12)


def test_derivative_factorization_random_draws():
    """W'(alpha) = 2 pi^2 sin(2 alpha) [A (K3-K1) + B cos(2 alpha) (K2-K3) - C K3]."""
    rng = np.random.default_rng(17)
    alpha = np.linspace(0, math.pi, 360, endpoint=False)
    for _ in range(20):
        b = float(rng.uniform(1.05, 4.0))
        K = ElasticConstants(*rng.uniform(0.1, 3.0, size=3))
        sc = bifurcation_scalars(b)
        factored = 2 * math.pi**2 * np.sin(2 * alpha) * (
            sc.A * (K.K3 - K.K1) + sc.B * np.cos(2 * alpha) * (K.K2 - K.K3) - sc.C * K.K3)
        dW = constant_energy_derivative(TorusShape.from_aspect(b), K, alpha)
        assert np.allclose(dW, factored, rtol=1e-12, atol=1e-12)
