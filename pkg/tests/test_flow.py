import logging
import math

import numpy as np
import pytest

from nemengine.errors import EnergyIncreased
from nemengine.initial import band_datum, constant_datum, noisy_datum
from nemengine.metrics import axial_mean, is_monotone, ring_means
from nemengine.sectors import two_odd_defect
from nemengine.solvers import cfl_max_dt, classify_final, run_flow
from nemengine.types import (
    ConstantState, FlowOutcome, FlowParams, NonConstant, PeriodicGrid, SectorField, TorusShape, WindingIndex,
)


def test_cfl_bound_formula():
    shape, grid = TorusShape(2.0, 1.0), PeriodicGrid(32, 32)
    h = 2 * math.pi / 32
    expected = 1.0 / (2 * (1 / h**2 + 1 / h**2) + 2 * 0.5)  # max eta = 1/2 at theta = pi/2
    assert np.isclose(cfl_max_dt(shape, grid, 1.0), expected, rtol=1e-12)
    assert np.isclose(cfl_max_dt(shape, grid, 2.0), 0.5 * expected, rtol=1e-12)
    assert cfl_max_dt(shape, PeriodicGrid(64, 64), 1.0) < cfl_max_dt(shape, grid, 1.0)


@pytest.mark.parametrize("b, index, seed", [(1.3, (0, 0), 0), (1.6, (1, 1), 1), (2.5, (2, -1), 2), (1.2, (0, 3), 3)])
def test_flow_dissipates_energy_and_conserves_winding(b, index, seed):
    """Every snapshot energy is below the previous one and the winding never changes."""
    shape, grid = TorusShape.from_aspect(b), PeriodicGrid(24, 24)
    initial = noisy_datum(0.7, 0.5, seed, shape, grid, WindingIndex(*index))
    result = run_flow(initial, 1.0, FlowParams(max_steps=600, snapshot_every=20, stop_tol=1e-14))
    assert is_monotone(result.trace.energies, increasing=False, strict=False)
    assert all(w == initial.index for w in result.trace.windings)
    assert result.final.index == initial.index
    assert result.trace.steps[:3] == [0, 20, 40]


def test_flow_stops_on_energy_plateau():
    shape, grid = TorusShape(2.5, 1.0), PeriodicGrid(16, 16)
    initial = noisy_datum(math.pi / 2, 0.01, 0, shape, grid)
    result = run_flow(initial, 1.0, FlowParams(stop_tol=1e-12, max_steps=50_000))
    assert result.outcome is FlowOutcome.CONVERGED
    assert result.steps < 50_000
    assert abs(result.trace.energies[-2] - result.trace.energies[-1]) < 1e-12


def test_flow_hits_step_cap():
    shape, grid = TorusShape(2.0, 1.0), PeriodicGrid(16, 16)
    initial = noisy_datum(0.3, 0.5, 1, shape, grid)
    result = run_flow(initial, 1.0, FlowParams(max_steps=25, snapshot_every=10, stop_tol=1e-14))
    assert result.outcome is FlowOutcome.MAX_STEPS
    assert result.steps == 25
    assert result.trace.steps == [0, 10, 20, 25]


def test_oversized_time_step_is_reported(caplog):
    """Far above the stability bound the energy rises, which is raised, after a warning."""
    shape, grid = TorusShape(2.0, 1.0), PeriodicGrid(16, 16)
    initial = noisy_datum(math.pi / 2, 0.01, 3, shape, grid)
    dt = 5 * cfl_max_dt(shape, grid, 1.0)
    with caplog.at_level(logging.WARNING, logger="nemengine.solvers"):
        with pytest.raises(EnergyIncreased) as excinfo:
            run_flow(initial, 1.0, FlowParams(dt=dt, max_steps=200))
    assert "stability bound" in caplog.text
    assert excinfo.value.after > excinfo.value.before
    assert excinfo.value.trace is not None and len(excinfo.value.trace) >= 1


def test_flow_rejects_non_positive_kappa():
    field = constant_datum(0.0, TorusShape(2.0, 1.0), PeriodicGrid(8, 8))
    with pytest.raises(ValueError):
        run_flow(field, 0.0)


def test_flow_preserves_two_odd_symmetry():
    shape, grid = TorusShape(1.7, 1.0), PeriodicGrid(24, 24)
    theta, phi = grid.mesh()
    u = 0.4 * np.sin(theta + phi) + 0.2 * np.sin(2 * theta) - 0.1 * np.sin(3 * phi)
    initial = SectorField(u=u, index=WindingIndex(1, 1), shape=shape, grid=grid)
    assert two_odd_defect(initial.u) < 1e-13
    result = run_flow(initial, 1.0, FlowParams(max_steps=300, stop_tol=1e-14))
    assert two_odd_defect(result.final.u) < 1e-9


def test_parallel_state_is_reached_on_fat_torus():
    """b = 2.5: a small perturbation of alpha = pi/2 relaxes back to the constant parallel state."""
    shape, grid = TorusShape(2.5, 1.0), PeriodicGrid(16, 16)
    initial = noisy_datum(math.pi / 2, 0.01, 0, shape, grid)
    result = run_flow(initial, 1.0, FlowParams(stop_tol=1e-12, max_steps=50_000))
    cls = classify_final(result.final)
    assert isinstance(cls, ConstantState)
    assert np.isclose(cls.value, math.pi / 2, atol=1e-3)


@pytest.mark.parametrize("seed", [0, 1, 2, *(pytest.param(s, marks=pytest.mark.slow) for s in range(3, 10))])
def test_banded_data_collapse_to_parallel_state(seed):
    """b = 2: non-constant data with values in [pi/2, 3pi/2] relax to alpha = pi/2 mod pi."""
    shape, grid = TorusShape(2.0, 1.0), PeriodicGrid(24, 24)
    initial = band_datum(math.pi / 2, 3 * math.pi / 2, seed, shape, grid)
    assert np.isclose(initial.u.min(), math.pi / 2) and np.isclose(initial.u.max(), 3 * math.pi / 2)
    result = run_flow(initial, 1.0, FlowParams(stop_tol=1e-12, max_steps=100_000))
    alpha = result.final.u
    assert np.max(np.abs(np.cos(alpha))) < 1e-3
    assert np.isclose(axial_mean(alpha), math.pi / 2, atol=1e-3)
    assert alpha.min() >= math.pi / 2 - 1e-9 and alpha.max() <= 3 * math.pi / 2 + 1e-9


def test_classify_final():
    shape, grid = TorusShape(2.0, 1.0), PeriodicGrid(8, 8)
    assert isinstance(classify_final(constant_datum(0.4, shape, grid)), ConstantState)
    spread = noisy_datum(0.4, 0.5, 0, shape, grid)
    cls = classify_final(spread)
    assert isinstance(cls, NonConstant) and 0.01 < cls.range <= 1.0


@pytest.mark.slow
def test_thin_torus_boundary_layer_state():
    """b = 1.2: the sector-(0,0) limit is meridian-like at the inner equator and parallel-like outside."""
    shape, grid = TorusShape(1.2, 1.0), PeriodicGrid(64, 64)
    initial = noisy_datum(math.pi / 2 - 0.1, 0.05, 0, shape, grid)
    result = run_flow(initial, 1.0, FlowParams(stop_tol=1e-10, max_steps=400_000))
    assert isinstance(classify_final(result.final), NonConstant)
    rings = ring_means(result.final.u, axial=False)
    half = rings[: grid.n_theta // 2 + 1]
    assert half[-1] < 0.2
    assert half[0] > math.pi / 2 - 0.2
    assert np.all(np.diff(half) <= 1e-6)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(20))
def test_long_flows_dissipate_and_conserve_winding(seed):
    rng = np.random.default_rng(1000 + seed)
    b = float(rng.uniform(1.1, 3.0))
    index = WindingIndex(*(int(x) for x in rng.integers(-2, 4, size=2)))
    shape, grid = TorusShape.from_aspect(b), PeriodicGrid(64, 64)
    initial = noisy_datum(float(rng.uniform(0, math.pi)), 0.5, seed, shape, grid, index)
    result = run_flow(initial, 1.0, FlowParams(max_steps=5000, snapshot_every=50, stop_tol=1e-14))
    assert all(w == index for w in result.trace.windings)
    assert is_monotone(result.trace.energies, increasing=False, strict=False)
