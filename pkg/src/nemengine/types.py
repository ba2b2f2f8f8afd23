# src/nemengine/types.py
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Literal, Union

import numpy as np

# Lengths are in whatever unit R and r are given in; every energy is
# dimensionless. Angles are radians throughout.
ScalarField = np.ndarray  # shape (n_theta, n_phi); axis 0 is theta

EPS_B = 1e-9
MIN_NODES = 8

Model = Literal["one_constant", "full"]
Family = Literal["Meridian", "Parallel", "SecondType"]
Stability = Literal["Stable", "Unstable", "Marginal"]


@dataclass(frozen=True)
class TorusShape:
    """
    Axisymmetric torus with outer radius R and tube radius r.

    R : distance from the symmetry axis to the tube centre line
    r : tube radius, 0 < r < R
    """
    R: float
    r: float

    def __post_init__(self) -> None:
        if not (self.r > 0):
            raise ValueError(f"r must be > 0 (got {self.r}).")
        if not (self.R > self.r):
            raise ValueError(f"R must be > r (got R={self.R}, r={self.r}).")
        if not (self.R / self.r > 1.0 + EPS_B):
            raise ValueError(f"aspect ratio R/r must exceed 1 + {EPS_B:g} (got {self.R / self.r}).")

    @property
    def b(self) -> float:
        """Aspect ratio R/r."""
        return self.R / self.r

    @classmethod
    def from_aspect(cls, b: float, r: float = 1.0) -> "TorusShape":
        return cls(R=float(b) * float(r), r=float(r))


@dataclass(frozen=True)
class SurfacePoint:
    """A point of the parameter square; both angles are reduced into [0, 2pi)."""
    theta: float
    phi: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta", float(self.theta) % (2 * math.pi))
        object.__setattr__(self, "phi", float(self.phi) % (2 * math.pi))


@dataclass(frozen=True)
class GeometrySample:
    """
    Closed-form geometry at one surface point.

    c1, c2        : principal curvatures along the meridian and the parallel
    kappa1, kappa2: geodesic curvatures of the e1 and e2 coordinate lines
    spin_A_phi    : e2 component of the spin connection (the e1 component is 0)
    area_density  : sqrt(det g) = r (R + r cos theta)
    g_inv_theta, g_inv_phi : diagonal of the inverse metric
    e1, e2, nu    : orthonormal tangent frame and inner unit normal
    """
    c1: float
    c2: float
    kappa1: float
    kappa2: float
    spin_A_phi: float
    area_density: float
    g_inv_theta: float
    g_inv_phi: float
    e1: tuple[float, float, float]
    e2: tuple[float, float, float]
    nu: tuple[float, float, float]


@dataclass(frozen=True)
class DarbouxInvariants:
    """
    Curvatures of the director flux lines. Entries are floats or arrays of a common shape.

    kappa_n : geodesic curvature of the director lines
    kappa_t : geodesic curvature of the conormal lines
    c_n     : normal curvature along the director
    tau_n   : geodesic torsion along the director
    """
    kappa_n: float | np.ndarray
    kappa_t: float | np.ndarray
    c_n: float | np.ndarray
    tau_n: float | np.ndarray

    def sum_of_squares(self):
        return self.kappa_n**2 + self.kappa_t**2 + self.c_n**2 + self.tau_n**2


@dataclass(frozen=True)
class ElasticConstants:
    """
    Splay, twist and bend moduli, plus the modulus of the one-constant model.

    Zero moduli are allowed (pure splay / twist / bend panels); all three zero is not.
    """
    K1: float
    K2: float
    K3: float
    kappa: float = 1.0

    def __post_init__(self) -> None:
        for name in ("K1", "K2", "K3"):
            value = getattr(self, name)
            if not (value >= 0):
                raise ValueError(f"{name} must be >= 0 (got {value}).")
        if not (self.K1 > 0 or self.K2 > 0 or self.K3 > 0):
            raise ValueError("at least one of K1, K2, K3 must be > 0.")
        if not (self.kappa > 0):
            raise ValueError(f"kappa must be > 0 (got {self.kappa}).")

    @classmethod
    def one_constant(cls, kappa: float = 1.0) -> "ElasticConstants":
        k = float(kappa)
        return cls(K1=k, K2=k, K3=k, kappa=k)


@dataclass(frozen=True)
class EnergyBreakdown:
    """
    Per-term energies of one evaluation.

    one_constant model : total = dirichlet + potential + geometric_const
    full model         : total = splay + twist + bend
    """
    model: Model
    total: float
    dirichlet: float | None = None
    potential: float | None = None
    geometric_const: float | None = None
    splay: float | None = None
    twist: float | None = None
    bend: float | None = None

    @property
    def total_over_pi2(self) -> float:
        return self.total / math.pi**2

    def as_dict(self) -> dict:
        out = {"model": self.model, "total": self.total, "total_over_pi2": self.total_over_pi2}
        for name in ("dirichlet", "potential", "geometric_const", "splay", "twist", "bend"):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        return out


@dataclass(frozen=True)
class BifurcationScalars:
    A: float
    B: float
    C: float
    eta_scalar: float
    lambda1: float
    lambda2: float


@dataclass(frozen=True)
class WindingIndex:
    """Integer winding (h_theta, h_phi) of a director along the two generators."""
    h_theta: int
    h_phi: int

    def __post_init__(self) -> None:
        for name in ("h_theta", "h_phi"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise ValueError(f"{name} must be an integer (got {value}).")
            object.__setattr__(self, name, int(value))

    def __add__(self, other: "WindingIndex") -> "WindingIndex":
        return WindingIndex(self.h_theta + other.h_theta, self.h_phi + other.h_phi)

    def as_tuple(self) -> tuple[int, int]:
        return (self.h_theta, self.h_phi)


ZERO_INDEX = WindingIndex(0, 0)


@dataclass(frozen=True)
class PeriodicGrid:
    """
    Uniform n_theta x n_phi sampling of [0, 2pi)^2; the endpoint 2pi is identified with 0.
    """
    n_theta: int
    n_phi: int

    def __post_init__(self) -> None:
        for name in ("n_theta", "n_phi"):
            value = getattr(self, name)
            if not (isinstance(value, (int, np.integer)) and value >= MIN_NODES):
                raise ValueError(f"{name} must be an integer >= {MIN_NODES} (got {value}).")
            object.__setattr__(self, name, int(value))

    @property
    def d_theta(self) -> float:
        return 2 * math.pi / self.n_theta

    @property
    def d_phi(self) -> float:
        return 2 * math.pi / self.n_phi

    @property
    def theta(self) -> np.ndarray:
        return np.arange(self.n_theta) * self.d_theta

    @property
    def phi(self) -> np.ndarray:
        return np.arange(self.n_phi) * self.d_phi

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_theta, self.n_phi)

    def mesh(self, closed: bool = False) -> tuple[np.ndarray, np.ndarray]:
        """(theta, phi) node arrays; closed=True appends the identified edge 2pi on both axes."""
        extra = 1 if closed else 0
        theta = np.arange(self.n_theta + extra) * self.d_theta
        phi = np.arange(self.n_phi + extra) * self.d_phi
        return np.meshgrid(theta, phi, indexing="ij")


@dataclass(frozen=True, eq=False)
class SectorField:
    """
    Total deviation alpha = u + psi_h.

    u     : periodic part sampled on the open grid, shape (n_theta, n_phi)
    index : winding sector h of the total deviation
    shape : torus the field lives on
    grid  : sampling grid of u
    """
    u: ScalarField
    index: WindingIndex
    shape: TorusShape
    grid: PeriodicGrid

    def __post_init__(self) -> None:
        u = np.asarray(self.u, dtype=float)
        if u.shape != self.grid.shape:
            raise ValueError(f"u has shape {u.shape}, grid expects {self.grid.shape}.")
        if not np.all(np.isfinite(u)):
            raise ValueError("u contains non-finite values.")
        object.__setattr__(self, "u", u)

    def with_u(self, u: ScalarField) -> "SectorField":
        return SectorField(u=u, index=self.index, shape=self.shape, grid=self.grid)


@dataclass(frozen=True)
class FlowParams:
    """
    Forward-Euler controls.

    dt            : explicit time step; None picks cfl_safety * cfl_max_dt
    cfl_safety    : fraction of the stability bound used when dt is None
    stop_tol      : stop once the energy drop over one snapshot interval is below this
    max_steps     : hard cap on the number of steps
    snapshot_every: trace cadence (steps); also the stopping-rule cadence
    """
    dt: float | None = None
    cfl_safety: float = 0.9
    stop_tol: float = 1e-4
    max_steps: int = 100_000
    snapshot_every: int = 10

    def __post_init__(self) -> None:
        if self.dt is not None and not (self.dt > 0):
            raise ValueError(f"dt must be > 0 (got {self.dt}).")
        if not (0 < self.cfl_safety < 1):
            raise ValueError(f"cfl_safety must lie in (0, 1) (got {self.cfl_safety}).")
        if not (self.stop_tol > 0):
            raise ValueError(f"stop_tol must be > 0 (got {self.stop_tol}).")
        if not (isinstance(self.max_steps, int) and self.max_steps > 0):
            raise ValueError(f"max_steps must be a positive integer (got {self.max_steps}).")
        if not (isinstance(self.snapshot_every, int) and self.snapshot_every > 0):
            raise ValueError(f"snapshot_every must be a positive integer (got {self.snapshot_every}).")


class FlowOutcome(str, Enum):
    CONVERGED = "Converged"
    MAX_STEPS = "MaxSteps"
    ENERGY_INCREASED = "EnergyIncreased"


@dataclass
class FlowTrace:
    """Snapshots of a flow run, one entry per snapshot in every list."""
    steps: list[int] = field(default_factory=list)
    times: list[float] = field(default_factory=list)
    energies: list[float] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)
    windings: list[WindingIndex] = field(default_factory=list)

    def record(self, step: int, time: float, energy: float, residual: float, winding: WindingIndex) -> None:
        self.steps.append(int(step))
        self.times.append(float(time))
        self.energies.append(float(energy))
        self.residuals.append(float(residual))
        self.windings.append(winding)

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True, eq=False)
class FlowResult:
    final: SectorField
    trace: FlowTrace
    outcome: FlowOutcome
    steps: int
    dt: float


@dataclass(frozen=True)
class ConstantState:
    value: float


@dataclass(frozen=True)
class NonConstant:
    range: float


Classification = Union[ConstantState, NonConstant]


@dataclass(frozen=True)
class CriticalPoint:
    """
    One critical angle of the constant-deviation energy.

    discriminant : the quantity whose sign decides stability for this family
    stability    : Stable / Unstable, or Marginal inside the dead-band
    """
    angle: float
    family: Family
    discriminant: float
    stability: Stability
    is_critical: bool = True

    @property
    def is_stable_local_min(self) -> bool:
        return self.stability == "Stable"


@dataclass(frozen=True)
class StabilityReport:
    critical_angles: tuple[CriticalPoint, ...]
    bifurcation: BifurcationScalars
    meridian_discriminant: float
    parallel_discriminant: float
    second_type_argument: float | None

    def by_family(self, family: Family) -> tuple[CriticalPoint, ...]:
        return tuple(p for p in self.critical_angles if p.family == family)


@dataclass(frozen=True)
class ResidualReport:
    max_norm: float
    l2_norm: float
    model: Model


@dataclass(frozen=True)
class ThresholdStep:
    """One classified flow of the threshold bisection."""
    b: float
    classification: Classification
    outcome: FlowOutcome
    steps: int
    energy: float


@dataclass(frozen=True)
class ThresholdResult:
    """Bracket [b_low, b_high]: non-constant limit at b_low, constant limit at b_high."""
    b_low: float
    b_high: float
    history: tuple[ThresholdStep, ...]

    @property
    def width(self) -> float:
        return self.b_high - self.b_low

    @property
    def unconverged(self) -> tuple[float, ...]:
        """b values whose flow stopped at the step cap."""
        return tuple(s.b for s in self.history if s.outcome is not FlowOutcome.CONVERGED)


@dataclass(frozen=True)
class RunSummary:
    """
    Outcome of one flow run, as written to summary JSON.

    energy         : EnergyBreakdown.as_dict() of the final field (raw and /pi^2)
    classification : {"kind": "ConstantState" | "NonConstant", "value" | "range": float}
    wall_time      : seconds; the only field that differs between identical runs
    """
    config: dict
    config_hash: str
    outcome: str
    classification: dict
    energy: dict
    winding: tuple[int, int]
    residual_max: float
    residual_l2: float
    steps: int
    dt: float
    seed: int
    version: str
    wall_time: float

    def to_dict(self) -> dict:
        out = dict(self.__dict__)
        out["winding"] = list(self.winding)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RunSummary":
        data = dict(data)
        data["winding"] = tuple(data["winding"])
        return cls(**data)
