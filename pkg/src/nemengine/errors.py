# src/nemengine/errors.py
from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .types import FlowTrace


class NemEngineError(Exception):
    """Base class for engine errors that are not plain input validation."""


class NumericalContractError(NemEngineError):
    """A property the discretization guarantees was observed to fail."""


class NonIntegerWinding(NumericalContractError):
    def __init__(self, raw: tuple[float, float], tol: float):
        self.raw = raw
        self.tol = tol
        super().__init__(
            f"winding integrals ({raw[0]:.6f}, {raw[1]:.6f}) are more than {tol} away from integers; "
            "the sampled field is not a continuous deviation angle."
        )


class SeamMismatch(NumericalContractError):
    def __init__(self, axis: str, gap: float, tol: float):
        self.axis = axis
        self.gap = gap
        super().__init__(f"periodic part is not single-valued across the {axis} seam (gap {gap:.3e} > {tol:g}).")


class EnergyIncreased(NumericalContractError):
    def __init__(self, step: int, before: float, after: float, trace: "FlowTrace | None" = None):
        self.step = step
        self.before = before
        self.after = after
        self.trace = trace
        super().__init__(
            f"energy increased at step {step}: {before:.15g} -> {after:.15g}; "
            "the time step is above the stability bound."
        )


class FlowNotConverged(NumericalContractError):
    def __init__(self, b: float, steps: int):
        self.b = b
        self.steps = steps
        super().__init__(f"flow at b={b:.6f} hit the step cap ({steps} steps) before its energy settled; "
                         "raise max_steps or stop_tol.")


class BracketInvalid(NemEngineError, ValueError):
    """Threshold search endpoints do not bracket a constant/non-constant transition."""


class OutputError(NemEngineError, OSError):
    def __init__(self, path: Path | str, reason: str):
        self.path = Path(path)
        super().__init__(f"{self.path}: {reason}")


class ConfigError(ValueError):
    """A run configuration violates a constraint; the message names it."""
