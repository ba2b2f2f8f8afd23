# src/nemengine/metrics.py
import math

import numpy as np


def angular_range(alpha: np.ndarray) -> float:
    """max(alpha) - min(alpha) on raw (unreduced) angles."""
    return float(np.max(alpha) - np.min(alpha))


def circular_mean(alpha: np.ndarray) -> float:
    """Mean direction of the angles, in (-pi, pi]."""
    return float(np.angle(np.mean(np.exp(1j * np.asarray(alpha)))))


def axial_mean(alpha: np.ndarray) -> float:
    """
    Mean of angles taken modulo pi (n and -n are the same nematic state), in [0, pi).
    """
    doubled = np.angle(np.mean(np.exp(2j * np.asarray(alpha))))
    return float((0.5 * doubled) % math.pi)


def ring_means(alpha: np.ndarray, axial: bool = True) -> np.ndarray:
    """Mean deviation along every theta row (one value per parallel)."""
    mean = axial_mean if axial else circular_mean
    return np.array([mean(row) for row in np.asarray(alpha)])


def max_norm(f: np.ndarray) -> float:
    return float(np.max(np.abs(f)))


def weighted_l2(f: np.ndarray, row_weights: np.ndarray) -> float:
    """sqrt(sum w f^2) for weights that depend on theta only."""
    return float(np.sqrt(np.sum(row_weights[:, None] * np.asarray(f) ** 2)))


def convergence_orders(errors, refinement: float = 2.0) -> np.ndarray:
    """
    Observed orders log(e_k / e_{k+1}) / log(refinement) for a sequence of errors
    on successively refined grids.
    """
    e = np.asarray(errors, dtype=float)
    return np.log(e[:-1] / e[1:]) / math.log(refinement)


def is_monotone(values, increasing: bool = True, strict: bool = True) -> bool:
    d = np.diff(np.asarray(values, dtype=float))
    if not increasing:
        d = -d
    return bool(np.all(d > 0)) if strict else bool(np.all(d >= 0))
