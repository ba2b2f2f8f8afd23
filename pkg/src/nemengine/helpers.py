# src/nemengine/helpers.py
import math

import numpy as np

from .types import WindingIndex


def seam_jumps(index: WindingIndex) -> tuple[float, float]:
    """Increase of the total deviation across the theta seam and the phi seam."""
    return 2 * math.pi * index.h_theta, 2 * math.pi * index.h_phi


def forward_differences(alpha: np.ndarray, index: WindingIndex) -> tuple[np.ndarray, np.ndarray]:
    """
    Jump-corrected forward differences of a total deviation on the open grid.

    d_theta[i, j] = alpha[i+1, j] - alpha[i, j], where stepping past the last row
    lands on row 0 shifted by 2 pi h_theta (same for phi).
    """
    jump_t, jump_p = seam_jumps(index)
    d_t = np.roll(alpha, -1, axis=0) - alpha
    d_t[-1, :] += jump_t
    d_p = np.roll(alpha, -1, axis=1) - alpha
    d_p[:, -1] += jump_p
    return d_t, d_p


def backward(d: np.ndarray, axis: int) -> np.ndarray:
    """Backward differences from forward ones: D^-[i] = D^+[i-1]."""
    return np.roll(d, 1, axis=axis)


def row_weighted_sum(values: np.ndarray, row_weights: np.ndarray) -> float:
    """sum_ij w_i values_ij for weights that depend on theta only."""
    return float(np.sum(row_weights[:, None] * values))


def inner_product(f: np.ndarray, g: np.ndarray, row_weights: np.ndarray) -> float:
    """Discrete L2(dVol) inner product <f, g>."""
    return row_weighted_sum(f * g, row_weights)
