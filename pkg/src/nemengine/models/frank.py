# src/nemengine/models/frank.py
import numpy as np

from ..geometry import GridGeometry
from ..helpers import backward, forward_differences, row_weighted_sum
from ..types import ElasticConstants, WindingIndex


def frank_partials(alpha, g1, g2, c1, c2, a_phi, K: ElasticConstants):
    """
    Integrand f = K1 kappa_t^2 + K2 tau_n^2 + K3 (kappa_n^2 + c_n^2) and its partials.

    g1, g2 are the e1/e2 components of grad(alpha). Returns a dict with the three
    density terms and f_g1, f_g2, f_alpha (alpha-partial at fixed gradient).
    """
    ca, sa = np.cos(alpha), np.sin(alpha)
    G2 = g2 - a_phi
    kn = g1 * ca + G2 * sa
    kt = g1 * sa - G2 * ca
    cn = c1 * ca**2 + c2 * sa**2
    dc = c1 - c2
    tau = dc * ca * sa
    return {
        "splay": K.K1 * kt**2,
        "twist": K.K2 * tau**2,
        "bend": K.K3 * (kn**2 + cn**2),
        "f_g1": 2 * K.K1 * kt * sa + 2 * K.K3 * kn * ca,
        "f_g2": -2 * K.K1 * kt * ca + 2 * K.K3 * kn * sa,
        "f_alpha": (2 * (K.K1 - K.K3) * kn * kt
                    + 0.5 * K.K2 * dc**2 * np.sin(4 * alpha)
                    - 2 * K.K3 * cn * dc * np.sin(2 * alpha)),
    }


def frank_terms(alpha: np.ndarray, index: WindingIndex, geo: GridGeometry, K: ElasticConstants):
    """
    Discrete three-constant energy and its residual.

    The integrand is averaged over the four one-sided gradients (theta +/-, phi +/-) at
    every node:  E = 1/2 sum_n w_n 1/4 sum f(alpha_n, g1^s, g2^t).
    residual = -(1/w) dE/dalpha, assembled from face fluxes of f_g1, f_g2.

    Returns (splay, twist, bend, residual).
    """
    grid = geo.grid
    r = geo.shape.r
    d_t, d_p = forward_differences(alpha, index)
    g1_plus = d_t / (r * grid.d_theta)
    g2_plus = d_p / (geo.rho[:, None] * grid.d_phi)
    g1_sides = {+1: g1_plus, -1: backward(g1_plus, 0)}
    g2_sides = {+1: g2_plus, -1: backward(g2_plus, 1)}

    c1, c2, a_phi = geo.c1[:, None], geo.c2[:, None], geo.a_phi[:, None]
    splay = np.zeros_like(alpha)
    bend = np.zeros_like(alpha)
    f_alpha = np.zeros_like(alpha)
    q1 = {+1: np.zeros_like(alpha), -1: np.zeros_like(alpha)}
    q2 = {+1: np.zeros_like(alpha), -1: np.zeros_like(alpha)}
    twist = None
    for s1, g1 in g1_sides.items():
        for s2, g2 in g2_sides.items():
            parts = frank_partials(alpha, g1, g2, c1, c2, a_phi, K)
            splay += 0.25 * parts["splay"]
            bend += 0.25 * parts["bend"]
            f_alpha += 0.25 * parts["f_alpha"]
            q1[s1] += 0.25 * parts["f_g1"]
            q2[s2] += 0.25 * parts["f_g2"]
            twist = parts["twist"]

    w = geo.weights[:, None]
    flux_t = 0.5 * (w * q1[+1] + np.roll(w * q1[-1], -1, axis=0)) / (r * grid.d_theta)
    flux_p = 0.5 * w * (q2[+1] + np.roll(q2[-1], -1, axis=1)) / (geo.rho[:, None] * grid.d_phi)
    residual = ((flux_t - backward(flux_t, 0)) + (flux_p - backward(flux_p, 1))) / w - 0.5 * f_alpha

    return (
        0.5 * row_weighted_sum(splay, geo.weights),
        0.5 * row_weighted_sum(twist, geo.weights),
        0.5 * row_weighted_sum(bend, geo.weights),
        residual,
    )
