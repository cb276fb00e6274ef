"""Deterministic test symbols on the square ``[-2, 2]^2``.

``bump_family``
    Gaussian-type C^inf bumps times a plateau cutoff; very smooth, so
    wavelet coefficients decay faster than any power of ``2^-lam``.
``lacunary_family``
    Cutoff times a lacunary cosine series ``sum_k 2^{-beta k} cos(2 pi 2^k
    theta.zeta + phase_k)``.  Still C^inf (finite sum) but with a controlled
    power-law spread of energy over dyadic scales, which is what the
    per-level estimates are designed for.
"""

from __future__ import annotations

import numpy as np

from .bumps import plateau_profile
from .grid import TorusGrid
from .multiplier import Symbol

__all__ = ["BOX", "cutoff", "bump_symbol", "bump_family", "lacunary_symbol",
           "lacunary_family", "random_annulus_symbol"]

BOX = ((-2.0, 2.0), (-2.0, 2.0))


def cutoff(xi, eta, inner: float = 1.4, outer: float = 1.95):
    return plateau_profile(xi, inner, outer) * plateau_profile(eta, inner, outer)


def bump_symbol(grid: TorusGrid, centers, widths, weights, phase=(0.0, 0.0)) -> Symbol:
    x = grid.coords()
    xi, eta = x[:, None], x[None, :]
    v = np.zeros(grid.shape, dtype=complex)
    for (c1, c2), w, a in zip(centers, widths, weights):
        v += a * np.exp(-((xi - c1) ** 2 + (eta - c2) ** 2) / (2 * w * w))
    v *= np.exp(2j * np.pi * (phase[0] * xi + phase[1] * eta))
    return Symbol(grid, v * cutoff(xi, eta), BOX)


_BUMP_PARAMS = [
    ([(0.0, 0.0)], [0.45], [1.0], (0.0, 0.0)),
    ([(0.3, -0.2)], [0.35], [1.0], (0.5, 0.0)),
    ([(-0.4, 0.1), (0.5, 0.4)], [0.3, 0.4], [1.0, -0.7], (0.0, 0.0)),
    ([(0.0, 0.5)], [0.5], [1.0 + 0.5j], (0.25, -0.5)),
    ([(0.6, 0.6), (-0.5, -0.3)], [0.35, 0.3], [0.8, 1.0], (0.0, 0.3)),
]


def bump_family(grid: TorusGrid) -> list:
    """Five smooth symbols supported in ``[-2, 2]^2``."""
    return [bump_symbol(grid, *p) for p in _BUMP_PARAMS]


def lacunary_symbol(grid: TorusGrid, beta: float, kmax: int, theta=(1.0, 0.7),
                    seed: int = 0, amplitude: float = 1.0) -> Symbol:
    x = grid.coords()
    xi, eta = x[:, None], x[None, :]
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0, 2 * np.pi, kmax + 1)
    v = np.zeros(grid.shape)
    for k in range(kmax + 1):
        f = 2.0 ** k
        v += 2.0 ** (-beta * k) * np.cos(2 * np.pi * f * (theta[0] * xi + theta[1] * eta) + phases[k])
    return Symbol(grid, amplitude * v * cutoff(xi, eta), BOX)


_LAC_THETAS = [(1.0, 0.7), (0.6, 1.0), (1.0, -0.5), (-0.8, 0.9), (0.9, 0.2)]


def lacunary_family(grid: TorusGrid, s: float, delta: float = 0.25, kmax: int = 6) -> list:
    """Five lacunary symbols with coefficient decay ``2^{-(s + delta) k}``."""
    return [lacunary_symbol(grid, s + delta, kmax, th, seed=i)
            for i, th in enumerate(_LAC_THETAS)]


def random_annulus_symbol(grid: TorusGrid, rng: np.random.Generator, terms: int = 6) -> Symbol:
    """Random smooth symbol supported in the annulus ``1/2 <= |zeta| <= 2``.

    A random trigonometric polynomial of low degree times the radial
    partition piece, so its Hormander norm is finite and moderate.
    """
    from .bumps import lp_profile
    x = grid.coords()
    xi, eta = x[:, None], x[None, :]
    v = np.zeros(grid.shape, dtype=complex)
    for _ in range(terms):
        kx, ky = rng.uniform(-1.5, 1.5, 2)
        a = rng.normal() + 1j * rng.normal()
        v += a * np.exp(2j * np.pi * (kx * xi + ky * eta))
    v *= lp_profile(np.hypot(xi, eta)) / np.sqrt(terms)
    return Symbol(grid, v, BOX)
