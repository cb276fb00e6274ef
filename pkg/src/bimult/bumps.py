"""Smooth bumps and the Littlewood-Paley partition.

Three profiles are used throughout:

* the Schwartz bump ``phi_hat``: a C^inf bump ``exp(1 - 1/(1 - (z/r)^2))``
  supported in ``|z| < r`` with maximum 1;
* the plateau ``varphi``: 1 on ``[-inner, inner]``, 0 outside
  ``[-outer, outer]``, with a C^inf monotone transition;
* the radial plateau ``h_theta`` (inner 1, outer 2) whose dyadic differences
  give the annular partition ``psi_hat(z) = h_theta(z) - h_theta(2z)``.

The profiles only matter through their supports and plateaus; downstream
constants depend on them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import FREQUENCY, GridError, SampledFunction, TorusGrid

__all__ = [
    "ResolutionError",
    "BumpSpec",
    "BumpMode",
    "MODES",
    "smooth_step",
    "plateau_profile",
    "schwartz_profile",
    "lp_profile",
    "schwartz_bump",
    "plateau_bump",
    "lp_partition",
]


class ResolutionError(ValueError):
    """The grid is too coarse to resolve a bump."""


def smooth_step(t):
    """C^inf step: 0 for t <= 0, 1 for t >= 1, monotone in between."""
    t = np.asarray(t, dtype=float)
    out = np.where(t >= 1, 1.0, 0.0)
    mid = (t > 0) & (t < 1)
    if np.any(mid):
        tm = t[mid]
        a = np.exp(-1.0 / tm)
        b = np.exp(-1.0 / (1.0 - tm))
        out[mid] = a / (a + b)
    return out


def plateau_profile(z, inner: float, outer: float):
    """1 on ``|z| <= inner``, 0 on ``|z| >= outer``."""
    if not 0 < inner < outer:
        raise ValueError(f"need 0 < inner < outer, got inner={inner}, outer={outer}")
    a = np.abs(np.asarray(z, dtype=float))
    return 1.0 - smooth_step((a - inner) / (outer - inner))


def schwartz_profile(z, radius: float):
    """``exp(1 - 1/(1 - (z/radius)^2))`` inside ``|z| < radius``, else 0."""
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    u = np.asarray(z, dtype=float) / radius
    out = np.zeros_like(u)
    inside = np.abs(u) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
    return out


def lp_profile(z):
    """Annular piece ``h_theta(|z|) - h_theta(2|z|)``, supported in [1/2, 2]."""
    a = np.abs(z)
    return plateau_profile(a, 1.0, 2.0) - plateau_profile(2.0 * a, 1.0, 2.0)


@dataclass(frozen=True)
class BumpSpec:
    """A 1D bump profile.

    For ``kind="plateau"`` the function is 1 on ``[-inner, inner]`` and 0
    outside ``[-outer, outer]``.  For ``kind="schwartz_fourier_support"`` the
    support radius is ``outer``; ``inner`` marks where the profile drops
    below ``exp(1 - 1/(1 - (inner/outer)^2))`` and is informational.
    """

    kind: str
    inner: float
    outer: float

    def __post_init__(self):
        if self.kind not in ("plateau", "schwartz_fourier_support"):
            raise ValueError(f"unknown bump kind {self.kind!r}")
        if not 0 < self.inner < self.outer:
            raise ValueError(f"need 0 < inner < outer, got {self.inner}, {self.outer}")

    def __call__(self, z):
        if self.kind == "plateau":
            return plateau_profile(z, self.inner, self.outer)
        return schwartz_profile(z, self.outer)


@dataclass(frozen=True)
class BumpMode:
    """A matched pair: the plateau must equal 1 on the Schwartz support."""

    name: str
    schwartz: BumpSpec
    plateau: BumpSpec

    def __post_init__(self):
        if self.plateau.inner < self.schwartz.outer:
            raise ValueError("plateau must be 1 on the Schwartz bump support")
        if self.plateau.outer >= 0.5:
            raise ValueError("plateau bumps at unit spacing must stay disjoint")


MODES = {
    "narrow": BumpMode(
        "narrow",
        BumpSpec("schwartz_fourier_support", 0.005, 0.01),
        BumpSpec("plateau", 0.05, 0.1),
    ),
    # same structure with supports wide enough for coarse grids at large N
    "wide": BumpMode(
        "wide",
        BumpSpec("schwartz_fourier_support", 0.125, 0.25),
        BumpSpec("plateau", 0.25, 0.45),
    ),
}


def _check_resolution(spacing: float, radius: float, what: str) -> None:
    # strictly interior bins of (-radius, radius) for the worst-case offset
    if 2 * radius / spacing < 4:
        raise ResolutionError(
            f"{what}: frequency spacing {spacing:g} leaves fewer than 3 samples inside "
            f"a support of radius {radius:g}; need M/L >= {2.0 / radius:g} on the "
            f"frequency grid (spatial torus length L >= {2.0 / radius:g})")


def schwartz_bump(grid: TorusGrid, radius: float = 0.01) -> SampledFunction:
    """``phi_hat`` sampled at the frequencies ``k/L`` of ``grid``."""
    _check_resolution(1.0 / grid.length, radius, "schwartz_bump")
    vals = _radial_or_1d(grid, lambda z: schwartz_profile(z, radius))
    return SampledFunction(grid, vals, FREQUENCY)


def plateau_bump(grid: TorusGrid, inner: float = 0.05, outer: float = 0.1) -> SampledFunction:
    """``varphi`` sampled at the frequencies of ``grid``."""
    if not 0 < inner < outer:
        raise ValueError(f"need 0 < inner < outer, got inner={inner}, outer={outer}")
    if (outer - inner) * grid.length < 2:
        raise ResolutionError(
            f"plateau_bump: transition band of width {outer - inner:g} holds fewer than "
            f"2 samples; need L >= {2.0 / (outer - inner):g}")
    vals = _radial_or_1d(grid, lambda z: plateau_profile(z, inner, outer))
    return SampledFunction(grid, vals, FREQUENCY)


def _radial_or_1d(grid: TorusGrid, profile):
    k = grid.freqs()
    if grid.dim == 1:
        return profile(k)
    # product bump on the plane
    p = profile(k)
    return np.multiply.outer(p, p)


def lp_partition(grid2d: TorusGrid, jmin: int, jmax: int) -> list:
    """Dyadic pieces ``psi_hat(2^-j z)`` for ``j = jmin..jmax``.

    Each piece is a frequency-side function on ``grid2d`` evaluated at the
    radius ``|z|`` of its frequency points.
    """
    if jmin > jmax:
        raise ValueError(f"need jmin <= jmax, got {jmin} > {jmax}")
    if grid2d.dim != 2:
        raise GridError("lp_partition needs a 2D grid")
    k = grid2d.freqs()
    rad = np.hypot(k[:, None], k[None, :])
    return [SampledFunction(grid2d, lp_profile(rad * 2.0 ** (-j)), FREQUENCY)
            for j in range(jmin, jmax + 1)]
