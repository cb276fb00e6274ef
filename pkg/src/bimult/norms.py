"""Sobolev, Triebel-Lizorkin, wavelet-sequence and Hormander norms of symbols.

A symbol is a function of the frequency pair ``(xi, eta)``; for its
smoothness norms we treat those variables as the spatial domain and Fourier
transform once more.  The Bessel potential is applied spectrally on the
torus, so the support must sit well inside the window (central half).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .bumps import lp_profile, plateau_profile
from .grid import TorusGrid, _fwd, _inv, lp_norm_array
from .multiplier import Symbol
from .wavelets import WaveletCoeffs

__all__ = [
    "MarginError",
    "CoverageError",
    "NormReport",
    "sobolev_norm",
    "sobolev_norm_values",
    "tl_norm",
    "sequence_norm",
    "hormander_norm",
    "auto_jrange",
]


class MarginError(ValueError):
    """Support too close to the torus boundary for a periodized potential."""


class CoverageError(ValueError):
    """A Hormander ``jrange`` misses dyadic pieces that are nonzero."""


def _check_margin(box, grid: TorusGrid) -> None:
    quarter = grid.length / 4
    for lo, hi in box:
        if lo < -quarter - 1e-12 or hi > quarter + 1e-12:
            raise MarginError(
                f"support [{lo:g}, {hi:g}] leaves the central half [-{quarter:g}, {quarter:g}] "
                f"of the torus; enlarge the symbol grid")


def _dual_radius(grid: TorusGrid) -> np.ndarray:
    k = grid.freqs()
    if grid.dim == 1:
        return np.abs(k)
    return np.hypot(k[:, None], k[None, :])


def sobolev_norm_values(values: np.ndarray, grid: TorusGrid, r: float, s: float) -> float:
    """``|| (I - Delta)^{s/2} u ||_{L^r}`` for raw samples ``u`` on ``grid``."""
    if not r > 1:
        raise ValueError(f"r must exceed 1, got {r}")
    if s < 0:
        raise ValueError(f"s must be nonnegative, got {s}")
    if s == 0:
        return lp_norm_array(values, grid.spacing, r)
    weight = (1.0 + 4 * np.pi ** 2 * _dual_radius(grid) ** 2) ** (s / 2)
    u = _inv(_fwd(values, grid.spacing) * weight, grid.spacing)
    return lp_norm_array(u, grid.spacing, r)


def sobolev_norm(sigma: Symbol, r: float, s: float) -> float:
    """``L^r_s`` norm of a symbol supported in the central half of its grid."""
    _check_margin(sigma.support_box, sigma.grid)
    return sobolev_norm_values(sigma.values, sigma.grid, r, s)


def tl_norm(sigma: Symbol, r: float, q: float, s: float) -> float:
    """``|| (sum_j 2^{jsq} |(phi_j sigma_hat)^v|^q)^{1/q} ||_{L^r}``.

    ``phi_0`` is the radial plateau (it collects every ``j <= 0`` piece) and
    ``phi_j(x) = psi_hat(2^-j x)`` for ``j >= 1``; ``j`` stops once the
    annulus lies beyond the grid corner.
    """
    _check_margin(sigma.support_box, sigma.grid)
    grid = sigma.grid
    h = grid.spacing
    F = _fwd(sigma.values, h)
    rad = _dual_radius(grid)
    jmax = max(1, int(np.ceil(np.log2(rad.max()))) + 1)
    acc = np.zeros(grid.shape)
    for j in range(jmax + 1):
        phi = plateau_profile(rad, 1.0, 2.0) if j == 0 else lp_profile(rad * 2.0 ** -j)
        if not np.any(phi):
            continue
        piece = _inv(F * phi, h)
        acc += 2.0 ** (j * s * q) * np.abs(piece) ** q
    return lp_norm_array(acc ** (1.0 / q), h, r)


def cube_matrix(centers: np.ndarray, half: float, x: np.ndarray) -> np.ndarray:
    """Indicators of ``[c - half, c + half)`` at points ``x`` (one row per center)."""
    d = x[None, :] - centers[:, None]
    tol = 1e-9 * half
    return ((d >= -half - tol) & (d < half - tol)).astype(float)


def sequence_norm(coeffs: WaveletCoeffs, r: float, q: float, s: float) -> float:
    """Discrete ``f^s_{r,q}`` norm of wavelet coefficients.

    ``gamma = 2^lam a`` and the cube of ``(lam, mu)`` has side ``2^{1-lam}``,
    centered at the support center ``2^-lam (mu + S/2)`` of the wavelet.
    """
    grid = coeffs.grid
    x = grid.coords()
    S = coeffs.ws.support
    acc = np.zeros(grid.shape)
    for key in sorted(coeffs.blocks):
        blk = coeffs.blocks[key]
        if not np.any(blk.a):
            continue
        lam = blk.lam
        half = 2.0 ** -lam
        X1 = cube_matrix((blk.mu1 + S / 2) * half, half, x)
        X2 = cube_matrix((blk.mu2 + S / 2) * half, half, x)
        g = (2.0 ** lam * np.abs(blk.a)) ** q
        acc += 2.0 ** (lam * s * q) * (X1.T @ g @ X2)
    return lp_norm_array(acc ** (1.0 / q), grid.spacing, r)


@dataclass
class NormReport:
    """Hormander-norm breakdown: ``hormander = max(per_j.values())``."""

    sobolev: float
    hormander: float
    per_j: dict = field(default_factory=dict)
    r: float = 2.0
    s: float = 0.0
    q: float = 2.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["per_j"] = {str(k): v for k, v in sorted(self.per_j.items())}
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def auto_jrange(sigma: Symbol) -> list:
    """Every ``j`` whose annulus ``(2^{j-1}, 2^{j+1})`` meets the nonzero radii."""
    x = sigma.grid.coords()
    rad = np.hypot(x[:, None], x[None, :])
    nz = (sigma.values != 0) & (rad > 0)
    if not np.any(nz):
        return []
    rmin = rad[nz].min()
    rmax = rad[nz].max()
    lo = int(np.floor(np.log2(rmin) - 1)) + 1
    hi = int(np.ceil(np.log2(rmax) + 1)) - 1
    return list(range(lo, hi + 1))


def _dyadic_piece(sigma: Symbol, j: int):
    """``sigma(2^j .) psi_hat`` sampled on the grid of length ``2^-j L``."""
    grid = TorusGrid(2, sigma.grid.length * 2.0 ** -j, sigma.grid.points)
    x = grid.coords()
    vals = sigma.values * lp_profile(np.hypot(x[:, None], x[None, :]))
    (a1, b1), (a2, b2) = sigma.support_box
    c = 2.0 ** -j
    box = ((max(a1 * c, -2.0), min(b1 * c, 2.0)), (max(a2 * c, -2.0), min(b2 * c, 2.0)))
    return grid, vals, box


def hormander_norm(sigma: Symbol, r: float, s: float, jrange=None) -> NormReport:
    """``sup_j || sigma(2^j .) psi_hat ||_{L^r_s}`` with per-``j`` contributions."""
    needed = auto_jrange(sigma)
    if jrange is None:
        jrange = needed
    else:
        jrange = list(jrange)
        missing = sorted(set(needed) - set(jrange))
        if missing:
            raise CoverageError(f"jrange misses contributing j = {missing}")
    per_j = {}
    for j in jrange:
        grid, vals, box = _dyadic_piece(sigma, j)
        if not np.any(vals):
            per_j[int(j)] = 0.0
            continue
        _check_margin(box, grid)
        per_j[int(j)] = sobolev_norm_values(vals, grid, r, s)
    try:
        sob = sobolev_norm(sigma, r, s)
    except MarginError:
        sob = float("nan")
    hor = max(per_j.values()) if per_j else 0.0
    return NormReport(sobolev=sob, hormander=hor, per_j=per_j, r=r, s=s)
