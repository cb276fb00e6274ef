"""Daubechies wavelets, tensor-product bases and symbol analysis/synthesis.

One-dimensional factors are tabulated exactly on the dyadic grid
``2^-depth Z`` by the eigenvector-plus-refinement cascade, then read off at
torus grid points by index arithmetic (the grid spacing must be a dyadic
multiple of the table spacing).  The 2D basis is

    Psi^{lam, G}_mu(x) = 2^lam psi_G1(2^lam x1 - mu1) psi_G2(2^lam x2 - mu2)

with ``G = (F, F)`` only at ``lam = 0``.  Wavelets are *not* periodized:
samples outside the torus window are simply dropped, which is harmless for
inner products with symbols supported inside the window.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import NamedTuple

import numpy as np

from .bumps import ResolutionError
from .grid import SPACE, SampledFunction, TorusGrid, lp_norm_array
from .multiplier import Symbol

__all__ = [
    "ConvergenceError",
    "WaveletSystem",
    "WaveletIndex",
    "WaveletCoeffs",
    "GENDERS",
    "daubechies_filters",
    "highpass",
    "cascade",
    "build_system",
    "tensor_wavelet",
    "analyze",
    "synthesize",
    "level_square_norm",
]

GENDERS = {0: (("F", "F"), ("F", "M"), ("M", "F"), ("M", "M")),
           1: (("F", "M"), ("M", "F"), ("M", "M"))}


def genders(lam: int) -> tuple:
    return GENDERS[0] if lam == 0 else GENDERS[1]


class ConvergenceError(RuntimeError):
    """The cascade tables did not settle between the last two depths."""


def daubechies_filters(order: int) -> np.ndarray:
    """Minimal-phase Daubechies lowpass filter with ``2*order`` taps.

    Built by spectral factorization: the roots ``y`` of
    ``P(y) = sum_k C(order-1+k, k) y^k`` map to ``z + 1/z = 2 - 4y`` and the
    root inside the unit disk is kept.  Normalized so that ``sum h = sqrt 2``.
    """
    if int(order) != order or not 1 <= order <= 10:
        raise ValueError(f"order must be an integer in 1..10, got {order}")
    p = int(order)
    poly = np.array([1.0 + 0j])
    for _ in range(p):
        poly = np.convolve(poly, [0.5, 0.5])
    if p > 1:
        coeffs = [comb(p - 1 + k, k) for k in range(p)]
        for y in np.roots(coeffs[::-1]):
            c = 2 - 4 * y
            z = np.roots([1, -c, 1])
            z = z[np.argmin(np.abs(z))]
            poly = np.convolve(poly, [1, -z]) / (1 - z)
    return np.real(poly) * np.sqrt(2)


def highpass(h: np.ndarray) -> np.ndarray:
    """Alternating flip ``g_t = (-1)^t h_{L-1-t}``."""
    n = len(h)
    return np.array([(-1) ** t * h[n - 1 - t] for t in range(n)])


def _refine(prev: np.ndarray, filt: np.ndarray, step: int, size: int) -> np.ndarray:
    # new[k] = sqrt2 sum_t filt_t prev[k - t*step]
    new = np.zeros(size)
    for t, c in enumerate(filt):
        lo = t * step
        hi = min(size, lo + prev.size)
        if lo < hi:
            new[lo:hi] += np.sqrt(2) * c * prev[:hi - lo]
    return new


def _integer_values(h: np.ndarray) -> np.ndarray:
    S = len(h) - 1
    if S == 1:
        return np.array([1.0, 0.0])  # Haar: right-continuous indicator
    A = np.zeros((S + 1, S + 1))
    for n in range(S + 1):
        for m in range(S + 1):
            t = 2 * n - m
            if 0 <= t < len(h):
                A[n, m] = np.sqrt(2) * h[t]
    w, V = np.linalg.eig(A)
    v = np.real(V[:, np.argmin(np.abs(w - 1))])
    return v / v.sum()


@dataclass(frozen=True)
class WaveletSystem:
    """Daubechies scaling function and wavelet tabulated on ``2^-depth Z``.

    ``phi[i]`` and ``psi[i]`` are the values at ``i * 2^-depth`` for
    ``0 <= i <= support * 2^depth``.
    """

    order: int
    lowpass: np.ndarray = field(repr=False)
    depth: int
    phi: np.ndarray = field(repr=False)
    psi: np.ndarray = field(repr=False)

    @property
    def highpass(self) -> np.ndarray:
        return highpass(self.lowpass)

    @property
    def support(self) -> int:
        """Support length ``2*order - 1``; both factors live on ``[0, support]``."""
        return len(self.lowpass) - 1

    @property
    def dx(self) -> float:
        return 2.0 ** -self.depth

    def table(self, gender: str) -> np.ndarray:
        if gender == "F":
            return self.phi
        if gender == "M":
            return self.psi
        raise ValueError(f"gender must be 'F' or 'M', got {gender!r}")

    def factor_norm(self, gender: str, r: float) -> float:
        """``||psi_G||_{L^r}`` by quadrature on the cascade table."""
        return lp_norm_array(self.table(gender), self.dx, r)

    def sample(self, gender: str, lam: int, mu: int, x: np.ndarray) -> np.ndarray:
        """``2^(lam/2) psi_G(2^lam x - mu)`` at points ``x`` (dyadically aligned)."""
        return self.level_matrix(gender, lam, np.array([mu]), x)[0]

    def level_matrix(self, gender: str, lam: int, mus, x: np.ndarray) -> np.ndarray:
        """Rows ``2^(lam/2) psi_G(2^lam x - mu)`` for each ``mu`` in ``mus``."""
        tab = self.table(gender)
        scale = 2.0 ** (lam + self.depth)
        pos = np.asarray(x, dtype=float) * scale
        ipos = np.rint(pos)
        if np.any(np.abs(pos - ipos) > 1e-6):
            raise ResolutionError(
                f"grid points are not aligned with the level-{lam} table at depth "
                f"{self.depth}; use a dyadic grid spacing >= 2^-{lam + self.depth}")
        mus = np.asarray(mus, dtype=np.int64)
        idx = ipos.astype(np.int64)[None, :] - mus[:, None] * (2 ** self.depth)
        ok = (idx >= 0) & (idx < tab.size)
        out = np.zeros(idx.shape)
        out[ok] = tab[idx[ok]]
        return out * 2.0 ** (lam / 2)


def cascade(filt, depth: int = 10) -> WaveletSystem:
    """Tabulate ``phi`` and ``psi`` from a lowpass filter (or an order).

    Integer values of ``phi`` come from the eigenvector of the two-scale
    matrix; each refinement halves the spacing exactly, so the depth-``d``
    table agrees with the depth-``d-1`` table at shared points.
    """
    if depth < 6:
        raise ValueError(f"depth must be >= 6, got {depth}")
    if np.isscalar(filt):
        order = int(filt)
        h = daubechies_filters(order)
    else:
        h = np.asarray(filt, dtype=float)
        order = len(h) // 2
    g = highpass(h)
    S = len(h) - 1
    tabs = [_integer_values(h)]
    for j in range(1, depth + 1):
        tabs.append(_refine(tabs[-1], h, 2 ** (j - 1), S * 2 ** j + 1))
    phi = tabs[depth]
    prev = tabs[depth - 1]
    shared = phi[::2]
    change = np.max(np.abs(shared - prev)) / max(np.max(np.abs(phi)), 1e-300)
    if change > 1e-8:
        raise ConvergenceError(f"cascade changed by {change:.2e} between depths {depth - 1} and {depth}")
    psi = _refine(prev, g, 2 ** (depth - 1), S * 2 ** depth + 1)
    phi.flags.writeable = False
    psi.flags.writeable = False
    h.flags.writeable = False
    return WaveletSystem(order, h, depth, phi, psi)


def build_system(order: int = 6, depth: int = 10) -> WaveletSystem:
    return cascade(order, depth)


class WaveletIndex(NamedTuple):
    """``(lam, G, mu)`` with ``G`` a pair of 'F'/'M' and ``mu`` an integer pair."""

    lam: int
    G: tuple
    mu: tuple

    def validate(self) -> "WaveletIndex":
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if tuple(self.G) not in GENDERS[0]:
            raise ValueError(f"bad gender {self.G!r}")
        if self.lam >= 1 and tuple(self.G) == ("F", "F"):
            raise ValueError("G = (F, F) is only allowed at lambda = 0")
        return self


def _support_fits(ws: WaveletSystem, lam: int, mu: int, grid: TorusGrid) -> bool:
    lo = mu * 2.0 ** -lam
    hi = (mu + ws.support) * 2.0 ** -lam
    half = grid.length / 2
    return lo >= -half and hi <= half - grid.spacing


def tensor_wavelet(ws: WaveletSystem, idx: WaveletIndex, grid2d: TorusGrid) -> SampledFunction:
    """Samples of ``2^lam Psi^G(2^lam x - mu)``; the support must fit in the torus."""
    idx = WaveletIndex(*idx).validate()
    for mu in idx.mu:
        if not _support_fits(ws, idx.lam, mu, grid2d):
            raise ValueError(
                f"support overflow: level {idx.lam}, shift {mu} does not fit in a torus "
                f"of length {grid2d.length:g}")
    x = grid2d.coords()
    u = ws.sample(idx.G[0], idx.lam, idx.mu[0], x)
    v = ws.sample(idx.G[1], idx.lam, idx.mu[1], x)
    return SampledFunction(grid2d, np.multiply.outer(u, v), SPACE)


def shift_range(ws: WaveletSystem, lam: int, interval) -> np.ndarray:
    """Shifts ``mu`` whose open support ``2^-lam (mu, mu + S)`` meets ``interval``."""
    lo, hi = interval
    a = int(np.floor(lo * 2 ** lam - ws.support)) + 1
    b = int(np.ceil(hi * 2 ** lam)) - 1
    return np.arange(a, b + 1)


@dataclass
class CoeffBlock:
    """Coefficients of one ``(lam, G)`` on a rectangle of shifts."""

    lam: int
    G: tuple
    mu1: np.ndarray
    mu2: np.ndarray
    a: np.ndarray

    def indices(self):
        for i, m1 in enumerate(self.mu1):
            for j, m2 in enumerate(self.mu2):
                yield WaveletIndex(self.lam, self.G, (int(m1), int(m2))), self.a[i, j]


@dataclass
class WaveletCoeffs:
    """``a_omega = <sigma, omega>`` stored in rectangular blocks per ``(lam, G)``.

    ``grid`` is the analysis grid (needed for quadrature-based norms).
    """

    ws: WaveletSystem
    grid: TorusGrid
    blocks: dict = field(default_factory=dict)

    @property
    def levels(self) -> list:
        return sorted({lam for lam, _ in self.blocks})

    def level_blocks(self, lam: int) -> list:
        return [self.blocks[k] for k in sorted(self.blocks) if k[0] == lam]

    def __getitem__(self, idx) -> complex:
        idx = WaveletIndex(*idx)
        blk = self.blocks[(idx.lam, tuple(idx.G))]
        i = idx.mu[0] - blk.mu1[0]
        j = idx.mu[1] - blk.mu2[0]
        if not (0 <= i < blk.mu1.size and 0 <= j < blk.mu2.size):
            raise KeyError(idx)
        return complex(blk.a[i, j])

    def items(self):
        for k in sorted(self.blocks):
            yield from self.blocks[k].indices()

    def __len__(self) -> int:
        return sum(b.a.size for b in self.blocks.values())

    def energy(self) -> float:
        return float(sum(np.sum(np.abs(b.a) ** 2) for b in self.blocks.values()))

    def omega_norm(self, lam: int, G: tuple, r: float) -> float:
        """``||omega||_{L^r} = 2^{lam(1 - 2/r)} ||psi_G1||_r ||psi_G2||_r``."""
        return (2.0 ** (lam * (1 - 2.0 / r)) * self.ws.factor_norm(G[0], r)
                * self.ws.factor_norm(G[1], r))

    def renormalized(self, lam: int, G: tuple, r: float) -> np.ndarray:
        """``b_omega = a_omega ||omega||_{L^r}`` for one block."""
        return self.blocks[(lam, tuple(G))].a * self.omega_norm(lam, G, r)

    def map(self, fn) -> "WaveletCoeffs":
        out = WaveletCoeffs(self.ws, self.grid)
        for k, b in self.blocks.items():
            out.blocks[k] = CoeffBlock(b.lam, b.G, b.mu1, b.mu2, fn(b))
        return out

    def to_records(self) -> list:
        return [{"lambda": int(i.lam), "G": "".join(i.G), "mu": [int(m) for m in i.mu],
                 "re": float(np.real(a)), "im": float(np.imag(a))} for i, a in self.items()]


def analyze(sigma: Symbol, ws: WaveletSystem, lam_max: int) -> WaveletCoeffs:
    """Inner products with every wavelet of level ``<= lam_max`` meeting the support."""
    grid = sigma.grid
    h = grid.spacing
    if 2.0 ** -lam_max < h:
        raise ResolutionError(f"lambda_max = {lam_max} is finer than the grid spacing {h:g}")
    x = grid.coords()
    box = sigma.support_box
    # crop to the support box before the matrix products
    sel = [np.nonzero((x >= lo - 1e-12) & (x <= hi + 1e-12))[0] for lo, hi in box]
    s = sigma.values[np.ix_(sel[0], sel[1])]
    out = WaveletCoeffs(ws, grid)
    for lam in range(lam_max + 1):
        mu1 = shift_range(ws, lam, box[0])
        mu2 = shift_range(ws, lam, box[1])
        for G in genders(lam):
            W1 = ws.level_matrix(G[0], lam, mu1, x[sel[0]])
            W2 = ws.level_matrix(G[1], lam, mu2, x[sel[1]])
            a = h * h * (W1 @ s @ W2.T)
            out.blocks[(lam, G)] = CoeffBlock(lam, G, mu1, mu2, a)
    return out


def block_support(ws: WaveletSystem, blk: CoeffBlock, grid: TorusGrid) -> tuple:
    half = grid.length / 2
    x = grid.coords()
    out = []
    for mus in (blk.mu1, blk.mu2):
        lo = max(mus[0] * 2.0 ** -blk.lam, -half)
        hi = min((mus[-1] + ws.support) * 2.0 ** -blk.lam, x[-1])
        out.append((lo, hi))
    return tuple(out)


def synthesize(coeffs: WaveletCoeffs, ws: WaveletSystem, grid2d: TorusGrid = None,
               box=None) -> Symbol:
    """``sum_omega a_omega omega`` sampled on ``grid2d`` (default: analysis grid)."""
    grid2d = grid2d or coeffs.grid
    x = grid2d.coords()
    vals = np.zeros(grid2d.shape, dtype=complex)
    lo1 = lo2 = np.inf
    hi1 = hi2 = -np.inf
    for key in sorted(coeffs.blocks):
        blk = coeffs.blocks[key]
        if blk.a.size == 0 or not np.any(blk.a):
            continue
        W1 = ws.level_matrix(blk.G[0], blk.lam, blk.mu1, x)
        W2 = ws.level_matrix(blk.G[1], blk.lam, blk.mu2, x)
        vals += W1.T @ (blk.a @ W2)
        (a1, b1), (a2, b2) = block_support(ws, blk, grid2d)
        lo1, hi1, lo2, hi2 = min(lo1, a1), max(hi1, b1), min(lo2, a2), max(hi2, b2)
    if box is None:
        box = ((lo1, hi1), (lo2, hi2)) if np.isfinite(lo1) else ((0.0, 0.0), (0.0, 0.0))
    return Symbol(grid2d, vals, box)


def level_square_norm(coeffs: WaveletCoeffs, ws: WaveletSystem, lam: int, r: float) -> float:
    """``|| (sum_{G, mu} |a_omega omega|^2)^{1/2} ||_{L^r}`` at one level."""
    grid = coeffs.grid
    x = grid.coords()
    acc = np.zeros(grid.shape)
    for blk in coeffs.level_blocks(lam):
        if not np.any(blk.a):
            continue
        W1 = ws.level_matrix(blk.G[0], lam, blk.mu1, x) ** 2
        W2 = ws.level_matrix(blk.G[1], lam, blk.mu2, x) ** 2
        acc += W1.T @ (np.abs(blk.a) ** 2 @ W2)
    return lp_norm_array(np.sqrt(np.maximum(acc, 0)), grid.spacing, r)
