"""Bilinear and multilinear Fourier multiplier operators on the torus.

For operands on a spatial grid of length ``L`` with ``M`` points, a symbol
lives on the 2D frequency grid ``TorusGrid(2, M/L, M)`` (the dual grid), so
``symbol.values[i1, i2]`` is ``sigma(k1/L, k2/L)``.  The operator is

    T(f, g)(x) = L^-2 sum_{k1,k2} sigma f_hat(k1/L) g_hat(k2/L) e^{2 pi i x (k1+k2)/L}

which the fast path evaluates as a 1D inverse transform of the anti-diagonal
sums of ``sigma f_hat g_hat``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .grid import (FREQUENCY, SPACE, GridError, SampledFunction, TorusGrid,
                   dft_forward, dft_inverse)

__all__ = [
    "SupportMarginError",
    "SizeGuardError",
    "Symbol",
    "symbol_grid",
    "apply_bilinear",
    "apply_bilinear_bruteforce",
    "apply_mlinear_bruteforce",
    "apply_separable",
    "SeparableSymbol",
    "hl_maximal",
    "hl_maximal_exhaustive",
]


class SupportMarginError(ValueError):
    """Symbol support would alias across the Nyquist boundary."""


class SizeGuardError(ValueError):
    """Brute-force evaluation requested on a grid that is too large."""


def symbol_grid(operand_grid: TorusGrid) -> TorusGrid:
    """2D frequency grid matching 1D operands on ``operand_grid``."""
    return TorusGrid(2, operand_grid.points / operand_grid.length, operand_grid.points)


@dataclass(frozen=True)
class Symbol:
    """A sampled bilinear symbol with a declared support rectangle.

    Parameters
    ----------
    grid : TorusGrid
        2D grid whose coordinates are the frequencies ``(xi, eta)``.
    values : array (M, M)
    support_box : ((xi_lo, xi_hi), (eta_lo, eta_hi)), optional
        Closed rectangle containing every nonzero sample.  Inferred as the
        bounding box of the nonzeros when omitted.
    """

    grid: TorusGrid
    values: np.ndarray = field(repr=False)
    support_box: tuple = None

    def __post_init__(self):
        if self.grid.dim != 2:
            raise GridError("a bilinear symbol needs a 2D grid")
        v = np.array(self.values, dtype=complex)
        if v.shape != self.grid.shape:
            raise GridError(f"values of shape {v.shape} do not fit grid {self.grid.shape}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        box = self.support_box
        if box is None:
            box = _bounding_box(v, self.grid.coords())
        box = tuple((float(lo), float(hi)) for lo, hi in box)
        object.__setattr__(self, "support_box", box)
        x = self.grid.coords()
        outside = ~(_inside(x, box[0])[:, None] & _inside(x, box[1])[None, :])
        if np.any(v[outside] != 0):
            raise ValueError("symbol has nonzero samples outside its support_box")

    @classmethod
    def from_function(cls, grid: TorusGrid, func, support_box=None) -> "Symbol":
        x = grid.coords()
        return cls(grid, func(x[:, None], x[None, :]), support_box)

    def restricted(self, box) -> "Symbol":
        """Zero the samples outside ``box`` and declare it as the support."""
        x = self.grid.coords()
        mask = _inside(x, box[0])[:, None] & _inside(x, box[1])[None, :]
        return Symbol(self.grid, np.where(mask, self.values, 0), box)

    def as_function(self) -> SampledFunction:
        """The symbol as a spatial function on its own grid."""
        return SampledFunction(self.grid, self.values, SPACE)


def _inside(x, interval, slack=1e-12):
    lo, hi = interval
    return (x >= lo - slack) & (x <= hi + slack)


def _bounding_box(v, x):
    nz = np.nonzero(v)
    if nz[0].size == 0:
        return ((0.0, 0.0), (0.0, 0.0))
    return ((x[nz[0].min()], x[nz[0].max()]), (x[nz[1].min()], x[nz[1].max()]))


def _spectrum(f: SampledFunction) -> np.ndarray:
    return f.values if f.side == FREQUENCY else dft_forward(f).values


def _check_operands(sigma: Symbol, *fs: SampledFunction) -> TorusGrid:
    g0 = fs[0].grid
    for f in fs:
        if f.grid.dim != 1 or not f.grid.compatible(g0):
            raise GridError("operands must share one 1D grid")
    if not sigma.grid.compatible(symbol_grid(g0)):
        raise GridError(
            f"symbol grid (L={sigma.grid.length:g}, M={sigma.grid.points}) does not match "
            f"operand grid dual (L={g0.points / g0.length:g}, M={g0.points})")
    return g0


def check_support_margin(sigma: Symbol) -> None:
    """The sums ``xi + eta`` over the support must stay inside the Nyquist band."""
    (a1, b1), (a2, b2) = sigma.support_box
    nyq = sigma.grid.length / 2
    lo, hi = a1 + a2, b1 + b2
    if lo < -nyq or hi >= nyq:
        raise SupportMarginError(
            f"xi+eta ranges over [{lo:g}, {hi:g}], outside the Nyquist band "
            f"[-{nyq:g}, {nyq:g}); refine the operand grid")


def apply_bilinear(sigma: Symbol, f: SampledFunction, g: SampledFunction,
                   strict: bool = True) -> SampledFunction:
    """Fast O(M^2) evaluation through anti-diagonal sums.

    The sums wrap modulo ``M``, which matches the direct double sum at every
    grid point.  With ``strict`` the support of ``sigma`` must also keep
    ``xi + eta`` inside the Nyquist band so the result is alias-free.
    """
    grid = _check_operands(sigma, f, g)
    if strict:
        check_support_margin(sigma)
    H = sigma.values * _spectrum(f)[:, None] * _spectrum(g)[None, :]
    G = kernels.antidiag_sum(H) / grid.length
    return dft_inverse(SampledFunction(grid, G, FREQUENCY))


def apply_bilinear_bruteforce(sigma: Symbol, f: SampledFunction,
                              g: SampledFunction) -> SampledFunction:
    """Direct double frequency sum at each grid point (oracle, M <= 64)."""
    grid = _check_operands(sigma, f, g)
    if grid.points > 64:
        raise SizeGuardError(f"brute force needs M <= 64, got {grid.points}")
    k = grid.freqs() * grid.length
    vals = kernels.bilinear_bruteforce(sigma.values, _spectrum(f), _spectrum(g),
                                       grid.coords(), k, grid.length)
    return SampledFunction(grid, vals, SPACE)


def apply_mlinear_bruteforce(sigma_m: np.ndarray, fs: list) -> SampledFunction:
    """Direct m-fold frequency sum for ``m`` in {2, 3}.

    ``sigma_m`` is indexed like the operand spectra: axis ``i`` runs over the
    frequencies ``k/L`` of the i-th operand.
    """
    m = len(fs)
    if m not in (2, 3):
        raise SizeGuardError(f"only m = 2 or 3 is supported, got m = {m}")
    grid = fs[0].grid
    for f in fs:
        if f.grid.dim != 1 or not f.grid.compatible(grid):
            raise GridError("operands must share one 1D grid")
    limit = 64 if m == 2 else 32
    if grid.points > limit:
        raise SizeGuardError(f"m = {m} brute force needs M <= {limit}, got {grid.points}")
    S = np.asarray(sigma_m, dtype=complex)
    if S.shape != (grid.points,) * m:
        raise GridError(f"symbol shape {S.shape} does not match {m} operands of size {grid.points}")
    k = grid.freqs() * grid.length
    x = grid.coords()
    spec = [_spectrum(f) for f in fs]
    if m == 2:
        vals = kernels.bilinear_bruteforce(S, spec[0], spec[1], x, k, grid.length)
    else:
        vals = kernels.trilinear_bruteforce(S, spec[0], spec[1], spec[2], x, k, grid.length)
    return SampledFunction(grid, vals, SPACE)


def apply_separable(U: np.ndarray, C: np.ndarray, V: np.ndarray,
                    f: SampledFunction, g: SampledFunction) -> SampledFunction:
    """Apply ``sigma(xi, eta) = sum_kl C[k, l] U[k](xi) V[l](eta)``.

    Uses ``T = sum_k (U_k f_hat)^v * sum_l C[k, l] (V_l g_hat)^v``, which is
    exact and costs one 1D transform per row of ``U`` and ``V``.
    """
    grid = f.grid
    if not g.grid.compatible(grid) or U.shape[-1] != grid.points or V.shape[-1] != grid.points:
        raise GridError("separable factors do not match the operand grid")
    fh = _spectrum(f)
    gh = _spectrum(g)
    Fk = _inverse_rows(U * fh[None, :], grid)
    Gl = _inverse_rows(V * gh[None, :], grid)
    return SampledFunction(grid, np.sum(Fk * (np.asarray(C) @ Gl), axis=0), SPACE)


@dataclass(frozen=True)
class SeparableSymbol:
    """``sigma(xi, eta) = sum_kl C[k, l] U[k](xi) V[l](eta)`` kept in factored form.

    ``U`` and ``V`` are sampled on the frequencies of ``grid`` (a 2D symbol
    grid); the dense symbol is only formed on request.
    """

    grid: TorusGrid
    U: np.ndarray = field(repr=False)
    C: np.ndarray = field(repr=False)
    V: np.ndarray = field(repr=False)
    support_box: tuple = None

    def apply(self, f: SampledFunction, g: SampledFunction) -> SampledFunction:
        _check_operands_grid(self.grid, f, g)
        return apply_separable(self.U, self.C, self.V, f, g)

    def dense(self) -> Symbol:
        vals = self.U.T @ np.asarray(self.C) @ self.V
        return Symbol(self.grid, vals, self.support_box)


def _check_operands_grid(grid: TorusGrid, *fs: SampledFunction) -> None:
    g0 = fs[0].grid
    if not grid.compatible(symbol_grid(g0)) or any(not f.grid.compatible(g0) for f in fs):
        raise GridError("operands do not match the symbol grid")


def _inverse_rows(rows: np.ndarray, grid: TorusGrid) -> np.ndarray:
    if rows.shape[0] == 0:
        return np.zeros((0, grid.points), dtype=complex)
    out = np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(rows, axes=-1), axis=-1), axes=-1)
    return out / grid.spacing


def hl_maximal(g: SampledFunction) -> SampledFunction:
    """Dyadic centered maximal function of ``|g|`` with periodic windows."""
    return _maximal(g, kernels.dyadic_widths(g.grid.points))


def hl_maximal_exhaustive(g: SampledFunction) -> SampledFunction:
    """Same over every integer half-width 0..M/2 (oracle)."""
    return _maximal(g, np.arange(g.grid.points // 2 + 1))


def _maximal(g: SampledFunction, widths) -> SampledFunction:
    if g.side != SPACE or g.grid.dim != 1:
        raise GridError("the maximal function needs a 1D spatial input")
    return SampledFunction(g.grid, kernels.window_averages(np.abs(g.values), widths), SPACE)
