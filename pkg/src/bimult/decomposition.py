"""Single-level wavelet decomposition of a symbol and its operator bounds.

At a fixed level ``lam`` the wavelets of each gender are split into
subclasses with pairwise disjoint supports (residues of the shift modulo
``support + 1``).  Inside a subclass the ``L^r``-renormalized coefficients
``b = a ||omega||_r`` are sorted into dyadic level sets relative to the
budget ``B = ||b||_{l^r}``, and each level set is split into heavy columns
(at least ``K = 2^{tau r / 2}`` members) and the light remainder.  Every
displayed operator bound becomes a measured ratio.

The axis split separates the wavelets of a dyadic piece
``m_j = sigma(2^j .) psi_hat`` that sit near either coordinate axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bumps import lp_profile
from .grid import (FREQUENCY, SPACE, SampledFunction, TorusGrid, dft_forward, dft_inverse,
                   lp_norm)
from .multiplier import Symbol, _inverse_rows, apply_separable, hl_maximal
from .wavelets import WaveletCoeffs, WaveletIndex, WaveletSystem, analyze, genders

__all__ = [
    "ClassData",
    "SubclassPartition",
    "LevelSetSplit",
    "PieceRecord",
    "AxisSplit",
    "tau_max",
    "partition_subclasses",
    "level_set_split",
    "all_splits",
    "reconstruct_piece",
    "verify_piece_bounds",
    "localize",
    "axis_split",
    "domination_ratio",
    "band_count",
    "annulus_test_function",
    "decomposition_sweep",
    "CSV_COLUMNS",
]

CSV_COLUMNS = ("lambda", "kappa", "tau", "gamma", "K", "ratio_rows", "ratio_cols", "ratio_imp")


def tau_max(lam: int, r: float, n: int = 1) -> int:
    """Smallest integer with ``2 n lam / r <= tau_max``."""
    return int(math.ceil(2 * n * lam / r - 1e-12))


@dataclass
class ClassData:
    """One subclass: fixed gender and fixed residues of ``(mu1, mu2)``."""

    lam: int
    G: tuple
    residues: tuple
    mu1: np.ndarray
    mu2: np.ndarray
    a: np.ndarray

    @property
    def label(self) -> str:
        return f"{''.join(self.G)}:{self.residues[0]}:{self.residues[1]}"

    def indices(self) -> list:
        return [WaveletIndex(self.lam, self.G, (int(k), int(l)))
                for k in self.mu1 for l in self.mu2]


@dataclass
class SubclassPartition:
    lam: int
    modulus: int
    ws: WaveletSystem
    grid: TorusGrid
    classes: dict = field(default_factory=dict)

    def all_indices(self) -> list:
        out = []
        for key in sorted(self.classes):
            out.extend(self.classes[key].indices())
        return out


def _assert_disjoint(mus: np.ndarray, support: int) -> None:
    if mus.size > 1 and np.min(np.diff(np.sort(mus))) <= support:
        raise AssertionError("wavelet supports inside a subclass overlap")


def partition_subclasses(coeffs: WaveletCoeffs, lam: int, ws: WaveletSystem) -> SubclassPartition:
    """Split level ``lam`` into classes of pairwise disjoint supports."""
    m = ws.support + 1
    part = SubclassPartition(lam, m, ws, coeffs.grid)
    blocks = coeffs.level_blocks(lam)
    if not blocks:
        raise ValueError(f"no coefficients at level {lam}")
    for blk in blocks:
        for r1 in range(m):
            s1 = np.nonzero(np.mod(blk.mu1, m) == r1)[0]
            if s1.size == 0:
                continue
            for r2 in range(m):
                s2 = np.nonzero(np.mod(blk.mu2, m) == r2)[0]
                if s2.size == 0:
                    continue
                cls = ClassData(lam, blk.G, (r1, r2), blk.mu1[s1], blk.mu2[s2],
                                blk.a[np.ix_(s1, s2)])
                _assert_disjoint(cls.mu1, ws.support)
                _assert_disjoint(cls.mu2, ws.support)
                part.classes[(blk.G, r1, r2)] = cls
    return part


@dataclass
class LevelSetSplit:
    """Level set ``D^tau`` of one subclass and its heavy/light split.

    Masks are boolean arrays over ``(mu1, mu2)`` of the class; rows are the
    "columns" of the proof (fixed first index ``k``).
    """

    cls: ClassData
    tau: int
    tau_max: int
    K: float
    B: float
    r: float
    b: np.ndarray
    cell: np.ndarray
    heavy: np.ndarray
    light: np.ndarray

    @property
    def gamma(self) -> int:
        return int(np.count_nonzero(np.any(self.heavy, axis=1)))

    def mask(self, which: str) -> np.ndarray:
        return {"heavy": self.heavy, "light": self.light, "cell": self.cell}[which]


def _cells(absb: np.ndarray, B: float, tmax: int) -> np.ndarray:
    """Cell index per coefficient by first match on ascending ``tau``."""
    cell = np.full(absb.shape, -1, dtype=int)
    for t in range(tmax):
        hit = (cell < 0) & (absb > B * 2.0 ** -t) & (absb <= B * 2.0 ** (1 - t))
        cell[hit] = t
    rest = cell < 0
    if np.any(absb[rest] > B * 2.0 ** (1 - tmax) * (1 + 1e-12)):
        raise AssertionError("coefficient above the budget escaped every cell")
    cell[rest] = tmax
    return cell


def level_set_split(partition: SubclassPartition, kappa, tau: int, r: float) -> LevelSetSplit:
    """``D^tau``, ``D^{tau,1}`` (heavy columns) and ``D^{tau,2}`` for class ``kappa``."""
    cls = partition.classes[kappa] if not isinstance(kappa, ClassData) else kappa
    lam = cls.lam
    tmax = tau_max(lam, r)
    if not 0 <= tau <= tmax:
        raise ValueError(f"tau must lie in [0, {tmax}], got {tau}")
    ws = partition.ws
    norm = (2.0 ** (lam * (1 - 2.0 / r)) * ws.factor_norm(cls.G[0], r) * ws.factor_norm(cls.G[1], r))
    b = cls.a * norm
    absb = np.abs(b)
    K = 2.0 ** (tau * r / 2)
    if b.size == 0:
        empty = np.zeros(b.shape, dtype=bool)
        return LevelSetSplit(cls, tau, tmax, K, 0.0, r, b, empty, empty, empty)
    B = float(np.sum(absb ** r) ** (1.0 / r))
    cell = _cells(absb, B, tmax) == tau
    heavy_rows = np.count_nonzero(cell, axis=1) >= K
    heavy = cell & heavy_rows[:, None]
    light = cell & ~heavy
    return LevelSetSplit(cls, tau, tmax, K, B, r, b, cell, heavy, light)


def all_splits(partition: SubclassPartition, kappa, r: float) -> list:
    cls = partition.classes[kappa]
    return [level_set_split(partition, kappa, t, r) for t in range(tau_max(cls.lam, r) + 1)]


def _rows(ws: WaveletSystem, cls: ClassData, x: np.ndarray):
    W1 = ws.level_matrix(cls.G[0], cls.lam, cls.mu1, x)
    W2 = ws.level_matrix(cls.G[1], cls.lam, cls.mu2, x)
    return W1, W2


def reconstruct_piece(split: LevelSetSplit, which: str, ws: WaveletSystem,
                      grid2d: TorusGrid) -> Symbol:
    """``sum b_omega omega_tilde`` over the heavy, light or whole cell."""
    sel = split.mask(which)
    x = grid2d.coords()
    if not np.any(sel):
        return Symbol(grid2d, np.zeros(grid2d.shape), ((0.0, 0.0), (0.0, 0.0)))
    W1, W2 = _rows(ws, split.cls, x)
    A = np.where(sel, split.cls.a, 0)
    vals = W1.T @ A @ W2
    lam = split.cls.lam
    S = ws.support
    k = split.cls.mu1[np.any(sel, axis=1)]
    l = split.cls.mu2[np.any(sel, axis=0)]
    half = grid2d.length / 2
    box = ((max(k.min() * 2.0 ** -lam, -half), min((k.max() + S) * 2.0 ** -lam, x[-1])),
           (max(l.min() * 2.0 ** -lam, -half), min((l.max() + S) * 2.0 ** -lam, x[-1])))
    return Symbol(grid2d, vals, box)


@dataclass
class PieceRecord:
    lam: int
    kappa: str
    tau: int
    gamma: int
    K: float
    ratio_rows: float
    ratio_cols: float
    ratio_imp: float
    degenerate: bool = False

    def row(self) -> tuple:
        return (self.lam, self.kappa, self.tau, self.gamma, self.K,
                self.ratio_rows, self.ratio_cols, self.ratio_imp)


def _ratio(num: float, den: float):
    if num == 0:
        return 0.0, False
    if den == 0:
        return float("inf"), True
    return num / den, False


def piece_operator_norms(split: LevelSetSplit, f: SampledFunction, g: SampledFunction,
                         ws: WaveletSystem) -> dict:
    """``||T_piece(f, g)||_1`` for the heavy part, light part and whole cell."""
    x = f.grid.freqs()
    out = {}
    W1, W2 = _rows(ws, split.cls, x)
    for which in ("heavy", "light", "cell"):
        sel = split.mask(which)
        if not np.any(sel):
            out[which] = 0.0
            continue
        rk = np.any(sel, axis=1)
        cl = np.any(sel, axis=0)
        A = np.where(sel, split.cls.a, 0)[np.ix_(rk, cl)]
        T = apply_separable(W1[rk], A, W2[cl], f, g)
        out[which] = lp_norm(T, 1)
    return out


def verify_piece_bounds(split: LevelSetSplit, f: SampledFunction, g: SampledFunction,
                        sigma_norm: float, s: float, ws: WaveletSystem) -> PieceRecord:
    """Measured constants in the row, column and combined estimates.

    ``sigma_norm`` is ``||sigma||_{L^r_s}``; ``f`` and ``g`` should have unit
    ``L^2`` norm (the ratios divide by ``||f||_2 ||g||_2`` anyway).
    """
    lam, tau, r = split.cls.lam, split.tau, split.r
    fg = lp_norm(f, 2) * lp_norm(g, 2)
    norms = piece_operator_norms(split, f, g, ws)
    base = sigma_norm * fg * 2.0 ** (lam * (2.0 / r - s))
    rows, d1 = _ratio(norms["heavy"], base * math.sqrt(split.gamma) * 2.0 ** -tau)
    cols, d2 = _ratio(norms["light"], sigma_norm * fg * math.sqrt(split.K) * 2.0 ** (-s * lam)
                      * 2.0 ** -tau * 2.0 ** (2 * lam / r))
    imp, d3 = _ratio(norms["cell"], base * 2.0 ** ((r / 4 - 1) * tau))
    return PieceRecord(lam, split.cls.label, tau, split.gamma, split.K, rows, cols, imp,
                       d1 or d2 or d3)


def annulus_test_function(grid: TorusGrid, rng: np.random.Generator,
                          lo: float = 0.5, hi: float = 2.0) -> SampledFunction:
    """Unit-``L^2`` complex Gaussian noise with spectrum in ``lo <= |xi| <= hi``."""
    k = grid.freqs()
    band = (np.abs(k) >= lo) & (np.abs(k) <= hi)
    F = np.zeros(grid.points, dtype=complex)
    F[band] = rng.normal(size=band.sum()) + 1j * rng.normal(size=band.sum())
    f = dft_inverse(SampledFunction(grid, F, FREQUENCY))
    return f.with_values(f.values / lp_norm(f, 2))


def decomposition_sweep(sigma: Symbol, ws: WaveletSystem, lams, r: float, s: float,
                        sigma_norm: float, pairs: list) -> list:
    """``PieceRecord`` for every level, subclass, level set and test pair."""
    coeffs = analyze(sigma, ws, max(lams))
    out = []
    for lam in lams:
        part = partition_subclasses(coeffs, lam, ws)
        for kappa in sorted(part.classes):
            for split in all_splits(part, kappa, r):
                for f, g in pairs:
                    out.append(verify_piece_bounds(split, f, g, sigma_norm, s, ws))
    return out


# -- the axis split ----------------------------------------------------------

def localize(sigma: Symbol, j: int) -> Symbol:
    """``m_j(zeta) = sigma(2^j zeta) psi_hat(zeta)`` by relabeling the grid."""
    grid = TorusGrid(2, sigma.grid.length * 2.0 ** -j, sigma.grid.points)
    x = grid.coords()
    vals = sigma.values * lp_profile(np.hypot(x[:, None], x[None, :]))
    c = 2.0 ** -j
    (a1, b1), (a2, b2) = sigma.support_box
    box = ((max(a1 * c, -2.0), min(b1 * c, 2.0)), (max(a2 * c, -2.0), min(b2 * c, 2.0)))
    return Symbol(grid, vals, box)


@dataclass
class AxisSplit:
    """Level-``lam`` part of ``m_j`` split by distance of the wavelets to the axes."""

    j: int
    lam: int
    N_support: float
    m: Symbol
    m1: Symbol
    m2: Symbol
    m3: Symbol
    coeffs: WaveletCoeffs
    near1: dict
    near2: dict


def _near_axis(mus: np.ndarray, S: int, N: float) -> np.ndarray:
    # support center 2^-lam (mu + S/2) within 2N 2^-lam of the axis
    return np.abs(mus + S / 2.0) <= 2 * N


def axis_split(sigma: Symbol, j: int, coeffs: WaveletCoeffs, ws: WaveletSystem,
               lam: int, localized: bool = False) -> AxisSplit:
    """``m = m1 + m2 + m3`` at level ``lam``.

    ``m2`` collects wavelets whose second shift is near the axis, ``m3``
    those whose first shift is near the axis (and second is not), ``m1``
    the rest.  ``sigma`` is localized to ``m_j`` first unless ``localized``.
    """
    m_j = sigma if localized else localize(sigma, j)
    if coeffs is None:
        coeffs = analyze(m_j, ws, lam)
    S = ws.support
    N = S / 2.0
    grid = m_j.grid
    x = grid.coords()
    parts = [np.zeros(grid.shape, dtype=complex) for _ in range(4)]
    near1, near2 = {}, {}
    for blk in coeffs.level_blocks(lam):
        W1 = ws.level_matrix(blk.G[0], lam, blk.mu1, x)
        W2 = ws.level_matrix(blk.G[1], lam, blk.mu2, x)
        n1 = _near_axis(blk.mu1, S, N)
        n2 = _near_axis(blk.mu2, S, N)
        near1[blk.G], near2[blk.G] = n1, n2
        sel2 = np.broadcast_to(n2[None, :], blk.a.shape)
        sel3 = n1[:, None] & ~n2[None, :]
        sel1 = ~sel2 & ~sel3
        for out, sel in ((parts[1], sel1), (parts[2], sel2), (parts[3], sel3)):
            if np.any(sel):
                out += W1.T @ np.where(sel, blk.a, 0) @ W2
        parts[0] += W1.T @ blk.a @ W2
    box = ((-grid.length / 2, x[-1]),) * 2
    sym = [Symbol(grid, p, box) for p in parts]
    return AxisSplit(j, lam, N, sym[0], sym[1], sym[2], sym[3], coeffs, near1, near2)


def domination_ratio(split: AxisSplit, f: SampledFunction, g: SampledFunction,
                     r: float, s: float, ws: WaveletSystem) -> float:
    """``sup_x |T_{m2}(f, g)| / (2^{(2/r - s) lam} max_l |(m_l f_hat)^v| M(g))``.

    ``m_l = 2^{-lam (1/r - s)} sum_k b_kl omega_tilde_k`` is the bounded
    multiplier of the pointwise estimate, one per near-axis column ``l``.
    """
    lam = split.lam
    x = f.grid.freqs()
    T = np.zeros(f.grid.points, dtype=complex)
    envelope = np.zeros(f.grid.points)
    for blk in split.coeffs.level_blocks(lam):
        n2 = split.near2[blk.G]
        if not np.any(n2):
            continue
        norm = 2.0 ** (lam * (1 - 2.0 / r)) * ws.factor_norm(blk.G[0], r) * ws.factor_norm(blk.G[1], r)
        n1r = ws.factor_norm(blk.G[0], r) * 2.0 ** (lam * (0.5 - 1.0 / r))
        n2r = ws.factor_norm(blk.G[1], r) * 2.0 ** (lam * (0.5 - 1.0 / r))
        b = blk.a[:, n2] * norm
        Wk = ws.level_matrix(blk.G[0], lam, blk.mu1, x) / n1r
        Wl = ws.level_matrix(blk.G[1], lam, blk.mu2[n2], x) / n2r
        Fk = _inverse_rows(Wk * _hat(f)[None, :], f.grid)
        Gl = _inverse_rows(Wl * _hat(g)[None, :], f.grid)
        Al = b.T @ Fk  # (l, x): (sum_k b_kl omega_tilde_k f_hat)^v
        T += np.sum(Al * Gl, axis=0)
        ml = 2.0 ** (-lam * (1.0 / r - s)) * np.abs(Al)
        envelope = np.maximum(envelope, ml.max(axis=0))
    if not np.any(T):
        return 0.0
    Mg = hl_maximal(g).values.real
    den = 2.0 ** ((2.0 / r - s) * lam) * envelope * Mg
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(den > 0, np.abs(T) / den, np.where(np.abs(T) > 0, np.inf, 0.0))
    return float(np.max(q))


def _hat(f: SampledFunction) -> np.ndarray:
    return f.values if f.side != SPACE else dft_forward(f).values


def band_count(xi: np.ndarray, lam: int, jrange) -> np.ndarray:
    """Number of ``j`` with ``2^{-lam-j} <= |xi| <= 2^{1-j}`` at each frequency."""
    a = np.abs(np.asarray(xi, dtype=float))
    cnt = np.zeros(a.shape, dtype=int)
    for j in jrange:
        cnt += (a >= 2.0 ** (-lam - j)) & (a <= 2.0 ** (1 - j))
    return cnt
