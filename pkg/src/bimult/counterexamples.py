"""Random-sign counterexample families and exponent fitting.

Each family is a sum of frequency bumps at ``j/N``.  Slot ``i`` of the
operator gets its own sign family ``a_j(t_i)`` and the output window
``c_l`` (``ceil(9N/10) <= l <= floor(11N/10)``) gets family 0, so the slot
signs cancel between the inputs and the symbol and

    T(x) = N^-m phi(x/N)^m sum_l a_l(t_0) c_l n_l e^{2 pi i x l / N},

with ``n_l`` the number of index tuples summing to ``l``.  Expectations over
the signs are Monte-Carlo averages (exhaustive enumeration for small sign
sets) and exponents are least-squares slopes on log-log means.

Grids
-----
Operands live on a torus of length ``L = cells * N`` with ``M = 8 L``
points.  Periodizing in space with a period proportional to ``N`` keeps the
structure above exact at every ``N``: the periodized envelope is
``phi_per(x/N)`` with ``phi_per`` independent of ``N``.  ``resolve=False``
selects the one-bin-per-bump lattice model (``L = N``) used by brute-force
trilinear runs, where every bump collapses to a Kronecker delta.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .bumps import MODES, BumpMode, BumpSpec, ResolutionError, lp_profile
from .grid import FREQUENCY, SampledFunction, TorusGrid, dft_inverse, lp_norm
from .multiplier import (SeparableSymbol, SizeGuardError, SupportMarginError,
                         apply_mlinear_bruteforce, symbol_grid)
from .norms import NormReport, sobolev_norm_values

__all__ = [
    "FAMILIES",
    "CSV_COLUMNS",
    "FitError",
    "RademacherDraw",
    "BumpSymbol",
    "CounterexampleInstance",
    "FamilySpec",
    "MCResult",
    "ScalingReport",
    "c_window",
    "operand_grid",
    "bump_rows",
    "build_fN",
    "build_gN",
    "build_sigmaN",
    "build_instance",
    "build_single_bump",
    "build_mixed",
    "mc_norm",
    "exact_mean",
    "sign_dependencies",
    "fit_exponent",
    "scaling_sweep",
    "bump_symbol_sobolev",
    "bump_symbol_hormander",
]

FAMILIES = ("bilinear_sigmaN", "mlinear_sigmaN", "single_bump", "mixed_k")
CSV_COLUMNS = ("family", "N", "p", "mean", "stderr", "sobolev", "hormander")

DEFAULT_CELLS = {"narrow": 256, "wide": 16}
OVERSAMPLE = 8
SIGN_RANGE = 1 << 12
MAX_NORM_POINTS = 4096
MAX_ENUMERATION = 20


class FitError(ValueError):
    """Too few points for an exponent fit."""


def c_window(N: int) -> tuple:
    """Integer window ``[ceil(9N/10), floor(11N/10)]``."""
    return (-(-9 * N // 10), 11 * N // 10)


class RademacherDraw:
    """Independent +-1 sign families, reproducible from ``seed``.

    Family ``f`` is drawn from ``SeedSequence([*seed, f])``, so families are
    independent and any one of them can be regenerated alone.  ``overrides``
    maps ``(family, index)`` to a forced sign (used by exhaustive
    enumeration).
    """

    def __init__(self, seed, overrides: dict = None):
        self.seed = tuple(int(s) for s in np.atleast_1d(seed))
        self.overrides = dict(overrides or {})
        self._tables = {}

    @classmethod
    def for_task(cls, master: int, N: int, sample: int) -> "RademacherDraw":
        """Per-task draw for sample ``sample`` of a sweep at ``N``."""
        return cls((master, N, sample))

    def _table(self, family: int) -> np.ndarray:
        t = self._tables.get(family)
        if t is None:
            rng = np.random.default_rng(np.random.SeedSequence([*self.seed, family]))
            t = 1 - 2 * rng.integers(0, 2, 2 * SIGN_RANGE + 1)
            self._tables[family] = t
        return t

    def signs(self, family: int, indices) -> np.ndarray:
        idx = np.asarray(indices, dtype=int)
        if idx.size and np.abs(idx).max() > SIGN_RANGE:
            raise ValueError(f"sign index beyond +-{SIGN_RANGE}")
        out = self._table(family)[idx + SIGN_RANGE].astype(float)
        for (fam, j), v in self.overrides.items():
            if fam == family:
                out[idx == j] = v
        return out

    def with_overrides(self, overrides: dict) -> "RademacherDraw":
        return RademacherDraw(self.seed, {**self.overrides, **overrides})


class _Unsigned:
    """Draw stand-in for families without random signs."""

    seed = ()

    def signs(self, family, indices):
        return np.ones(np.shape(indices))


UNSIGNED = _Unsigned()


# -- grids and bumps ---------------------------------------------------------

def operand_grid(N: int, mode: str = "wide", cells: int = None, resolve: bool = True) -> TorusGrid:
    """Torus for the operands at scale ``N`` (see the module notes)."""
    if not resolve:
        return TorusGrid(1, float(N), 32)
    if cells is None:
        cells = DEFAULT_CELLS[mode]
    L = float(cells * N)
    return TorusGrid(1, L, int(OVERSAMPLE * cells * N))


def _mode(mode) -> BumpMode:
    return mode if isinstance(mode, BumpMode) else MODES[mode]


def _wrap(d: np.ndarray, period: float) -> np.ndarray:
    return (d + period / 2) % period - period / 2


def bump_rows(grid: TorusGrid, N: int, centers, profile) -> np.ndarray:
    """``profile(N xi - j)`` for each center ``j`` at the frequencies of ``grid``.

    The offset ``xi - j/N`` is reduced modulo the frequency period ``M/L``.
    """
    xi = grid.freqs()
    c = np.asarray(centers, dtype=float)
    d = _wrap(xi[None, :] - c[:, None] / N, grid.points / grid.length)
    return profile(N * d)


def _check_grid(grid: TorusGrid, N: int, mode: BumpMode, reach: float, resolve: bool) -> None:
    if not resolve:
        return
    df = 1.0 / grid.length
    need = 2.0 * N / mode.schwartz.outer
    if 2 * mode.schwartz.outer / N < 4 * df:
        raise ResolutionError(
            f"bumps of radius {mode.schwartz.outer:g}/N need L >= {need:g} at N = {N}, "
            f"got L = {grid.length:g}")
    if (mode.plateau.outer - mode.plateau.inner) / N < 2 * df:
        raise ResolutionError(f"plateau transition unresolved at N = {N}")
    nyq = grid.points / grid.length / 2
    if reach >= nyq:
        raise SupportMarginError(
            f"output frequencies reach {reach:g}, beyond the Nyquist frequency {nyq:g}")


def _indices(N: int, indices: str) -> np.ndarray:
    if indices == "positive":
        return np.arange(1, N + 1)
    if indices == "symmetric":
        return np.arange(-N, N + 1)
    raise ValueError(f"indices must be 'positive' or 'symmetric', got {indices!r}")


def build_fN(N: int, draw, grid: TorusGrid, mode="wide", family: int = 1,
             signed: bool = True, indices: str = "positive", resolve: bool = True) -> SampledFunction:
    """``f_hat(xi) = sum_j a_j(t_family) phi_hat(N xi - j)`` on the frequency side."""
    md = _mode(mode)
    J = _indices(N, indices)
    _check_grid(grid, N, md, (np.abs(J).max() + md.schwartz.outer) / N, resolve)
    a = draw.signs(family, J) if signed else np.ones(J.size)
    vals = a @ bump_rows(grid, N, J, md.schwartz)
    return SampledFunction(grid, vals, FREQUENCY)


def build_gN(N: int, grid: TorusGrid, mode="wide", indices: str = "symmetric",
             resolve: bool = True) -> SampledFunction:
    """Unsigned ``g_hat(xi) = sum_j phi_hat(N xi - j)``."""
    return build_fN(N, UNSIGNED, grid, mode, signed=False, indices=indices, resolve=resolve)


@dataclass(frozen=True)
class BumpSymbol:
    """``sigma = sum C[j_1..j_m] prod_i plateau(N xi_i - j_i)`` with ``C`` on index tuples.

    ``centers`` holds the index set per axis; ``C`` is a dense tensor over
    those index sets.
    """

    N: int
    profile: BumpSpec
    centers: tuple
    C: np.ndarray = field(repr=False)

    @property
    def m(self) -> int:
        return len(self.centers)

    def rows(self, axis: int, xi: np.ndarray) -> np.ndarray:
        c = np.asarray(self.centers[axis], dtype=float)
        return self.profile(self.N * (xi[None, :] - c[:, None] / self.N))

    def box(self) -> tuple:
        out = []
        o = self.profile.outer
        for ax in range(self.m):
            other = tuple(i for i in range(self.m) if i != ax)
            used = np.any(self.C != 0, axis=other) if other else self.C != 0
            c = np.asarray(self.centers[ax])[used]
            if c.size == 0:
                out.append((0.0, 0.0))
            else:
                out.append(((c.min() - o) / self.N, (c.max() + o) / self.N))
        return tuple(out)

    def radii(self) -> tuple:
        """Smallest and largest ``|zeta|`` over the bump rectangles with ``C != 0``."""
        if self.m != 2:
            raise ValueError("radii are only needed for bilinear symbols")
        o = self.profile.outer / self.N
        j, k = np.nonzero(self.C)
        if j.size == 0:
            return 0.0, 0.0
        cj = np.asarray(self.centers[0], dtype=float)[j] / self.N
        ck = np.asarray(self.centers[1], dtype=float)[k] / self.N
        near = np.hypot(np.maximum(np.abs(cj) - o, 0), np.maximum(np.abs(ck) - o, 0))
        far = np.hypot(np.abs(cj) + o, np.abs(ck) + o)
        return float(near.min()), float(far.max())

    def evaluate(self, xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
        """Dense samples on the tensor grid ``xi x eta`` (bilinear only)."""
        return self.rows(0, xi).T @ self.C @ self.rows(1, eta)

    def on_grid(self, grid: TorusGrid):
        """Samples at the frequencies of the operand ``grid`` (wrapped).

        Bilinear symbols stay factored (``SeparableSymbol``); trilinear ones
        become a dense ``M^3`` array for the brute-force path.
        """
        U = [bump_rows(grid, self.N, c, self.profile) for c in self.centers]
        if self.m == 2:
            return SeparableSymbol(symbol_grid(grid), U[0], self.C, U[1], self.box())
        if self.m == 3:
            return np.einsum("abc,ai,bj,ck->ijk", self.C, U[0], U[1], U[2], optimize=True)
        raise ValueError(f"unsupported multilinearity m = {self.m}")


def _window_tensor(N: int, centers: tuple, draw, signed_slots: int) -> np.ndarray:
    """``C = prod_{i <= k} a_{j_i}(t_i) * a_l(t_0) c_l`` over index tuples."""
    lo, hi = c_window(N)
    grids = np.meshgrid(*centers, indexing="ij")
    l = sum(grids)
    inside = (l >= lo) & (l <= hi)
    C = np.where(inside, draw.signs(0, np.where(inside, l, 0)), 0.0)
    for i in range(signed_slots):
        C = C * draw.signs(i + 1, grids[i])
    return C


def build_sigmaN(N: int, m: int, draw, grid: TorusGrid = None, mode="wide",
                 indices: str = "positive", signed_slots: int = None,
                 resolve: bool = True) -> BumpSymbol:
    """The signed window symbol.

    Evaluate it on operands with ``BumpSymbol.on_grid``; when ``grid`` is
    given the resolution and Nyquist guards are checked against it.
    """
    md = _mode(mode)
    J = _indices(N, indices)
    k = m if signed_slots is None else signed_slots
    if not 0 <= k <= m:
        raise ValueError(f"need 0 <= k <= m, got k = {k}, m = {m}")
    centers = (J,) * m
    if grid is not None:
        _check_grid(grid, N, md, m * (np.abs(J).max() + md.plateau.outer) / N, resolve)
    return BumpSymbol(N, md.plateau, centers, _window_tensor(N, centers, draw, k))


# -- instances ---------------------------------------------------------------

@dataclass
class CounterexampleInstance:
    """Operands, symbol and output of one draw of a family."""

    family: str
    N: int
    m: int
    k: int
    functions: list
    symbol: BumpSymbol
    grid: TorusGrid
    c_window: tuple
    centers: tuple
    signed: tuple
    mode: str = "wide"
    resolve: bool = True
    _output: SampledFunction = field(default=None, repr=False)

    def output(self) -> SampledFunction:
        if self._output is None:
            sym = self.symbol.on_grid(self.grid)
            if self.m == 2:
                self._output = sym.apply(*self.functions)
            else:
                self._output = apply_mlinear_bruteforce(sym, list(self.functions))
        return self._output

    def input_norms(self, p_inputs) -> list:
        out = []
        for f, p in zip(self.functions, p_inputs):
            out.append(lp_norm(dft_inverse(f), p))
        return out

    def check_invariants(self, draw) -> None:
        """Assert the support and sign structure of this draw."""
        md = _mode(self.mode)
        for i, (f, J) in enumerate(zip(self.functions, self.centers)):
            # spectrum vanishes away from the bumps at J/N
            rows = bump_rows(self.grid, self.N, J, md.schwartz)
            covered = np.any(rows != 0, axis=0)
            assert not np.any(f.values[~covered]), f"slot {i}: spectrum outside the bumps"
            sig = draw.signs(i + 1, J) if self.signed[i] else np.ones(J.size)
            assert np.allclose(f.values, sig @ rows), f"slot {i}: wrong sign pattern"
        lo, hi = c_window(self.N)
        grids = np.meshgrid(*self.symbol.centers, indexing="ij")
        l = sum(grids)
        C = self.symbol.C
        assert np.all((C != 0) == ((l >= lo) & (l <= hi))), "symbol ignores the c window"
        expect = np.where(C != 0, draw.signs(0, np.where(C != 0, l, 0)), 0.0)
        for i in range(self.m):
            if self.signed[i]:
                expect = expect * draw.signs(i + 1, grids[i])
        assert np.array_equal(C, expect), "symbol sign product mismatch"


def build_instance(family: str, N: int, draw, m: int = 2, k: int = None, mode="wide",
                   grid: TorusGrid = None, resolve: bool = True) -> CounterexampleInstance:
    """Dispatch to the family builders."""
    if family == "bilinear_sigmaN":
        return build_mixed(N, 2, 2, draw, grid, mode, indices="positive",
                           resolve=resolve, family=family)
    if family == "mlinear_sigmaN":
        return build_mixed(N, m, m, draw, grid, mode, indices="positive",
                           resolve=resolve, family=family)
    if family == "single_bump":
        return build_single_bump(N, m, grid, mode)
    if family == "mixed_k":
        return build_mixed(N, m, m if k is None else k, draw, grid, mode, resolve=resolve)
    raise ValueError(f"unknown family {family!r}; choose from {FAMILIES}")


def build_mixed(N: int, m: int, k: int, draw, grid: TorusGrid = None, mode="wide",
                indices: str = "symmetric", resolve: bool = True,
                family: str = "mixed_k") -> CounterexampleInstance:
    """First ``k`` slots signed ``f_N`` (slot ``i`` uses family ``i``), the rest unsigned ``g_N``."""
    md = _mode(mode)
    if grid is None:
        grid = operand_grid(N, md.name, resolve=resolve)
    sigma = build_sigmaN(N, m, draw, grid, md, indices, k, resolve)
    fs = [build_fN(N, draw, grid, md, family=i + 1, signed=i < k, indices=indices,
                   resolve=resolve) for i in range(m)]
    J = _indices(N, indices)
    return CounterexampleInstance(family, N, m, k, fs, sigma, grid, c_window(N),
                                  (J,) * m, tuple(i < k for i in range(m)), md.name, resolve)


def build_single_bump(N: int, m: int = 2, grid: TorusGrid = None, mode="wide",
                      a: float = 1.0) -> CounterexampleInstance:
    """``f_hat_j = phi_hat(N (xi - a))`` and ``sigma = prod plateau(N (xi_j - a))``.

    The center ``a`` must be a multiple of ``1/N`` with ``|a| = 1``; the
    output has the closed form ``N^-m (phi(x/N) e^{2 pi i x a})^m``.
    """
    if abs(abs(a) - 1.0) > 1e-12:
        raise ValueError(f"the bump center must satisfy |a| = 1, got {a}")
    md = _mode(mode)
    if grid is None:
        grid = operand_grid(N, md.name)
    j0 = np.array([int(round(a * N))])
    _check_grid(grid, N, md, m * (abs(a) + md.plateau.outer / N), True)
    fs = [SampledFunction(grid, bump_rows(grid, N, j0, md.schwartz)[0], FREQUENCY)
          for _ in range(m)]
    sigma = BumpSymbol(N, md.plateau, (j0,) * m, np.ones((1,) * m))
    return CounterexampleInstance("single_bump", N, m, 0, fs, sigma, grid, c_window(N),
                                  (j0,) * m, (False,) * m, md.name)


def single_bump_closed_form(inst: CounterexampleInstance) -> np.ndarray:
    """``N^-m (phi(x/N) e^{2 pi i x a})^m`` on the operand grid."""
    phi_N = dft_inverse(inst.functions[0]).values
    return phi_N ** inst.m


# -- Monte-Carlo and exact expectations --------------------------------------

@dataclass(frozen=True)
class FamilySpec:
    """Everything except the draw needed to build an instance."""

    family: str
    N: int
    m: int = 2
    k: int = None
    mode: str = "wide"
    resolve: bool = True
    cells: int = None

    def grid(self) -> TorusGrid:
        return operand_grid(self.N, self.mode, self.cells, self.resolve)

    def build(self, draw) -> CounterexampleInstance:
        return build_instance(self.family, self.N, draw, self.m, self.k, self.mode,
                              self.grid(), self.resolve)

    @property
    def deterministic(self) -> bool:
        return self.family == "single_bump"


def _quantities(inst: CounterexampleInstance, p: float, p_inputs, tensor: bool) -> dict:
    out = {"T": lp_norm(inst.output(), p) ** p}
    for i, (q, nrm) in enumerate(zip(p_inputs, inst.input_norms(p_inputs))):
        out[f"f{i + 1}"] = nrm ** q
    if tensor:
        # n = 2 tensor squares: ||F||_p^p = (||f||_p^p)^2 exactly
        out = {key: v * v for key, v in out.items()}
    return out


@dataclass
class MCResult:
    """Sample means and standard errors of ``||.||_p^p`` per quantity."""

    S: int
    p: dict
    mean: dict
    stderr: dict

    def norm(self, key: str) -> float:
        """``mean^{1/p}``: the Monte-Carlo estimate of the ``L^p(dx dt)`` norm."""
        return self.mean[key] ** (1.0 / self.p[key])


def mc_norm(spec: FamilySpec, p: float, S: int, seed: int = 0, p_inputs=None,
            tensor: bool = False) -> MCResult:
    """Average ``||T||_p^p`` and input ``||f_i||_{p_i}^{p_i}`` over ``S`` draws.

    Sample ``s`` uses ``RademacherDraw.for_task(seed, N, s)``; results do not
    depend on evaluation order.
    """
    if S < 1:
        raise ValueError(f"S must be positive, got {S}")
    p_inputs = list(p_inputs) if p_inputs is not None else [2.0] * spec.m
    if len(p_inputs) != spec.m:
        raise ValueError(f"need {spec.m} input exponents, got {len(p_inputs)}")
    rows = []
    for s in range(S):
        draw = RademacherDraw.for_task(seed, spec.N, s)
        rows.append(_quantities(spec.build(draw), p, p_inputs, tensor))
    keys = list(rows[0])
    mean, err = {}, {}
    for key in keys:
        v = np.sort(np.array([r[key] for r in rows]))
        mean[key] = float(np.mean(v))
        err[key] = float(np.std(v, ddof=1) / math.sqrt(S)) if S > 1 else float("nan")
    pw = {"T": p, **{f"f{i + 1}": q for i, q in enumerate(p_inputs)}}
    if tensor:
        pw = {key: 2 * v for key, v in pw.items()}
    return MCResult(S, pw, mean, err)


def sign_dependencies(spec: FamilySpec, quantity: str) -> list:
    """``(family, index)`` signs a quantity depends on.

    Slot signs appear squared in ``T`` (once in the operand, once in the
    symbol), so ``T`` only sees the window signs.  Signed operand ``i``
    depends on its own family, unsigned ones on nothing.
    """
    inst = spec.build(UNSIGNED_DRAW)
    if quantity == "T":
        if spec.family == "single_bump":
            return []
        lo, hi = c_window(spec.N)
        grids = np.meshgrid(*inst.centers, indexing="ij")
        l = np.unique(sum(grids))
        return [(0, int(v)) for v in l if lo <= v <= hi]
    i = int(quantity[1:]) - 1
    if not inst.signed[i]:
        return []
    return [(i + 1, int(j)) for j in inst.centers[i]]


UNSIGNED_DRAW = RademacherDraw(0)


def exact_mean(spec: FamilySpec, quantity: str, p: float, p_inputs=None, seed: int = 0) -> float:
    """Exact expectation of ``||quantity||^p`` by enumerating every relevant sign pattern."""
    deps = sign_dependencies(spec, quantity)
    if len(deps) > MAX_ENUMERATION:
        raise ValueError(f"{len(deps)} signs is too many to enumerate (max {MAX_ENUMERATION})")
    p_inputs = list(p_inputs) if p_inputs is not None else [2.0] * spec.m
    base = RademacherDraw(seed)
    vals = []
    for pattern in itertools.product((1.0, -1.0), repeat=len(deps)):
        draw = base.with_overrides(dict(zip(deps, pattern)))
        vals.append(_quantities(spec.build(draw), p, p_inputs, False)[quantity])
    return float(np.mean(np.sort(vals)))


# -- symbol norms on dedicated grids -----------------------------------------

def _points_per_unit(profile: BumpSpec, N: int, q: int = None) -> int:
    if q is None:
        q = max(16, int(math.ceil(4.0 / (profile.outer - profile.inner))))
    return q * N


def _sample_box(box, density: float, fn):
    """Sample ``fn(xi, eta)`` on a square torus twice as wide as ``box``.

    The box sits in the central half, as the spectral Bessel potential
    requires; translation does not change any ``L^r_s`` norm.
    """
    (a1, b1), (a2, b2) = box
    w = max(b1 - a1, b2 - a2)
    Ls = 2.1 * w
    Ms = 2 * int(math.ceil(Ls * density / 2))
    if Ms > MAX_NORM_POINTS:
        raise SizeGuardError(
            f"sampling the symbol needs {Ms}^2 points (max {MAX_NORM_POINTS}^2); "
            f"use the wide bump mode or a smaller N")
    grid = TorusGrid(2, Ls, Ms)
    z = grid.coords()
    vals = fn(z + (a1 + b1) / 2, z + (a2 + b2) / 2)
    return grid, vals


def bump_symbol_sobolev(sigma: BumpSymbol, r: float, s: float, q: int = None) -> float:
    """``||sigma||_{L^r_s}`` sampled directly (no operand grid involved)."""
    density = _points_per_unit(sigma.profile, sigma.N, q)
    grid, vals = _sample_box(sigma.box(), density, sigma.evaluate)
    return sobolev_norm_values(vals, grid, r, s)


def _hormander_jrange(sigma: BumpSymbol) -> list:
    rmin, rmax = sigma.radii()
    if rmax == 0:
        return []
    if rmin <= 0:
        raise ValueError("a bump touches the origin; the dyadic range is unbounded")
    lo = int(math.floor(math.log2(rmin) - 1)) + 1
    hi = int(math.ceil(math.log2(rmax) + 1)) - 1
    return list(range(lo, hi + 1))


def bump_symbol_hormander(sigma: BumpSymbol, r: float, s: float, q: int = None) -> NormReport:
    """``sup_j ||sigma(2^j .) psi_hat||_{L^r_s}`` over every contributing ``j``."""
    per_j = {}
    base = _points_per_unit(sigma.profile, sigma.N, q)
    for j in _hormander_jrange(sigma):
        c = 2.0 ** -j
        (a1, b1), (a2, b2) = sigma.box()
        box = ((max(a1 * c, -2.0), min(b1 * c, 2.0)), (max(a2 * c, -2.0), min(b2 * c, 2.0)))
        if box[0][0] >= box[0][1] or box[1][0] >= box[1][1]:
            per_j[j] = 0.0
            continue

        def piece(xi, eta, j=j):
            return sigma.evaluate(2.0 ** j * xi, 2.0 ** j * eta) * lp_profile(
                np.hypot(xi[:, None], eta[None, :]))

        grid, vals = _sample_box(box, base * 2.0 ** j, piece)
        per_j[j] = sobolev_norm_values(vals, grid, r, s)
    hor = max(per_j.values()) if per_j else 0.0
    return NormReport(sobolev=float("nan"), hormander=hor, per_j=per_j, r=r, s=s)


# -- sweeps ------------------------------------------------------------------

def fit_exponent(N_list, values) -> tuple:
    """Least-squares slope of ``log values`` on ``log N`` and the RMS residual (natural log)."""
    N = np.asarray(N_list, dtype=float)
    v = np.asarray(values, dtype=float)
    if N.size < 3:
        raise FitError(f"need at least 3 values of N, got {N.size}")
    if np.any(v <= 0):
        raise FitError("exponent fits need positive values")
    X = np.log(N)
    Y = np.log(v)
    A = np.vstack([X, np.ones_like(X)]).T
    coef, *_ = np.linalg.lstsq(A, Y, rcond=None)
    res = Y - A @ coef
    return float(coef[0]), float(np.sqrt(np.mean(res ** 2)))


def _targets(family: str, m: int, k: int, p: float, p_inputs, r: float, s: float) -> tuple:
    """Expected exponents per quantity and the exponent of the symbol-norm bound."""
    if family == "single_bump":
        t = {"T": 1.0 / p - m, **{f"f{i + 1}": 1.0 / q - 1.0 for i, q in enumerate(p_inputs)}}
        return t, s - m / r
    t = {"T": 1.0 / p - 0.5}
    for i, q in enumerate(p_inputs):
        t[f"f{i + 1}"] = (1.0 / q - 0.5) if i < k else 0.0
    return t, s


@dataclass
class ScalingReport:
    """Per-``N`` statistics and fitted exponents of one family.

    ``gap = exponent(T) - symbol_bound - sum exponent(f_i)`` where
    ``symbol_bound`` is the growth exponent of the symbol-norm upper bound
    (``s`` for the window symbols, ``s - m/r`` for the single bump).
    ``gap_measured`` uses the fitted Sobolev exponent instead.
    """

    family: str
    params: dict
    N_list: list
    S: int
    p: dict
    mean: dict
    stderr: dict
    sobolev: list
    hormander: list
    exponents: dict
    residuals: dict
    exponent_target: dict
    symbol_bound: float
    gap: float
    gap_target: float
    gap_measured: float = None

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def csv_rows(self) -> list:
        rows = []
        for key in sorted(self.mean):
            for i, N in enumerate(self.N_list):
                rows.append((f"{self.family}/{key}", N, self.p[key], self.mean[key][i],
                             self.stderr[key][i], self.sobolev[i], self.hormander[i]))
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        w.writerows(self.csv_rows())
        return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return None if not math.isfinite(v) else v
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def scaling_sweep(family: str, N_list, S: int, p: float = 1.0, p_inputs=None, m: int = 2,
                  k: int = None, r: float = 2.0, s: float = 0.5, seed: int = 0,
                  mode: str = "wide", resolve: bool = True, sobolev: bool = True,
                  hormander: bool = False, tensor: bool = False, cells: int = None) -> ScalingReport:
    """Monte-Carlo norms over ``N_list`` with fitted log-log exponents."""
    N_list = [int(N) for N in N_list]
    if len(N_list) < 3:
        raise FitError(f"need at least 3 values of N, got {len(N_list)}")
    p_inputs = list(p_inputs) if p_inputs is not None else [2.0] * m
    if family in ("bilinear_sigmaN",):
        m = 2
    kk = m if family in ("bilinear_sigmaN", "mlinear_sigmaN") else (k if k is not None else m)
    if family == "single_bump":
        kk = 0
    mean, err, sob, hor = {}, {}, [], []
    pw = None
    for N in N_list:
        spec = FamilySpec(family, N, m, kk, mode, resolve, cells)
        res = mc_norm(spec, p, S, seed, p_inputs, tensor)
        pw = res.p
        for key in res.mean:
            mean.setdefault(key, []).append(res.mean[key])
            err.setdefault(key, []).append(res.stderr[key])
        sym = spec.build(RademacherDraw.for_task(seed, N, 0)).symbol if (sobolev or hormander) else None
        can = sym is not None and sym.m == 2
        sob.append(bump_symbol_sobolev(sym, r, s) if sobolev and can else float("nan"))
        hor.append(bump_symbol_hormander(sym, r, s).hormander if hormander and can else float("nan"))
    exps, resid = {}, {}
    for key in mean:
        norms = np.array(mean[key]) ** (1.0 / pw[key])
        exps[key], resid[key] = fit_exponent(N_list, norms)
    if sobolev and np.all(np.isfinite(sob)):
        exps["sobolev"], resid["sobolev"] = fit_exponent(N_list, sob)
    if hormander and np.all(np.isfinite(hor)):
        exps["hormander"], resid["hormander"] = fit_exponent(N_list, hor)
    targets, bound = _targets(family, m, kk, p, p_inputs, r, s)
    scale = 2 if tensor else 1
    targets = {key: scale * v for key, v in targets.items()}
    bound *= scale
    inputs = sum(exps[f"f{i + 1}"] for i in range(m))
    gap = exps["T"] - bound - inputs
    gap_target = targets["T"] - bound - sum(targets[f"f{i + 1}"] for i in range(m))
    gap_meas = exps["T"] - exps["sobolev"] - inputs if "sobolev" in exps else None
    params = dict(m=m, k=kk, p=p, p_inputs=p_inputs, r=r, s=s, seed=seed, mode=mode,
                  resolve=resolve, tensor=tensor, cells=cells)
    return ScalingReport(family, params, N_list, S, pw, mean, err, sob, hor, exps, resid,
                         targets, bound, gap, gap_target, gap_meas)
