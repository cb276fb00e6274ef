"""Self-check suites run by ``bimult verify``.

Each suite returns a list of ``Check`` records (measured value, tolerance,
verdict); none of them raise on failure.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .bumps import lp_partition
from .grid import FREQUENCY, SPACE, SampledFunction, TorusGrid, dft_forward, dft_inverse, lp_norm
from .multiplier import (Symbol, apply_bilinear, apply_bilinear_bruteforce, hl_maximal,
                         hl_maximal_exhaustive, symbol_grid)
from .wavelets import (WaveletIndex, build_system, daubechies_filters, highpass, tensor_wavelet)

__all__ = ["Check", "SUITES", "run_suite"]


@dataclass
class Check:
    name: str
    value: float
    tol: float
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


def _le(name: str, value: float, tol: float) -> Check:
    return Check(name, float(value), float(tol), bool(value <= tol))


def _rand(rng, shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def grid_suite(seed: int = 0) -> list:
    rng = np.random.default_rng(seed)
    g = TorusGrid(1, 8.0, 64)
    f = SampledFunction(g, _rand(rng, 64), SPACE)
    back = dft_inverse(dft_forward(f))
    rt = np.linalg.norm(back.values - f.values) / np.linalg.norm(f.values)
    F = dft_forward(f).values
    pars = abs(lp_norm(f, 2) ** 2 - np.sum(np.abs(F) ** 2) / g.length) / lp_norm(f, 2) ** 2
    return [_le("round trip", rt, 1e-12), _le("Parseval", pars, 1e-12)]


def bumps_suite(seed: int = 0) -> list:
    g = TorusGrid(2, 16.0, 256)
    parts = lp_partition(g, -2, 2)
    k = g.freqs()
    rad = np.hypot(k[:, None], k[None, :])
    total = sum(p.values for p in parts).real
    inside = (rad >= 2.0 ** -2) & (rad <= 2.0 ** 2)
    return [_le("partition sums to one", np.abs(total[inside] - 1).max(), 1e-12),
            _le("partition negativity", max(0.0, -min(p.values.real.min() for p in parts)), 0.0)]


def multiplier_suite(seed: int = 0) -> list:
    rng = np.random.default_rng(seed)
    g = TorusGrid(1, 4.0, 32)
    sg = symbol_grid(g)
    worst = 0.0
    for _ in range(5):
        sigma = Symbol(sg, _rand(rng, sg.shape))
        f = SampledFunction(g, _rand(rng, 32), SPACE)
        h = SampledFunction(g, _rand(rng, 32), SPACE)
        a = apply_bilinear(sigma, f, h, strict=False).values
        b = apply_bilinear_bruteforce(sigma, f, h).values
        worst = max(worst, np.linalg.norm(a - b) / np.linalg.norm(b))
    u = SampledFunction(TorusGrid(1, 1.0, 64), rng.normal(size=64), SPACE)
    dy = hl_maximal(u).values.real
    ex = hl_maximal_exhaustive(u).values.real
    return [_le("fast vs brute force", worst, 1e-10),
            _le("dyadic maximal <= exhaustive", max(0.0, (dy - ex).max()), 1e-12),
            _le("exhaustive <= 2 dyadic", max(0.0, (ex - 2 * dy).max()), 1e-12)]


def wavelets_suite(seed: int = 0, order: int = 6, depth: int = 10) -> list:
    h = daubechies_filters(order)
    n = h.size
    ortho = max(abs(np.dot(h[: n - 2 * k], h[2 * k:]) - (k == 0)) for k in range(n // 2))
    gfil = highpass(h)
    cross = max(abs(np.dot(np.roll(h, 2 * k), gfil)) for k in range(n // 2))
    ws = build_system(order, depth)
    nF = abs(ws.factor_norm("F", 2) - 1)
    nM = abs(ws.factor_norm("M", 2) - 1)
    x = np.arange(ws.psi.size) * ws.dx
    mom = max(abs(np.sum(x ** k * ws.psi) * ws.dx) for k in range(order))
    g2 = TorusGrid(2, 8.0, 2048)
    idx = [WaveletIndex(lam, G, mu) for lam, G, mu in
           ((1, ("F", "M"), (-8, -8)), (1, ("M", "F"), (-8, -7)), (1, ("M", "M"), (-6, -5)),
            (1, ("M", "M"), (-6, -4)), (2, ("M", "M"), (-12, -10)))]
    W = np.array([tensor_wavelet(ws, i, g2).values.ravel().real for i in idx])
    gram = np.abs(W @ W.T * g2.spacing ** 2 - np.eye(len(idx))).max()
    return [_le("filter orthogonality", ortho, 1e-12),
            _le("quadrature mirror", cross, 1e-12),
            _le("||psi_F||_2 - 1", nF, 1e-6),
            _le("||psi_M||_2 - 1", nM, 1e-6),
            _le("vanishing moments", mom, 1e-5),
            _le("tensor Gram - identity", gram, 1e-6)]


SUITES = {
    "grid": grid_suite,
    "bumps": bumps_suite,
    "multiplier": multiplier_suite,
    "wavelets": wavelets_suite,
}


def run_suite(name: str, seed: int = 0) -> list:
    if name == "all":
        return [c for key in SUITES for c in SUITES[key](seed)]
    return SUITES[name](seed)
