import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bimult.grid import (FREQUENCY, SPACE, GridError, SampledFunction, TorusGrid, dft_forward,
                         dft_inverse)
from bimult.multiplier import (SeparableSymbol, SizeGuardError, SupportMarginError, Symbol,
                               apply_bilinear, apply_bilinear_bruteforce,
                               apply_mlinear_bruteforce, apply_separable, hl_maximal,
                               hl_maximal_exhaustive, symbol_grid)

from conftest import crand


def _pair(rng, grid):
    return (SampledFunction(grid, crand(rng, grid.points)),
            SampledFunction(grid, crand(rng, grid.points)))


def _rel(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)


def test_constant_one_gives_pointwise_product(rng):
    g = TorusGrid(1, 4.0, 64)
    f, h = _pair(rng, g)
    sg = symbol_grid(g)
    T = apply_bilinear(Symbol(sg, np.ones(sg.shape)), f, h, strict=False)
    assert _rel(T.values, f.values * h.values) <= 1e-10


def test_tensor_symbol_factorizes(rng):
    g = TorusGrid(1, 4.0, 32)
    f, h = _pair(rng, g)
    sg = symbol_grid(g)
    x = sg.coords()
    s1, s2 = np.exp(-x ** 2), np.cos(x)
    T = apply_bilinear(Symbol(sg, np.outer(s1, s2)), f, h, strict=False)
    a = dft_inverse(SampledFunction(g, s1 * dft_forward(f).values, FREQUENCY)).values
    b = dft_inverse(SampledFunction(g, s2 * dft_forward(h).values, FREQUENCY)).values
    assert _rel(T.values, a * b) <= 1e-10


def test_fast_matches_bruteforce_random(rng):
    g = TorusGrid(1, 3.0, 32)
    sg = symbol_grid(g)
    for _ in range(5):
        sigma = Symbol(sg, crand(rng, 32, 32))
        f, h = _pair(rng, g)
        assert _rel(apply_bilinear(sigma, f, h, strict=False).values,
                    apply_bilinear_bruteforce(sigma, f, h).values) <= 1e-10


def test_bruteforce_trivial_cases(rng):
    g = TorusGrid(1, 2.0, 16)
    sg = symbol_grid(g)
    f, h = _pair(rng, g)
    zero = apply_bilinear_bruteforce(Symbol(sg, np.zeros(sg.shape)), f, h)
    assert np.all(zero.values == 0)
    k0 = 3
    x = g.coords()
    e = SampledFunction(g, np.exp(2j * np.pi * k0 * x / g.length))
    T = apply_bilinear_bruteforce(Symbol(sg, np.ones(sg.shape)), e, e)
    assert np.allclose(T.values, np.exp(4j * np.pi * k0 * x / g.length), atol=1e-12)


def test_bruteforce_size_guards(rng):
    g = TorusGrid(1, 2.0, 128)
    sg = symbol_grid(g)
    f, h = _pair(rng, g)
    with pytest.raises(SizeGuardError):
        apply_bilinear_bruteforce(Symbol(sg, np.ones(sg.shape)), f, h)
    g3 = TorusGrid(1, 2.0, 64)
    fs = [SampledFunction(g3, np.ones(64))] * 3
    with pytest.raises(SizeGuardError):
        apply_mlinear_bruteforce(np.ones((64,) * 3), fs)
    with pytest.raises(SizeGuardError):
        apply_mlinear_bruteforce(np.ones((8,) * 4), [SampledFunction(TorusGrid(1, 1.0, 8), np.ones(8))] * 4)


def test_grid_mismatch_is_rejected(rng):
    g = TorusGrid(1, 2.0, 16)
    f, h = _pair(rng, g)
    wrong = Symbol(TorusGrid(2, 4.0, 16), np.ones((16, 16)))
    with pytest.raises(GridError):
        apply_bilinear(wrong, f, h, strict=False)
    other = SampledFunction(TorusGrid(1, 3.0, 16), np.ones(16))
    with pytest.raises(GridError):
        apply_bilinear(Symbol(symbol_grid(g), np.ones((16, 16))), f, other, strict=False)


def test_mlinear_m2_matches_bilinear_bruteforce(rng):
    g = TorusGrid(1, 2.0, 16)
    S = crand(rng, 16, 16)
    f, h = _pair(rng, g)
    a = apply_mlinear_bruteforce(S, [f, h]).values
    b = apply_bilinear_bruteforce(Symbol(symbol_grid(g), S), f, h).values
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12)


def test_mlinear_zero_inputs():
    g = TorusGrid(1, 2.0, 8)
    z = SampledFunction(g, np.zeros(8))
    assert np.all(apply_mlinear_bruteforce(np.ones((8,) * 3), [z, z, z]).values == 0)


def test_trilinear_tensor_symbol_is_triple_product(rng):
    g = TorusGrid(1, 2.0, 8)
    fs = [SampledFunction(g, crand(rng, 8)) for _ in range(3)]
    T = apply_mlinear_bruteforce(np.ones((8,) * 3), fs).values
    assert np.allclose(T, fs[0].values * fs[1].values * fs[2].values, atol=1e-12)


def test_symbol_support_box_is_checked():
    sg = TorusGrid(2, 4.0, 16)
    x = sg.coords()
    v = np.zeros((16, 16))
    v[14, 14] = 1.0
    with pytest.raises(ValueError):
        Symbol(sg, v, ((-1, 1), (-1, 1)))
    s = Symbol(sg, v)
    assert s.support_box == ((x[14], x[14]),) * 2


def test_support_margin_guard(rng):
    g = TorusGrid(1, 4.0, 32)
    sg = symbol_grid(g)  # Nyquist frequency 4
    f, h = _pair(rng, g)
    x = sg.coords()
    near = (np.abs(x) <= 1.5)
    ok = Symbol(sg, np.outer(near, near).astype(float), ((-1.5, 1.5), (-1.5, 1.5)))
    apply_bilinear(ok, f, h)
    wide = (np.abs(x) <= 2.5)
    bad = Symbol(sg, np.outer(wide, wide).astype(float), ((-2.5, 2.5), (-2.5, 2.5)))
    with pytest.raises(SupportMarginError):
        apply_bilinear(bad, f, h)


def test_output_spectrum_follows_sum_support(rng):
    g = TorusGrid(1, 8.0, 128)
    sg = symbol_grid(g)  # Nyquist 8
    x = sg.coords()
    band = (x >= 0.5) & (x <= 1.0)
    sigma = Symbol(sg, np.outer(band, band).astype(float))
    f, h = _pair(rng, g)
    G = dft_forward(apply_bilinear(sigma, f, h)).values
    k = g.freqs()
    outside = (k < 1.0 - 1e-9) | (k > 2.0 + 1e-9)
    assert np.abs(G[outside]).max() <= 1e-10 * np.abs(G).max()


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31), st.floats(-3, 3), st.floats(-3, 3))
def test_bilinearity(seed, ar, ai):
    rng = np.random.default_rng(seed)
    g = TorusGrid(1, 2.0, 16)
    sigma = Symbol(symbol_grid(g), crand(rng, 16, 16))
    f1, f2 = _pair(rng, g)
    h, _ = _pair(rng, g)
    a = ar + 1j * ai
    T = lambda u, v: apply_bilinear(sigma, u, v, strict=False).values
    lhs = T(f1.with_values(a * f1.values + f2.values), h)
    assert np.allclose(lhs, a * T(f1, h) + T(f2, h), rtol=1e-12, atol=1e-10)
    lhs = T(h, f1.with_values(a * f1.values + f2.values))
    assert np.allclose(lhs, a * T(h, f1) + T(h, f2), rtol=1e-12, atol=1e-10)


def test_separable_matches_dense(rng):
    g = TorusGrid(1, 4.0, 32)
    sg = symbol_grid(g)
    U = rng.normal(size=(3, 32))
    V = rng.normal(size=(4, 32))
    C = crand(rng, 3, 4)
    f, h = _pair(rng, g)
    sep = SeparableSymbol(sg, U, C, V)
    dense = sep.dense()
    assert _rel(sep.apply(f, h).values, apply_bilinear(dense, f, h, strict=False).values) <= 1e-10
    assert _rel(apply_separable(U, C, V, f, h).values, sep.apply(f, h).values) == 0


def test_maximal_function_trivial(rng):
    g = TorusGrid(1, 1.0, 64)
    c = 2.5 - 1j
    M = hl_maximal(SampledFunction(g, np.full(64, c))).values.real
    assert np.allclose(M, abs(c))
    u = SampledFunction(g, crand(rng, 64))
    assert np.all(hl_maximal(u).values.real >= np.abs(u.values) - 1e-12)
    with pytest.raises(GridError):
        hl_maximal(SampledFunction(g, np.ones(64), FREQUENCY))


def test_maximal_spike_against_exhaustive():
    g = TorusGrid(1, 1.0, 64)
    v = np.zeros(64)
    v[20] = 1.0 / g.spacing
    dy = hl_maximal(SampledFunction(g, v)).values.real
    ex = hl_maximal_exhaustive(SampledFunction(g, v)).values.real
    assert dy[20] == pytest.approx(1.0 / g.spacing)
    assert np.all(dy <= ex + 1e-12)
    assert np.all(ex <= 2 * dy + 1e-12)
    # trapezoid windows: a spike on the endpoint carries half weight
    for n in (0, 10, 19, 40):
        d = min(abs(n - 20), 64 - abs(n - 20))
        best = max((0.5 if w == d else 1.0) * v[20] / (2 * w) for w in range(max(d, 1), 32))
        assert ex[n] == pytest.approx(best, rel=1e-12)


def test_maximal_dominates_and_is_bounded(rng):
    g = TorusGrid(1, 1.0, 256)
    u = SampledFunction(g, rng.normal(size=256))
    dy = hl_maximal(u).values.real
    ex = hl_maximal_exhaustive(u).values.real
    assert np.all(dy <= ex + 1e-12) and np.all(ex <= 2 * dy + 1e-12)
