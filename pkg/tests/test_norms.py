import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bimult.bumps import lp_profile
from bimult.families import bump_family, lacunary_symbol
from bimult.grid import TorusGrid
from bimult.multiplier import Symbol
from bimult.norms import (CoverageError, MarginError, auto_jrange, hormander_norm,
                          sequence_norm, sobolev_norm, sobolev_norm_values, tl_norm)
from bimult.wavelets import CoeffBlock, WaveletCoeffs, analyze


def _gauss(grid):
    x = grid.coords()
    return np.exp(-np.pi * (x[:, None] ** 2 + x[None, :] ** 2))


def test_sobolev_gaussian_closed_form():
    g = TorusGrid(2, 16.0, 256)
    u = _gauss(g)
    assert sobolev_norm_values(u, g, 2, 0) == pytest.approx(np.sqrt(0.5), rel=1e-10)
    assert sobolev_norm_values(u, g, 2, 1) == pytest.approx(np.sqrt(0.5 + np.pi), rel=1e-10)
    # s = 0 is the plain L^r norm: ||e^{-pi|x|^2}||_4 = (1/4)^{1/4}
    assert sobolev_norm_values(u, g, 4, 0) == pytest.approx(0.25 ** 0.25, rel=1e-10)


def test_sobolev_argument_checks():
    g = TorusGrid(2, 16.0, 64)
    with pytest.raises(ValueError):
        sobolev_norm_values(_gauss(g), g, 1, 0.5)
    with pytest.raises(ValueError):
        sobolev_norm_values(_gauss(g), g, 2, -0.1)


def test_margin_guard():
    g = TorusGrid(2, 4.0, 128)
    s = bump_family(g)[0]  # support [-2, 2] fills the whole window
    with pytest.raises(MarginError):
        sobolev_norm(s, 2, 0.5)
    with pytest.raises(MarginError):
        tl_norm(s, 2, 2, 0.5)


@settings(max_examples=15, deadline=None)
@given(st.floats(1.2, 6), st.floats(0, 0.9), st.floats(0, 0.9))
def test_sobolev_monotone_in_s(r, s1, s2):
    g = TorusGrid(2, 8.0, 128)
    sym = bump_family(g)[2]
    lo, hi = sorted((s1, s2))
    assert sobolev_norm(sym, r, lo) <= sobolev_norm(sym, r, hi) * (1 + 1e-12)


def test_sobolev_homogeneous_and_triangle():
    g = TorusGrid(2, 8.0, 128)
    a, b = bump_family(g)[:2]
    na, nb = sobolev_norm(a, 3, 0.6), sobolev_norm(b, 3, 0.6)
    assert sobolev_norm(Symbol(g, -2j * a.values, a.support_box), 3, 0.6) == pytest.approx(2 * na)
    assert sobolev_norm(Symbol(g, a.values + b.values), 3, 0.6) <= na + nb


@pytest.mark.parametrize("s", [0.0, 0.25])
def test_tl_comparable_to_sobolev(s):
    g = TorusGrid(2, 8.0, 256)
    for sym in bump_family(g)[:3]:
        ratio = tl_norm(sym, 2, 2, s) / sobolev_norm(sym, 2, s)
        assert 0.5 <= ratio <= 2.0


@pytest.mark.parametrize("s", [0.5, 1.0, 1.5])
def test_tl_sobolev_ratio_scales_like_two_pi(s):
    # the Bessel weight grows like (2 pi |xi|)^s, the dyadic weight like 2^{js}
    g = TorusGrid(2, 8.0, 256)
    for sym in bump_family(g):
        ratio = tl_norm(sym, 2, 2, s) / sobolev_norm(sym, 2, s)
        assert (2 * np.pi) ** -s / 4 <= ratio <= 4.0


def test_sequence_norm_single_coefficient(ws6):
    g = TorusGrid(2, 8.0, 256)
    lam, a, r, s = 2, 0.7 - 0.2j, 3.0, 0.4
    c = WaveletCoeffs(ws6, g)
    c.blocks[(lam, ("M", "M"))] = CoeffBlock(lam, ("M", "M"), np.array([-6]), np.array([-3]),
                                             np.array([[a]]))
    area = (2.0 ** (1 - lam)) ** 2
    expect = 2.0 ** (lam * s) * 2.0 ** lam * abs(a) * area ** (1 / r)
    assert sequence_norm(c, r, 2, s) == pytest.approx(expect, rel=1e-12)


def test_sequence_norm_comparable_to_sobolev(ws6):
    g = TorusGrid(2, 8.0, 512)
    for sym in bump_family(g)[:3]:
        c = analyze(sym, ws6, 5)
        ratio = sequence_norm(c, 2, 2, 0.25) / sobolev_norm(sym, 2, 0.25)
        assert 0.2 <= ratio <= 5.0


def _annulus(xi, eta):
    return lp_profile(np.hypot(xi, eta)) * (1 + 0.5 * np.cos(2 * xi) * np.sin(eta))


def test_hormander_dilation_shifts_j():
    f = Symbol.from_function(TorusGrid(2, 16.0, 256), _annulus)
    g = Symbol.from_function(TorusGrid(2, 32.0, 256), lambda a, b: _annulus(a / 2, b / 2))
    rf = hormander_norm(f, 2, 0.75)
    rg = hormander_norm(g, 2, 0.75)
    assert auto_jrange(g) == [j + 1 for j in auto_jrange(f)]
    for j, v in rf.per_j.items():
        assert rg.per_j[j + 1] == pytest.approx(v, rel=1e-12)
    assert rg.hormander == pytest.approx(rf.hormander, rel=1e-12)


def test_hormander_report_and_coverage():
    f = Symbol.from_function(TorusGrid(2, 16.0, 256), _annulus)
    rep = hormander_norm(f, 2, 0.5)
    assert rep.hormander == max(rep.per_j.values())
    assert set(rep.to_dict()["per_j"]) == {str(j) for j in auto_jrange(f)}
    assert '"hormander"' in rep.to_json()
    with pytest.raises(CoverageError):
        hormander_norm(f, 2, 0.5, jrange=[0])
    wider = hormander_norm(f, 2, 0.5, jrange=auto_jrange(f) + [5])
    assert wider.per_j[5] == 0.0
    assert wider.hormander == rep.hormander


def test_auto_jrange_zero_symbol():
    g = TorusGrid(2, 8.0, 64)
    assert auto_jrange(Symbol(g, np.zeros(g.shape))) == []


def test_lacunary_sobolev_blows_up_past_decay():
    # coefficients 2^{-beta k}: the L^2_s norm grows with kmax once s > beta
    g = TorusGrid(2, 8.0, 1024)
    n = [sobolev_norm(lacunary_symbol(g, 0.3, k), 2, 0.8) for k in (2, 4, 6)]
    assert n[0] < n[1] < n[2]
    m = [sobolev_norm(lacunary_symbol(g, 1.2, k), 2, 0.4) for k in (4, 6)]
    assert m[1] == pytest.approx(m[0], rel=0.05)
