import math

import numpy as np
import pytest

from bimult.bumps import MODES, ResolutionError
from bimult.counterexamples import (CSV_COLUMNS, FitError, FamilySpec, RademacherDraw,
                                    build_fN, build_gN, build_instance, build_mixed,
                                    build_sigmaN, build_single_bump, bump_rows,
                                    bump_symbol_sobolev, c_window, exact_mean, fit_exponent,
                                    mc_norm, operand_grid, scaling_sweep, sign_dependencies,
                                    single_bump_closed_form)
from bimult.grid import FREQUENCY, SampledFunction, TorusGrid, dft_inverse, lp_norm
from bimult.multiplier import SizeGuardError, SupportMarginError


def _predicted_output(inst, draw):
    """psi^m sum_l a_l(t_0) n_l e^{2 pi i x l / N} with psi the centered bump."""
    md = MODES[inst.mode]
    g = inst.grid
    psi = dft_inverse(SampledFunction(g, bump_rows(g, inst.N, [0], md.schwartz)[0],
                                      FREQUENCY)).values
    J = inst.centers[0]
    sums = sum(np.meshgrid(*([J] * inst.m), indexing="ij")).ravel()
    lo, hi = c_window(inst.N)
    x = g.coords()
    acc = np.zeros(g.points, dtype=complex)
    for l in range(lo, hi + 1):
        n = np.count_nonzero(sums == l)
        acc += draw.signs(0, [l])[0] * n * np.exp(2j * np.pi * x * l / inst.N)
    return psi ** inst.m * acc


def test_c_window():
    assert c_window(4) == (4, 4)
    assert c_window(8) == (8, 8)
    assert c_window(16) == (15, 17)
    assert c_window(32) == (29, 35)
    assert c_window(64) == (58, 70)


def test_draws_are_reproducible_and_independent():
    a = RademacherDraw((7, 16, 0))
    b = RademacherDraw.for_task(7, 16, 0)
    idx = np.arange(-20, 21)
    assert np.array_equal(a.signs(1, idx), b.signs(1, idx))
    assert set(np.unique(a.signs(0, idx))) <= {-1.0, 1.0}
    assert not np.array_equal(a.signs(1, idx), a.signs(2, idx))
    assert not np.array_equal(a.signs(1, idx), RademacherDraw.for_task(7, 16, 1).signs(1, idx))
    c = a.with_overrides({(1, 3): -a.signs(1, [3])[0]})
    assert c.signs(1, [3])[0] == -a.signs(1, [3])[0]
    assert np.array_equal(c.signs(2, idx), a.signs(2, idx))
    with pytest.raises(ValueError):
        a.signs(0, [10 ** 6])


def test_operand_grids():
    g = operand_grid(8, "wide")
    assert (g.length, g.points) == (128.0, 1024)
    assert operand_grid(8, "narrow").length == 2048.0
    assert operand_grid(8, "wide", cells=32).points == 2048
    lat = operand_grid(8, resolve=False)
    assert (lat.length, lat.points) == (8.0, 32)


def test_guards():
    with pytest.raises(ResolutionError):
        build_fN(8, RademacherDraw(0), TorusGrid(1, 8.0, 256), "wide")
    with pytest.raises(SupportMarginError):
        build_sigmaN(8, 2, RademacherDraw(0), TorusGrid(1, 128.0, 256), "wide")
    with pytest.raises(ValueError):
        build_sigmaN(8, 2, RademacherDraw(0), None, "wide", signed_slots=3)
    with pytest.raises(ValueError):
        build_single_bump(8, a=0.5)
    with pytest.raises(ValueError):
        build_instance("nope", 8, RademacherDraw(0))


@pytest.mark.parametrize("family,N,m,k,resolve", [
    ("bilinear_sigmaN", 8, 2, None, True),
    ("bilinear_sigmaN", 16, 2, None, True),
    ("mixed_k", 8, 2, 1, True),
    ("mixed_k", 16, 2, 0, True),
    ("mlinear_sigmaN", 4, 3, None, False),
])
def test_invariants_and_output_structure(family, N, m, k, resolve):
    for sample in range(3):
        draw = RademacherDraw.for_task(11, N, sample)
        inst = build_instance(family, N, draw, m, k, resolve=resolve,
                              grid=operand_grid(N, resolve=resolve))
        inst.check_invariants(draw)
        T = inst.output().values
        pred = _predicted_output(inst, draw)
        assert np.linalg.norm(T - pred) <= 1e-10 * np.linalg.norm(pred)


def test_narrow_and_wide_agree_on_coefficients():
    N = 16
    draw = RademacherDraw.for_task(7, N, 0)
    for mode in ("wide", "narrow"):
        inst = build_instance("bilinear_sigmaN", N, draw, mode=mode)
        pred = _predicted_output(inst, draw)
        T = inst.output().values
        assert np.linalg.norm(T - pred) <= 1e-10 * np.linalg.norm(pred)


def test_T_ignores_slot_signs():
    N = 16
    draw = RademacherDraw.for_task(3, N, 0)
    flips = {(i, j): -draw.signs(i, [j])[0] for i in (1, 2) for j in range(1, N + 1, 3)}
    a = build_instance("bilinear_sigmaN", N, draw).output().values
    b = build_instance("bilinear_sigmaN", N, draw.with_overrides(flips)).output().values
    assert np.allclose(a, b, atol=1e-14)


def test_T_independent_of_k():
    N = 8
    draw = RademacherDraw.for_task(5, N, 2)
    outs = [build_mixed(N, 2, k, draw).output().values for k in (0, 1, 2)]
    for o in outs[1:]:
        assert np.abs(o - outs[0]).max() <= 1e-8 * np.abs(outs[0]).max()


def test_mixed_full_k_is_symmetric_sigmaN():
    N = 8
    draw = RademacherDraw.for_task(5, N, 0)
    a = build_instance("mixed_k", N, draw, k=None)
    b = build_mixed(N, 2, 2, draw)
    assert np.array_equal(a.symbol.C, b.symbol.C)
    assert np.allclose(a.output().values, b.output().values)


def test_sign_dependencies():
    spec = FamilySpec("bilinear_sigmaN", 16)
    assert sign_dependencies(spec, "T") == [(0, 15), (0, 16), (0, 17)]
    assert sign_dependencies(spec, "f1") == [(1, j) for j in range(1, 17)]
    assert sign_dependencies(FamilySpec("mixed_k", 8, k=1), "f2") == []
    assert sign_dependencies(FamilySpec("single_bump", 8), "T") == []


@pytest.mark.parametrize("N", [4, 16])
def test_exact_mean_vs_monte_carlo(N):
    spec = FamilySpec("bilinear_sigmaN", N)
    ex = exact_mean(spec, "T", 1.0)
    mc = mc_norm(spec, 1.0, 64, seed=7)
    err = mc.stderr["T"]
    assert abs(mc.mean["T"] - ex) <= 3 * err + 1e-12 * ex
    with pytest.raises(ValueError):
        exact_mean(FamilySpec("bilinear_sigmaN", 32), "f1", 1.0)


def test_single_sample_is_a_direct_evaluation():
    spec = FamilySpec("bilinear_sigmaN", 8)
    res = mc_norm(spec, 1.0, 1, seed=2, p_inputs=[1.5, 2.0])
    inst = spec.build(RademacherDraw.for_task(2, 8, 0))
    assert res.mean["T"] == pytest.approx(lp_norm(inst.output(), 1), rel=1e-14)
    assert res.mean["f1"] == pytest.approx(lp_norm(dft_inverse(inst.functions[0]), 1.5) ** 1.5,
                                           rel=1e-14)
    assert math.isnan(res.stderr["T"])
    assert res.norm("f1") == pytest.approx(res.mean["f1"] ** (1 / 1.5))
    with pytest.raises(ValueError):
        mc_norm(spec, 1.0, 0)
    with pytest.raises(ValueError):
        mc_norm(spec, 1.0, 2, p_inputs=[2.0])


def test_single_bump_deterministic_and_closed_form():
    spec = FamilySpec("single_bump", 8)
    assert spec.deterministic
    res = mc_norm(spec, 1.0, 3)
    assert all(v == 0 for v in res.stderr.values())
    inst = build_single_bump(8)
    T = inst.output().values
    ref = single_bump_closed_form(inst)
    assert np.abs(T - ref).max() <= 1e-12 * np.abs(ref).max()


def test_input_exponents():
    Ns = [8, 16, 32]
    draw = lambda N: RademacherDraw.for_task(1, N, 0)
    g2 = [lp_norm(dft_inverse(build_gN(N, operand_grid(N))), 2) for N in Ns]
    f2 = [lp_norm(dft_inverse(build_fN(N, draw(N), operand_grid(N))), 2) for N in Ns]
    assert abs(fit_exponent(Ns, g2)[0]) <= 0.02
    assert abs(fit_exponent(Ns, f2)[0]) <= 1e-6  # ||f_N||_2 is sign independent


def test_fit_exponent():
    Ns = [4, 8, 16, 32]
    slope, res = fit_exponent(Ns, [3.0 * N ** -0.7 for N in Ns])
    assert slope == pytest.approx(-0.7, abs=1e-12) and res <= 1e-12
    with pytest.raises(FitError):
        fit_exponent([4, 8], [1.0, 2.0])
    with pytest.raises(FitError):
        fit_exponent(Ns, [1.0, 0.0, 2.0, 3.0])


def test_tensor_square_norms_factor():
    rng = np.random.default_rng(0)
    g1 = TorusGrid(1, 4.0, 64)
    f = rng.normal(size=64) + 1j * rng.normal(size=64)
    for p in (1.0, 1.5, 2.0, 3.0):
        one = lp_norm(SampledFunction(g1, f), p) ** p
        two = lp_norm(SampledFunction(TorusGrid(2, 4.0, 64), np.outer(f, f)), p) ** p
        assert two == pytest.approx(one ** 2, rel=1e-10)
    spec = FamilySpec("bilinear_sigmaN", 8)
    sq = mc_norm(spec, 1.0, 2, seed=4, tensor=True)
    per = [lp_norm(spec.build(RademacherDraw.for_task(4, 8, i)).output(), 1) for i in range(2)]
    assert sq.mean["T"] == pytest.approx(np.mean(np.square(per)), rel=1e-12)
    assert sq.p["T"] == 2.0


def test_symbol_sobolev_sampling():
    draw = RademacherDraw(0)
    sym = build_sigmaN(8, 2, draw)
    ref = bump_symbol_sobolev(sym, 2, 0.5, q=64)
    # the default density trades about 1% bias (the same at every N) for size
    assert bump_symbol_sobolev(sym, 2, 0.5) == pytest.approx(ref, rel=0.01)
    assert bump_symbol_sobolev(sym, 2, 0.5, q=32) == pytest.approx(ref, rel=1e-3)
    assert bump_symbol_sobolev(sym, 2, 0.0) <= bump_symbol_sobolev(sym, 2, 0.5)
    with pytest.raises(SizeGuardError):
        bump_symbol_sobolev(build_sigmaN(64, 2, draw, mode="narrow"), 2, 0.5)


def test_sweep_report_roundtrip():
    rep = scaling_sweep("bilinear_sigmaN", [4, 8, 16], S=2, seed=1, s=0.5)
    assert set(rep.exponents) >= {"T", "f1", "f2", "sobolev"}
    assert rep.gap == pytest.approx(rep.exponents["T"] - 0.5
                                    - rep.exponents["f1"] - rep.exponents["f2"])
    assert rep.gap_target == pytest.approx(0.0)
    text = rep.to_csv().splitlines()
    assert tuple(text[0].split(",")) == CSV_COLUMNS
    assert len(text) == 1 + 3 * 3
    import json
    d = json.loads(rep.to_json())
    assert d["N_list"] == [4, 8, 16]
    again = scaling_sweep("bilinear_sigmaN", [4, 8, 16], S=2, seed=1, s=0.5)
    assert again.to_json() == rep.to_json()
    with pytest.raises(FitError):
        scaling_sweep("bilinear_sigmaN", [4, 8], S=2)
