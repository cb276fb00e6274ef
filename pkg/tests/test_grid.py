import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bimult.grid import (FREQUENCY, SPACE, ContractError, GridError, SampledFunction,
                         TorusGrid, dft_forward, dft_inverse, lp_norm, tensor_square)

from conftest import crand


def direct_forward(values, grid):
    # independent oracle: explicit Riemann sum of the continuum transform
    x = grid.coords()
    k = grid.freqs()
    E = np.exp(-2j * np.pi * np.outer(k, x))
    return grid.spacing * E @ values


def test_grid_rejects_bad_shapes():
    with pytest.raises(GridError):
        TorusGrid(1, 1.0, 7)
    with pytest.raises(GridError):
        TorusGrid(1, 1.0, 2)
    with pytest.raises(GridError):
        TorusGrid(3, 1.0, 8)
    with pytest.raises(GridError):
        TorusGrid(1, 0.0, 8)


def test_frequency_set_and_dual():
    g = TorusGrid(1, 2.0, 8)
    assert np.allclose(g.freqs(), np.arange(-4, 4) / 2.0)
    assert g.dual().length == 4.0 and g.dual().points == 8


def test_constant_maps_to_dc_bin():
    g = TorusGrid(1, 1.0, 8)
    F = dft_forward(SampledFunction(g, np.ones(8)))
    expect = np.zeros(8)
    expect[4] = 1.0
    assert np.allclose(F.values, expect, atol=1e-14)


@pytest.mark.parametrize("dim", [1, 2])
def test_character_maps_to_single_bin(dim):
    g = TorusGrid(dim, 3.0, 8)
    k0 = 2
    x = g.mesh()
    vals = np.exp(2j * np.pi * sum(xi * k0 / g.length for xi in x)) * np.ones(g.shape)
    F = dft_forward(SampledFunction(g, vals)).values
    expect = np.zeros(g.shape)
    expect[(4 + k0,) * dim] = g.length ** dim
    assert np.allclose(F, expect, atol=1e-12)


def test_inverse_of_dc_delta_is_one():
    g = TorusGrid(1, 3.0, 8)
    F = np.zeros(8)
    F[4] = 3.0
    f = dft_inverse(SampledFunction(g, F, FREQUENCY))
    assert np.allclose(f.values, 1.0)
    assert np.all(dft_inverse(SampledFunction(g, np.zeros(8), FREQUENCY)).values == 0)


def test_forward_matches_direct_sum(rng):
    g = TorusGrid(1, 5.0, 16)
    v = crand(rng, 16)
    assert np.allclose(dft_forward(SampledFunction(g, v)).values, direct_forward(v, g),
                       rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("dim", [1, 2])
def test_round_trips(rng, dim):
    g = TorusGrid(dim, 2.5, 16)
    v = crand(rng, *g.shape)
    f = SampledFunction(g, v)
    back = dft_inverse(dft_forward(f)).values
    assert np.linalg.norm(back - v) / np.linalg.norm(v) <= 1e-12
    F = SampledFunction(g, v, FREQUENCY)
    back = dft_forward(dft_inverse(F)).values
    assert np.linalg.norm(back - v) / np.linalg.norm(v) <= 1e-12


def test_side_tags_are_enforced():
    g = TorusGrid(1, 1.0, 8)
    with pytest.raises(ContractError):
        dft_inverse(SampledFunction(g, np.ones(8), SPACE))
    with pytest.raises(ContractError):
        dft_forward(SampledFunction(g, np.ones(8), FREQUENCY))
    with pytest.raises(ContractError):
        lp_norm(SampledFunction(g, np.ones(8), FREQUENCY), 2)
    with pytest.raises(ContractError):
        SampledFunction(g, np.ones(8), "time")


def test_values_are_immutable():
    f = SampledFunction(TorusGrid(1, 1.0, 8), np.ones(8))
    with pytest.raises(ValueError):
        f.values[0] = 2


def test_lp_norm_trivial_cases():
    g = TorusGrid(1, 3.0, 16)
    c = 2.0 - 1.0j
    f = SampledFunction(g, np.full(16, c))
    assert lp_norm(f, 2) == pytest.approx(abs(c) * np.sqrt(3.0), rel=1e-14)
    assert lp_norm(f, np.inf) == pytest.approx(abs(c))
    spike = np.zeros(16)
    spike[3] = 1.0
    assert lp_norm(SampledFunction(TorusGrid(1, 1.0, 16), spike), 1) == pytest.approx(1 / 16)
    with pytest.raises(ValueError):
        lp_norm(f, 0)
    with pytest.raises(ValueError):
        lp_norm(f, -1)


def test_lp_norm_extreme_exponents_stay_finite():
    g = TorusGrid(1, 1.0, 8)
    f = SampledFunction(g, np.full(8, 1e200))
    assert np.isfinite(lp_norm(f, 4))
    assert lp_norm(f, 4) == pytest.approx(1e200)


complex_vectors = st.lists(
    st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)), min_size=16, max_size=16
).map(lambda v: np.array([a + 1j * b for a, b in v]))


@settings(max_examples=50, deadline=None)
@given(complex_vectors, st.floats(0.5, 10.0))
def test_parseval(v, L):
    g = TorusGrid(1, L, 16)
    f = SampledFunction(g, v)
    F = dft_forward(f).values
    lhs = g.spacing * np.sum(np.abs(v) ** 2)
    rhs = np.sum(np.abs(F) ** 2) / L
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(complex_vectors, complex_vectors, st.floats(-5, 5))
def test_linearity(u, v, a):
    g = TorusGrid(1, 2.0, 16)
    lhs = dft_forward(SampledFunction(g, a * u + v)).values
    rhs = a * dft_forward(SampledFunction(g, u)).values + dft_forward(SampledFunction(g, v)).values
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-100, 100), min_size=16, max_size=16))
def test_conjugate_symmetry_for_real_input(v):
    g = TorusGrid(1, 2.0, 16)
    F = dft_forward(SampledFunction(g, np.array(v))).values
    # F(-k) = conj F(k); index i <-> (M - i) mod M on the centered layout
    idx = (-np.arange(16)) % 16
    assert np.allclose(F[idx], np.conj(F), atol=1e-9)


@settings(max_examples=50, deadline=None)
@given(complex_vectors, complex_vectors, st.floats(-5, 5), st.sampled_from([1.0, 1.5, 2.0, 3.0, np.inf]))
def test_lp_norm_is_a_norm(u, v, a, p):
    g = TorusGrid(1, 2.0, 16)
    fu, fv = SampledFunction(g, u), SampledFunction(g, v)
    assert lp_norm(fu.with_values(a * u), p) == pytest.approx(abs(a) * lp_norm(fu, p), rel=1e-12, abs=1e-12)
    assert lp_norm(fu.with_values(u + v), p) <= (lp_norm(fu, p) + lp_norm(fv, p)) * (1 + 1e-12) + 1e-12


@pytest.mark.parametrize("p", [1.0, 2.0, 3.5, np.inf])
def test_tensor_square_norm_factorizes(rng, p):
    g = TorusGrid(1, 4.0, 32)
    f = SampledFunction(g, crand(rng, 32))
    F = tensor_square(f)
    assert F.grid.dim == 2
    assert lp_norm(F, p) == pytest.approx(lp_norm(f, p) ** 2, rel=1e-10)
