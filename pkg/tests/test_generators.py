import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from uglt import grid as G
from uglt.errors import ConfigError, EvaluationError
from uglt.generators import (FourierTable, SymbolFn, diag_sampling, fourier_coeffs, get_trig,
                             reduced_toeplitz, table_from_dict, toeplitz)
from uglt.selection import restrict, selection_map


def dense(A):
    return A.toarray() if sp.issparse(A) else np.asarray(A)


def test_fourier_of_second_difference():
    tab = fourier_coeffs(lambda t: 2 - 2 * np.cos(t), 2, 8)
    assert np.allclose(tab.coeffs, [0, -1, 2, -1, 0], atol=1e-13)
    assert tab.is_conjugate_symmetric()


def test_fourier_of_constant():
    tab = fourier_coeffs(lambda t: np.ones_like(t), 3, 8)
    expect = np.zeros(7)
    expect[3] = 1
    assert np.allclose(tab.coeffs, expect, atol=1e-13)


def test_fourier_two_level_laplacian():
    tab = fourier_coeffs(lambda a, b: 4 - 2 * np.cos(a) - 2 * np.cos(b), (1, 1), (4, 4))
    expect = np.array([[0, -1, 0], [-1, 4, -1], [0, -1, 0]])
    assert np.allclose(tab.coeffs, expect, atol=1e-13)


def test_fourier_sign_convention_for_exponential():
    tab = fourier_coeffs(lambda t: np.exp(1j * t), 1, 4)
    assert abs(tab.coeff((1,)) - 1) < 1e-13 and abs(tab.coeff((-1,))) < 1e-13
    assert np.allclose(tab.coeffs, get_trig("shift").table.coeffs, atol=1e-13)


def test_fourier_rejects_aliasing():
    with pytest.raises(ConfigError):
        fourier_coeffs(np.cos, 3, 7)


def test_fourier_smooth_function_error_model():
    # e^{cos t} has coefficients I_k(1); the periodic rule converges fast
    from scipy.special import iv
    tab = fourier_coeffs(lambda t: np.exp(np.cos(t)), 4, 32)
    assert np.allclose(tab.coeffs.real, iv(np.abs(np.arange(-4, 5)), 1), atol=1e-13)


@settings(max_examples=30, deadline=None)
@given(c=st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_registered_style_polynomials_are_exact(c):
    f = lambda t: c[0] + c[1] * np.cos(t) + c[2] * np.cos(2 * t)
    tab = fourier_coeffs(f, 2, 6)
    expect = [c[2] / 2, c[1] / 2, c[0], c[1] / 2, c[2] / 2]
    assert np.allclose(tab.coeffs, expect, atol=1e-13)


def test_json_roundtrip():
    tab = get_trig("lap2d").table
    back = FourierTable.from_json(tab.to_json())
    assert back.cutoff == tab.cutoff and np.array_equal(back.coeffs, tab.coeffs)


def test_toeplitz_examples():
    lap = get_trig("lap1d").table
    assert np.array_equal(dense(toeplitz((3,), lap)),
                          [[2, -1, 0], [-1, 2, -1], [0, -1, 2]])
    assert np.array_equal(dense(toeplitz((3,), get_trig("one").table)), np.eye(3))
    T = dense(toeplitz((2, 2), get_trig("lap2d").table))
    blk = np.array([[4, -1], [-1, 4]])
    assert np.array_equal(T, np.block([[blk, -np.eye(2)], [-np.eye(2), blk]]))


def test_toeplitz_entry_rule_with_complex_table(rng):
    coeffs = {(a, b): complex(*rng.standard_normal(2)) for a in range(-2, 3) for b in range(-1, 2)}
    tab = table_from_dict(coeffs)
    n = (3, 4)
    T = dense(toeplitz(n, tab))
    idx = np.indices(n).reshape(2, -1).T
    for p in range(len(idx)):
        for q in range(len(idx)):
            assert T[p, q] == tab.coeff(idx[p] - idx[q])
    assert np.array_equal(T, dense(toeplitz(n, tab, sparse=True)))


def test_toeplitz_exact_symmetry_for_real_even_tables():
    T = toeplitz((5, 6), get_trig("lap2d").table)
    assert (T != T.T).nnz == 0


def test_toeplitz_closed_form_spectrum():
    for m in (5, 37):
        ev = np.linalg.eigvalsh(dense(toeplitz((m,), get_trig("lap1d").table)))
        exact = np.sort(2 - 2 * np.cos(np.arange(1, m + 1) * np.pi / (m + 1)))
        assert np.allclose(ev, exact, rtol=0, atol=1e-10)


def test_diag_sampling_examples():
    g = G.hypercube_grid((2,), G.Hypercube((0,), 1))
    assert np.array_equal(diag_sampling(g, lambda x: x).toarray(), np.diag([0.5, 1.0]))
    sq = G.domain_grid((4, 4), G.get_domain("unit_square"))
    assert np.array_equal(diag_sampling(sq, lambda x, y: 1.0).toarray(), np.eye(9))
    D = diag_sampling(sq, lambda x, y: (x < 0.5).astype(float))
    assert D.diagonal().sum() == 3 and D.diagonal()[:3].tolist() == [1, 1, 1]


def test_diag_sampling_names_bad_point():
    g = G.hypercube_grid((2,), G.Hypercube((0,), 1))
    with pytest.raises(EvaluationError, match="1.0"):
        with np.errstate(divide="ignore"):
            diag_sampling(g, lambda x: 1 / (1 - x))


def test_reduced_toeplitz_is_interior_laplacian():
    g = G.domain_grid((4, 4), G.get_domain("unit_square"))
    R = dense(reduced_toeplitz(g, get_trig("lap2d").table))
    big = G.hypercube_grid((4, 4), G.Hypercube((0, 0), 1))
    P = np.zeros((9, 16))
    P[np.arange(9), selection_map(g, big).positions] = 1
    T = dense(toeplitz((4, 4), get_trig("lap2d").table))
    assert np.array_equal(R, P @ T @ P.T)
    assert np.array_equal(R, dense(toeplitz((3, 3), get_trig("lap2d").table)))


@pytest.mark.parametrize("name", ["unit_square", "disk", "cusp", "left_half"])
@pytest.mark.parametrize("m", [8, 16])
def test_reduced_toeplitz_equals_restricted_big_matrix(name, m):
    g = G.domain_grid((m, m), G.get_domain(name))
    cube = G.enclosing_hypercube(g)
    smap = selection_map(g, G.hypercube_grid((m, m), cube))
    for tab in (get_trig("lap2d").table, get_trig("one", d=2).table):
        T = toeplitz((cube.side * m,) * 2, tab)
        assert np.array_equal(dense(reduced_toeplitz(g, tab)), dense(restrict(smap, T)))
        assert np.array_equal(dense(reduced_toeplitz(g, tab, sparse=False)),
                              dense(reduced_toeplitz(g, tab)))


def test_reduced_toeplitz_identity_for_constant():
    g = G.domain_grid((8, 8), G.get_domain("disk"))
    assert np.array_equal(dense(reduced_toeplitz(g, get_trig("one", d=2).table)), np.eye(g.dim))


def test_diagonal_restriction_identity():
    big = G.hypercube_grid((8, 8), G.Hypercube((0, 0), 1))
    small = G.domain_grid((8, 8), G.get_domain("disk"))
    a = lambda x, y: np.exp(x) * np.cos(y)
    smap = selection_map(small, big)
    assert np.array_equal(restrict(smap, diag_sampling(big, a)).toarray(),
                          diag_sampling(small, a).toarray())


def test_symbol_composition(rng):
    a = SymbolFn.from_space(lambda x, y: x + y, 2)
    f = get_trig("lap2d").symbol()
    x = rng.random((50, 2))
    th = rng.uniform(-np.pi, np.pi, (50, 2))
    prod = (a * f)(x, th)
    assert np.allclose(prod, (x[:, 0] + x[:, 1]) * (4 - 2 * np.cos(th[:, 0]) - 2 * np.cos(th[:, 1])))
    assert (a * f).depends_on_space and (a * f).depends_on_freq
    assert not f.depends_on_space
    inv = f.reciprocal()(x, np.zeros((50, 2)))
    assert np.all(inv == 0)  # f vanishes at theta = 0


def test_dimension_mismatch_rejected():
    with pytest.raises(ConfigError):
        toeplitz((3,), get_trig("lap2d").table)
