import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uglt import grid as G
from uglt.errors import ConfigError, SizeLimitError
from uglt.pde import (ModelProblem, assemble, builtin_coefficient, closed_form_laplacian,
                      cusp_indicator, oracle_w1, run_experiment, unit_coefficient)
from uglt.selection import extend, selection_map
from uglt.spectral import sym_eigenvalues


def test_coefficient_examples():
    assert builtin_coefficient(0, 0) == 10
    assert builtin_coefficient(1, 0) == pytest.approx((11 + math.sin(1) ** 2) / 2, rel=1e-15)
    x = np.linspace(0, 50, 400)
    vals = builtin_coefficient(x[:, None], x[None, :])
    assert vals.min() > 1 and vals.max() <= 10


@settings(max_examples=100, deadline=None)
@given(x=st.floats(0, 1e3), y=st.floats(0, 1))
def test_coefficient_bounds(x, y):
    v = builtin_coefficient(x, y)
    assert 1 < v <= 10


def test_cusp_indicator_examples():
    assert cusp_indicator(0.5, 0.5)
    assert cusp_indicator(2.0, 0.2)
    assert not cusp_indicator(2.0, 0.3)
    assert not cusp_indicator(0.0, 0.5)
    assert cusp_indicator(np.array([0.5, 3.0]), np.array([0.9, 0.2])).tolist() == [True, False]


def test_unit_coefficient_reproduces_closed_form():
    for m in (4, 9, 16):
        A = assemble((m, m), G.get_domain("unit_square"), unit_coefficient)
        ev = sym_eigenvalues(A).values
        assert np.allclose(ev, closed_form_laplacian(m), rtol=0, atol=1e-10)
    assert oracle_w1(12) < 1e-8


def test_stencil_structure():
    prob = ModelProblem()
    A = prob.matrix((16, 16))
    assert (A != A.T).nnz == 0
    # off-diagonals are negative and rows are weakly diagonally dominant
    off = A.copy()
    off.setdiag(0)
    assert off.data.max() <= 0
    rows = np.asarray(A.sum(axis=1)).ravel()
    assert rows.min() >= -1e-12
    ev = sym_eigenvalues(A).values
    assert ev[0] > 0


def test_interior_rows_sum_to_zero():
    g = G.domain_grid((8, 8), G.get_domain("unit_square"))
    A = assemble((8, 8), G.get_domain("unit_square"), builtin_coefficient)
    interior = np.all((g.index > 1) & (g.index < 7), axis=1)
    assert np.allclose(np.asarray(A.sum(axis=1)).ravel()[interior], 0, atol=1e-12)


def test_truncated_matrix_is_restriction():
    prob = ModelProblem()
    n = (16, 16)
    cusp = prob.domain
    for t in (1, 2, 4):
        omega_t = G.exhaustion_domain(cusp, t)
        smap = selection_map(G.domain_grid(n, omega_t), G.domain_grid(n, cusp))
        A = prob.matrix(n)
        B = prob.matrix(n, omega_t)
        assert (A[smap.positions][:, smap.positions] != B).nnz == 0
        EB = extend(smap, B)
        ev = np.linalg.eigvalsh(EB.toarray())
        expect = np.sort(np.concatenate([sym_eigenvalues(B).values, np.zeros(smap.defect)]))
        assert np.allclose(ev, expect, atol=1e-10)


def test_positivity_check():
    assert ModelProblem().check_positivity(samples=10_000) > 1
    bad = ModelProblem(coefficient=lambda x, y: x - 0.5, coefficient_name="signed")
    with pytest.raises(ConfigError):
        bad.check_positivity(samples=1000)


def test_assemble_needs_square_lattice():
    with pytest.raises(ConfigError):
        assemble((8, 16), G.get_domain("unit_square"), unit_coefficient)


def test_experiment_rows_and_files(tmp_path):
    rep = run_experiment([(8, 8), (12, 12)], [2.0], outputs=tmp_path)
    assert [(r["n"], r["t"]) for r in rep.rows] == [("8", math.inf), ("8", 2.0), ("12", math.inf), ("12", 2.0)]
    for r in rep.rows:
        assert r["dim_defect"] == r["dim"] - r["dim_t"]
        assert r["zero_fraction"] == pytest.approx(r["dim_defect"] / r["dim"])
    names = sorted(p.name for p in tmp_path.iterdir())
    assert "w1_summary.csv" in names and "eigenvalues_8_2.csv" in names
    assert "symbol_samples_12_inf.csv" in names and "eigenvalues_12_2_reduced.csv" in names
    lines = (tmp_path / "eigenvalues_8_2.csv").read_text().splitlines()
    vals = [float(v) for v in lines[lines.index("value") + 1:]]
    assert len(vals) == rep.rows[1]["dim"]
    assert not list(tmp_path.glob("*.tmp"))


def test_experiment_cap_fails_fast(tmp_path):
    with pytest.raises(SizeLimitError):
        run_experiment([(40, 40)], [2.0], outputs=tmp_path, eig_cap=100)
    assert not list(tmp_path.iterdir())
