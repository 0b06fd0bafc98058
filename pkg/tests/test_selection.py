import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from uglt import grid as G
from uglt.errors import ConfigError, ContainmentError, DimensionError
from uglt.generators import get_trig, toeplitz
from uglt.selection import (commuting_square, extend, gram_identities, permutation_completion,
                            restrict, selection_map)


def cube_grid(n, y, l):
    return G.hypercube_grid(n, G.Hypercube(y, l))


def test_positions_for_nested_intervals():
    big = cube_grid((2,), (0,), 2)
    assert selection_map(cube_grid((2,), (0,), 1), big).positions.tolist() == [0, 1]
    assert selection_map(cube_grid((2,), (1,), 1), big).positions.tolist() == [2, 3]


def test_square_inside_reference_cube():
    m = selection_map(G.domain_grid((4, 4), G.get_domain("unit_square")), cube_grid((4, 4), (0, 0), 1))
    assert m.positions.tolist() == [0, 1, 2, 4, 5, 6, 8, 9, 10]
    assert m.defect == 7


def test_missing_point_is_named():
    with pytest.raises(ContainmentError, match=r"\(1.5,\)"):
        selection_map(cube_grid((2,), (1,), 1), cube_grid((2,), (0,), 1))


def test_different_n_rejected():
    with pytest.raises(ConfigError):
        selection_map(cube_grid((2,), (0,), 1), cube_grid((4,), (0,), 1))


def test_size_mismatch():
    m = selection_map(cube_grid((2,), (0,), 1), cube_grid((2,), (0,), 2))
    with pytest.raises(DimensionError):
        restrict(m, np.eye(3))
    with pytest.raises(DimensionError):
        extend(m, np.eye(3))


def disk_map(m):
    return selection_map(G.domain_grid((m, m), G.get_domain("disk")), cube_grid((m, m), (0, 0), 1))


@settings(max_examples=25, deadline=None)
@given(m=st.integers(3, 14), seed=st.integers(0, 2**31 - 1))
def test_restrict_extend_identities(m, seed):
    rng = np.random.default_rng(seed)
    smap = disk_map(m)
    k = smap.small.dim
    B = rng.integers(-5, 6, (k, k)).astype(float)
    B2 = rng.integers(-5, 6, (k, k)).astype(float)
    E = extend(smap, B)
    assert np.array_equal(restrict(smap, E), B)
    assert np.array_equal(extend(smap, B @ B2), E @ extend(smap, B2))
    assert np.array_equal(restrict(smap, E @ extend(smap, B2)),
                          restrict(smap, E) @ restrict(smap, extend(smap, B2)))
    P = permutation_completion(smap)
    blk = np.zeros((smap.big.dim,) * 2)
    blk[:k, :k] = B
    assert np.array_equal(P.apply(E), blk)
    assert gram_identities(smap)["left"]


def test_extension_preserves_singular_values(rng):
    smap = disk_map(10)
    k = smap.small.dim
    B = rng.standard_normal((k, k))
    s_small = np.linalg.svd(B, compute_uv=False)
    s_big = np.linalg.svd(extend(smap, B), compute_uv=False)
    assert np.allclose(s_big[:k], s_small, atol=1e-12)
    assert np.allclose(s_big[k:], 0, atol=1e-12)


def test_extend_single_entry():
    smap = selection_map(cube_grid((2,), (1,), 1), cube_grid((2,), (0,), 2))
    E = extend(smap, np.array([[7.0, 0], [0, 0]]))
    assert E[2, 2] == 7 and np.count_nonzero(E) == 1


def test_restrict_sparse_and_dense_agree():
    smap = disk_map(8)
    T = toeplitz((8, 8), get_trig("lap2d").table)
    assert np.array_equal(restrict(smap, T).toarray(), restrict(smap, T.toarray()))
    assert np.array_equal(restrict(smap, sp.identity(64, format="csr")).toarray(), np.eye(smap.small.dim))


def test_restriction_does_not_increase_rank_or_norm(rng):
    smap = disk_map(9)
    N = smap.big.dim
    for r in (1, 3, 10):
        A = rng.standard_normal((N, r)) @ rng.standard_normal((r, N))
        R = restrict(smap, A)
        assert np.linalg.matrix_rank(R) <= r
        assert np.linalg.norm(R, 2) <= np.linalg.norm(A, 2) + 1e-12


def test_decomposition_rank_bound(rng):
    smap = disk_map(12)
    A = rng.standard_normal((smap.big.dim,) * 2)
    S = A - extend(smap, restrict(smap, A))
    assert np.linalg.matrix_rank(S) <= 2 * smap.defect


def test_gram_defect_for_nested_cubes():
    m = selection_map(cube_grid((4,), (1,), 1), cube_grid((4,), (0,), 2))
    assert gram_identities(m) == {"left": True, "right_diag_defect": 0}


def test_gram_defect_for_disk_shrinks():
    ratios = [gram_identities(disk_map(m))["right_diag_defect"] / m**2 for m in (16, 32, 64)]
    assert all(b <= 0.7 * a for a, b in zip(ratios, ratios[1:]))


def test_commuting_square_examples(rng):
    left, right = G.get_domain("left_half"), G.get_domain("right_half")
    n = (8, 8)
    k = G.domain_grid(n, left).dim
    A = rng.standard_normal((k, k))
    A = A + A.T
    sq = commuting_square(left, right, n, A)
    assert np.max(np.abs(sq.via_union - sq.via_intersection)) == 0
    assert not sq.degenerate
    same = commuting_square(left, left, n, A)
    assert same.via_union is A and same.via_intersection is A


def test_commuting_square_nested(rng):
    disk, sq = G.get_domain("disk"), G.get_domain("unit_square")
    n = (12, 12)
    gd = G.domain_grid(n, disk)
    A = rng.standard_normal((gd.dim,) * 2)
    res = commuting_square(disk, sq, n, A)
    expect = extend(selection_map(gd, G.domain_grid(n, sq)), A)
    assert np.array_equal(res.via_union, expect)
    assert np.array_equal(res.via_intersection, expect)


def test_commuting_square_degenerate():
    a = G.box_domain((0, 0), (G.Fraction(1, 4), 1), "thin_left")
    b = G.box_domain((G.Fraction(3, 4), 0), (1, 1), "thin_right")
    n = (8, 8)
    k = G.domain_grid(n, a).dim
    res = commuting_square(a, b, n, np.ones((k, k)))
    assert res.degenerate
    kb = G.domain_grid(n, b).dim
    assert np.array_equal(res.via_union, np.zeros((kb, kb)))
    assert np.array_equal(res.via_intersection, np.zeros((kb, kb)))


def test_selection_csv(tmp_path):
    smap = disk_map(6)
    smap.to_csv(tmp_path / "map.csv")
    data = np.loadtxt(tmp_path / "map.csv", delimiter=",", skiprows=1, dtype=int)
    assert np.array_equal(data[:, 1], smap.positions)
