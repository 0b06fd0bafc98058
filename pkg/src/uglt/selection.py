"""Selection maps between grids: restriction, extension and their identities.

A selection matrix ``Pi`` (rows = small grid, columns = big grid) is never
formed.  A :class:`SelectionMap` stores, for each small-grid point, its
position in the big grid; restriction is a gather and extension a scatter.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, ContainmentError, DimensionError
from .grid import DomainSpec, Grid, domain_grid, intersect_domains, union_domains


@dataclass(frozen=True, eq=False)
class SelectionMap:
    """Order-preserving injection of ``small`` into ``big`` (same ``n``)."""

    small: Grid
    big: Grid
    positions: np.ndarray

    def __post_init__(self):
        self.positions.setflags(write=False)

    @property
    def defect(self) -> int:
        """``big.dim - small.dim``."""
        return self.big.dim - self.small.dim

    def matrix(self) -> sp.csr_matrix:
        """The 0/1 selection matrix as CSR (for audits and small tests)."""
        k = self.small.dim
        return sp.csr_matrix(
            (np.ones(k), (np.arange(k), self.positions)), shape=(k, self.big.dim)
        )

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["small_index", "big_index"])
            for i, p in enumerate(self.positions):
                w.writerow([i, int(p)])


@dataclass(frozen=True, eq=False)
class PermutationCompletion:
    """Permutation of the big grid listing the small-grid positions first."""

    base: SelectionMap
    order: np.ndarray

    def apply(self, A):
        """``P^T A P``: reorder rows and columns by ``order``."""
        return _gather(A, self.order)


def selection_map(small: Grid, big: Grid) -> SelectionMap:
    """Locate every point of ``small`` inside ``big`` by exact lattice index."""
    if small.n != big.n:
        raise ConfigError(f"grids use different n: {small.n} vs {big.n}")
    pos = big.locate(small.index)
    missing = np.nonzero(pos < 0)[0]
    if len(missing):
        p = tuple(float(v) for v in small.points[missing[0]])
        raise ContainmentError(
            f"point {p} of grid {small.domain.name!r} is not in grid {big.domain.name!r}"
        )
    return SelectionMap(small, big, pos)


def permutation_completion(m: SelectionMap) -> PermutationCompletion:
    rest = np.ones(m.big.dim, dtype=bool)
    rest[m.positions] = False
    order = np.concatenate([m.positions, np.nonzero(rest)[0]])
    return PermutationCompletion(m, order)


def _gather(A, pos):
    if sp.issparse(A):
        return A.tocsr()[pos][:, pos]
    return np.asarray(A)[np.ix_(pos, pos)]


def _check(A, dim: int, what: str):
    if A.ndim != 2 or A.shape != (dim, dim):
        raise DimensionError(f"{what} has shape {A.shape}, expected ({dim}, {dim})")


def restrict(m: SelectionMap, A):
    """``Pi A Pi^T``: rows and columns of ``A`` at the small-grid positions."""
    _check(A, m.big.dim, "matrix on the big grid")
    return _gather(A, m.positions)


def extend(m: SelectionMap, B):
    """``Pi^T B Pi``: scatter ``B`` into a big-grid matrix, zero elsewhere."""
    _check(B, m.small.dim, "matrix on the small grid")
    N = m.big.dim
    if sp.issparse(B):
        C = B.tocoo()
        return sp.csr_matrix(
            (C.data, (m.positions[C.row], m.positions[C.col])), shape=(N, N), dtype=C.dtype
        )
    B = np.asarray(B)
    out = np.zeros((N, N), dtype=B.dtype)
    out[np.ix_(m.positions, m.positions)] = B
    return out


def gram_identities(m: SelectionMap) -> dict:
    """Check ``Pi Pi^T = I`` and measure the diagonal defect of ``Pi^T Pi``.

    ``Pi^T Pi`` is diagonal with ones at the selected positions; the defect
    counts big-grid points where that diagonal disagrees with the indicator
    of the small grid's domain.
    """
    P = m.matrix()
    left = P @ P.T
    ident = sp.identity(m.small.dim, format="csr")
    left_ok = (left != ident).nnz == 0
    diag = np.zeros(m.big.dim)
    diag[m.positions] = 1.0
    ind = m.small.domain.indicator(m.big.points).astype(float) if m.big.dim else diag
    return {"left": bool(left_ok), "right_diag_defect": int(np.count_nonzero(diag != ind))}


class CommutingSquare(NamedTuple):
    via_union: object
    via_intersection: object
    degenerate: bool


def commuting_square(omega1: DomainSpec, omega2: DomainSpec, n, A) -> CommutingSquare:
    """Carry ``A`` from the grid of ``omega1`` to that of ``omega2`` two ways.

    Route one extends into the union grid and restricts to ``omega2``; route
    two restricts to the intersection grid and extends into ``omega2``.
    """
    g1, g2 = domain_grid(n, omega1), domain_grid(n, omega2)
    _check(A, g1.dim, "matrix on the first grid")
    if omega1 is omega2:
        return CommutingSquare(A, A, False)
    gu = domain_grid(n, union_domains(omega1, omega2))
    gi = domain_grid(n, intersect_domains(omega1, omega2))
    up = restrict(selection_map(g2, gu), extend(selection_map(g1, gu), A))
    down = extend(selection_map(gi, g2), restrict(selection_map(gi, g1), A))
    return CommutingSquare(up, down, gi.dim == 0)
