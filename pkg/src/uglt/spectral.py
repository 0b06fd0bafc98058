"""Spectra, singular values, and the distances used to compare distributions.

The dense factorizations are delegated to LAPACK through numpy.  Diagonal
inputs (sparse or dense) take an exact shortcut that sorts the diagonal and
is exempt from the size caps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
import scipy.sparse as sp

from .errors import AsymmetryError, DimensionError, SizeLimitError
from .generators import SymbolFn
from .grid import DomainSpec, Grid, as_multi_index

EIG_CAP = 3000
SVD_CAP = 2000
SYM_TOL = 1e-12
QUANTILES = 1024


@dataclass(frozen=True, eq=False)
class SpectralMeasure:
    """Sorted eigenvalues (ascending) or singular values (descending)."""

    kind: str
    values: np.ndarray
    dim: int

    def __post_init__(self):
        if self.kind not in ("eigenvalues", "singular_values"):
            raise ValueError(f"unknown spectral kind {self.kind!r}")
        self.values.setflags(write=False)

    def to_csv(self, path, **meta) -> None:
        _write_column(path, "value", self.values, kind=self.kind, dim=self.dim, **meta)


@dataclass(frozen=True, eq=False)
class SymbolSample:
    """Equal-weight evaluations of a symbol on a space x frequency product grid."""

    values: np.ndarray
    counts: tuple[int, int]
    meta: dict = field(default_factory=dict)
    cell_measure_normalized: bool = True

    def to_csv(self, path, **meta) -> None:
        _write_column(path, "value", self.values, space_points=self.counts[0],
                      freq_points=self.counts[1], **{**self.meta, **meta})


def _write_column(path, header: str, values, **meta) -> None:
    with open(path, "w", newline="") as fh:
        for k in sorted(meta):
            fh.write(f"# {k}={meta[k]}\n")
        fh.write(header + "\n")
        for v in np.asarray(values).ravel():
            fh.write(f"{float(v):.17g}\n")


def _diagonal_of(A):
    """The diagonal if ``A`` is diagonal, else ``None``."""
    if sp.issparse(A):
        C = A.tocoo()
        if np.all(C.row[C.data != 0] == C.col[C.data != 0]):
            return A.diagonal()
        return None
    A = np.asarray(A)
    d = np.diagonal(A)
    if np.count_nonzero(A) == np.count_nonzero(d):
        return d.copy()
    return None


def _dense(A) -> np.ndarray:
    return A.toarray() if sp.issparse(A) else np.asarray(A)


def check_hermitian(A, tol: float = SYM_TOL) -> float:
    """Largest entry of ``|A - A^H|`` relative to ``max(1, max|A|)``; raises above ``tol``."""
    if sp.issparse(A):
        A = sp.csr_matrix(A)
        diff = abs(A - A.conj().T).max() if A.nnz else 0.0
        scale = max(1.0, abs(A).max() if A.nnz else 0.0)
    else:
        A = np.asarray(A)
        diff = float(np.max(np.abs(A - A.conj().T), initial=0.0))
        scale = max(1.0, float(np.max(np.abs(A), initial=0.0)))
    rel = float(diff) / scale
    if rel > tol:
        raise AsymmetryError(f"matrix is not Hermitian: max |A - A^H| = {diff:.3e}")
    return rel


def sym_eigenvalues(A, cap: int = EIG_CAP, tol: float = SYM_TOL) -> SpectralMeasure:
    """Full spectrum of a real symmetric (or Hermitian) matrix, ascending."""
    n = A.shape[0]
    if A.ndim != 2 or A.shape[1] != n:
        raise DimensionError(f"square matrix expected, got shape {A.shape}")
    check_hermitian(A, tol)
    d = _diagonal_of(A)
    if d is not None:
        return SpectralMeasure("eigenvalues", np.sort(np.real(d)), n)
    if n > cap:
        raise SizeLimitError(f"eigenvalue problem of size {n} exceeds cap {cap}")
    vals = np.linalg.eigvalsh(_dense(A)) if n else np.empty(0)
    return SpectralMeasure("eigenvalues", np.sort(vals), n)


def singular_values(A, cap: int = SVD_CAP) -> SpectralMeasure:
    """All singular values, descending."""
    if A.ndim != 2:
        raise DimensionError(f"matrix expected, got shape {A.shape}")
    n = min(A.shape)
    d = _diagonal_of(A) if A.shape[0] == A.shape[1] else None
    if d is not None:
        return SpectralMeasure("singular_values", np.sort(np.abs(d))[::-1].copy(), n)
    if max(A.shape) > cap:
        raise SizeLimitError(f"SVD of size {A.shape} exceeds cap {cap}")
    vals = np.linalg.svd(_dense(A), compute_uv=False) if n else np.empty(0)
    return SpectralMeasure("singular_values", np.sort(vals)[::-1].copy(), n)


def _sorted_value_min(desc: np.ndarray) -> float:
    """min over i of (i-1)/k + s_i with s_{k+1} = 0, for ``desc`` sorted descending."""
    k = len(desc)
    if k == 0:
        return 0.0
    s = np.concatenate([desc, [0.0]])
    return float(np.min(np.arange(k + 1) / k + s))


def p_metric(sv: SpectralMeasure) -> float:
    """``p(A) = min_i {(i-1)/dim + sigma_i}`` with ``sigma_{dim+1} = 0``."""
    if sv.kind != "singular_values":
        raise ValueError("p_metric needs singular values")
    return _sorted_value_min(np.asarray(sv.values))


def pm_metric(samples) -> float:
    """Measure pseudo-metric of a sampled symbol with equal-weight cells.

    Exact infimum of ``|E|/|Omega| + sup_{E^c} |f|`` over unions of cells.
    """
    vals = samples.values if isinstance(samples, SymbolSample) else np.asarray(samples)
    vals = np.abs(np.ravel(vals))
    if vals.size == 0:
        raise ValueError("pm_metric needs at least one sample")
    return _sorted_value_min(np.sort(vals)[::-1])


def quantiles(values, q: int = QUANTILES) -> np.ndarray:
    """Empirical quantile function at the midpoints ``(k + 1/2)/q``.

    Uses the left-continuous step inverse of the empirical CDF, so two lists
    with the same empirical distribution give identical quantiles.
    """
    v = np.sort(np.real(np.ravel(values)))
    if v.size == 0:
        raise ValueError("empty value list")
    u = (np.arange(q) + 0.5) / q
    return v[np.minimum((u * v.size).astype(np.int64), v.size - 1)]


def w1_distance(a, b, q: int = QUANTILES) -> float:
    """Wasserstein-1 distance between two empirical measures, on ``q`` quantiles."""
    return float(np.mean(np.abs(quantiles(a, q) - quantiles(b, q))))


def sv_tail_fractions(sv: SpectralMeasure, eps: float, big: float) -> tuple[float, float]:
    """Fractions of singular values below ``eps`` and above ``big``."""
    if eps <= 0 or big <= 0:
        raise ValueError("eps and big must be positive")
    v = np.asarray(sv.values)
    if sv.dim == 0:
        return 0.0, 0.0
    return float(np.count_nonzero(v < eps)) / sv.dim, float(np.count_nonzero(v > big)) / sv.dim


def acs_distance_profile(seq_a, seq_b, n_list: Iterable, cap: int = SVD_CAP) -> dict:
    """``p(A_n - B_n)`` for each ``n``; the largest-``n`` value is the limsup proxy.

    Works with any objects exposing ``matrix(n)``.
    """
    profile = []
    for n in n_list:
        n = as_multi_index(n)
        A, B = seq_a.matrix(n), seq_b.matrix(n)
        if A.shape != B.shape:
            raise DimensionError(f"sequences live on different grids at n={n}")
        D = A - B
        profile.append((n, p_metric(singular_values(D, cap)), A.shape[0]))
    if not profile:
        raise ValueError("empty n_list")
    vals = [p for _, p, _ in profile]
    nonincreasing = all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))
    return {"profile": profile, "tail": vals[-1], "nonincreasing": nonincreasing}


# ---------------------------------------------------------------------------
# symbol samplers


def frequency_grid(per_axis: Iterable[int]) -> np.ndarray:
    """Tensor grid of midpoints of ``q`` equal cells of ``[-pi, pi]`` per axis."""
    axes = [-np.pi + (2 * np.arange(q) + 1) * np.pi / q for q in per_axis]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _evaluate(symbol: SymbolFn, space: np.ndarray, freq: np.ndarray) -> np.ndarray:
    # evaluate block by block to bound memory
    out = np.empty(len(space) * len(freq), dtype=complex if not symbol.real_valued else float)
    step = max(1, 4_000_000 // max(len(freq), 1))
    for s in range(0, len(space), step):
        xs = space[s:s + step]
        x = np.repeat(xs, len(freq), axis=0)
        th = np.tile(freq, (len(xs), 1))
        vals = symbol(x, th)
        out[s * len(freq):(s + len(xs)) * len(freq)] = vals if not symbol.real_valued else np.real(vals)
    return out


def sample_symbol_on_grid(symbol: SymbolFn, grid: Grid,
                          freq_per_axis: Iterable[int] | None = None) -> SymbolSample:
    """Sample ``kappa`` on the grid points times a frequency midpoint grid.

    The default frequency resolution matches the grid refinement, one
    midpoint per lattice step along each axis.  Symbols that ignore the
    frequency variable use a single frequency point.
    """
    if not symbol.depends_on_freq:
        q = (1,) * grid.d
    elif freq_per_axis is None:
        q = tuple(grid.n)
    else:
        q = tuple(int(v) for v in freq_per_axis)
    freq = frequency_grid(q)
    vals = _evaluate(symbol, grid.points, freq)
    return SymbolSample(vals, (grid.dim, len(freq)),
                        {"symbol": symbol.description, "domain": grid.domain.name,
                         "n": "x".join(map(str, grid.n)), "freq_per_axis": "x".join(map(str, q))})


def sample_symbol_dense(symbol: SymbolFn, domain: DomainSpec, cells_per_axis: int,
                        freq_per_axis: int = 1) -> SymbolSample:
    """Sample ``kappa`` at cell centres of a uniform partition of the domain extent.

    Cells whose centre lies outside the domain are dropped; the remaining
    cells all carry the same weight.
    """
    if domain.extent is None:
        raise ValueError(f"domain {domain.name!r} has no finite extent to sample")
    axes = [lo + (hi - lo) * (np.arange(cells_per_axis) + 0.5) / cells_per_axis
            for lo, hi in domain.extent]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    pts = pts[domain.indicator(pts)]
    q = (freq_per_axis if symbol.depends_on_freq else 1,) * domain.d
    freq = frequency_grid(q)
    vals = _evaluate(symbol, pts, freq)
    return SymbolSample(vals, (len(pts), len(freq)),
                        {"symbol": symbol.description, "domain": domain.name,
                         "cells_per_axis": cells_per_axis})


def relative_w1(eigs, samples) -> float:
    """W1 normalised by the value range of the samples."""
    s = np.real(np.ravel(samples))
    span = float(np.max(s) - np.min(s))
    w = w1_distance(eigs, s)
    return w / span if span > 0 else w
