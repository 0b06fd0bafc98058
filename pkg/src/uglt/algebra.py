"""Symbol-tracked matrix sequences over hypercubes, bounded and unbounded domains.

A :class:`GltSequence` is a lazy map ``n -> A_n`` on the grid of its domain,
paired with the symbol that describes its asymptotic spectral distribution.
The algebra operations combine matrices and symbols in lockstep, so the
tracked symbol of a composite sequence is always the composed closure.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, DimensionError, DomainError
from .generators import FourierTable, SymbolFn, diag_sampling, reduced_toeplitz, toeplitz
from .grid import (DomainSpec, Hypercube, as_multi_index, domain_grid, exhaustion_domain,
                   grid_dim, hypercube_domain, hypercube_grid)
from .selection import (PermutationCompletion, extend, permutation_completion, restrict,
                        selection_map)
from .spectral import (check_hermitian, p_metric, pm_metric, sample_symbol_dense,
                       singular_values)

PINV_TOL = 1e-10
HERMITIAN_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class GltSequence:
    """A matrix sequence on a domain together with its tracked symbol.

    ``generator(n)`` returns a square matrix of size ``d_n`` (the grid
    dimension of ``domain`` at ``n``).  ``diagonal`` is structural metadata
    saying every ``A_n`` is diagonal.
    """

    domain: DomainSpec
    generator: Callable = field(repr=False)
    symbol: SymbolFn = field(repr=False)
    hermitian: bool = False
    provenance: dict = field(default_factory=dict)
    diagonal: bool = False
    _cache: dict = field(default_factory=dict, repr=False)

    def matrix(self, n):
        """``A_n``, checked against the grid dimension (memoised per ``n``)."""
        n = as_multi_index(n)
        if n not in self._cache:
            A = self.generator(n)
            dim = grid_dim(n, self.domain)
            if A.shape != (dim, dim):
                raise DimensionError(
                    f"generator returned shape {A.shape} at n={n}, grid has {dim} points"
                )
            if len(self._cache) >= 8:
                self._cache.pop(next(iter(self._cache)))
            self._cache[n] = A
        return self._cache[n]

    def check_hermitian(self, n) -> float:
        """Verify the Hermitian flag at one ``n`` (relative asymmetry)."""
        return check_hermitian(self.matrix(n), HERMITIAN_TOL) if self.hermitian else 0.0

    def provenance_json(self) -> str:
        return json.dumps(self.provenance, indent=2, sort_keys=True, default=str)


@dataclass(frozen=True)
class GacsCertificate:
    """Rank/norm/dimension bookkeeping for one exhaustion step at one ``n``."""

    t: float
    n: tuple[int, ...]
    dim: int
    dim_defect: int
    rank_correction: int
    norm_correction: float
    degenerate: bool = False

    @property
    def m(self) -> float:
        """Dimension-defect rate ``dim_defect / d_n``."""
        return self.dim_defect / self.dim if self.dim else 0.0

    @property
    def c(self) -> float:
        """Rank-correction rate ``rank(S) / d_n``."""
        return self.rank_correction / self.dim if self.dim else 0.0

    @property
    def omega(self) -> float:
        return self.norm_correction

    @property
    def certified(self) -> bool:
        return self.rank_correction <= 2 * self.dim_defect and self.norm_correction == 0.0


# ---------------------------------------------------------------------------
# helpers


def table_symbol(table: FourierTable, name: str | None = None) -> SymbolFn:
    """The trigonometric polynomial ``sum_k f_k e^{i k theta}`` as a symbol."""
    terms = table.nonzero()
    real = table.is_conjugate_symmetric()

    def f(x, th):
        out = np.zeros(len(th), dtype=complex)
        for k, v in terms:
            out += v * np.exp(1j * (th @ np.asarray(k, dtype=float)))
        return out.real if real else out

    return SymbolFn(f, table.d, False, True, name or table.source, real)


def _same_domain(a: GltSequence, b: GltSequence):
    if a.domain is not b.domain:
        raise DomainError(f"sequences live on different domains: {a.domain.name!r}, {b.domain.name!r}")


def _cube_of(domain: DomainSpec) -> Hypercube:
    if domain.hypercube is None:
        raise DomainError(f"domain {domain.name!r} is not a hypercube")
    return domain.hypercube


# ---------------------------------------------------------------------------
# standard sequences on hypercubes


def toeplitz_sequence(table: FourierTable, cube: Hypercube | None = None,
                      symbol: SymbolFn | None = None) -> GltSequence:
    """``{T_{l n}(f)}`` viewed on the grid of ``Q_{y,l}``."""
    cube = cube or Hypercube((0,) * table.d, 1)
    dom = hypercube_domain(cube)

    def gen(n):
        return toeplitz(tuple(cube.side * k for k in n), table)

    return GltSequence(dom, gen, symbol or table_symbol(table), table.is_conjugate_symmetric(),
                       {"op": "toeplitz", "symbol": table.source, "domain": dom.name})


def diag_sequence(a: Callable, domain: DomainSpec, description: str = "a(x)") -> GltSequence:
    """``{D_n(a)}`` on the grid of ``domain`` (hypercube or any domain)."""

    def gen(n):
        return diag_sampling(domain_grid(n, domain), a)

    return GltSequence(domain, gen, SymbolFn.from_space(a, domain.d, description), True,
                       {"op": "diag", "symbol": description, "domain": domain.name}, diagonal=True)


def identity_sequence(domain: DomainSpec) -> GltSequence:
    seq = diag_sequence(lambda *x: np.ones_like(x[0]), domain, "1")
    return GltSequence(domain, seq.generator, SymbolFn.constant(1.0, domain.d), True,
                       {"op": "identity", "domain": domain.name}, diagonal=True)


def zero_sequence(domain: DomainSpec) -> GltSequence:
    def gen(n):
        k = grid_dim(n, domain)
        return sp.csr_matrix((k, k))

    return GltSequence(domain, gen, SymbolFn.constant(0.0, domain.d), True,
                       {"op": "zero", "domain": domain.name}, diagonal=True)


def reduced_sequence(base: GltSequence, omega: DomainSpec) -> GltSequence:
    """Restrict a hypercube sequence to the grid of a bounded ``omega`` inside it."""
    cube = _cube_of(base.domain)
    if not omega.bounded or omega.extent is None:
        raise DomainError(f"domain {omega.name!r} must be bounded")
    for (lo, hi), y in zip(omega.extent, cube.anchor):
        if lo < y or hi > y + cube.side:
            raise DomainError(f"domain {omega.name!r} is not inside {base.domain.name!r}")

    def gen(n):
        m = selection_map(domain_grid(n, omega), hypercube_grid(n, cube))
        return restrict(m, base.matrix(n))

    return GltSequence(omega, gen, base.symbol, base.hermitian,
                       {"op": "restrict", "domain": omega.name, "of": base.provenance},
                       base.diagonal)


# ---------------------------------------------------------------------------
# g.a.c.s.


def _rank(S) -> int:
    """Rank of ``S`` computed on its nonzero rows and columns only."""
    if sp.issparse(S):
        S = S.tocsr()
        S.eliminate_zeros()
        rows = np.unique(S.nonzero()[0])
        cols = np.unique(S.nonzero()[1])
        if len(rows) == 0:
            return 0
        sub = S[rows][:, cols].toarray()
    else:
        S = np.asarray(S)
        rows = np.nonzero(np.any(S != 0, axis=1))[0]
        cols = np.nonzero(np.any(S != 0, axis=0))[0]
        if len(rows) == 0:
            return 0
        sub = S[np.ix_(rows, cols)]
    return int(np.linalg.matrix_rank(sub))


def gacs_decompose(seq: GltSequence, t: float, n) -> tuple:
    """Split ``A_n = E(B_{n,t}) + S_{n,t}`` with ``B_{n,t}`` on the grid of ``Omega_t``.

    Returns ``(B, certificate, completion)``; ``completion`` is the
    permutation listing the ``Omega_t`` points first.
    """
    n = as_multi_index(n)
    omega_t = exhaustion_domain(seq.domain, t)
    big = domain_grid(n, seq.domain)
    small = domain_grid(n, omega_t)
    A = seq.matrix(n)
    m = selection_map(small, big)
    B = restrict(m, A)
    S = A - extend(m, B)
    cert = GacsCertificate(t, n, big.dim, big.dim - small.dim, _rank(S), 0.0, small.dim == 0)
    return B, cert, permutation_completion(m)


# ---------------------------------------------------------------------------
# algebra


def seq_add(a: GltSequence, b: GltSequence, alpha=1.0, beta=1.0) -> GltSequence:
    """``{alpha A_n + beta B_n}`` with symbol ``alpha f + beta g``."""
    _same_domain(a, b)
    real = complex(alpha).imag == 0 and complex(beta).imag == 0
    al = float(np.real(alpha)) if complex(alpha).imag == 0 else complex(alpha)
    be = float(np.real(beta)) if complex(beta).imag == 0 else complex(beta)
    return GltSequence(
        a.domain,
        lambda n: al * a.matrix(n) + be * b.matrix(n),
        a.symbol.linear(b.symbol, al, be),
        a.hermitian and b.hermitian and real,
        {"op": "add", "alpha": str(alpha), "beta": str(beta), "args": [a.provenance, b.provenance]},
        a.diagonal and b.diagonal,
    )


def seq_mul(a: GltSequence, b: GltSequence) -> GltSequence:
    """``{A_n B_n}`` with symbol ``f g``."""
    _same_domain(a, b)
    both_diag = a.diagonal and b.diagonal
    return GltSequence(
        a.domain,
        lambda n: a.matrix(n) @ b.matrix(n),
        a.symbol * b.symbol,
        both_diag and a.hermitian and b.hermitian
        and a.symbol.real_valued and b.symbol.real_valued,
        {"op": "mul", "args": [a.provenance, b.provenance]},
        both_diag,
    )


def _adjoint(A):
    return A.conj().T.tocsr() if sp.issparse(A) else np.asarray(A).conj().T.copy()


def seq_adjoint(a: GltSequence) -> GltSequence:
    """``{A_n^*}`` with symbol ``conj(f)``."""
    return GltSequence(a.domain, lambda n: _adjoint(a.matrix(n)), a.symbol.conj(), a.hermitian,
                       {"op": "adjoint", "args": [a.provenance]}, a.diagonal)


def pinv_matrix(A, sv_tol: float = PINV_TOL, hermitian: bool = False):
    """Moore-Penrose pseudo-inverse, dropping singular values below ``sv_tol * sigma_1``."""
    if sv_tol < 0:
        raise ConfigError("sv_tol must be nonnegative")
    if sp.issparse(A):
        C = A.tocoo()
        if np.all(C.row[C.data != 0] == C.col[C.data != 0]):
            d = A.diagonal()
            top = np.max(np.abs(d), initial=0.0)
            keep = np.abs(d) > sv_tol * top
            inv = np.zeros_like(d)
            inv[keep] = 1 / d[keep]
            return sp.diags(inv, 0, shape=A.shape, format="csr")
        A = A.toarray()
    P = np.linalg.pinv(np.asarray(A), rcond=sv_tol, hermitian=hermitian)
    if hermitian:
        P = (P + P.conj().T) / 2
    return P


def seq_pinv(a: GltSequence, sv_tol: float = PINV_TOL) -> GltSequence:
    """``{A_n^dagger}`` with symbol ``1/f`` (caller asserts ``f != 0`` a.e.)."""
    return GltSequence(a.domain, lambda n: pinv_matrix(a.matrix(n), sv_tol, a.hermitian),
                       a.symbol.reciprocal(), a.hermitian,
                       {"op": "pinv", "sv_tol": sv_tol, "args": [a.provenance]}, a.diagonal)


# ---------------------------------------------------------------------------
# unbounded domains


def unbounded_toeplitz(table: FourierTable, omega: DomainSpec, t: float = math.inf,
                       symbol: SymbolFn | None = None) -> GltSequence:
    """Toeplitz entries ``f_{n(p-q)}`` on ``Omega_t``, extended by zero to ``Omega``.

    ``t = inf`` uses the whole grid of ``Omega`` and has symbol ``f(theta)``;
    finite ``t`` has symbol ``f(theta) 1_{Omega_t}(x)``.
    """
    base = symbol or table_symbol(table)
    herm = table.is_conjugate_symmetric()
    if math.isinf(t):
        return GltSequence(omega, lambda n: reduced_toeplitz(domain_grid(n, omega), table), base,
                           herm, {"op": "toeplitz", "symbol": table.source, "domain": omega.name})
    omega_t = exhaustion_domain(omega, t)

    def gen(n):
        m = selection_map(domain_grid(n, omega_t), domain_grid(n, omega))
        return extend(m, reduced_toeplitz(m.small, table))

    return GltSequence(omega, gen, base.masked(omega_t.indicator, omega_t.name), herm,
                       {"op": "extend", "t": t, "domain": omega.name,
                        "of": {"op": "toeplitz", "symbol": table.source, "domain": omega_t.name}})


def unbounded_diag(a: Callable, omega: DomainSpec, t: float = math.inf,
                   description: str = "a(x)") -> GltSequence:
    """Diagonal sampling over ``Omega_t`` extended by zero (``Omega`` when ``t = inf``)."""
    if math.isinf(t):
        return diag_sequence(a, omega, description)
    omega_t = exhaustion_domain(omega, t)

    def gen(n):
        m = selection_map(domain_grid(n, omega_t), domain_grid(n, omega))
        return extend(m, diag_sampling(m.small, a))

    sym = SymbolFn.from_space(a, omega.d, description).masked(omega_t.indicator, omega_t.name)
    return GltSequence(omega, gen, sym, True,
                       {"op": "extend", "t": t, "domain": omega.name,
                        "of": {"op": "diag", "symbol": description, "domain": omega_t.name}},
                       diagonal=True)


# ---------------------------------------------------------------------------
# isometry


def isometry_check(seq: GltSequence, n_list: Iterable, cells_per_axis: int = 512,
                   freq_per_axis: int = 16, sample_domain: DomainSpec | None = None) -> dict:
    """Compare ``p(A_n)`` with ``p_m`` of the tracked symbol on a dense sample.

    ``sample_domain`` defaults to the sequence domain and must have a finite
    extent (pass an exhaustion for unbounded domains).
    """
    prof = []
    for n in n_list:
        n = as_multi_index(n)
        prof.append((n, p_metric(singular_values(seq.matrix(n)))))
    if not prof:
        raise ValueError("empty n_list")
    dom = sample_domain or seq.domain
    if dom.extent is None:
        raise ConfigError(f"domain {dom.name!r} is unbounded; pass a bounded sample_domain")
    sample = sample_symbol_dense(seq.symbol, dom, cells_per_axis, freq_per_axis)
    pm = pm_metric(sample)
    gaps = [abs(p - pm) for _, p in prof]
    return {"d_acs_profile": prof, "d_m_value": pm, "gap": gaps[-1], "gaps": gaps}
