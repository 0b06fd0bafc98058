"""Fourier tables, multilevel Toeplitz matrices and diagonal sampling matrices.

Conventions
-----------
* A *frequency function* is called as ``f(theta_1, ..., theta_d)`` on arrays
  and returns an array of the broadcast shape.
* A *space function* is called as ``a(x_1, ..., x_d)`` on coordinate arrays.
* Matrix rows and columns follow the lexicographic order of the grid.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, EvaluationError
from .grid import Grid, MultiIndex, as_multi_index, n_total

SPARSE_MAX_TERMS = 27


@dataclass(frozen=True, eq=False)
class FourierTable:
    """Fourier coefficients ``f_k`` for ``|k_j| <= cutoff_j``.

    ``coeffs`` is a dense complex array of shape ``2 * cutoff + 1`` where the
    entry at ``k + cutoff`` holds ``f_k``.
    """

    cutoff: tuple[int, ...]
    coeffs: np.ndarray
    source: str = "user"

    def __post_init__(self):
        shape = tuple(2 * k + 1 for k in self.cutoff)
        if self.coeffs.shape != shape:
            raise ConfigError(f"coefficient array shape {self.coeffs.shape} != {shape}")
        self.coeffs.setflags(write=False)

    @property
    def d(self) -> int:
        return len(self.cutoff)

    def coeff(self, k: Sequence[int]) -> complex:
        k = tuple(int(v) for v in k)
        if any(abs(a) > c for a, c in zip(k, self.cutoff)):
            return 0j
        return complex(self.coeffs[tuple(a + c for a, c in zip(k, self.cutoff))])

    def lookup(self, k: np.ndarray) -> np.ndarray:
        """Vectorised ``f_k`` for an ``(m, d)`` integer array (zero outside the table)."""
        k = np.atleast_2d(k)
        cut = np.asarray(self.cutoff)
        ok = np.all(np.abs(k) <= cut, axis=1)
        out = np.zeros(len(k), dtype=complex)
        if ok.any():
            out[ok] = self.coeffs[tuple((k[ok] + cut).T)]
        return out

    def nonzero(self) -> list[tuple[tuple[int, ...], complex]]:
        """The nonzero ``(k, f_k)`` pairs, in lexicographic order of ``k``."""
        idx = np.argwhere(self.coeffs != 0)
        cut = np.asarray(self.cutoff)
        return [(tuple(int(v) for v in row - cut), complex(self.coeffs[tuple(row)])) for row in idx]

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.coeffs.imag == 0))

    def is_conjugate_symmetric(self, tol: float = 1e-12) -> bool:
        """``f_{-k} = conj(f_k)``, i.e. the generating function is real-valued."""
        flipped = self.coeffs[(slice(None, None, -1),) * self.d]
        return bool(np.max(np.abs(flipped - np.conj(self.coeffs)), initial=0.0) <= tol)

    def conj_reflect(self) -> "FourierTable":
        """Table of ``conj(f)``, whose coefficients are ``conj(f_{-k})``."""
        flipped = np.conj(self.coeffs[(slice(None, None, -1),) * self.d])
        return FourierTable(self.cutoff, flipped.copy(), f"conj({self.source})")

    def combine(self, other: "FourierTable", alpha=1.0, beta=1.0) -> "FourierTable":
        """Coefficients of ``alpha f + beta g``."""
        if other.d != self.d:
            raise ConfigError("tables of different dimension")
        cut = tuple(max(a, b) for a, b in zip(self.cutoff, other.cutoff))
        out = np.zeros(tuple(2 * c + 1 for c in cut), dtype=complex)
        for tab, w in ((self, alpha), (other, beta)):
            sl = tuple(slice(c - k, c + k + 1) for c, k in zip(cut, tab.cutoff))
            out[sl] += w * tab.coeffs
        return FourierTable(cut, out, f"({alpha})*{self.source}+({beta})*{other.source}")

    def to_json(self) -> str:
        data = {
            "source": self.source,
            "cutoff": list(self.cutoff),
            "coeffs": {
                ",".join(map(str, k)): [v.real, v.imag] for k, v in self.nonzero()
            },
        }
        return json.dumps(data, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "FourierTable":
        data = json.loads(text)
        cut = tuple(data["cutoff"])
        arr = np.zeros(tuple(2 * c + 1 for c in cut), dtype=complex)
        for key, (re, im) in data["coeffs"].items():
            k = tuple(int(v) for v in key.split(","))
            arr[tuple(a + c for a, c in zip(k, cut))] = complex(re, im)
        return cls(cut, arr, data.get("source", "json"))


def table_from_dict(coeffs: dict[tuple[int, ...], complex], source: str = "user") -> FourierTable:
    """Build a table from a sparse ``{k: f_k}`` mapping."""
    if not coeffs:
        raise ConfigError("empty coefficient dictionary")
    d = len(next(iter(coeffs)))
    cut = tuple(max(abs(k[j]) for k in coeffs) for j in range(d))
    arr = np.zeros(tuple(2 * c + 1 for c in cut), dtype=complex)
    for k, v in coeffs.items():
        arr[tuple(a + c for a, c in zip(k, cut))] = v
    return FourierTable(cut, arr, source)


def fourier_coeffs(f: Callable, cutoff, quad_points, source: str = "user") -> FourierTable:
    """Fourier coefficients of ``f`` on ``[-pi, pi]^d`` by the periodic trapezoid rule.

    The rule is exact for trigonometric polynomials of degree at most
    ``cutoff``; aliasing is excluded by requiring ``quad_points >= 2*cutoff+2``.
    """
    cutoff = tuple(int(c) for c in np.atleast_1d(cutoff))
    quad = tuple(int(q) for q in np.broadcast_to(np.atleast_1d(quad_points), (len(cutoff),)))
    if any(c < 0 for c in cutoff):
        raise ConfigError("cutoff must be nonnegative")
    for c, q in zip(cutoff, quad):
        if q < 2 * c + 2:
            raise ConfigError(f"quadrature size {q} aliases cutoff {c}; need >= {2 * c + 2}")
    axes = [2 * np.pi * np.arange(q) / q for q in quad]
    mesh = np.meshgrid(*axes, indexing="ij")
    vals = np.asarray(f(*mesh), dtype=complex)
    vals = np.broadcast_to(vals, mesh[0].shape)
    if not np.all(np.isfinite(vals)):
        raise EvaluationError("frequency function returned non-finite values")
    spec = np.fft.fftn(vals) / math.prod(quad)
    # f_k sits at index k mod q
    sel = np.ix_(*[np.arange(-c, c + 1) % q for c, q in zip(cutoff, quad)])
    return FourierTable(cutoff, np.array(spec[sel]), source)


# ---------------------------------------------------------------------------
# symbols


@dataclass(frozen=True, eq=False)
class SymbolFn:
    """A symbol ``kappa(x, theta)`` as a composable closure.

    ``fn(x, theta)`` takes ``(k, d)`` arrays of space and frequency points and
    returns ``k`` values.  The flags record which arguments actually matter,
    which lets samplers skip redundant axes.
    """

    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    d: int
    depends_on_space: bool = True
    depends_on_freq: bool = True
    description: str = "kappa"
    real_valued: bool = True

    def __call__(self, x, theta) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        theta = np.atleast_2d(np.asarray(theta, dtype=float))
        k = max(len(x), len(theta))
        x = np.broadcast_to(x, (k, self.d))
        theta = np.broadcast_to(theta, (k, self.d))
        out = np.asarray(self.fn(x, theta))
        return np.broadcast_to(out, (k,)).copy()

    @classmethod
    def constant(cls, c: complex, d: int) -> "SymbolFn":
        real = complex(c).imag == 0
        val = float(np.real(c)) if real else complex(c)
        return cls(lambda x, th: np.full(len(x), val), d, False, False, repr(c), real)

    @classmethod
    def from_space(cls, a: Callable, d: int, description: str = "a(x)") -> "SymbolFn":
        return cls(lambda x, th: a(*x.T), d, True, False, description)

    @classmethod
    def from_freq(cls, f: Callable, d: int, description: str = "f(theta)",
                  real_valued: bool = True) -> "SymbolFn":
        return cls(lambda x, th: f(*th.T), d, False, True, description, real_valued)

    def _check(self, other: "SymbolFn"):
        if self.d != other.d:
            raise ConfigError("symbols of different dimension")

    def linear(self, other: "SymbolFn", alpha=1.0, beta=1.0) -> "SymbolFn":
        self._check(other)
        f, g = self.fn, other.fn
        return SymbolFn(
            lambda x, th: alpha * f(x, th) + beta * g(x, th),
            self.d,
            self.depends_on_space or other.depends_on_space,
            self.depends_on_freq or other.depends_on_freq,
            f"({alpha})*{self.description}+({beta})*{other.description}",
            self.real_valued and other.real_valued
            and complex(alpha).imag == 0 and complex(beta).imag == 0,
        )

    def __mul__(self, other: "SymbolFn") -> "SymbolFn":
        self._check(other)
        f, g = self.fn, other.fn
        return SymbolFn(
            lambda x, th: f(x, th) * g(x, th),
            self.d,
            self.depends_on_space or other.depends_on_space,
            self.depends_on_freq or other.depends_on_freq,
            f"{self.description}*{other.description}",
            self.real_valued and other.real_valued,
        )

    def conj(self) -> "SymbolFn":
        f = self.fn
        return SymbolFn(lambda x, th: np.conj(f(x, th)), self.d, self.depends_on_space,
                        self.depends_on_freq, f"conj({self.description})", self.real_valued)

    def reciprocal(self) -> "SymbolFn":
        """Pointwise inverse, with ``0`` mapped to ``0`` (pseudo-inverse convention)."""
        f = self.fn

        def inv(x, th):
            v = np.asarray(f(x, th))
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(v == 0, 0, 1 / np.where(v == 0, 1, v))

        return SymbolFn(inv, self.d, self.depends_on_space, self.depends_on_freq,
                        f"1/{self.description}", self.real_valued)

    def masked(self, indicator: Callable[[np.ndarray], np.ndarray], label: str) -> "SymbolFn":
        """``kappa * 1_E(x)``: the symbol extended by zero outside a region."""
        f = self.fn
        return SymbolFn(lambda x, th: np.where(indicator(x), f(x, th), 0), self.d, True,
                        self.depends_on_freq, f"{self.description}*1[{label}]", self.real_valued)


# ---------------------------------------------------------------------------
# matrices


def _shift(n: int, k: int):
    # entry (i, j) = 1 iff i - j = k
    return sp.eye(n, n, k=-k, dtype=complex, format="csr")


def toeplitz(n, table: FourierTable, sparse: bool | None = None):
    """Multilevel Toeplitz matrix ``T_n(f)`` with entries ``f_{i-j}``.

    Returned as CSR when the table has at most 27 nonzeros (or when
    ``sparse`` is forced), otherwise as a dense array.  Real tables give real
    matrices.
    """
    n = as_multi_index(n)
    if len(n) != table.d:
        raise ConfigError(f"n={n} does not match table dimension {table.d}")
    terms = table.nonzero()
    if sparse is None:
        sparse = len(terms) <= SPARSE_MAX_TERMS
    size = n_total(n)
    if sparse:
        mat = sp.csr_matrix((size, size), dtype=complex)
        for k, v in terms:
            if any(abs(kj) >= nj for kj, nj in zip(k, n)):
                continue
            block = _shift(n[0], k[0])
            for kj, nj in zip(k[1:], n[1:]):
                block = sp.kron(block, _shift(nj, kj), format="csr")
            mat = mat + v * block
        mat = mat.tocsr()
        mat.sum_duplicates()
        mat.eliminate_zeros()
        return mat.real.tocsr() if table.is_real else mat
    # dense: f_{i-j} from index differences
    axes = np.indices(n).reshape(len(n), -1).T
    diff = axes[:, None, :] - axes[None, :, :]
    vals = table.lookup(diff.reshape(-1, len(n))).reshape(size, size)
    return vals.real.copy() if table.is_real else vals


def diag_sampling(grid: Grid, a: Callable) -> sp.csr_matrix:
    """``diag(a(p))`` over the grid points in lexicographic order."""
    pts = grid.points
    vals = np.asarray(a(*pts.T)) if grid.dim else np.empty(0)
    vals = np.broadcast_to(vals, (grid.dim,)).copy()
    bad = ~np.isfinite(vals)
    if bad.any():
        p = tuple(float(v) for v in pts[np.argmax(bad)])
        raise EvaluationError(f"space function is not finite at grid point {p}")
    if np.iscomplexobj(vals) and np.all(vals.imag == 0):
        vals = vals.real
    return sp.diags(vals, 0, shape=(grid.dim, grid.dim), format="csr")


def reduced_toeplitz(grid: Grid, table: FourierTable, sparse: bool | None = None):
    """Toeplitz matrix seen through a grid: entry ``(p, q) = f_{n (p - q)}``.

    Equals ``Pi T Pi^T`` for any enclosing hypercube grid without forming the
    big matrix.
    """
    if grid.d != table.d:
        raise ConfigError(f"grid dimension {grid.d} does not match table {table.d}")
    terms = table.nonzero()
    if sparse is None:
        sparse = len(terms) <= SPARSE_MAX_TERMS
    dim = grid.dim
    dtype = float if table.is_real else complex
    if sparse:
        rows, cols, vals = [], [], []
        for k, v in terms:
            # column q has index i_p - k
            q = grid.locate(grid.index - np.asarray(k))
            hit = q >= 0
            rows.append(np.nonzero(hit)[0])
            cols.append(q[hit])
            vals.append(np.full(int(hit.sum()), v.real if table.is_real else v, dtype=dtype))
        if rows:
            r, c, w = np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
        else:
            r = c = np.empty(0, dtype=np.int64)
            w = np.empty(0, dtype=dtype)
        return sp.csr_matrix((w, (r, c)), shape=(dim, dim), dtype=dtype)
    diff = grid.index[:, None, :] - grid.index[None, :, :]
    out = table.lookup(diff.reshape(-1, grid.d)).reshape(dim, dim)
    return out.real.copy() if table.is_real else out


# ---------------------------------------------------------------------------
# registry of exact trigonometric polynomials


@dataclass(frozen=True)
class TrigEntry:
    name: str
    d: int
    table: FourierTable = field(repr=False)
    freq: Callable = field(repr=False)
    real_valued: bool = True

    def symbol(self) -> SymbolFn:
        return SymbolFn.from_freq(self.freq, self.d, self.name, self.real_valued)


def _lap1d() -> TrigEntry:
    return TrigEntry("lap1d", 1, table_from_dict({(0,): 2, (1,): -1, (-1,): -1}, "2-2cos"),
                     lambda t: 2 - 2 * np.cos(t))


def _lap2d() -> TrigEntry:
    tab = table_from_dict(
        {(0, 0): 4, (1, 0): -1, (-1, 0): -1, (0, 1): -1, (0, -1): -1}, "4-2cos-2cos"
    )
    return TrigEntry("lap2d", 2, tab, lambda t1, t2: 4 - 2 * np.cos(t1) - 2 * np.cos(t2))


def _shift1d() -> TrigEntry:
    # e^{i theta} = sum_k f_k e^{ik theta} with only f_1 = 1
    return TrigEntry("shift", 1, table_from_dict({(1,): 1}, "exp(i theta)"),
                     lambda t: np.exp(1j * t), real_valued=False)


def _one(d: int = 1) -> TrigEntry:
    return TrigEntry(f"one{d}" if d != 1 else "one", d,
                     table_from_dict({(0,) * d: 1}, "1"),
                     lambda *t: np.ones(np.broadcast(*t).shape))


_TRIG = {"lap1d": _lap1d, "lap2d": _lap2d, "shift": _shift1d, "one": _one}


def trig_names() -> list[str]:
    return sorted(_TRIG)


def get_trig(name: str, **params) -> TrigEntry:
    """Registered trigonometric polynomial (exact Fourier table plus closure)."""
    if name not in _TRIG:
        raise ConfigError(f"unknown symbol {name!r}; known: {', '.join(trig_names())}")
    try:
        return _TRIG[name](**params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for symbol {name!r}: {exc}") from None
