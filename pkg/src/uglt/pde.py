"""Variable-coefficient diffusion on the cusp domain and its spectral experiment.

The operator ``-div(a grad u)`` with homogeneous Dirichlet data is
discretised by the five-point finite-difference stencil with the
coefficient sampled at edge midpoints (no ``h^2`` scaling).  Its symbol is
``a(x) (4 - 2 cos theta_1 - 2 cos theta_2)``, which is all the spectral
experiment depends on.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, SizeLimitError
from .generators import SymbolFn
from .grid import DomainSpec, as_multi_index, domain_grid, exhaustion_domain, get_domain
from .selection import extend, permutation_completion, selection_map
from .spectral import (EIG_CAP, QUANTILES, quantiles, relative_w1, sample_symbol_on_grid,
                       sym_eigenvalues, w1_distance)

DEFAULT_N = ((16, 16), (24, 24), (32, 32), (40, 40))
DEFAULT_T = (2.0, 4.0, 8.0)
FIVE_POINT = "4-2cos(t1)-2cos(t2)"


def builtin_coefficient(x, y):
    """(10 + x^2 + 2 y^2 + sin^2(x + y)) / (1 + x^2 + y^2), which lies in (1, 10]."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return (10 + x**2 + 2 * y**2 + np.sin(x + y) ** 2) / (1 + x**2 + y**2)


def unit_coefficient(x, y):
    return np.ones(np.broadcast(np.asarray(x), np.asarray(y)).shape)


COEFFICIENTS: dict[str, Callable] = {"builtin": builtin_coefficient, "one": unit_coefficient}


def cusp_indicator(x, y):
    """x > 0, y > 0 and y < g(x) with g = 1 on (0, 1) and 1/x^2 beyond."""
    pts = np.stack(np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float)), axis=-1)
    out = get_domain("cusp").indicator(pts.reshape(-1, 2)).reshape(pts.shape[:-1])
    return bool(out) if out.ndim == 0 else out


def laplace_symbol(a: Callable, description: str = "a") -> SymbolFn:
    """``a(x) (4 - 2 cos theta_1 - 2 cos theta_2)``."""
    return SymbolFn(lambda x, th: a(x[:, 0], x[:, 1]) * (4 - 2 * np.cos(th[:, 0]) - 2 * np.cos(th[:, 1])),
                    2, True, True, f"{description}*({FIVE_POINT})")


@dataclass(frozen=True, eq=False)
class ModelProblem:
    """Diffusion problem on a planar domain, discretised by ``fd_midpoint``."""

    domain: DomainSpec = field(default_factory=lambda: get_domain("cusp"))
    coefficient: Callable = builtin_coefficient
    coefficient_name: str = "builtin"
    scheme: str = "fd_midpoint"

    @property
    def symbol(self) -> SymbolFn:
        return laplace_symbol(self.coefficient, self.coefficient_name)

    def check_positivity(self, samples: int = 100_000, seed: int = 0, x_max: float = 8.0) -> float:
        """Smallest coefficient value over seeded samples of the domain (truncated at ``x_max``)."""
        rng = np.random.default_rng(seed)
        ext = self.domain.extent or ((0.0, x_max), (0.0, 1.0))
        lo = np.array([e[0] for e in ext])
        hi = np.array([e[1] for e in ext])
        vals = []
        got = 0
        while got < samples:
            pts = lo + (hi - lo) * rng.random((samples, 2))
            pts = pts[self.domain.indicator(pts)][: samples - got]
            vals.append(self.coefficient(pts[:, 0], pts[:, 1]))
            got += len(pts)
        low = float(np.min(np.concatenate(vals)))
        if not low > 0:
            raise ConfigError(f"coefficient is not positive on the domain (min {low})")
        return low

    def matrix(self, n, region: DomainSpec | None = None) -> sp.csr_matrix:
        return assemble(n, region or self.domain, self.coefficient)


def assemble(n, region: DomainSpec, a: Callable) -> sp.csr_matrix:
    """Five-point midpoint-coefficient stencil on the grid of ``region``.

    Diagonal: sum of ``a`` at the four edge midpoints.  Off-diagonal:
    ``-a(midpoint)`` for neighbours inside the grid.  Neighbours outside the
    grid are Dirichlet nodes and only contribute to the diagonal.
    """
    n = as_multi_index(n)
    if len(n) != 2 or n[0] != n[1]:
        raise ConfigError(f"the stencil needs a square lattice n = (m, m), got {n}")
    grid = domain_grid(n, region)
    dim = grid.dim
    if dim == 0:
        return sp.csr_matrix((0, 0))
    m = n[0]
    idx = grid.index
    diag = np.zeros(dim)
    rows, cols, vals = [], [], []
    for axis in range(2):
        for step in (1, -1):
            e = np.zeros(2, dtype=np.int64)
            e[axis] = step
            mid = (idx + 0.5 * e) / m
            w = np.asarray(a(mid[:, 0], mid[:, 1]), dtype=float)
            w = np.broadcast_to(w, (dim,))
            diag += w
            q = grid.locate(idx + e)
            hit = q >= 0
            rows.append(np.nonzero(hit)[0])
            cols.append(q[hit])
            vals.append(-w[hit])
    rows.append(np.arange(dim))
    cols.append(np.arange(dim))
    vals.append(diag)
    A = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(dim, dim))
    A.sort_indices()
    return A


def closed_form_laplacian(m: int) -> np.ndarray:
    """Eigenvalues of the 5-point Laplacian on the ``(m-1)^2`` interior lattice, sorted."""
    c = 2 - 2 * np.cos(np.arange(1, m) * np.pi / m)
    return np.sort((c[:, None] + c[None, :]).ravel())


def _label(n) -> str:
    """``m`` for an isotropic ``(m, ..., m)``, otherwise the entries joined by ``x``."""
    n = tuple(n)
    return str(n[0]) if len(set(n)) == 1 else "x".join(map(str, n))


def _t_label(t: float) -> str:
    return "inf" if math.isinf(t) else f"{t:g}"


def _fmt(v) -> str:
    if isinstance(v, float):
        return "inf" if math.isinf(v) else f"{v:.17g}"
    return str(v)


@dataclass
class ExperimentReport:
    rows: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def summary_table(self) -> str:
        cols = ["n", "t", "dim", "dim_defect", "zero_fraction", "w1_eigs_vs_symbol"]
        lines = [",".join(cols)]
        for r in self.rows:
            lines.append(",".join(_fmt(r[c]) for c in cols))
        return "\n".join(lines)


def _write_values(path: Path, values, meta: dict) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", newline="") as fh:
        for k in sorted(meta):
            fh.write(f"# {k}={meta[k]}\n")
        fh.write("value\n")
        for v in np.asarray(values).ravel():
            fh.write(f"{float(v):.17g}\n")
    os.replace(tmp, path)


def _run_one_n(problem: ModelProblem, n, t_list, eig_cap: int, out: Path | None,
               freq_per_axis=None) -> list[dict]:
    omega = problem.domain
    big = domain_grid(n, omega)
    if big.dim > eig_cap:
        raise SizeLimitError(f"n={n}, t=inf: dimension {big.dim} exceeds eigen cap {eig_cap}")
    A = problem.matrix(n)
    eig_a = sym_eigenvalues(A, cap=eig_cap).values
    sym = problem.symbol
    samp = sample_symbol_on_grid(sym, big, freq_per_axis).values
    rows = [{
        "n": _label(n), "t": math.inf, "dim": big.dim, "dim_defect": 0,
        "zero_fraction": float(np.count_nonzero(eig_a == 0)) / big.dim,
        "w1_eigs_vs_symbol": w1_distance(eig_a, samp),
        "w1_relative": relative_w1(eig_a, samp),
        "dim_t": big.dim,
    }]
    if out is not None:
        meta = {"n": _label(n), "t": "inf", "dim": big.dim, "matrix": "A_n",
                "scheme": problem.scheme, "coefficient": problem.coefficient_name}
        _write_values(out / f"eigenvalues_{_label(n)}_inf.csv", eig_a, meta)
        _write_values(out / f"symbol_samples_{_label(n)}_inf.csv", quantiles(samp, QUANTILES),
                      {**meta, "symbol": sym.description, "quantiles": QUANTILES,
                       "samples": len(samp)})
    for t in t_list:
        omega_t = exhaustion_domain(omega, t)
        small = domain_grid(n, omega_t)
        if small.dim > eig_cap:
            raise SizeLimitError(f"n={n}, t={t}: dimension {small.dim} exceeds eigen cap {eig_cap}")
        B = problem.matrix(n, omega_t)
        smap = selection_map(small, big)
        EB = extend(smap, B)
        # P^T E(B) P = blockdiag(B, 0), so the spectrum of E(B) is that of B plus zeros
        perm = permutation_completion(smap)
        blk = perm.apply(EB)
        if (blk[: small.dim, : small.dim] != B).nnz or blk[small.dim:].nnz:
            raise RuntimeError("permutation completion failed to block-diagonalise E(B)")
        eig_b = sym_eigenvalues(B, cap=eig_cap).values
        eig_eb = np.sort(np.concatenate([eig_b, np.zeros(big.dim - small.dim)]))
        masked = sym.masked(omega_t.indicator, omega_t.name)
        samp_t = sample_symbol_on_grid(masked, big, freq_per_axis).values
        defect = big.dim - small.dim
        zeros = int(np.count_nonzero(eig_eb == 0)) - int(np.count_nonzero(eig_b == 0))
        rows.append({
            "n": _label(n), "t": float(t), "dim": big.dim, "dim_defect": defect,
            "zero_fraction": zeros / big.dim,
            "w1_eigs_vs_symbol": w1_distance(eig_eb, samp_t),
            "w1_relative": relative_w1(eig_eb, samp_t),
            "dim_t": small.dim,
        })
        if out is not None:
            meta = {"n": _label(n), "t": _t_label(t), "dim": big.dim, "dim_t": small.dim,
                    "matrix": "E(B_n_t)", "scheme": problem.scheme,
                    "coefficient": problem.coefficient_name}
            _write_values(out / f"eigenvalues_{_label(n)}_{_t_label(t)}.csv", eig_eb, meta)
            _write_values(out / f"eigenvalues_{_label(n)}_{_t_label(t)}_reduced.csv", eig_b,
                          {**meta, "matrix": "B_n_t", "dim": small.dim})
            _write_values(out / f"symbol_samples_{_label(n)}_{_t_label(t)}.csv",
                          quantiles(samp_t, QUANTILES),
                          {**meta, "symbol": masked.description, "quantiles": QUANTILES,
                           "samples": len(samp_t)})
    return rows


def run_experiment(n_list: Sequence = DEFAULT_N, t_list: Sequence[float] = DEFAULT_T,
                   outputs: str | os.PathLike | None = None,
                   problem: ModelProblem | None = None, eig_cap: int = EIG_CAP,
                   jobs: int = 1, freq_per_axis=None) -> ExperimentReport:
    """Spectra of ``A_n``, ``B_{n,t}`` and ``E(B_{n,t})`` against symbol samples.

    Writes ``eigenvalues_{n}_{t}.csv``, ``symbol_samples_{n}_{t}.csv`` and
    ``w1_summary.csv`` into ``outputs`` when given.  Rows are ordered by
    ``n`` and, within each ``n``, ``t = inf`` first.
    """
    problem = problem or ModelProblem()
    n_list = [as_multi_index(n) for n in n_list]
    if not n_list:
        raise ConfigError("n_list is empty")
    out = Path(outputs) if outputs is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    # fail fast on caps before any heavy work
    for n in n_list:
        d = domain_grid(n, problem.domain).dim
        if d > eig_cap:
            raise SizeLimitError(f"n={n}, t=inf: dimension {d} exceeds eigen cap {eig_cap}")
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(lambda n: _run_one_n(problem, n, t_list, eig_cap, out,
                                                       freq_per_axis), n_list))
    else:
        parts = [_run_one_n(problem, n, t_list, eig_cap, out, freq_per_axis) for n in n_list]
    report = ExperimentReport([r for part in parts for r in part])
    if out is not None:
        tmp = out / "w1_summary.csv.tmp"
        with open(tmp, "w", newline="") as fh:
            fh.write(report.summary_table() + "\n")
        os.replace(tmp, out / "w1_summary.csv")
    return report


def oracle_w1(m: int) -> float:
    """W1 between the assembled a = 1 unit-square spectrum and its closed form."""
    A = assemble((m, m), get_domain("unit_square"), unit_coefficient)
    return w1_distance(sym_eigenvalues(A).values, closed_form_laplacian(m))
