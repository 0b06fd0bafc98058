"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 size cap exceeded,
4 acceptance or identity check failed.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import acceptance
from .algebra import diag_sequence, gacs_decompose, isometry_check
from .config import RunConfig, load_config
from .errors import ConfigError, GltError, SizeLimitError
from .generators import get_trig, reduced_toeplitz, toeplitz
from .grid import domain_grid, enclosing_hypercube, exhaustion_domain, grid_dim, hypercube_grid, n_total
from .pde import COEFFICIENTS, ModelProblem, _label, oracle_w1, run_experiment
from .selection import gram_identities, restrict, selection_map
from .spectral import quantiles, sym_eigenvalues

EXIT_OK, EXIT_CONFIG, EXIT_CAP, EXIT_FAIL = 0, 2, 3, 4


def _fmt(v) -> str:
    if isinstance(v, float):
        return "inf" if math.isinf(v) else f"{v:.17g}"
    return str(v)


def _emit(rows: list[list], header: list[str], out_dir: Path | None, name: str) -> None:
    text = "\n".join([",".join(header)] + [",".join(_fmt(v) for v in r) for r in rows]) + "\n"
    sys.stdout.write(text)
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        tmp = out_dir / (name + ".tmp")
        tmp.write_text(text)
        os.replace(tmp, out_dir / name)


def _out(args, cfg: RunConfig) -> Path | None:
    return Path(args.out) if args.out else None


# ---------------------------------------------------------------------------


def cmd_dims(args, cfg: RunConfig) -> int:
    dom = cfg.domain_spec

    def row(n):
        d = grid_dim(n, dom)
        return [_label(n), d, d / n_total(n), dom.measure]

    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        rows = list(pool.map(row, cfg.n_list))
    _emit(rows, ["n", "dim", "ratio", "measure"], _out(args, cfg), "dims.csv")
    return EXIT_OK


def cmd_toeplitz(args, cfg: RunConfig) -> int:
    entry = get_trig(cfg.symbol, **cfg.symbol_params)
    rows = []
    for n in cfg.n_list:
        n = n[: entry.d] if len(n) >= entry.d else n
        T = toeplitz(n, entry.table)
        herm = entry.table.is_conjugate_symmetric()
        row = [_label(n), T.shape[0], T.nnz if hasattr(T, "nnz") else int(np.count_nonzero(T)), herm]
        if herm and T.shape[0] <= cfg.caps.eig_dim:
            ev = sym_eigenvalues(T, cap=cfg.caps.eig_dim).values
            row += [float(ev[0]), float(ev[-1])]
        else:
            row += ["", ""]
        rows.append(row)
    out = _out(args, cfg)
    _emit(rows, ["n", "dim", "nnz", "hermitian", "lambda_min", "lambda_max"], out, "toeplitz.csv")
    if out is not None:
        (out / f"fourier_{cfg.symbol}.json").write_text(entry.table.to_json() + "\n")
    return EXIT_OK


def cmd_restrict_check(args, cfg: RunConfig) -> int:
    dom = cfg.domain_spec
    entry = get_trig(cfg.symbol, **cfg.symbol_params)
    if entry.d != dom.d:
        raise ConfigError(f"symbol {cfg.symbol!r} is {entry.d}-d, domain {dom.name!r} is {dom.d}-d")
    rows, ok = [], True
    for n in cfg.n_list:
        g = domain_grid(n, dom)
        cube = enclosing_hypercube(g)
        m = selection_map(g, hypercube_grid(n, cube))
        T = toeplitz(tuple(cube.side * v for v in n), entry.table)
        R = restrict(m, T)
        diff = abs(R - reduced_toeplitz(g, entry.table)).max() if g.dim else 0.0
        gram = gram_identities(m)
        good = gram["left"] and diff <= 1e-14
        ok &= good
        rows.append([_label(n), g.dim, m.big.dim, gram["left"], gram["right_diag_defect"],
                     float(diff), "pass" if good else "fail"])
    _emit(rows, ["n", "dim", "big_dim", "pipt_identity", "right_diag_defect",
                 "max_abs_diff", "status"], _out(args, cfg), "restrict_check.csv")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_experiment(args, cfg: RunConfig) -> int:
    out = Path(args.out or cfg.output_dir)
    a = COEFFICIENTS[cfg.coefficient]
    problem = ModelProblem(cfg.domain_spec, a, cfg.coefficient)
    rep = run_experiment(cfg.n_list, cfg.t_list, out, problem, cfg.caps.eig_dim,
                         _jobs_within_budget(args.jobs, cfg))
    sys.stdout.write(rep.summary_table() + "\n")
    if cfg.coefficient == "one" and cfg.domain == "unit_square":
        rows = [[_label(n), oracle_w1(n[0])] for n in cfg.n_list]
        text = "n,w1_vs_closed_form\n" + "\n".join(f"{r[0]},{_fmt(r[1])}" for r in rows) + "\n"
        (out / "oracle.csv").write_text(text)
        sys.stdout.write(text)
    if args.emit_svg:
        _emit_svg(out, rep)
    return EXIT_OK


def _jobs_within_budget(jobs: int, cfg: RunConfig) -> int:
    """Cap parallel eigensolves so that dense copies fit in ``memory_mb``."""
    biggest = max(grid_dim(n, cfg.domain_spec) for n in cfg.n_list)
    per_job_mb = max(1.0, 3 * 8 * biggest**2 / 2**20)
    return max(1, min(jobs, int(cfg.caps.memory_mb // per_job_mb)))


def _emit_svg(out: Path, rep) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    for path in sorted(out.glob("eigenvalues_*.csv")):
        if path.stem.endswith("_reduced"):
            continue
        tag = path.stem[len("eigenvalues_"):]
        eig = np.loadtxt(path, comments="#", skiprows=1, ndmin=1)
        sym = np.loadtxt(out / f"symbol_samples_{tag}.csv", comments="#", skiprows=1, ndmin=1)
        fig, ax = plt.subplots(figsize=(5, 3.5))
        u = (np.arange(len(sym)) + 0.5) / len(sym)
        ax.plot(u, quantiles(eig, len(sym)), label="eigenvalues")
        ax.plot(u, sym, "--", label="symbol samples")
        ax.set_xlabel("quantile")
        ax.legend()
        ax.set_title(tag)
        fig.tight_layout()
        fig.savefig(out / f"quantiles_{tag}.svg", metadata={"Date": None})
        plt.close(fig)


def cmd_isometry(args, cfg: RunConfig) -> int:
    a = COEFFICIENTS[cfg.coefficient]
    dom = cfg.domain_spec
    scale = 10.0 if cfg.coefficient == "builtin" else 1.0
    seq = diag_sequence(lambda x, y: a(x, y) / scale, dom, f"{cfg.coefficient}/{scale:g}")
    # unbounded domains are sampled on a large exhaustion, which holds every grid point used
    sample_dom = dom if dom.bounded else exhaustion_domain(dom, 16.0)
    rep = isometry_check(seq, cfg.n_list, sample_domain=sample_dom)
    rows = [[_label(n), p, rep["d_m_value"], g]
            for (n, p), g in zip(rep["d_acs_profile"], rep["gaps"])]
    _emit(rows, ["n", "p_acs", "p_measure", "gap"], _out(args, cfg), "isometry.csv")
    return EXIT_OK


def cmd_gacs(args, cfg: RunConfig) -> int:
    seq = acceptance.model_sequence(cfg.domain_spec, COEFFICIENTS[cfg.coefficient])
    rows, ok = [], True
    for n in cfg.n_list:
        for t in cfg.t_list:
            _, c, _ = gacs_decompose(seq, t, n)
            ok &= c.certified
            rows.append([_label(n), t, c.dim, c.dim_defect, c.rank_correction, c.norm_correction,
                         c.m, c.c, "pass" if c.certified else "fail"])
    _emit(rows, ["n", "t", "dim", "dim_defect", "rank_correction", "norm_correction",
                 "m_t", "c_t", "status"], _out(args, cfg), "gacs.csv")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_verify(args, cfg: RunConfig) -> int:
    selected = [int(k) for k in args.only.split(",")] if args.only else None
    verdicts = acceptance.run_all(selected, args.inject_fault)
    for v in verdicts:
        sys.stderr.write(acceptance.format_line(v) + "\n")
    slim = [{k: v[k] for k in ("criterion", "status", "measured", "threshold", "failed_checks")}
            for v in verdicts]
    text = json.dumps(slim, indent=2, default=float)
    sys.stdout.write(text + "\n")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "verdict.json").write_text(text + "\n")
    return EXIT_OK if all(v["status"] == "pass" for v in verdicts) else EXIT_FAIL


COMMANDS = {
    "dims": (cmd_dims, "grid dimensions d_n and the ratio d_n / N(n)"),
    "toeplitz": (cmd_toeplitz, "build multilevel Toeplitz matrices of a registered symbol"),
    "restrict-check": (cmd_restrict_check, "check restriction identities on a domain"),
    "experiment": (cmd_experiment, "eigenvalues versus symbol samples for the diffusion model"),
    "isometry": (cmd_isometry, "compare p(D_n(a)) with the measure pseudo-metric of a"),
    "gacs": (cmd_gacs, "exhaustion certificates for the diffusion model"),
    "verify": (cmd_verify, "run the acceptance suite"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uglt", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML configuration file")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--emit-svg", action="store_true", help="write quantile plots (experiment)")
    common.add_argument("--domain", default=None, help="registry name, overrides the config")
    common.add_argument("--symbol", default=None, help="registry name, overrides the config")
    common.add_argument("--coefficient", default=None, help="builtin or one")
    common.add_argument("--n", action="append", default=None, metavar="M[,M...]",
                        help="refinement; repeat for a list")
    common.add_argument("--t", action="append", default=None, type=str,
                        help="exhaustion parameter; repeat for a list")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        p = sub.add_parser(name, help=help_, parents=[common])
        if name == "verify":
            p.add_argument("--only", default=None, help="comma-separated criterion numbers")
            p.add_argument("--inject-fault", default=None, choices=["asymmetry"],
                           help="negative control: corrupt a test matrix")
    return parser


def _n_arg(values, d: int):
    if values is None:
        return None
    out = []
    for v in values:
        parts = [int(x) for x in v.split(",")]
        out.append(tuple(parts) if len(parts) > 1 else (parts[0],) * d)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        d = 1 if args.symbol in ("lap1d", "shift") else 2
        cfg = load_config(args.config, domain=args.domain, symbol=args.symbol,
                          coefficient=args.coefficient, seed=args.seed,
                          n_list=_n_arg(args.n, d), t_list=args.t)
        np.random.seed(cfg.seed)
        return COMMANDS[args.command][0](args, cfg)
    except ConfigError as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return EXIT_CONFIG
    except SizeLimitError as exc:
        sys.stderr.write(f"size cap exceeded: {exc}\n")
        return EXIT_CAP
    except GltError as exc:
        sys.stderr.write(f"check failed: {exc}\n")
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
