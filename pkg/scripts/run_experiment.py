"""Run the cusp diffusion experiment from a TOML config and print the W1 table.

    python3 scripts/run_experiment.py configs/default.toml --out out/experiment
"""
import argparse
import sys

from uglt.config import load_config
from uglt.pde import COEFFICIENTS, ModelProblem, run_experiment


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config", nargs="?", default=None)
    ap.add_argument("--out", default=None)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args(argv)
    cfg = load_config(args.config)
    problem = ModelProblem(cfg.domain_spec, COEFFICIENTS[cfg.coefficient], cfg.coefficient)
    rep = run_experiment(cfg.n_list, cfg.t_list, args.out or cfg.output_dir, problem,
                         cfg.caps.eig_dim, args.jobs)
    print(rep.summary_table())
    return 0


if __name__ == "__main__":
    sys.exit(main())
