"""Tabulate d_n / N(n) against the domain measure for a range of square refinements.

    python3 scripts/dims_sweep.py --domain cusp --m 64 128 256 512
"""
import argparse

from uglt.grid import domain_measure, get_domain, grid_dim


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--domain", default="cusp")
    ap.add_argument("--m", type=int, nargs="+", default=[16, 32, 64, 128, 256, 512])
    args = ap.parse_args(argv)
    dom = get_domain(args.domain)
    target = domain_measure(dom)
    print("m,dim,ratio,measure,abs_error")
    for m in args.m:
        d = grid_dim((m, m), dom)
        print(f"{m},{d},{d / m**2:.6f},{target:.6f},{abs(d / m**2 - target):.6f}")


if __name__ == "__main__":
    main()
