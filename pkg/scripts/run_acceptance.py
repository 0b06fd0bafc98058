"""Run the acceptance criteria and print one PASS/FAIL line each.

    python3 scripts/run_acceptance.py            # all criteria
    python3 scripts/run_acceptance.py 3 6        # a subset
"""
import argparse
import sys

from uglt import acceptance


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("criteria", nargs="*", type=int)
    args = ap.parse_args(argv)
    verdicts = acceptance.run_all(args.criteria or None)
    for v in verdicts:
        print(f"{acceptance.format_line(v)} ({v['seconds']:.1f}s)")
    return 0 if all(v["status"] == "pass" for v in verdicts) else 1


if __name__ == "__main__":
    sys.exit(main())
