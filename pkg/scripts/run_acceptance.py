"""Run the invariant suite on the standard parameter sets and print a verdict table."""

import argparse
import json
import sys
import time

from qbirthdeath.qcore import GridWindow, make_params
from qbirthdeath.verify import CHECKS, make_context, run_suite

STANDARD = [("0.5", "0"), ("0.5", "1.5"), ("0.4", "-0.5")]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--params", nargs=2, action="append", metavar=("Q", "NU"), help="repeatable; default: standard sets")
    ap.add_argument("--window", help="LO:HI (use --window=LO:HI for negative LO)")
    ap.add_argument("--seed", type=int, default=20261018)
    ap.add_argument("--checks", help=f"comma-separated subset of {', '.join(CHECKS)}")
    ap.add_argument("--json", help="write all reports to this path")
    args = ap.parse_args()

    names = args.checks.split(",") if args.checks else None
    everything, ok = [], True
    for q, nu in args.params or STANDARD:
        p = make_params(q, nu)
        window = GridWindow.parse(args.window) if args.window else None
        start = time.perf_counter()
        rep = run_suite(make_context(p, window, seed=args.seed), names)
        print(f"q={p.q} nu={p.nu} window={rep.window} ({time.perf_counter() - start:.1f} s)")
        for r in rep.results:
            d = r.as_dict()
            print(f"  {'PASS' if r.passed else 'FAIL'}  {r.name:<20} {d['defect']:>14}  <= {d['tolerance']}")
        ok &= rep.passed
        everything.append({"q": str(p.q), "nu": str(p.nu), "window": str(rep.window),
                           "checks": [r.as_dict() for r in rep.results]})
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(everything, fh, indent=2)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
