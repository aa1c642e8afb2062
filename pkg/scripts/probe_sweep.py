"""Translation positivity probe over a grid of q for one order nu.

For each q the probe is reported as pass, fail (a certified negative entry)
or inconclusive (nothing certified on the window).
"""

import argparse
import sys

import numpy as np

from qbirthdeath.config import DEFAULT_PROBE_INDICES
from qbirthdeath.qcore import GridWindow, default_window, make_params
from qbirthdeath.qfourier import positivity_probe


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nu", default="-0.5")
    ap.add_argument("--q-min", type=float, default=0.3)
    ap.add_argument("--q-max", type=float, default=0.6)
    ap.add_argument("--steps", type=int, default=7)
    ap.add_argument("--window", help="LO:HI, default per q")
    ap.add_argument("--precision-bits", type=int, default=192)
    args = ap.parse_args()

    print("q,verdict,checked,uncertified,min_relative,raw_min_relative")
    for qv in np.linspace(args.q_min, args.q_max, args.steps):
        q = f"{qv:.4f}"
        p = make_params(q, args.nu, args.precision_bits)
        window = GridWindow.parse(args.window) if args.window else default_window(p)
        rep = positivity_probe(p, window, DEFAULT_PROBE_INDICES)
        verdict = "inconclusive" if not rep.conclusive else ("pass" if rep.passed else "fail")
        print(f"{q},{verdict},{rep.checked},{rep.uncertified},{float(rep.min_relative):.3e},"
              f"{float(rep.raw_min_relative):.3e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
