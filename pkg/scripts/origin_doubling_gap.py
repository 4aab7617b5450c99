"""Compare C_alpha with the worst doubling ratio on a grid of (q, alpha).

The pair B(o, r) = {o}, B(o, 2r) = X has ratio mu(X), which exceeds
C_alpha = max(q^alpha + 1, 1/(1 - q^(1-alpha))) when alpha is close to 1.
"""

import argparse
import csv
import sys

import numpy as np

from treeharm import measure
from treeharm.measure import MeasureParams


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--qs", type=int, nargs="+", default=[2, 3, 4])
    ap.add_argument("--alphas", type=float, nargs="+", default=list(np.round(np.linspace(1.05, 3.0, 14), 3)))
    ap.add_argument("--max-depth", type=int, default=5)
    args = ap.parse_args(argv)

    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["q", "alpha", "C_alpha", "mu_X", "sharp_constant", "worst_ratio", "witness_x", "witness_r", "passes_C_alpha"])
    for q in args.qs:
        for a in args.alphas:
            mp = MeasureParams.of(q, float(a))
            rep = measure.verify_doubling(mp, args.max_depth)
            x, r = rep.witness
            w.writerow(
                [q, a, f"{rep.constant:.6g}", f"{measure.total_mass(mp):.6g}", f"{measure.sharp_doubling_constant(mp):.6g}",
                 f"{rep.worst_ratio:.6g}", x, f"{r:.6g}", rep.passed]
            )


if __name__ == "__main__":
    main()
