"""Run every invariant suite over a (q, alpha) grid and print one CSV row per run."""

import argparse
import csv
import sys
import time

from treeharm import suites
from treeharm.measure import MeasureParams


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--qs", type=int, nargs="+", default=[2, 3])
    ap.add_argument("--alphas", type=float, nargs="+", default=[1.2, 1.5, 2.0, 3.0])
    ap.add_argument("--samples", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--suites", nargs="+", default=sorted(suites.SUITES), choices=sorted(suites.SUITES))
    args = ap.parse_args(argv)

    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["suite", "q", "alpha", "checks", "violations", "worst_quotient", "seconds"])
    for name in args.suites:
        for q in args.qs:
            for a in args.alphas:
                t0 = time.perf_counter()
                rep = suites.run_suite(name, MeasureParams.of(q, a), seed=args.seed, samples=args.samples)
                w.writerow([name, q, a, rep["checks"], rep["violation_count"], f"{rep['worst']:.6g}", f"{time.perf_counter() - t0:.2f}"])
                sys.stdout.flush()


if __name__ == "__main__":
    main()
