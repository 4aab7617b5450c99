"""How far below N_p the observed Fefferman-Stein quotients sit.

For each (q, alpha, p) prints N_p and the largest ||f||_p / ||M#f||_p seen
over random tail-constant functions.
"""

import argparse

import numpy as np

from treeharm import czmax, suites
from treeharm.measure import MeasureParams


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    print(f"{'q':>2} {'alpha':>5} {'p':>4} {'N_p':>10} {'worst':>10} {'N_p/worst':>10}")
    for q in (2, 3):
        for a in (1.2, 1.5, 2.0, 3.0):
            mp = MeasureParams.of(q, a)
            for p in (1.5, 2.0, 4.0):
                worst = 0.0
                for rng in suites.sample_rngs(args.seed, args.samples):
                    rep = czmax.fefferman_stein_check(mp, suites.sample_function(mp.tree, rng), p)
                    if rep.applicable:
                        worst = max(worst, rep.function_quotient)
                Np = czmax.fefferman_stein_constant(mp, p)
                print(f"{q:>2} {a:>5} {p:>4} {Np:>10.4g} {worst:>10.4g} {Np / worst if worst else np.inf:>10.3g}")


if __name__ == "__main__":
    main()
