"""Integrable phase-space fraction of the mushroom as the stalk height varies.

Writes t, closed-form d, Monte Carlo estimate and its standard error as CSV.
"""
import argparse
import csv
import sys

import numpy as np

from qelab.billiard import MushroomParams, liouville_fractions, monte_carlo_fractions


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--r1", type=float, default=1.0)
    ap.add_argument("--r2", type=float, default=2.0)
    ap.add_argument("--ts", type=float, nargs="+", default=list(np.linspace(0.25, 2.0, 8)))
    ap.add_argument("--samples", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["t", "d", "d_hat", "stderr"])
    for t in a.ts:
        p = MushroomParams(a.r1, a.r2, t)
        mc = monte_carlo_fractions(p, a.samples, a.seed)
        w.writerow([repr(float(t)), repr(liouville_fractions(p).d), repr(mc.d_hat), repr(mc.stderr)])


if __name__ == "__main__":
    main()
