#!/usr/bin/env python3
"""Sweep the stability exponent over noise levels and bracket its zero.

The sign of the exponent lambda decides the fate of the coupled (x, y)
components: below the critical noise level they collapse onto the invariant
axis, above it they keep fluctuating.  This script tabulates two fast routes
to lambda over a range of noise levels and then lets the bisection search
bracket the crossing with each route, so the systematic gap between the
routes is visible next to the crossing each one implies.

Usage:
    python3 demos/sweep_stability_exponent.py [--grid 128x256] [--csv PATH]
"""

import argparse
import csv
import sys

from lorenzlab import Params, derive_constants, find_threshold
from lorenzlab.core import alpha_from_alpha_hat
from lorenzlab.estimators import heuristic_lambda
from lorenzlab.fokker_planck import lambda_pde


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grid", default="128x256",
                    help="theta x z resolution for the grid solve")
    ap.add_argument("--csv", default=None, help="optional output table")
    ns = ap.parse_args(argv)
    n_theta, n_z = (int(v) for v in ns.grid.lower().split("x"))

    p = Params()
    c = derive_constants(p)
    levels = [5.0, 10.0, 20.0, 25.0, 27.7, 30.0, 35.0, 40.0]

    print(f"stability exponent, sigma={p.sigma:g} beta={p.beta:g} "
          f"rho={p.rho:g} (grid {n_theta}x{n_z})")
    print(f"{'noise':>8} {'gaussian shortcut':>18} {'grid solve':>12}")
    rows = []
    for ahat in levels:
        alpha = alpha_from_alpha_hat(ahat, c)
        lam_h = heuristic_lambda(alpha, c)
        lam_g = lambda_pde(alpha, c, n_theta=n_theta, n_z=n_z).value
        rows.append((ahat, lam_h, lam_g))
        print(f"{ahat:8.1f} {lam_h:+18.6f} {lam_g:+12.6f}")

    print()
    for method in ("heuristic", "pde"):
        res = find_threshold(method, (20.0, 40.0), 0.02, 40, p=p, c=c)
        print(f"{method:>9} crossing: noise level {res.alpha_star_hat:.3f} "
              f"(bracket {res.bracket[0]:.3f}..{res.bracket[1]:.3f})")
    print("\nThe shortcut freezes z at its stationary Gaussian and ignores "
          "the theta-z correlation, which is why its crossing sits a couple "
          "of units below the grid solve's.")

    if ns.csv:
        with open(ns.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["alpha_hat", "lambda_heuristic", "lambda_pde"])
            w.writerows(rows)
        print(f"wrote {ns.csv}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
