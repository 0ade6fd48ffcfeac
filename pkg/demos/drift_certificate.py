#!/usr/bin/env python3
"""Build the two drift certificates at a supercritical noise level.

Chains the whole verification pipeline: stationary solve on the angular
strip, corrector equation, constant selection, then lattice sweeps of the
two drift inequalities (the axis-neighborhood functional and the global
coercive one).  Prints every constant the construction commits to and the
fitted margins, so a change anywhere upstream shows up as a changed number
here.

Usage:
    python3 demos/drift_certificate.py [noise_level]
"""

import sys

from lorenzlab import (Params, build_operator, default_grid,
                       derive_constants, lambda_from_measure,
                       make_g_interpolator, select_constants, solve_poisson,
                       stationary_measure, verify_drift_V0, verify_drift_full)
from lorenzlab.core import alpha_from_alpha_hat


def main(ahat: float) -> int:
    p = Params()
    c = derive_constants(p)
    alpha = alpha_from_alpha_hat(ahat, c)

    grid = default_grid(c, alpha)
    op = build_operator(grid, c, alpha)
    mu = stationary_measure(op)
    lam = lambda_from_measure(mu)
    print(f"noise level {ahat:g}: exponent lambda = {lam:+.6f} "
          f"on {grid.n_theta}x{grid.n_z}")

    g = solve_poisson(op, mu, lam=lam)
    gi = make_g_interpolator(g)
    k = select_constants(lam, alpha, c, g)
    print("selected constants:")
    for name in ("eps_alpha", "Gamma", "kappa", "delta", "c_alpha", "c_bar"):
        print(f"  {name:>9} = {getattr(k, name):.6e}")

    axis = verify_drift_V0(k, gi, c=c, alpha=alpha)
    print(f"axis drift sweep: passed={axis.passed} "
          f"d={axis.fitted['d']:.4e} worst_margin={axis.worst_margin:+.4e}")

    full = verify_drift_full(k, gi, p=p, c=c, alpha=alpha)
    print(f"full drift sweep: passed={full.passed} "
          f"c={full.fitted['c']:.4f} K={full.fitted['K']:.2f}")
    print("\nBoth margins negative means every lattice point satisfies its "
          "inequality with room to spare; d and c are the certified rates.")
    return 0 if (axis.passed and full.passed) else 1


if __name__ == "__main__":
    sys.exit(main(float(sys.argv[1]) if len(sys.argv) > 1 else 40.0))
