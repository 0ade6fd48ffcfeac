#!/usr/bin/env python3
"""Side-by-side trajectories below and above the critical noise level.

Runs the full transformed system twice from the same off-axis start with the
same random numbers: once at a subcritical noise level, once supercritical.
The printed table tracks the distance of (x, y) from the invariant axis; the
subcritical column underflows toward zero while the supercritical one keeps
wandering at order one.

Usage:
    python3 demos/collapse_and_escape.py
"""

import math

from lorenzlab import Params, derive_constants
from lorenzlab.core import alpha_from_alpha_hat
from lorenzlab.sde import SimConfig, SystemKind, simulate

LOW, HIGH = 10.0, 40.0


def radii(ahat, c, t_final=1_000.0, thin=5_000):
    cfg = SimConfig(system=SystemKind.TRANSFORMED_FULL, t_final=t_final,
                    t_burn=0.0, dt0=1e-2, thin=thin, seed=42)
    res = simulate(cfg, (1.0, 0.0, c.zstar), c, alpha_from_alpha_hat(ahat, c))
    t = res.times
    r = [math.hypot(x, y) for x, y in res.samples[:, :2]]
    return t, r


def main():
    c = derive_constants(Params())
    t, r_low = radii(LOW, c)
    _, r_high = radii(HIGH, c)

    print(f"distance from the axis, same seed, noise {LOW:g} vs {HIGH:g}")
    print(f"{'t':>7} {'subcritical':>13} {'supercritical':>14}")
    for ti, a, b in zip(t, r_low, r_high):
        print(f"{ti:7.1f} {a:13.3e} {b:14.3e}")

    slope = (math.log(r_low[-1]) - math.log(r_low[0])) / (t[-1] - t[0])
    half = len(t) // 2
    peak = max(r_high[half:])
    print(f"\nsubcritical: log r falls at {slope:+.3f} per unit time, the "
          "path-level face of a negative exponent (about -0.20 at this "
          "noise); it never comes back.")
    print(f"supercritical: the same noise dives and recovers over and over "
          f"(late-half peak {peak:.1e}); with a positive exponent the axis "
          "repels, so every dive is temporary.")


if __name__ == "__main__":
    main()
