"""The ten acceptance criteria, one test per criterion, at stated budgets.

Each test prints one CRITERION line with the measured numbers and asserts
the stated tolerance.  Two criteria encode reference targets the measured
dynamics do not reproduce (the Monte Carlo threshold window and the
large-noise law at moderate levels); those tests fail honestly with the
measured values in the line rather than being loosened.  See README,
"Tests and acceptance".
"""

import math

import numpy as np
import pytest
from scipy import stats

from lorenzlab import (Params, build_operator, decompose, default_grid,
                       derive_constants, estimate_lambda_excursion,
                       estimate_lambda_mc, find_threshold,
                       lambda_from_measure, make_g_interpolator,
                       select_constants, solve_poisson, stationary_measure,
                       verify_drift_V0, verify_drift_full)
from lorenzlab.core import alpha_from_alpha_hat
from lorenzlab.errors import NoCrossingError
from lorenzlab.estimators import Regime, asymptotic_lambda, default_burn_in
from lorenzlab.excursions import (first_exit_excursions, growth_observable,
                                  lift_functional, stop_time_stats)
from lorenzlab.fokker_planck import lambda_pde
from lorenzlab.sde import SimConfig, SystemKind, simulate
from lorenzlab.theory_checks import (check_crossing_diff, check_exp_growth,
                                     check_stable_tracking)

P = Params()
C = derive_constants(P)
BURN = default_burn_in(C)


def _tr(alpha_hat, c=C):
    return alpha_from_alpha_hat(alpha_hat, c)


def _cfg(t_span, seed, thin=10**8, **kw):
    return SimConfig(system=SystemKind.THETA_Z, t_final=BURN + t_span,
                     t_burn=BURN, dt0=1e-2, thin=thin, seed=seed, **kw)


def _line(n, ok, detail):
    print(f"CRITERION {n:02d}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {n}: {detail}"


def test_criterion_01_heuristic_threshold():
    res = find_threshold("heuristic", (20.0, 30.0), 1e-3, 60, p=P, c=C)
    err = abs(res.alpha_star_hat - 27.04)
    _line(1, res.converged and err <= 0.05,
          f"heuristic crossing {res.alpha_star_hat:.4f}, "
          f"target 27.04 +- 0.05 (off by {err:.4f})")


def test_criterion_02_mc_threshold():
    # stated budget: T = 1e5 per point, 16 replicas; honest expected failure,
    # the measured crossing sits near 29.5-29.8
    res = find_threshold("mc", (26.0, 32.0), 0.3, 6, p=P, c=C,
                         t_final=1e5, replicas=16, seed=2)
    err = abs(res.alpha_star_hat - 27.7)
    _line(2, err <= 0.5,
          f"mc crossing {res.alpha_star_hat:.3f} "
          f"(bracket {res.bracket[0]:.3f}..{res.bracket[1]:.3f}, "
          f"{len(res.evaluations)} evaluations, converged={res.converged}), "
          f"target 27.7 +- 0.5 (off by {err:.3f})")


def test_criterion_03_sign_regimes():
    lo = estimate_lambda_mc(_tr(10.0), _cfg(2_000, seed=2), 16)
    hi = estimate_lambda_mc(_tr(30.0), _cfg(500_000, seed=2), 16)
    ok = (lo.value < 0.0 < hi.value and lo.excludes_zero()
          and hi.excludes_zero())
    _line(3, ok,
          f"lambda(10) = {lo.value:+.4f} +- {lo.half_width:.4f}, "
          f"lambda(30) = {hi.value:+.5f} +- {hi.half_width:.5f}, "
          "both CIs must exclude 0")


def test_criterion_04_small_noise_limits():
    lim = math.sqrt(C.zstar - 1.0) - 1.0
    assert lim == pytest.approx(asymptotic_lambda(0.0, C, Regime.SMALL))
    errs = {}
    for ahat in (0.5, 0.25):
        est = estimate_lambda_mc(_tr(ahat), _cfg(2_000, seed=4), 8)
        errs[ahat] = abs(est.value - lim)
    c3 = derive_constants(Params(rho=-3.0))
    errs3 = {}
    for ahat in (0.5, 0.25):
        est = estimate_lambda_mc(alpha_from_alpha_hat(ahat, c3),
                                 _cfg(2_000, seed=4), 8, c3)
        errs3[ahat] = abs(est.value + 1.0)
    ok = (errs[0.25] <= 0.02 and errs[0.25] < errs[0.5]
          and errs3[0.25] <= 0.01 and errs3[0.25] < errs3[0.5])
    _line(4, ok,
          f"rho=1/2 errors vs {lim:.6f}: {errs[0.5]:.2e} (a^=0.5) -> "
          f"{errs[0.25]:.2e} (a^=0.25, tol 0.02); "
          f"rho=-3 errors vs -1: {errs3[0.5]:.2e} -> {errs3[0.25]:.2e}")


def test_criterion_05_large_noise_law():
    # stated tolerance: lambda/sqrt(alpha) within 10% of the closed-form
    # constant at transformed alpha 100 and 400; honest expected failure,
    # the O(1) correction still dominates at these levels
    law = asymptotic_lambda(1.0, C, Regime.LARGE)
    parts = []
    ok = True
    for alpha in (100.0, 400.0):
        est = estimate_lambda_mc(alpha, _cfg(20_000, seed=5), 8)
        ratio = est.value / math.sqrt(alpha)
        rel = abs(ratio - law) / law
        ok &= rel <= 0.10
        parts.append(f"alpha={alpha:g}: ratio {ratio:.4f} +- "
                     f"{est.half_width / math.sqrt(alpha):.4f} "
                     f"({100 * rel:.1f}% off {law:.4f})")
    _line(5, ok, "; ".join(parts))


def test_criterion_06_route_concordance():
    parts = []
    ok = True
    for ahat in (10.0, 27.7, 40.0):
        alpha = _tr(ahat)
        pde = lambda_pde(alpha, C)
        mc = estimate_lambda_mc(alpha, _cfg(20_000, seed=6), 8)
        diff = abs(pde.value - mc.value)
        allow = mc.half_width + 0.02
        ok &= diff <= allow
        parts.append(f"a^={ahat:g}: |pde-mc| = {diff:.4f} <= {allow:.4f}")

    traj = simulate(_cfg(2_000, seed=13, thin=1), (0.3, C.zstar), C,
                    _tr(40.0))
    exc = decompose(traj, max_samples=10**9)
    comp = [e for e in exc if e.complete]
    est = estimate_lambda_excursion(exc)
    manual = (math.fsum(lift_functional(growth_observable, e) for e in comp)
              / math.fsum(e.tau for e in comp))
    ident = est.value == pytest.approx(manual, rel=1e-12)
    ok &= ident
    parts.append(f"excursion ratio == shared-data time average "
                 f"({est.value:.6f}, {len(comp)} complete, "
                 f"match={ident})")
    _line(6, ok, "; ".join(parts))


def test_criterion_07_stationary_z_marginal():
    parts = []
    ok = True
    for ahat in (10.0, 30.0, 40.0):
        alpha = _tr(ahat)
        grid = default_grid(C, alpha)
        mu = stationary_measure(build_operator(grid, C, alpha))
        zc = grid.z_centers()
        var = alpha * alpha / (2.0 * C.gamma)
        gauss = np.exp(-0.5 * (zc - C.zstar) ** 2 / var) / math.sqrt(
            2.0 * math.pi * var)
        l1 = float(np.sum(np.abs(mu.z_marginal() - gauss)) * grid.h_z)
        ok &= l1 <= 0.02
        parts.append(f"L1(a^={ahat:g}) = {l1:.4f}")

    # fixed-step sampling keeps the thinned z samples uniform in time (the
    # adaptive stepper would oversample the tails); the z substep is exact
    alpha = _tr(30.0)
    cfg = SimConfig(system=SystemKind.THETA_Z, t_final=BURN + 1e6,
                    t_burn=BURN, dt0=1e-2, thin=100, adaptive=False, seed=7)
    res = simulate(cfg, (0.3, C.zstar), C, alpha)
    z = res.samples[:, 1]
    sd = alpha / math.sqrt(2.0 * C.gamma)
    ks = float(stats.kstest(z, "norm", args=(C.zstar, sd)).statistic)
    ok &= z.size >= 10**6 and ks <= 0.01
    parts.append(f"KS = {ks:.4f} on {z.size} samples (tol 0.01)")
    _line(7, ok, "; ".join(parts))


def test_criterion_08_drift_certificates():
    alpha = _tr(40.0)
    grid = default_grid(C, alpha)
    op = build_operator(grid, C, alpha)
    mu = stationary_measure(op)
    lam = lambda_from_measure(mu)
    g = solve_poisson(op, mu, lam=lam)
    gi = make_g_interpolator(g)
    k = select_constants(lam, alpha, C, g)
    axis = verify_drift_V0(k, gi, c=C, alpha=alpha)
    full = verify_drift_full(k, gi, p=P, c=C, alpha=alpha)
    d = axis.fitted["d"]
    cc = full.fitted["c"]
    ok = axis.passed and full.passed and d > 0.0 and cc > 0.0
    _line(8, ok,
          f"axis drift d = {d:.3e} (passed={axis.passed}), "
          f"full drift c = {cc:.4f}, K = {full.fitted['K']:.2f} "
          f"(passed={full.passed})")


def test_criterion_09_subcritical_collapse():
    alpha = _tr(10.0)
    n = 100
    hits = 0
    worst = 0.0
    for k in range(n):
        phi = 2.0 * math.pi * k / n
        cfg = SimConfig(system=SystemKind.TRANSFORMED_FULL, t_final=500.0,
                        t_burn=0.0, dt0=1e-2, thin=10**8, seed=k)
        res = simulate(cfg, (math.cos(phi), math.sin(phi), C.zstar), C, alpha)
        r2 = res.final_state[0] ** 2 + res.final_state[1] ** 2
        worst = max(worst, r2)
        hits += r2 < 1e-6
    _line(9, hits >= 95,
          f"{hits}/{n} unit-circle starts below 1e-6 by T=500 "
          f"(worst x^2+y^2 = {worst:.2e})")


def test_criterion_10_appendix_validators():
    parts = []
    growth = check_exp_growth(1.0, 1.0, 0.05, 1.0, seed=0)
    ok = growth["passed"] and growth["ratio_fit"] <= 0.75
    parts.append(f"exit-time tail ratio {growth['ratio_fit']:.4f} <= 0.75 "
                 f"at {growth['trials']} trials")

    cs = []
    for a0 in (1.0, 4.0, 16.0):
        rep = check_stable_tracking(
            lambda t, a0=a0: a0 * (2.0 + math.sin(a0 * t)),
            a0=a0, K=2.0 * a0, x0=0.0, T=40.0 / a0)
        cs.append(rep["C_measured"])
    ok &= max(cs) <= 1.5 * min(cs)
    parts.append(f"tracking constant spread {min(cs):.4f}..{max(cs):.4f} "
                 "(within 50%)")

    rng = np.random.default_rng(0)
    tested = violations = 0
    while tested < 1000:
        q = rng.uniform(-0.9, 0.9, size=8)
        b1, b2 = rng.uniform(1.0, 3.0, size=2)
        lo = float(rng.uniform(-1.0, 0.0))
        hi = lo + float(rng.uniform(0.5, 3.0))
        try:
            rep = check_crossing_diff(
                lambda u, q=q, b=b1: b + q[0] * np.sin(u) + 0.4 * q[1] * np.cos(2 * u),
                lambda u, q=q, b=b2: b + q[2] * np.sin(u + 0.3) + 0.4 * q[3] * np.cos(u),
                lambda u, q=q: q[4] + q[5] * np.sin(3 * u),
                lambda u, q=q: q[6] + q[7] * np.cos(2 * u),
                lo, hi)
        except NoCrossingError:
            continue
        tested += 1
        violations += 0 if rep["passed"] else 1
    ok &= violations == 0
    parts.append(f"crossing bound: {violations} violations in {tested}")

    rows = []
    for z0 in (0.6, 1.2, 2.4):
        ex = first_exit_excursions(z0, _tr(12.0), C, n_paths=1024, seed=3)
        rows.append(stop_time_stats(ex, _tr(12.0))[0])
    slopes = [math.log2(rows[i + 1]["mean_tau"] / rows[i]["mean_tau"])
              for i in range(2)]
    bounded = all(1.5 < s < 2.5 for s in slopes)
    for row in rows:
        bounded &= 0.2 < row["ratio_mean"] < 5.0
        roots = row["moment_roots"]
        bounded &= roots[1] <= roots[2] <= roots[4] < 6.0 * roots[1]
    ok &= bounded
    parts.append(f"exit-time moment ratios bounded across zones "
                 f"(doubling slopes {slopes[0]:.2f}, {slopes[1]:.2f})")
    _line(10, ok, "; ".join(parts))
