import json
import math

import numpy as np
import pytest

from lorenzlab import (EstimateWithCI, InvalidParameterError, LambdaMethod,
                       Params, Regime, SimConfig, SystemKind,
                       asymptotic_lambda, derive_constants,
                       estimate_lambda_growth, estimate_lambda_mc,
                       heuristic_lambda)
from lorenzlab.estimators import lambda_plus

from conftest import alpha_of


def test_lambda_plus_values():
    assert lambda_plus(0.5) == -1.0
    assert lambda_plus(1.0) == -1.0
    assert lambda_plus(2.0) == 0.0
    assert lambda_plus(5.0) == 1.0
    np.testing.assert_allclose(lambda_plus([1.0, 5.0]), [-1.0, 1.0])


def test_asymptotic_small(c_default):
    # -1 + sqrt(zstar - 1) with zstar = 222/121
    want = -1.0 + math.sqrt(101.0) / 11.0
    got = asymptotic_lambda(0.0, c_default, Regime.SMALL)
    assert got == pytest.approx(want, rel=1e-14)
    assert got == pytest.approx(-0.08637494353446451, rel=1e-12)
    c_neg = derive_constants(Params(rho=-3.0))
    assert asymptotic_lambda(0.0, c_neg, Regime.SMALL) == -1.0


def test_asymptotic_large(c_default):
    got = asymptotic_lambda(1.0, c_default, Regime.LARGE)
    assert got == pytest.approx(0.4142641511993303, rel=1e-12)
    # leading term scales like sqrt(alpha)
    assert asymptotic_lambda(4.0, c_default, Regime.LARGE) == pytest.approx(
        2.0 * got, rel=1e-14)
    with pytest.raises(InvalidParameterError):
        asymptotic_lambda(-1.0, c_default, Regime.LARGE)


def test_heuristic_frozen_values(c_default):
    cases = {
        10.0: -0.1761999196275727,
        27.7: 0.007201376673483107,
        30.0: 0.032569343129416346,
        40.0: 0.13863328315213164,
    }
    for ahat, want in cases.items():
        got = heuristic_lambda(alpha_of(ahat, c_default), c_default)
        assert got == pytest.approx(want, rel=1e-9), ahat


def test_heuristic_limits(c_default):
    assert heuristic_lambda(0.0, c_default) == asymptotic_lambda(
        0.0, c_default, Regime.SMALL)
    with pytest.raises(InvalidParameterError):
        heuristic_lambda(-0.1, c_default)
    # wide-noise regime approaches the closed-form growth law from below
    ratios = []
    for ahat in (400.0, 4000.0):
        a = alpha_of(ahat, c_default)
        ratios.append(heuristic_lambda(a, c_default)
                      / asymptotic_lambda(a, c_default, Regime.LARGE))
    assert 0.6 < ratios[0] < ratios[1] < 1.0


def test_estimate_ci_container():
    e = EstimateWithCI(value=0.5, half_width=0.2, method=LambdaMethod.MC,
                       n_samples=10, seed=3)
    assert e.lo == pytest.approx(0.3) and e.hi == pytest.approx(0.7)
    assert e.excludes_zero()
    wide = EstimateWithCI(value=0.1, half_width=0.2, method=LambdaMethod.MC)
    assert not wide.excludes_zero()
    with pytest.raises(InvalidParameterError):
        EstimateWithCI(value=0.0, half_width=-1.0, method=LambdaMethod.MC)


def test_estimate_to_json(c_default):
    e = EstimateWithCI(value=-0.5, half_width=0.25, method=LambdaMethod.GROWTH,
                       n_samples=123, seed=9, wall_time_s=1.5)
    al = alpha_of(10.0, c_default)
    doc = json.loads(e.to_json(al, c_default, note="x"))
    assert doc["lambda"] == -0.5 and doc["ci"] == 0.25
    assert doc["method"] == "growth" and doc["note"] == "x"
    assert doc["alpha_hat"] == pytest.approx(10.0, rel=1e-12)
    assert doc["seed"] == 9 and doc["n_samples"] == 123


def test_mc_sign_above_and_below(c_default):
    cfg = SimConfig(system=SystemKind.THETA_Z, t_final=2000.0, t_burn=50.0,
                    thin=100_000, seed=7)
    up = estimate_lambda_mc(alpha_of(40.0, c_default), cfg, replicas=8,
                            c=c_default)
    assert up.lo > 0.0
    assert up.value == pytest.approx(0.108, abs=0.03)
    cfg_dn = SimConfig(system=SystemKind.THETA_Z, t_final=500.0, t_burn=50.0,
                       thin=100_000, seed=7)
    dn = estimate_lambda_mc(alpha_of(10.0, c_default), cfg_dn, replicas=8,
                            c=c_default)
    assert dn.hi < 0.0
    assert dn.value == pytest.approx(-0.197, abs=0.05)


def test_growth_agrees_with_time_average(c_default):
    al = alpha_of(40.0, c_default)
    cfg = SimConfig(system=SystemKind.THETA_Z, t_final=2000.0, t_burn=50.0,
                    thin=100_000, seed=7)
    mc = estimate_lambda_mc(al, cfg, replicas=8, c=c_default)
    gr = estimate_lambda_growth(al, cfg, replicas=8, c=c_default)
    assert gr.lo > 0.0
    # independent streams, so agreement within the joint 95% band
    assert abs(mc.value - gr.value) <= mc.half_width + gr.half_width


def test_estimators_deterministic(c_default):
    al = alpha_of(20.0, c_default)
    cfg = SimConfig(system=SystemKind.THETA_Z, t_final=200.0, t_burn=20.0,
                    thin=100_000, seed=5)
    a = estimate_lambda_mc(al, cfg, replicas=2, c=c_default)
    b = estimate_lambda_mc(al, cfg, replicas=2, c=c_default)
    assert a.value == b.value and a.half_width == b.half_width
    other = estimate_lambda_mc(
        al, SimConfig(system=SystemKind.THETA_Z, t_final=200.0, t_burn=20.0,
                      thin=100_000, seed=6), replicas=2, c=c_default)
    assert other.value != a.value


def test_estimate_thin_invariant(c_default):
    # the estimate is built from accumulators, not from stored samples
    al = alpha_of(20.0, c_default)
    vals = []
    for thin in (1, 100_000):
        cfg = SimConfig(system=SystemKind.THETA_Z, t_final=200.0, t_burn=20.0,
                        thin=thin, seed=5)
        vals.append(estimate_lambda_mc(al, cfg, replicas=2, c=c_default).value)
    assert vals[0] == vals[1]


def test_ci_shrinks_with_time(c_default):
    al = alpha_of(20.0, c_default)
    halves = []
    for t_final in (400.0, 1600.0):
        cfg = SimConfig(system=SystemKind.THETA_Z, t_final=t_final,
                        t_burn=50.0, thin=100_000, seed=3)
        halves.append(estimate_lambda_mc(al, cfg, replicas=4,
                                         c=c_default).half_width)
    assert halves[1] < 0.7 * halves[0]


def test_estimator_rejects_bad_inputs(c_default):
    cfg = SimConfig(system=SystemKind.THETA_Z, t_final=10.0, thin=100)
    with pytest.raises(InvalidParameterError):
        estimate_lambda_mc(0.0, cfg, c=c_default)
    with pytest.raises(InvalidParameterError):
        estimate_lambda_growth(-1.0, cfg, c=c_default)
    with pytest.raises(InvalidParameterError):
        estimate_lambda_mc(1.0, cfg, replicas=0, c=c_default)
    burn_all = SimConfig(system=SystemKind.THETA_Z, t_final=10.0, t_burn=10.0)
    with pytest.raises(InvalidParameterError):
        estimate_lambda_mc(1.0, burn_all, c=c_default)
