import math

import numpy as np
import pytest

from lorenzlab import (InvalidParameterError, NoCrossingError,
                       PreconditionError, check_crossing_diff,
                       check_exp_growth, check_stable_tracking)


def test_exp_growth_tail_decays_geometrically():
    rep = check_exp_growth(1.0, 1.0, 0.05, 1.0)
    assert rep["passed"]
    assert rep["ratio_fit"] == pytest.approx(0.02921031189184929, rel=1e-12)
    assert rep["ratio_fit"] <= rep["ratio_bound"] == 0.75
    # the tail outran 1e5 trials beyond N = 2, so the fit is censored
    assert rep["tail_censored"]
    assert rep["tail_counts"][0] > rep["tail_counts"][1] > 0
    assert all(c == 0 for c in rep["tail_counts"][2:])
    assert rep["t_thresholds"][0] == pytest.approx(math.log(1.0 / 0.05))


def test_exp_growth_is_scale_invariant():
    # the construction only depends on the dimensionless combinations, and
    # the noise stream is keyed by the seed alone, so rescaling a and b
    # reproduces the fitted ratio bit for bit
    base = check_exp_growth(1.0, 1.0, 0.05, 1.0)
    scaled = check_exp_growth(2.5, 0.7, 0.05, 1.0)
    assert scaled["ratio_fit"] == base["ratio_fit"]


def test_exp_growth_fewer_trials_censor_earlier():
    rep = check_exp_growth(1.0, 1.0, 0.05, 1.0, trials=20000)
    assert rep["tail_censored"]
    assert rep["passed"]
    assert rep["ratio_fit"] == pytest.approx(0.06696495301824262, rel=1e-12)


def test_exp_growth_zero_level_exits_immediately():
    rep = check_exp_growth(1.0, 1.0, 0.05, 0.0)
    assert rep["ratio_fit"] == 0.0
    assert not rep["tail_censored"]
    assert rep["passed"]
    assert all(p == 0.0 for p in rep["tail_probs"])


def test_exp_growth_unperturbed_respects_gaussian_bound():
    # with eps = 0 survival to t implies |x(t)| < level, so each tail
    # probability sits below the exact Gaussian marginal bound
    rep = check_exp_growth(1.0, 1.0, 0.0, 1.0)
    assert not rep["tail_censored"]
    assert rep["ratio_fit"] == pytest.approx(0.24153590933511723, rel=1e-12)
    assert rep["passed"]
    for tail, gauss in zip(rep["tail_probs"], rep["gaussian_marginal"]):
        assert tail <= gauss + 1e-12


def test_exp_growth_validation():
    with pytest.raises(InvalidParameterError):
        check_exp_growth(0.0, 1.0, 0.05, 1.0)
    with pytest.raises(InvalidParameterError):
        check_exp_growth(1.0, 1.0, -0.1, 1.0)
    with pytest.raises(InvalidParameterError):
        check_exp_growth(1.0, 1.0, 0.05, 1.0, N_max=1)
    with pytest.raises(InvalidParameterError):
        check_exp_growth(1.0, 1.0, 0.05, 1.0, trials=50)


def test_tracking_constant_is_scale_invariant():
    vals = []
    for a0 in (1.0, 4.0):
        rep = check_stable_tracking(
            lambda t, a0=a0: a0 * (2.0 + np.sin(a0 * t)),
            a0, 2.0 * a0, 0.0, 40.0 / a0)
        assert rep["mode"] == "stable"
        vals.append(rep["C_measured"])
    # the a0^2/K normalisation makes the measured constant a pure number
    assert vals[0] == pytest.approx(0.12429176, abs=1e-6)
    assert vals[0] == pytest.approx(vals[1], rel=1e-8)


def test_tracking_constant_vanishes_for_frozen_coefficient():
    # constant a tracks exactly after the initial transient, so the
    # normalised margin is pure integrator noise
    rep = check_stable_tracking(lambda t: 2.0 + 0.0 * t, 2.0, 1e-3, 0.6, 20.0)
    assert rep["C_measured"] < 1e-6


def test_tracking_stable_with_time_change():
    rep = check_stable_tracking(
        lambda t: 4.0 + 2.0 * (1.0 + np.sin(t)), 4.0, 8.0, 0.3, 30.0,
        f_fn=lambda t: 2.0 + np.cos(2.0 * t))
    assert rep["time_changed"]
    assert rep["C_measured"] == pytest.approx(0.016550407969992464, rel=1e-6)


def test_tracking_unstable_growth_rate():
    rep = check_stable_tracking(
        lambda t: 2.0 * (1.5 + 0.5 * np.sin(2.0 * t)), 2.0, 4.0, 1.0, 10.0,
        unstable=True)
    assert rep["mode"] == "unstable"
    assert rep["rate_floor"] == 1.0
    assert rep["growth_rate"] == pytest.approx(3.0153, abs=1e-3)
    assert rep["passed"]
    timed = check_stable_tracking(
        lambda t: 2.0 * (1.5 + 0.5 * np.sin(2.0 * t)), 2.0, 4.0, 1.0, 10.0,
        f_fn=lambda t: 1.0 + 0.5 * np.sin(3.0 * t), unstable=True)
    assert timed["rate_floor"] == pytest.approx(0.5, abs=1e-5)
    assert timed["growth_rate"] >= timed["rate_floor"]
    assert timed["passed"]


def test_tracking_preconditions():
    # floor violation
    with pytest.raises(PreconditionError):
        check_stable_tracking(lambda t: 2.0 + np.sin(t), 2.0, 4.0, 0.0, 10.0)
    # swing larger than K inside a 1/a0 window
    with pytest.raises(PreconditionError):
        check_stable_tracking(lambda t: 2.0 * (2.0 + np.sin(2.0 * t)),
                              2.0, 0.5, 0.0, 10.0)
    # unstable cap a <= 2 a0
    with pytest.raises(PreconditionError):
        check_stable_tracking(lambda t: 2.0 * (2.0 + np.sin(2.0 * t)),
                              2.0, 4.0, 1.0, 10.0, unstable=True)
    # time change must stay positive
    with pytest.raises(PreconditionError):
        check_stable_tracking(lambda t: 2.0 + 0.0 * t, 2.0, 1.0, 0.0, 10.0,
                              f_fn=lambda t: np.cos(t))
    # unstable fit needs a start off the slaved solution
    with pytest.raises(PreconditionError):
        check_stable_tracking(lambda t: 2.0 + 0.0 * t, 2.0, 1.0, 0.5, 10.0,
                              unstable=True)
    with pytest.raises(InvalidParameterError):
        check_stable_tracking(lambda t: 2.0, 0.0, 1.0, 0.0, 10.0)


def test_crossing_bound_tight_example():
    rep = check_crossing_diff(lambda u: 1.0, lambda u: 2.0,
                              lambda u: 1.0, lambda u: 1.0, 0.0, 1.0)
    assert rep["lhs"] == pytest.approx(0.5, rel=1e-12)
    assert rep["rhs"] == pytest.approx(0.5, rel=1e-12)
    assert rep["passed"]
    assert rep["tau1"] == pytest.approx(1.0, rel=1e-12)
    assert rep["tau2"] == pytest.approx(0.5, rel=1e-12)


def test_crossing_identical_flows():
    F = lambda u: 1.3 + 0.2 * math.sin(u)  # noqa: E731
    G = lambda u: 0.7 + 0.1 * math.cos(2.0 * u)  # noqa: E731
    rep = check_crossing_diff(F, F, G, G, -1.0, 2.0)
    assert rep["lhs"] <= 1e-12
    assert rep["rhs"] == 0.0
    assert rep["passed"]


def test_crossing_weight_homogeneity():
    F1 = lambda u: 1.5 + 0.3 * math.sin(u)  # noqa: E731
    F2 = lambda u: 1.4 + 0.2 * math.cos(u)  # noqa: E731
    G1 = lambda u: 1.0 + 0.5 * u * u  # noqa: E731
    G2 = lambda u: 0.8 + 0.4 * u * u  # noqa: E731
    one = check_crossing_diff(F1, F2, G1, G2, 0.0, 1.0)
    two = check_crossing_diff(F1, F2, lambda u: 2.0 * G1(u),
                              lambda u: 2.0 * G2(u), 0.0, 1.0)
    assert two["lhs"] == pytest.approx(2.0 * one["lhs"], rel=1e-9)
    assert two["rhs"] == pytest.approx(2.0 * one["rhs"], rel=1e-9)


def test_crossing_bound_holds_on_random_instances():
    rng = np.random.default_rng(7)
    for _ in range(200):
        c1, c2 = rng.uniform(1.0, 3.0, size=2)
        w1, w2 = rng.uniform(0.5, 3.0, size=2)
        m1, m2 = rng.uniform(0.0, 0.8, size=2)
        p1, p2, p3, p4 = rng.uniform(0.0, 2.0 * math.pi, size=4)
        g1, g2 = rng.uniform(0.2, 2.0, size=2)
        F1 = lambda u: c1 + m1 * np.sin(w1 * u + p1)  # noqa: B023,E731
        F2 = lambda u: c2 + m2 * np.sin(w2 * u + p2)  # noqa: B023,E731
        G1 = lambda u: g1 * (1.1 + np.cos(w1 * u + p3))  # noqa: B023,E731
        G2 = lambda u: g2 * (1.1 + np.cos(w2 * u + p4))  # noqa: B023,E731
        a = float(rng.uniform(-2.0, 0.0))
        b = a + float(rng.uniform(0.5, 3.0))
        rep = check_crossing_diff(F1, F2, G1, G2, a, b)
        assert rep["passed"], rep


def test_crossing_requires_positive_speeds():
    with pytest.raises(NoCrossingError):
        check_crossing_diff(lambda u: math.sin(u), lambda u: 2.0,
                            lambda u: 1.0, lambda u: 1.0, 0.0, 4.0)
    with pytest.raises(InvalidParameterError):
        check_crossing_diff(lambda u: 1.0, lambda u: 1.0,
                            lambda u: 1.0, lambda u: 1.0, 1.0, 1.0)
