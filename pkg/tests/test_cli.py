import csv
import json
import math

import pytest

from lorenzlab.cli import run


def _run_json(tmp_path, args, name="out.json", rc_want=0):
    out = tmp_path / name
    rc = run(list(args) + ["-o", str(out)])
    assert rc == rc_want, f"rc={rc} for {args}"
    return json.loads(out.read_text())


def test_no_command_prints_help_and_fails():
    assert run([]) == 2


def test_unknown_flag_is_a_usage_error():
    assert run(["simulate", "--bogus"]) == 2


def test_simulate_requires_a_noise_amplitude():
    assert run(["simulate"]) == 2


def test_alpha_flags_are_mutually_exclusive():
    assert run(["simulate", "--alpha-hat", "10", "--alpha", "1.0"]) == 2


def test_domain_errors_exit_one(tmp_path):
    # mc estimation at zero noise is rejected by the estimator itself
    assert run(["lambda", "--method", "mc", "--alpha-hat", "0"]) == 1


def test_simulate_zero_noise_collapses_to_axis(tmp_path):
    doc = _run_json(tmp_path, [
        "simulate", "--system", "transformed", "--alpha-hat", "0",
        "--t-final", "200", "--thin", "100", "--seed", "3"])
    assert doc["tool"] == "lorenzlab" and doc["command"] == "simulate"
    assert doc["params"]["sigma"] == 10.0
    assert doc["derived"]["zstar"] == pytest.approx(222.0 / 121.0, rel=1e-12)
    x, y, z = doc["summary"]["final_state"]
    assert x * x + y * y < 1e-12
    assert doc["summary"]["final_time"] == pytest.approx(200.0)


def test_lambda_heuristic_value(tmp_path):
    doc = _run_json(tmp_path, ["lambda", "--method", "heuristic",
                               "--alpha-hat", "30"])
    est = doc["estimate"]
    assert est["method"] == "heuristic"
    assert est["ci"] == 0.0
    assert est["lambda"] == pytest.approx(0.032569343129416346, rel=1e-10)
    assert est["alpha_hat"] == pytest.approx(30.0, rel=1e-12)


def test_alpha_units_transformed(tmp_path):
    doc = _run_json(tmp_path, [
        "lambda", "--method", "heuristic", "--alpha-units", "transformed",
        "--alpha", "1.4095915130949452"])
    assert doc["estimate"]["lambda"] == pytest.approx(-0.1761999196275727,
                                                      rel=1e-10)
    assert doc["alpha_hat"] == pytest.approx(10.0, rel=1e-10)


def test_mc_rerun_is_byte_identical_modulo_wall_time(tmp_path):
    args = ["lambda", "--method", "mc", "--alpha-hat", "40",
            "--t-final", "200", "--replicas", "2", "--seed", "9"]
    a = _run_json(tmp_path, args, name="a.json")
    b = _run_json(tmp_path, args, name="b.json")
    a["estimate"].pop("wall_time_s")
    b["estimate"].pop("wall_time_s")
    assert a == b


def test_threshold_heuristic(tmp_path):
    doc = _run_json(tmp_path, [
        "threshold", "--method", "heuristic", "--bracket", "20,30",
        "--tol", "0.001", "--budget", "60"])
    th = doc["threshold"]
    assert th["converged"] is True
    assert th["alpha_star_hat"] == pytest.approx(27.053, abs=0.02)
    assert th["bracket_hat"][0] <= th["alpha_star_hat"] <= th["bracket_hat"][1]


def test_config_file_with_explicit_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("alpha-hat = 10\nt-final = 50\nseed = 4\n# comment\n")
    doc = _run_json(tmp_path, [
        "simulate", "--config", str(cfg), "--t-final", "80"])
    assert doc["seed"] == 4
    assert doc["alpha_hat"] == pytest.approx(10.0, rel=1e-12)
    assert doc["summary"]["final_time"] == pytest.approx(80.0)


def test_config_file_boolean_flag(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("euler = yes\nno-adaptive = true\nalpha-hat = 5\n"
                   "t-final = 10\n")
    doc = _run_json(tmp_path, ["simulate", "--config", str(cfg)])
    assert doc["summary"]["final_time"] == pytest.approx(10.0)


def test_config_file_rejects_garbage(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("just some words\n")
    assert run(["simulate", "--config", str(cfg)]) == 2


def test_seed_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("LORENZLAB_SEED", "77")
    doc = _run_json(tmp_path, ["lambda", "--method", "heuristic",
                               "--alpha-hat", "10"])
    assert doc["seed"] == 77
    monkeypatch.setenv("LORENZLAB_SEED", "pet rock")
    assert run(["lambda", "--method", "heuristic", "--alpha-hat", "10"]) == 2


def test_sweep_writes_csv(tmp_path):
    out_csv = tmp_path / "sweep.csv"
    doc = _run_json(tmp_path, [
        "sweep", "--method", "heuristic", "--alphas", "10,30",
        "--csv", str(out_csv)])
    assert len(doc["points"]) == 2
    assert doc["points"][0]["lambda"] == pytest.approx(-0.1761999196275727,
                                                       rel=1e-10)
    assert doc["points"][1]["lambda"] == pytest.approx(0.032569343129416346,
                                                       rel=1e-10)
    with open(out_csv) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2
    assert float(rows[0]["alpha_hat"]) == pytest.approx(10.0)
    assert float(rows[1]["lambda"]) == pytest.approx(0.032569343129416346,
                                                     rel=1e-10)


def test_sweep_needs_a_range():
    assert run(["sweep", "--method", "heuristic"]) == 2


def test_check_crossing_passes(tmp_path):
    doc = _run_json(tmp_path, ["check", "--which", "crossing",
                               "--instances", "50"])
    assert doc["passed"] is True
    assert doc["crossing"]["violations"] == 0
    assert doc["crossing"]["tight_example"]["lhs"] == pytest.approx(0.5)


def test_excursions_below_estimator_floor(tmp_path):
    doc = _run_json(tmp_path, [
        "excursions", "--alpha-hat", "40", "--t-final", "55", "--seed", "1"])
    assert doc["estimate"] is None
    assert doc["n_complete"] < 100
    assert doc["n_excursions"] >= 1
    assert isinstance(doc["stop_time_table"], list)


def test_poisson_small_grid(tmp_path):
    mu_csv = tmp_path / "mu.csv"
    doc = _run_json(tmp_path, [
        "poisson", "--alpha-hat", "30", "--n-theta", "64", "--n-z", "64",
        "--csv-mu", str(mu_csv)])
    assert doc["grid"]["n_theta"] == 64
    assert doc["z_marginal_l1_vs_gaussian"] < 0.05
    assert math.isfinite(doc["lambda_pde"])
    assert mu_csv.exists() and (tmp_path / "mu.csv.json").exists()
