import json

import numpy as np
import pytest

from statcare.cli import main
from statcare.experiments import (
    ConfigError,
    ExperimentConfig,
    run_asymptotics,
    run_estimate,
    run_simulate,
)
from statcare.processes import ModelSpec


@pytest.fixture
def var1_config(tmp_path):
    return ExperimentConfig(
        model=ModelSpec.var1(np.array([[0.5, 0.1], [0.1, 0.4]]), np.eye(2)),
        n_steps=1500,
        reps=3,
        seed=17,
        output_dir=str(tmp_path / "out"),
    )


def write_config(tmp_path, config: ExperimentConfig) -> str:
    f = tmp_path / "config.json"
    f.write_text(config.to_json(), encoding="utf-8")
    return str(f)


# ---------------------------------------------------------------------------
# config round-trips and validation
# ---------------------------------------------------------------------------


def test_config_roundtrip_lossless(var1_config):
    again = ExperimentConfig.from_json(var1_config.to_json())
    assert again.to_dict() == var1_config.to_dict()
    assert again.digest() == var1_config.digest()
    assert np.array_equal(again.model.coeff, var1_config.model.coeff)


def test_config_rejects_zero_reps(var1_config):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({**var1_config.to_dict(), "reps": 0})


def test_config_rejects_unknown_checks(var1_config):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({**var1_config.to_dict(), "checks": ["nope"]})


def test_config_continuous_needs_grid():
    with pytest.raises(ConfigError):
        ExperimentConfig(model=ModelSpec.ou([[1.0]], [[1.0]]), reps=1, t_end=10.0)


# ---------------------------------------------------------------------------
# run functions
# ---------------------------------------------------------------------------


def test_simulate_writes_paths_and_manifest(tmp_path, var1_config):
    out = tmp_path / "sim"
    manifest = run_simulate(var1_config, out)
    assert len(manifest["files"]) == 3
    assert (out / "manifest.json").exists()
    first = (out / manifest["files"][0]).read_text().splitlines()
    assert first[0] == "t,x1,x2"
    assert manifest["streams"] == [[17, 0], [17, 1], [17, 2]]


def test_simulate_rerun_byte_identical(tmp_path, var1_config):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    run_simulate(var1_config, out_a)
    run_simulate(var1_config, out_b)
    for name in ("path_0000.csv", "path_0001.csv", "manifest.json"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


def test_estimate_rerun_identical_and_parallel_agrees(tmp_path, var1_config):
    rec_a = run_estimate(var1_config, tmp_path / "a", jobs=1)
    rec_b = run_estimate(var1_config, tmp_path / "b", jobs=1)
    rec_c = run_estimate(var1_config, tmp_path / "c", jobs=3)
    assert rec_a.aggregates == rec_b.aggregates == rec_c.aggregates
    assert rec_a.per_rep == rec_c.per_rep
    assert (tmp_path / "a" / "per_rep.csv").read_bytes() == (
        tmp_path / "c" / "per_rep.csv"
    ).read_bytes()


def test_estimate_from_saved_paths_matches_fresh(tmp_path, var1_config):
    sim_dir = tmp_path / "sim"
    run_simulate(var1_config, sim_dir)
    fresh = run_estimate(var1_config, tmp_path / "fresh")
    reused = run_estimate(var1_config, tmp_path / "reused", paths_dir=sim_dir)
    assert fresh.aggregates == reused.aggregates


def test_estimate_zero_noise_records_gate_failures(tmp_path):
    config = ExperimentConfig(
        model=ModelSpec.var1([[0.5]], [[0.0]]),
        n_steps=300,
        reps=2,
        seed=3,
        horizon=3,
    )
    record = run_estimate(config, tmp_path / "zero")
    assert record.aggregates["gate_failure_rate"] == 1.0
    assert all(r["estimate"] == [[0.0]] for r in record.per_rep)


def test_estimate_continuous_config(tmp_path):
    config = ExperimentConfig(
        model=ModelSpec.ou([[1.0]], [[1.0]]),
        t_end=300.0,
        dt=0.05,
        horizon=1.0,
        reps=2,
        seed=5,
    )
    record = run_estimate(config, tmp_path / "ou")
    assert record.aggregates["gate_failure_rate"] == 0.0
    assert record.aggregates["median_error"] < 0.5


def test_asymptotics_run_outputs(tmp_path, var1_config):
    import dataclasses

    config = dataclasses.replace(var1_config, reps=60, n_steps=2000)
    summary = run_asymptotics(config, tmp_path / "asy")
    lines = (tmp_path / "asy" / "limit_samples.csv").read_text().splitlines()
    assert lines[0].startswith("rep,seed,theta_err_1")
    assert len(lines) == 61
    assert 0.0 <= summary["r_squared"] <= 1.0


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------


def test_cli_simulate_and_estimate(tmp_path, var1_config, capsys):
    cfg = write_config(tmp_path, var1_config)
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "s")]) == 0
    assert (tmp_path / "s" / "manifest.json").exists()
    assert main(["estimate", "--config", cfg, "--out", str(tmp_path / "e")]) == 0
    out = capsys.readouterr().out
    assert "median_error" in out


def test_cli_overrides(tmp_path, var1_config):
    cfg = write_config(tmp_path, var1_config)
    assert main([
        "simulate", "--config", cfg, "--out", str(tmp_path / "o"), "--reps", "1",
        "--seed", "99",
    ]) == 0
    manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert manifest["streams"] == [[99, 0]]


def test_cli_validate_pass_and_fail_codes(tmp_path):
    assert main(["validate", "care-analytic"]) == 0
    assert main(["validate", "unknown-suite"]) == 2


def test_cli_validate_failing_suite_exits_one(monkeypatch):
    from statcare import suites

    def failing():
        check = suites.CheckResult(name="always", passed=False, margin=-1.0)
        return suites.SuiteResult(name="broken", passed=False, checks=(check,))

    monkeypatch.setitem(suites.VALIDATION_SUITES, "broken", failing)
    assert main(["validate", "broken"]) == 1


def test_cli_validate_report(tmp_path):
    out = tmp_path / "rep"
    assert main(["validate", "l1-identity", "--out", str(out)]) == 0
    report = json.loads((out / "validation_report.json").read_text())
    assert report[0]["suite"] == "l1-identity"
    assert report[0]["passed"] is True


def test_cli_validate_from_config_checks(tmp_path, var1_config):
    import dataclasses

    config = dataclasses.replace(var1_config, checks=("care-analytic", "gate-fallback"))
    cfg = write_config(tmp_path, config)
    assert main(["validate", "--config", cfg]) == 0


def test_cli_usage_errors(tmp_path, var1_config):
    assert main(["estimate"]) == 2  # missing config
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({**var1_config.to_dict(), "reps": 0}))
    assert main(["estimate", "--config", str(bad)]) == 2
    missing = str(tmp_path / "nope.json")
    assert main(["simulate", "--config", missing]) == 2


def test_cli_asymptotics(tmp_path, var1_config, capsys):
    import dataclasses

    config = dataclasses.replace(var1_config, reps=50, n_steps=1000)
    cfg = write_config(tmp_path, config)
    assert main(["asymptotics", "--config", cfg, "--out", str(tmp_path / "asy")]) == 0
    assert "r_squared" in capsys.readouterr().out
