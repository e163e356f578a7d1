import json
import math

import pandas as pd
import pytest
from typer.testing import CliRunner

from app import app
from src.main import check_cxi_report, resolve_shift
from src.utils.exceptions import InvariantViolationError

runner = CliRunner()


@pytest.fixture
def config_file(tmp_path):
    def _write(content=""):
        path = tmp_path / "config.yaml"
        path.write_text(f"output:\n  directory: {tmp_path / 'out'}\n" + content)
        return str(path)
    return _write


def read_json(tmp_path, name):
    return json.loads((tmp_path / "out" / f"{name}.json").read_text())


def test_cxi_verify_passes(config_file, tmp_path):
    result = runner.invoke(app, ["cxi-verify", "-c", config_file(), "--seed", "7", "--trials", "10"])
    assert result.exit_code == 0
    report = read_json(tmp_path, "cxi_verify")
    assert report["passed"] is True
    assert report["trials"] == 10
    assert report["failures"] == 0
    assert report["max_projective_residual"] < 1e-9
    assert report["max_povm_residual"] < 1e-9


def test_cxi_verify_zero_trials(config_file, tmp_path):
    result = runner.invoke(app, ["cxi-verify", "-c", config_file(), "--seed", "7", "--trials", "0"])
    assert result.exit_code == 0
    assert read_json(tmp_path, "cxi_verify")["failures"] == 0


def test_cxi_verify_is_deterministic(config_file, tmp_path):
    path = config_file("cxi_verify:\n  seed: 11\n  trials: 5\n")
    runner.invoke(app, ["cxi-verify", "-c", path])
    first = (tmp_path / "out" / "cxi_verify.json").read_text()
    runner.invoke(app, ["cxi-verify", "-c", path])
    assert (tmp_path / "out" / "cxi_verify.json").read_text() == first


def test_cxi_verify_self_test_fails(config_file, tmp_path):
    result = runner.invoke(app, ["cxi-verify", "-c", config_file(), "--seed", "7", "--trials", "3", "--self-test"])
    assert result.exit_code == 2
    report = read_json(tmp_path, "cxi_verify")
    assert report["passed"] is False
    assert [7, 1, 0] in report["failed_seeds"]


def test_cxi_verify_requires_seed(config_file):
    assert runner.invoke(app, ["cxi-verify", "-c", config_file()]).exit_code == 4


def test_unknown_config_key_is_config_error(config_file):
    result = runner.invoke(app, ["cxi-verify", "-c", config_file("bloch:\n  grid: 3\n"), "--seed", "1"])
    assert result.exit_code == 4


def test_missing_config_file_is_config_error(tmp_path):
    assert runner.invoke(app, ["bloch", "-c", str(tmp_path / "nope.yaml")]).exit_code == 4


def test_check_cxi_report():
    check_cxi_report({"passed": True, "failures": 0, "tolerance": 1e-9, "failed_seeds": []})
    with pytest.raises(InvariantViolationError):
        check_cxi_report({"passed": False, "failures": 1, "tolerance": 1e-9, "failed_seeds": [[1, 0, 4]]})


def test_bloch_in_bits(config_file, tmp_path):
    path = config_file(
        "bloch:\n  thetas_over_pi: [0.5]\n  landscape:\n    n_polar: 7\n    n_azimuth: 6\n  report_points: 5\n"
    )
    result = runner.invoke(app, ["bloch", "-c", path, "--log-base", "bits"])
    assert result.exit_code == 0
    landscape = pd.read_csv(tmp_path / "out" / "landscape_0.5pi.csv")
    assert list(landscape.columns) == ["polar", "azimuth", "coherence_bits", "normalized"]
    assert len(landscape) == 42
    comparison = pd.read_csv(tmp_path / "out" / "coherence_vs_theta.csv")
    assert "chi_bits" in comparison.columns
    assert len(comparison) == 5
    assert comparison["chi_bits"].iloc[-1] == pytest.approx(1.0, abs=1e-9)
    summary = read_json(tmp_path, "bloch_summary")
    assert summary["log_base"] == "bits"
    (entry,) = summary["thetas"]
    assert entry["chi"] == pytest.approx(0.6007, abs=1e-3)
    assert entry["helstrom_success"] == pytest.approx((1 + math.sin(math.pi / 4)) / 2, abs=1e-9)


def test_bloch_rerun_is_byte_identical(config_file, tmp_path):
    path = config_file(
        "bloch:\n  thetas_over_pi: [0.5]\n  landscape:\n    n_polar: 7\n    n_azimuth: 6\n  report_points: 5\n"
    )
    names = ["landscape_0.5pi.csv", "coherence_vs_theta.csv", "bloch_summary.json"]
    assert runner.invoke(app, ["bloch", "-c", path]).exit_code == 0
    first = {name: (tmp_path / "out" / name).read_bytes() for name in names}
    assert runner.invoke(app, ["bloch", "-c", path]).exit_code == 0
    assert {name: (tmp_path / "out" / name).read_bytes() for name in names} == first


def test_hg_coherence(config_file, tmp_path):
    result = runner.invoke(app, ["hg-coherence", "-c", config_file()])
    assert result.exit_code == 0
    summary = read_json(tmp_path, "hg_coherence")
    assert summary["theta_opt1"] == pytest.approx(1.1, abs=0.1)
    assert summary["theta_opt2"] == pytest.approx(4.6, abs=0.1)
    assert summary["coherence_at_zero"] == pytest.approx(0.53, abs=0.02)
    prior = pd.read_csv(tmp_path / "out" / "prior.csv")
    assert list(prior.columns) == ["phi", "weight"]
    assert prior["weight"].sum() == pytest.approx(1.0, abs=1e-9)
    curve = pd.read_csv(tmp_path / "out" / "coherence_posterior.csv")
    assert list(curve.columns) == ["theta", "coherence_nats", "chi_nats"]
    assert len(curve) == 201
    profiles = pd.read_csv(tmp_path / "out" / "mode_profiles.csv")
    assert list(profiles.columns) == ["x", "hg_0_sq", "hg_1_sq", "hg_2_sq", "hg_3_sq", "psi_sq_phi_-1", "psi_sq_phi_1"]
    assert len(profiles) == 481


def test_hg_coherence_truncation_error(config_file):
    assert runner.invoke(app, ["hg-coherence", "-c", config_file(), "--modes", "2"]).exit_code == 4


def test_hg_simulate_small_run(config_file, tmp_path):
    args = ["hg-simulate", "-c", config_file(), "--seed", "3", "--sequences", "4", "--measurements", "3"]
    assert runner.invoke(app, args).exit_code == 0
    amse = pd.read_csv(tmp_path / "out" / "amse.csv")
    assert list(amse.columns) == ["k", "strategy", "amse", "variance"]
    assert len(amse) == 15
    assert set(amse["strategy"]) == {"theta=0", "theta=0.5", "theta_opt1", "theta_opt2", "adaptive"}
    report = read_json(tmp_path, "hg_simulation")
    assert report["seed"] == 3
    assert report["final_amse"]["adaptive"] == pytest.approx(
        amse[(amse["strategy"] == "adaptive") & (amse["k"] == 3)]["amse"].iloc[0], rel=1e-9
    )


def test_hg_simulate_requires_seed(config_file):
    assert runner.invoke(app, ["hg-simulate", "-c", config_file()]).exit_code == 4


def test_resolve_shift():
    assert resolve_shift(0.5, None) == 0.5
    assert resolve_shift("opt2", (1.1, 4.6)) == 4.6
    with pytest.raises(ValueError):
        resolve_shift("opt1", None)
    with pytest.raises(ValueError):
        resolve_shift("best", (1.1, 4.6))
