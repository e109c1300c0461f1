"""Tests for the command line entry point."""
import json
import os

import pytest
from kickedrotor.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, main


def _config(tmp_path, **data):
    body = {"steps": 30, "kicks": {"kappa1": 1.0, "kappa2": 2.0}, "record": {"per_decade": 32}}
    body.update(data)
    path = tmp_path / "run.json"
    path.write_text(json.dumps(body))
    return str(path)


class TestMain:
    """Tests for argument handling and exit codes."""

    def test_simulate(self, tmp_path, capsys):
        out = tmp_path / "out"
        code = main(["simulate", "--config", _config(tmp_path), "--out", str(out), "--workers", "1"])
        assert code == EXIT_OK
        assert capsys.readouterr().out.strip() == str(out)
        assert (out / "series.csv").exists()
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["experiment"] == "simulate"

    def test_command_overrides_config_experiment(self, tmp_path):
        out = tmp_path / "out"
        path = _config(tmp_path, experiment="classical", classical={"particles": 50})
        assert main(["simulate", "--config", path, "--out", str(out), "--workers", "1"]) == EXIT_OK
        assert (out / "series.csv").exists()

    def test_flags_reach_config(self, tmp_path):
        out = tmp_path / "out"
        args = [
            "simulate", "--config", _config(tmp_path), "--out", str(out), "--workers", "1",
            "--seed", "4", "--method", "direct", "--convention", "literal-eq3", "--reverse-blocks",
        ]
        assert main(args) == EXIT_OK
        config = json.loads((out / "manifest.json").read_text())["config"]
        assert config["seed"] == 4
        assert config["numerics"]["method"] == "direct"
        assert config["numerics"]["convention"] == "literal_eq3"
        assert config["sequence"]["reverse_blocks"] is True

    def test_replay_from_manifest(self, tmp_path):
        first, second = tmp_path / "first", tmp_path / "second"
        path = _config(tmp_path, sequence={"kind": "random"})
        assert main(["simulate", "--config", path, "--out", str(first), "--workers", "1"]) == EXIT_OK
        manifest = str(first / "manifest.json")
        assert main(["simulate", "--from-manifest", manifest, "--out", str(second), "--workers", "1"]) == EXIT_OK
        assert (first / "series.csv").read_bytes() == (second / "series.csv").read_bytes()

    def test_missing_config(self, tmp_path, capsys):
        assert main(["simulate", "--config", str(tmp_path / "nope.json")]) == EXIT_CONFIG
        assert "config error" in capsys.readouterr().err

    def test_unknown_key(self, tmp_path, capsys):
        code = main(["simulate", "--config", _config(tmp_path, kicks={"kappa": 1.0})])
        assert code == EXIT_CONFIG
        assert "kicks.kappa" in capsys.readouterr().err

    def test_bad_arguments(self):
        assert main(["plot"]) == EXIT_CONFIG
        assert main(["simulate", "--method", "euler"]) == EXIT_CONFIG

    def test_config_and_manifest_conflict(self, tmp_path):
        path = _config(tmp_path)
        assert main(["simulate", "--config", path, "--from-manifest", path]) == EXIT_CONFIG

    def test_numerical_failure(self, tmp_path, capsys):
        path = _config(tmp_path, resonances=[[1, 1]], kicks={"kappa1": 5.0, "kappa2": 10.0},
                       grid={"max_sites": 300})
        code = main(["simulate", "--config", path, "--out", str(tmp_path / "out"), "--workers", "1"])
        assert code == EXIT_NUMERICAL
        assert "numerical failure" in capsys.readouterr().err

    def test_verify(self, capsys):
        if os.getenv("QKR_SLOW_TESTS") != "1":
            pytest.skip("Set QKR_SLOW_TESTS=1 to run long acceptance runs.")
        code = main(["verify"])
        report = json.loads(capsys.readouterr().out)
        assert code == EXIT_OK
        assert report["passed"]
        assert {check["name"] for check in report["checks"]} >= {
            "bessel_series_oracle", "split_vs_direct", "primary_sigma_oracle", "antiresonance_revival",
        }
