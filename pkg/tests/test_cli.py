import json
import math

import numpy as np
import pytest

from critfield.cli import main
from critfield.io import load_field, matrix_from_record


def run_cli(*argv):
    return main(list(argv))


def read(path):
    with open(path) as fh:
        return json.load(fh)


class TestExitCodes:
    def test_check_passes(self, tmp_path):
        assert run_cli("check", "--model", "gaussian:a=1", "--N", "2",
                       "--out", str(tmp_path)) == 0
        payload = read(tmp_path / "check.json")
        assert payload["overall_pass"] is True
        assert payload["schema"] == 1

    def test_unknown_command_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as err:
            run_cli("frobnicate")
        assert err.value.code == 2

    def test_malformed_model_flag(self, tmp_path):
        assert run_cli("check", "--model", "gaussian:a", "--out", str(tmp_path)) == 2

    def test_config_missing_family(self, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"model": {"N": 2}}))
        assert run_cli("check", "--config", str(cfg)) == 2

    def test_empty_r_list_rejected(self, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"r": []}))
        assert run_cli("sigma", "--config", str(cfg), "--out", str(tmp_path)) == 2

    def test_verify_failure_is_contract_error(self, tmp_path):
        code = run_cli("sigma", "--model", "gaussian:a=1", "--N", "2",
                       "--r", "0.5", "--verify", "--tol", "1e-20",
                       "--out", str(tmp_path))
        assert code == 3

    def test_verify_passes_at_documented_tolerance(self, tmp_path):
        code = run_cli("sigma", "--model", "gaussian:a=1", "--N", "3",
                       "--r", "0.5", "--verify", "--out", str(tmp_path))
        assert code == 0
        payload = read(tmp_path / "sigma.json")
        assert payload["verify"][0]["max_abs"] < 1e-8


class TestArtifacts:
    def test_sigma_matrices_round_trip(self, tmp_path, gauss3):
        from critfield.covariance import conditional_covariance

        run_cli("sigma", "--model", "gaussian:a=1", "--N", "3", "--r", "0.4",
                "--out", str(tmp_path))
        payload = read(tmp_path / "sigma.json")
        stored = matrix_from_record(payload["sigma_r"][0])
        direct = conditional_covariance(gauss3, 0.4).sigma
        assert np.abs(stored - direct).max() < 1e-15

    def test_ratio_artifact_reproducible(self, tmp_path):
        args = ("ratio", "--model", "gaussian:a=1", "--N", "2", "--r", "0.1",
                "--u", "1", "--n", "50000", "--seed", "3")
        run_cli(*args, "--out", str(tmp_path / "a"))
        run_cli(*args, "--out", str(tmp_path / "b"))
        rec_a = read(tmp_path / "a" / "ratio.json")["results"][0]
        rec_b = read(tmp_path / "b" / "ratio.json")["results"][0]
        assert rec_a["value"] == rec_b["value"]
        assert rec_a["stderr"] == rec_b["stderr"]
        assert rec_a["seed"] == 3

    def test_flags_override_config(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "model": {"family": "gaussian", "params": {"a": 1.0}, "N": 2},
            "u": [2.0],
            "mc": {"n": 40000, "seed": 5},
        }))
        run_cli("psi", "--config", str(cfg), "--r", "0.3", "--u", "1",
                "--out", str(tmp_path))
        payload = read(tmp_path / "psi.json")
        assert payload["config"]["u"] == [1.0]
        assert payload["config"]["mc"]["n"] == 40000
        assert payload["seed"] == 5

    def test_saved_artifact_config_reproduces_run(self, tmp_path):
        # the embedded config is a valid config file: feeding it back yields
        # bit-identical values
        run_cli("ratio", "--model", "gaussian:a=1", "--N", "2", "--r", "0.08",
                "--u", "1", "--n", "60000", "--seed", "11",
                "--out", str(tmp_path / "first"))
        first = read(tmp_path / "first" / "ratio.json")
        cfg_path = tmp_path / "replay.json"
        cfg_path.write_text(json.dumps(first["config"]))
        run_cli("ratio", "--config", str(cfg_path), "--out", str(tmp_path / "second"))
        second = read(tmp_path / "second" / "ratio.json")
        for a, b in zip(first["results"], second["results"]):
            assert a["value"] == b["value"]
            assert a["stderr"] == b["stderr"]

    def test_spectrum_artifact(self, tmp_path):
        run_cli("spectrum", "--model", "gaussian:a=1", "--N", "4",
                "--out", str(tmp_path), "--format", "csv")
        payload = read(tmp_path / "spectrum.json")
        mults = [e["multiplicity"] for e in payload["catalogue"]["catalogue"]]
        assert sum(mults) == 12
        assert (tmp_path / "spectrum.csv").exists()

    def test_hpoly_artifact(self, tmp_path):
        run_cli("hpoly", "--model", "gaussian:a=1", "--N", "2",
                "--out", str(tmp_path))
        payload = read(tmp_path / "hpoly.json")
        assert payload["antisymmetry_residual"] < 1e-12
        assert len(payload["coefficients"]) >= 1

    def test_simulate_and_report(self, tmp_path):
        code = run_cli("simulate", "--model", "gaussian:a=1", "--N", "2",
                       "--realizations", "3", "--u", "2.5",
                       "--out", str(tmp_path))
        assert code == 0
        sim = read(tmp_path / "simulate.json")
        assert sim["euler_failures"] == 0
        field = load_field(tmp_path / "field_000")
        assert field.values.shape == (128, 128)
        assert (tmp_path / "critical_points.csv").exists()
        assert (tmp_path / "pairs.csv").exists()
        assert run_cli("report", "--out", str(tmp_path)) == 0
        assert (tmp_path / "report.csv").exists()
