import csv
import io
import json
import math

import numpy as np
import pytest

from covertbc.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def payload(out: str) -> dict:
    return json.loads(out)


class TestValidate:
    def test_example_model_exit0(self, capsys, ex1_file):
        code, out, _ = run_cli(capsys, "validate", str(ex1_file))
        assert code == 0
        doc = payload(out)
        deg = doc["outputs"]["degradation"]
        assert deg["feasible"]
        assert deg["residual"] <= 1e-9
        w = np.array(deg["W"])
        np.testing.assert_allclose(w.sum(axis=1), 1.0, atol=1e-9)
        assert doc["outputs"]["conditions"]["cond_a"]

    def test_non_degraded_pair_exit1(self, capsys, tmp_path, ex1_file):
        doc = json.loads(ex1_file.read_text())
        doc["P1"], doc["P2"] = doc["P2"], doc["P1"]  # reversed: not degraded
        path = tmp_path / "reversed.json"
        path.write_text(json.dumps(doc))
        code, out, _ = run_cli(capsys, "validate", str(path))
        assert code == 1
        assert "degradation: infeasible" in json.dumps(payload(out)["diagnostics"])

    def test_malformed_file_exit2(self, capsys, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("][")
        code, _, err = run_cli(capsys, "validate", str(path))
        assert code == 2


class TestCapacity:
    def test_user1(self, capsys, ex1_file):
        code, out, _ = run_cli(capsys, "capacity", str(ex1_file), "--user", "1")
        assert code == 0
        doc = payload(out)
        assert doc["outputs"]["capacity"] == pytest.approx(0.46946, abs=1e-4)
        pmf = doc["outputs"]["argmax_pmf"]
        assert pmf[0] == 0.0
        assert sum(pmf) == pytest.approx(1.0, abs=1e-9)

    def test_user2(self, capsys, ex1_file):
        code, out, _ = run_cli(capsys, "capacity", str(ex1_file), "--user", "2")
        assert code == 0
        assert payload(out)["outputs"]["capacity"] == pytest.approx(0.28590, abs=1e-3)

    def test_degenerate_warns_and_returns_zero(self, capsys, tmp_path):
        row = [0.25, 0.25, 0.25, 0.25]
        doc = {"x0": 0, "P1": [row, row, row], "P2": [row, row, row],
               "Q": [[0.2, 0.2, 0.3, 0.3], [0.1, 0.3, 0.4, 0.2], [0.4, 0.3, 0.2, 0.1]]}
        path = tmp_path / "flat.json"
        path.write_text(json.dumps(doc))
        code, out, _ = run_cli(capsys, "capacity", str(path), "--user", "1")
        assert code == 0
        doc = payload(out)
        assert doc["outputs"]["capacity"] == 0.0
        assert doc["diagnostics"]["warnings"]


class TestBoundary:
    def test_two_points_csv_roundtrip(self, capsys, tmp_path, ex1_file):
        out_csv = tmp_path / "front.csv"
        code, out, _ = run_cli(capsys, "boundary", str(ex1_file),
                               "--points", "2", "--seed", "3",
                               "--out", str(out_csv))
        assert code == 0
        text = out_csv.read_text()
        rows = list(csv.reader(io.StringIO(text)))
        assert rows[0] == ["L1", "L2"]
        assert len(rows) == 3  # header + two endpoints
        stdout_pts = payload(out)["outputs"]["points"]
        file_pts = [[float(a), float(b)] for a, b in rows[1:]]
        assert file_pts == stdout_pts  # repr round-trip is exact

    def test_json_output(self, capsys, tmp_path, ex1_file):
        out_json = tmp_path / "front.json"
        code, out, _ = run_cli(capsys, "boundary", str(ex1_file),
                               "--points", "2", "--out", str(out_json))
        assert code == 0
        doc = json.loads(out_json.read_text())
        assert "points" in doc and "params" in doc and "meta" in doc

    def test_deterministic_under_seed(self, capsys, ex1_file):
        _, out_a, _ = run_cli(capsys, "boundary", str(ex1_file), "--points", "2",
                              "--seed", "11")
        _, out_b, _ = run_cli(capsys, "boundary", str(ex1_file), "--points", "2",
                              "--seed", "11")
        assert out_a == out_b


class TestGammaAndSweep:
    def test_gamma_on_family_row(self, capsys, tmp_path, ex2_family_file):
        fam = json.loads(ex2_family_file.read_text())
        w = [[0.9, 0.1], [0.6, 0.4]]
        doc = {"x0": 0, "P1": fam["P1"],
               "P2": (np.array(fam["P1"]) @ np.array(w)).tolist(), "Q": fam["Q"]}
        path = tmp_path / "c06.json"
        path.write_text(json.dumps(doc))
        code, out, _ = run_cli(capsys, "gamma", str(path))
        assert code == 0
        assert payload(out)["outputs"]["gamma_star"] == pytest.approx(1.0178, abs=2e-3)

    def test_sweep_three_values(self, capsys, tmp_path, ex2_family_file):
        fam = json.loads(ex2_family_file.read_text())
        fam["values"] = [0.2, 0.9]
        path = tmp_path / "small_family.json"
        path.write_text(json.dumps(fam))
        code, out, _ = run_cli(capsys, "sweep", str(path))
        assert code == 0
        rows = payload(out)["outputs"]["rows"]
        assert [r["condition"] for r in rows] == [0, 1]
        assert rows[0]["gamma_star"] == pytest.approx(1.0047, abs=2e-3)
        assert rows[1]["gamma_star"] == pytest.approx(1.0, abs=1e-3)

    def test_sweep_missing_key_exit2(self, capsys, tmp_path):
        path = tmp_path / "incomplete.json"
        path.write_text(json.dumps({"x0": 0}))
        code, _, err = run_cli(capsys, "sweep", str(path))
        assert code == 2

    def test_family_entry_expressions_are_restricted(self, capsys, tmp_path,
                                                     ex2_family_file):
        fam = json.loads(ex2_family_file.read_text())
        fam["W"] = [[0.9, 0.1], ["__import__('os').getpid()", "1 - c"]]
        path = tmp_path / "evil.json"
        path.write_text(json.dumps(fam))
        code, out, _ = run_cli(capsys, "sweep", str(path))
        rows = payload(out)["outputs"]["rows"]
        assert all(r["error"] for r in rows)


class TestVerifyTaylor:
    def test_small_run_passes(self, capsys, ex1_file):
        code, out, _ = run_cli(capsys, "verify-taylor", str(ex1_file),
                               "--joints", "3", "--seed", "5")
        assert code == 0
        doc = payload(out)
        assert doc["outputs"]["passed"]
        assert doc["outputs"]["max_rel_err_first_derivatives"] <= 1e-2
        assert doc["outputs"]["first_order"]["max_final_rel"] <= 1e-2
