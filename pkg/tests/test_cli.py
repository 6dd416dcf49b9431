"""The command line driver: outputs, round trips, determinism, exit codes."""

import json
import os

import numpy as np
import pytest

from ergolab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out)


class TestClassifyCmd:
    def test_pm_verdicts(self, capsys):
        code, res = run(capsys, "classify", "t^(3/2)*ln(t)")
        assert code == 0
        assert res["Pm"]["verdict"] == "Pm" and res["Pm"]["order"] == 2

    def test_linear(self, capsys):
        code, res = run(capsys, "classify", "t")
        assert res["Pm"]["order"] == 1

    def test_log_unclassified(self, capsys):
        code, res = run(capsys, "classify", "ln(t)")
        assert res["Pm"]["verdict"] == "Unclassified"

    def test_parse_error_positioned(self):
        with pytest.raises(Exception) as ei:
            main(["classify", "t^(3/"])
        assert "position" in str(ei.value)


class TestSeqAndBk:
    def test_seq(self, capsys, tmp_path):
        code, res = run(capsys, "seq", "t^(3/2)", "--N", "100",
                        "--out-dir", str(tmp_path), "--diagnostics")
        assert code == 0 and res["head"][:5] == [1, 2, 5, 8, 11]
        assert (tmp_path / "sequence.txt").exists()
        assert (tmp_path / "seq.manifest.json").exists()

    def test_seq_binary(self, capsys, tmp_path):
        run(capsys, "seq", "t", "--N", "4", "--binary", "--out-dir", str(tmp_path))
        raw = (tmp_path / "sequence.bin").read_bytes()
        assert raw == b"".join(int(v).to_bytes(8, "little") for v in (1, 2, 3, 4))

    def test_bk(self, capsys):
        code, res = run(capsys, "bk", "t^(1/2)", "--K", "5", "--diagnostics")
        assert code == 0 and res["head"] == [1, 4, 9, 16, 25]


class TestSetCmd:
    def test_rotation_density(self, capsys):
        code, res = run(capsys, "set", "rot:alpha=sqrt2-1,lo=0,hi=1/3,x0=0",
                        "--density", "--N", "1e5")
        assert code == 0
        assert abs(res["density"]["extrapolated"] - 1 / 3) < 0.01

    def test_akm(self, capsys):
        code, res = run(capsys, "set", "ap:2,2", "--akm", "1,2", "--N", "100")
        assert res["akm"]["head"][:3] == [2, 4, 6]


class TestWeylBoshQtest:
    def test_weyl_pass(self, capsys):
        code, res = run(capsys, "weyl", "sqrt2*t", "--N", "1e5")
        assert code == 0 and res["overall_pass"]

    def test_bosh(self, capsys):
        code, res = run(capsys, "bosh", "t/2")
        assert res["verdict"] == "degenerate"

    def test_qtest_witness(self, capsys):
        code, res = run(capsys, "qtest", "t*ln(t)")
        assert res["overall"] == "Q-fails" and res["witness"] == [-1, 1]


class TestAverageCmd:
    def test_average_with_expectation(self, capsys, tmp_path):
        code, res = run(capsys, "average", "--f", "t^(3/2)", "--N", "10000",
                        "--expect", "converges-to-0", "--out-dir", str(tmp_path),
                        "--diff-k", "1", "2")
        assert code == 0
        assert res["verdict"] == "converges-to-0"
        assert res["difference_averages"]["1"]["verdict"] == "converges-to-0"
        assert (tmp_path / "average_trace.csv").exists()

    def test_expectation_failure_exit_code(self, capsys):
        code, _ = run(capsys, "average", "--f", "t^(3/2)", "--N", "10000",
                      "--expect", "diverges")
        assert code == 3

    def test_simshift_power_bound_recorded(self, capsys):
        code, res = run(capsys, "average", "--model", "simshift:pattern=1,2",
                        "--f", "t^(3/2)", "--N", "10000")
        assert res["power_bound"]["M"] == 2.0

    def test_trace_csv_format(self, capsys, tmp_path):
        run(capsys, "average", "--f", "t", "--N", "1000",
            "--out-dir", str(tmp_path))
        lines = (tmp_path / "average_trace.csv").read_bytes().split(b"\r\n")
        assert lines[0] == b"N,N_eff,value_re,value_im,norm2,osc"


class TestBattery:
    MANIFEST = {
        "name": "mini",
        "experiments": [
            {"name": "ok-average", "kind": "average", "f": "t^(3/2)",
             "N": 5000, "expect": "converges-to-0", "difference_k": [1]},
            {"name": "ok-bosh", "kind": "bosh", "g": "t^(3/2)",
             "expect": "equidistributed"},
            {"name": "ok-set", "kind": "set",
             "spec": "rot:alpha=sqrt2-1,lo=0,hi=1/2,x0=0", "N": 20000,
             "expect_density": 0.5, "density_tol": 0.01},
        ],
    }

    def _write(self, tmp_path, manifest=None):
        p = tmp_path / "manifest.json"
        p.write_text(json.dumps(manifest or self.MANIFEST))
        return str(p)

    def test_battery_green(self, capsys, tmp_path):
        path = self._write(tmp_path)
        code, res = run(capsys, "battery", path, "--out-dir", str(tmp_path))
        assert code == 0 and res["failures"] == []

    def test_battery_determinism(self, capsys, tmp_path):
        path = self._write(tmp_path)
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        main(["battery", path, "--out-dir", str(out1)])
        capsys.readouterr()
        main(["battery", path, "--out-dir", str(out2)])
        capsys.readouterr()
        b1 = (out1 / "battery_results.json").read_bytes()
        b2 = (out2 / "battery_results.json").read_bytes()
        assert b1 == b2

    def test_battery_failure_exit(self, capsys, tmp_path):
        bad = {"name": "bad", "experiments": [
            {"name": "wrong", "kind": "bosh", "g": "t^(3/2)",
             "expect": "degenerate"}]}
        path = self._write(tmp_path, bad)
        code, res = run(capsys, "battery", path)
        assert code == 2 and res["failures"] == ["wrong"]

    def test_battery_parallel_matches_serial(self, capsys, tmp_path):
        path = self._write(tmp_path)
        out1, out2 = tmp_path / "s", tmp_path / "p"
        main(["battery", path, "--out-dir", str(out1)])
        capsys.readouterr()
        main(["battery", path, "--out-dir", str(out2), "--jobs", "3"])
        capsys.readouterr()
        assert (out1 / "battery_results.json").read_bytes() == \
            (out2 / "battery_results.json").read_bytes()

    def test_paper_suite_manifest_parses(self):
        root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
        with open(os.path.join(root, "paper-suite.json")) as f:
            suite = json.load(f)
        assert suite["name"] == "paper-suite"
        kinds = {e["kind"] for e in suite["experiments"]}
        assert {"average", "qtest", "weyl", "bosh", "set"} <= kinds
        n_grid = sum(1 for e in suite["experiments"]
                     if e["kind"] == "average" and "difference_k" in e)
        assert n_grid == 24


class TestManifestRoundTrip:
    def test_manifest_config_reparses(self, capsys, tmp_path):
        run(capsys, "average", "--f", "t^(3/2);period:1,-1",
            "--set", "rot:alpha=sqrt2-1,lo=0,hi=1/2,x0=0",
            "--weights", "sqrt2*t", "--N", "1000", "--out-dir", str(tmp_path))
        man = json.loads((tmp_path / "average.manifest.json").read_text())
        from ergolab import IndexSet, SubsequenceSpec, WeightSpec
        cfgd = man["config"]
        assert SubsequenceSpec.parse(cfgd["subsequence"]).spec_string() == cfgd["subsequence"]
        assert IndexSet.parse(cfgd["index_set"]).spec_string() == cfgd["index_set"]
        assert WeightSpec.parse(cfgd["weights"]).spec_string() == cfgd["weights"]
