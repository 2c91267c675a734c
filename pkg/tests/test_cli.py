"""CLI surface: subcommands, exit codes, output files."""

import json

import pytest

from qcsync.cli import main
from qcsync.scenario import builtin_scenario


@pytest.fixture
def analytic_scenario_file(tmp_path):
    doc = builtin_scenario("jump_-100ps")
    doc["mode"] = "analytic"
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(doc))
    return path


class TestRun:
    def test_analytic_run_writes_bundle(self, analytic_scenario_file, tmp_path, capsys):
        out = tmp_path / "out"
        code = main(["run", str(analytic_scenario_file), "--out-dir", str(out)])
        assert code == 0
        for name in ("series.csv", "series_rezeroed.csv", "tdev.csv", "alarms.csv",
                     "score.json", "meta.json"):
            assert (out / name).is_file(), name
        meta = json.loads((out / "meta.json").read_text())
        assert meta["mode"] == "analytic"
        assert meta["gap_count"] == 0
        assert "config_hash" in meta

    def test_mode_override_and_seed(self, tmp_path):
        out1 = tmp_path / "r1"
        out2 = tmp_path / "r2"
        args = ["run", "jump_-100ps", "--mode", "analytic", "--seed", "9"]
        assert main(args + ["--out-dir", str(out1)]) == 0
        assert main(args + ["--out-dir", str(out2)]) == 0
        assert (out1 / "series.csv").read_bytes() == (out2 / "series.csv").read_bytes()
        assert (out1 / "tdev.csv").read_bytes() == (out2 / "tdev.csv").read_bytes()

    def test_unknown_scenario_exits_config(self, capsys):
        assert main(["run", "definitely_not_a_scenario"]) == 1
        assert "builtin" in capsys.readouterr().err

    def test_rezeroed_series_applies_reference(self, analytic_scenario_file, tmp_path):
        out = tmp_path / "out"
        main(["run", str(analytic_scenario_file), "--out-dir", str(out)])
        lines = (out / "series_rezeroed.csv").read_text().splitlines()
        assert lines[0] == "epoch_start_s,delta_rezeroed_ps"
        first = float(lines[1].split(",")[1])
        assert abs(first) < 50.0  # raw sits near -9900, reference removes it


class TestValidate:
    def test_valid_file(self, analytic_scenario_file, capsys):
        assert main(["validate", str(analytic_scenario_file)]) == 0
        assert "ok" in capsys.readouterr().out

    def test_invalid_file_lists_issues(self, tmp_path, capsys):
        doc = builtin_scenario("baseline")
        doc["m_events"] = [
            {"pattern": "spike", "amplitude_ps": -1.0, "start_s": 1.0, "width_s": 0.0}
        ]
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        assert main(["validate", str(path)]) == 1
        assert "width_s" in capsys.readouterr().err

    def test_not_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{oops")
        assert main(["validate", str(path)]) == 1


class TestTdevAndDetect:
    def test_tdev_from_series_csv(self, analytic_scenario_file, tmp_path, capsys):
        out = tmp_path / "out"
        main(["run", str(analytic_scenario_file), "--out-dir", str(out)])
        curve_path = tmp_path / "curve.csv"
        assert main(["tdev", str(out / "series.csv"), "--out", str(curve_path)]) == 0
        lines = curve_path.read_text().splitlines()
        assert lines[0] == "tau_s,tdev_ps,m,n_terms"
        assert len(lines) > 3

    def test_tdev_nearest_tau_report(self, analytic_scenario_file, tmp_path, capsys):
        out = tmp_path / "out"
        main(["run", str(analytic_scenario_file), "--out-dir", str(out)])
        capsys.readouterr()
        assert main(["tdev", str(out / "series.csv"), "--tau", "100", "--tau", "10"]) == 0
        report = capsys.readouterr().out
        assert "tau 100 s -> nearest m=128" in report
        assert "tau 10 s -> nearest m=8" in report

    def test_detect_threshold_and_score(self, analytic_scenario_file, tmp_path, capsys):
        out = tmp_path / "out"
        main(["run", str(analytic_scenario_file), "--out-dir", str(out)])
        code = main(
            [
                "detect",
                str(out / "series.csv"),
                "--threshold-ps",
                "50",
                "--onset-s",
                "250",
                "--out-dir",
                str(tmp_path / "det"),
            ]
        )
        assert code == 0
        captured = capsys.readouterr().out
        assert '"detected": true' in captured
        assert (tmp_path / "det" / "alarms.csv").is_file()

    def test_detect_requires_a_detector(self, analytic_scenario_file, tmp_path):
        out = tmp_path / "out"
        main(["run", str(analytic_scenario_file), "--out-dir", str(out)])
        assert main(["detect", str(out / "series.csv")]) == 1
