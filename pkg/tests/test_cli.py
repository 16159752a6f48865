import json
from pathlib import Path

import pytest

from wedgeroute.cli import main
from wedgeroute.experiments import ExperimentReport, ReportCell

GOLDEN = Path(__file__).parent / "golden"


def _run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestBounds:
    def test_golden_json(self, capsys):
        code, out, _ = _run(capsys, ["bounds", "--N", "1e5", "--d", "1e-3", "--eta", "0.5"])
        assert code == 0
        assert out == (GOLDEN / "bounds_N1e5.json").read_text()

    def test_optional_tables(self, capsys):
        code, out, _ = _run(
            capsys,
            ["bounds", "--N", "1e4", "--d", "1e-2", "--h-over-R", "10", "--max-i", "3"],
        )
        assert code == 0
        data = json.loads(out)
        assert data["hop_bounds"][0]["simplified_upper"] == 40.0
        assert [row["exact"] for row in data["empty_wedge"]] == [1.0, 1.0, 0.75]

    def test_csv_format(self, capsys):
        code, out, _ = _run(
            capsys, ["bounds", "--N", "1e4", "--d", "1e-2", "--format", "csv"]
        )
        assert code == 0
        assert out.splitlines()[0] == "quantity,value"

    def test_missing_required(self, capsys):
        code, _, err = _run(capsys, ["bounds", "--d", "1e-3"])
        assert code == 2
        assert "config error" in err


class TestConfigFile:
    def test_file_values_used_and_flags_override(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"N": 1e5, "d": 1e-3, "eta": 0.25}))
        code, out, _ = _run(capsys, ["bounds", "--config", str(cfg), "--eta", "0.5"])
        assert code == 0
        assert json.loads(out)["eta"] == 0.5  # flag wins over file
        code, out, _ = _run(capsys, ["bounds", "--config", str(cfg)])
        assert json.loads(out)["eta"] == 0.25

    def test_unknown_key_rejected(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"N": 1e5, "d": 1e-3, "frobnicate": 1}))
        code, _, err = _run(capsys, ["bounds", "--config", str(cfg)])
        assert code == 2
        assert "frobnicate" in err

    def test_malformed_json_line_anchored(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text('{"N": 1e5,\n  "d": }')
        code, _, err = _run(capsys, ["bounds", "--config", str(cfg)])
        assert code == 2
        assert "line 2" in err

    def test_missing_file(self, capsys):
        code, _, err = _run(capsys, ["bounds", "--config", "/nonexistent.json"])
        assert code == 2

    def test_scientific_notation_counts(self, capsys, tmp_path):
        code, out, _ = _run(
            capsys,
            ["exp", "uwedge", "--N", "50", "--d", "0.1", "--trials", "1e3",
             "--max-i", "2", "--eta-list", "0.5"],
        )
        assert code == 0
        assert len(json.loads(out)["cells"]) == 2


class TestRoute:
    def test_stuck_exits_zero(self, capsys):
        code, out, _ = _run(
            capsys,
            ["route", "--lambda", "1e-6", "--R", "1", "--h-over-R", "5", "--seed", "3"],
        )
        assert code == 0
        assert json.loads(out)["status"] == "stuck"

    def test_delivered_dense(self, capsys):
        code, out, _ = _run(
            capsys,
            ["route", "--lambda", "8", "--R", "1", "--h-over-R", "5", "--seed", "3"],
        )
        assert code == 0
        data = json.loads(out)
        assert data["status"] == "delivered"
        assert data["hops"] == len(data["path"]) + 1  # synthetic source

    def test_csv_trace(self, capsys):
        code, out, _ = _run(
            capsys,
            ["route", "--lambda", "8", "--R", "1", "--h-over-R", "5", "--seed", "3",
             "--format", "csv"],
        )
        assert code == 0
        assert out.splitlines()[0] == "hop,node_id,x,y,distance_to_dst"

    def test_node_id_mode(self, capsys):
        code, out, _ = _run(
            capsys,
            ["route", "--lambda", "8", "--R", "1", "--size", "6", "--seed", "3",
             "--src", "0", "--dst", "1"],
        )
        assert code == 0
        assert json.loads(out)["path"][0] == 0

    def test_bad_node_id(self, capsys):
        code, _, err = _run(
            capsys,
            ["route", "--lambda", "1e-6", "--R", "1", "--size", "6", "--seed", "3",
             "--src", "0", "--dst", "999999"],
        )
        assert code == 2


class TestWalkGen:
    def test_walk_csv_columns(self, capsys):
        code, out, _ = _run(capsys, ["walk", "--h-over-R", "4", "--seed", "2", "--format", "csv"])
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "t,r,xi"
        assert lines[1].split(",")[1] == "4"

    def test_walk_json_deterministic(self, capsys):
        a = _run(capsys, ["walk", "--h-over-R", "4", "--seed", "2"])
        b = _run(capsys, ["walk", "--h-over-R", "4", "--seed", "2"])
        assert a == b

    def test_gen_csv(self, capsys):
        code, out, _ = _run(
            capsys,
            ["gen", "--lambda", "5", "--R", "0.5", "--size", "2", "--seed", "1",
             "--format", "csv"],
        )
        assert code == 0
        assert out.splitlines()[0] == "id,x,y"

    def test_gen_writes_file(self, capsys, tmp_path):
        out_path = tmp_path / "nodes.csv"
        code, out, _ = _run(
            capsys,
            ["gen", "--lambda", "5", "--R", "0.5", "--size", "2", "--seed", "1",
             "--format", "csv", "--out", str(out_path)],
        )
        assert code == 0
        assert out == ""
        assert out_path.read_text().splitlines()[0] == "id,x,y"


class TestExp:
    def test_stepdist_identical_bytes(self, capsys):
        argv = ["exp", "stepdist", "--lambda", "50", "--R", "1", "--size", "30",
                "--r-over-R", "2", "--trials", "2e4", "--seed", "7", "--net-trials", "0"]
        a = _run(capsys, argv)
        b = _run(capsys, argv)
        assert a == b and a[0] == 0

    def test_violated_verdict_exits_3(self, capsys, monkeypatch):
        import wedgeroute.cli as cli_mod

        def fake_runner(cfg):
            return ExperimentReport(
                "uwedge", [ReportCell("x", None, 0.1, 0.9, 0.0, "violated")]
            )

        monkeypatch.setitem(cli_mod.RUNNERS, "uwedge", fake_runner)
        code, out, _ = _run(
            capsys, ["exp", "uwedge", "--N", "50", "--d", "0.1", "--trials", "10"]
        )
        assert code == 3
        assert "violated" in out

    def test_param_conflict_rejected(self, capsys):
        code, _, err = _run(
            capsys,
            ["exp", "uwedge", "--N", "50", "--d", "0.1", "--lambda", "5", "--trials", "10"],
        )
        assert code == 2
        assert "either" in err

    def test_exp_region_too_small_is_config_error(self, capsys):
        code, _, err = _run(
            capsys,
            ["exp", "hopcount", "--lambda", "10", "--R", "1", "--size", "3",
             "--h-over-R", "10", "--trials", "5"],
        )
        assert code == 2

    def test_exp_hopcount_auto_size(self, capsys):
        code, out, _ = _run(
            capsys,
            ["exp", "hopcount", "--lambda", "10", "--R", "1", "--h-over-R", "4",
             "--trials", "30", "--seed", "2"],
        )
        assert code == 0
        cells = json.loads(out)["cells"]
        assert cells[0]["label"] == "h_over_R=4:mean_transmissions"

    def test_unknown_experiment(self, capsys):
        code, _, _ = _run(capsys, ["exp", "nonsense", "--trials", "5"])
        assert code == 2

    def test_bad_format_rejected(self, capsys):
        code, _, err = _run(
            capsys, ["bounds", "--N", "1e4", "--d", "1e-2", "--format", "xml"]
        )
        assert code == 2
        assert "format" in err

    def test_bad_policy_rejected(self, capsys):
        code, _, err = _run(
            capsys,
            ["route", "--lambda", "1", "--R", "1", "--policy", "teleport"],
        )
        assert code == 2
        assert "policy" in err
