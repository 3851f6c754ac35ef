import json

import numpy as np
import pytest

from tunneltrainer.cli import main
from tunneltrainer.pipeline import paired_condition_means, run_default_sweep
from tunneltrainer.stats import wilcoxon_signed_rank
from tunneltrainer.storage import (load_trajectory, read_analytics_csv,
                                   write_analytics_csv, write_messages_jsonl)


class TestSimulate:
    def test_same_seed_identical_files(self, tmp_path):
        a = tmp_path / "a.jsonl"
        b = tmp_path / "b.jsonl"
        for out in (a, b):
            rc = main(["simulate", "--exercise", "T4", "--condition", "no",
                       "--seed", "7", "--out", str(out)])
            assert rc == 0
        assert a.read_bytes() == b.read_bytes()

    def test_closed_loop_condition(self, tmp_path):
        out = tmp_path / "c2.jsonl"
        rc = main(["simulate", "--exercise", "T1", "--condition", "c2",
                   "--seed", "3", "--out", str(out)])
        assert rc == 0
        assert out.exists()

    def test_explicit_bias(self, tmp_path):
        out = tmp_path / "b.jsonl"
        rc = main(["simulate", "--exercise", "T1", "--condition", "no",
                   "--seed", "1", "--bias", "0.02,0,0", "--wander", "0",
                   "--out", str(out)])
        assert rc == 0


class TestAnalyze:
    def test_zero_noise_err_zero(self, tmp_path):
        log = tmp_path / "log.jsonl"
        main(["simulate", "--exercise", "T1", "--condition", "no",
              "--seed", "1", "--bias", "0,0,0", "--wander", "0",
              "--out", str(log)])
        report = tmp_path / "summary.json"
        rc = main(["analyze", str(log), "--out", str(report)])
        assert rc == 0
        doc = json.loads(report.read_text())
        assert doc["err"] == 0.0
        assert doc["n_repetitions"] == 5

    def test_csv_row_appended(self, tmp_path):
        log = tmp_path / "log.jsonl"
        main(["simulate", "--exercise", "T2", "--condition", "no",
              "--seed", "2", "--out", str(log)])
        csv_path = tmp_path / "err.csv"
        rc = main(["analyze", str(log), "--subject", "s2", "--condition", "no",
                   "--csv", str(csv_path), "--out", str(tmp_path / "s.json")])
        assert rc == 0
        rows = read_analytics_csv(csv_path)
        assert rows[0]["subject"] == "s2"
        assert rows[0]["exercise"] == "T2"
        assert rows[0]["err"] > 0

    def test_missing_file_exit_1(self, tmp_path, capsys):
        rc = main(["analyze", str(tmp_path / "nope.jsonl")])
        assert rc == 1

    def test_usage_error_exit_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["analyze"])  # missing positional
        assert exc.value.code == 2

    def test_unknown_subcommand_exit_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["transmogrify"])
        assert exc.value.code == 2


class TestRecord:
    def test_record_produces_loadable_trajectory(self, tmp_path):
        msgs = []
        for i in range(80):
            msgs.append({"type": "hand_sample", "t_ms": i * 16.0,
                         "pos_m": [i * 0.004, 0.0, 0.0]})
        src = tmp_path / "sweep.jsonl"
        write_messages_jsonl(msgs, src)
        out = tmp_path / "demo.json"
        rc = main(["record", "--in", str(src), "--spacing", "0.02",
                   "--out", str(out), "--author", "ot-4", "--id", "sweep-left"])
        assert rc == 0
        traj = load_trajectory(out)
        assert traj.id == "sweep-left"
        assert traj.metadata["author"] == "ot-4"
        assert len(traj.via_points) >= 10

    def test_degenerate_recording_exit_1(self, tmp_path, capsys):
        msgs = [{"type": "hand_sample", "t_ms": float(i), "pos_m": [0, 0, 0]}
                for i in range(10)]
        src = tmp_path / "still.jsonl"
        write_messages_jsonl(msgs, src)
        rc = main(["record", "--in", str(src), "--out", str(tmp_path / "x.json")])
        assert rc == 1
        assert "error" in capsys.readouterr().err


class TestStats:
    def test_sus_report(self, tmp_path, capsys):
        csv = tmp_path / "sus.csv"
        csv.write_text(
            "subject,q1,q2,q3,q4,q5,q6,q7,q8,q9,q10\n"
            "s1,5,1,5,1,5,1,5,1,5,1\n"
            "s2,3,3,3,3,3,3,3,3,3,3\n")
        rc = main(["stats", "sus", "--in", str(csv)])
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["scores"]["s1"] == 100.0
        assert doc["scores"]["s2"] == 50.0
        assert doc["mean"] == 75.0

    def test_tam_report(self, tmp_path, capsys):
        rng = np.random.default_rng(2)
        header = ["subject"]
        cats = {"WTU": 3, "PU": 3, "PEOU": 3, "TRI": 2, "IND": 2, "GRAPH": 2}
        for cat, n in cats.items():
            for i in range(1, n + 1):
                header.append(f"{cat}.{i}{'-' if i == n and cat == 'WTU' else '+'}")
        lines = [",".join(header)]
        for s in range(8):
            vals = rng.integers(2, 6, sum(cats.values()))
            lines.append(",".join([f"s{s}"] + [str(v) for v in vals]))
        csv = tmp_path / "tam.csv"
        csv.write_text("\n".join(lines) + "\n")
        rc = main(["stats", "tam", "--in", str(csv)])
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)
        assert set(doc["categories"]) == set(cats)
        assert doc["regressions"][0]["target"] == "WTU"

    def test_compare_matches_library(self, tmp_path, capsys):
        rows = run_default_sweep(exercises=("T1",), seeds=range(6))
        csv = tmp_path / "sweep.csv"
        write_analytics_csv(rows, csv)
        rc = main(["stats", "compare", "--in", str(csv),
                   "--condition-a", "no", "--condition-b", "c2"])
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)

        _, a, b = paired_condition_means(rows, "no", "c2")
        ref = wilcoxon_signed_rank(a, b)
        assert doc["n_pairs"] == 6
        assert doc["statistic"] == ref.statistic
        assert doc["p_value"] == ref.p_value

    def test_compare_no_overlap_exit_1(self, tmp_path):
        csv = tmp_path / "sweep.csv"
        write_analytics_csv([{"subject": "s0", "exercise": "T1",
                              "condition": "no", "space": "ee", "err": 0.01}],
                            csv)
        rc = main(["stats", "compare", "--in", str(csv),
                   "--condition-a", "no", "--condition-b", "c3"])
        assert rc == 1


class TestJointAnalyze:
    def test_joint_space_summary(self, tmp_path):
        log = tmp_path / "log.jsonl"
        main(["simulate", "--exercise", "T1", "--condition", "no",
              "--seed", "4", "--out", str(log)])
        report = tmp_path / "joint.json"
        rc = main(["analyze", str(log), "--space", "joint",
                   "--out", str(report)])
        assert rc == 0
        doc = json.loads(report.read_text())
        assert doc["space"] == "joint"
        assert doc["err_deg"] == pytest.approx(np.degrees(doc["err"]), abs=1e-9)
