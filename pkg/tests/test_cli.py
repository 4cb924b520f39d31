import json
import subprocess
import sys

import pytest

from qsense.cli import EXIT_CONFIG, EXIT_MISMATCH, EXIT_OK, main

SMALL = ["--reps", "4", "--shots", "2048", "--tests", "20"]


def _run(*args):
    return main([str(a) for a in args])


def test_default_collect(tmp_path):
    assert _run("collect", "--out", tmp_path) == EXIT_OK
    doc = json.loads((tmp_path / "references.json").read_text())
    assert sorted(doc["signatures"]) == ["0", "1"]
    for sig in doc["signatures"].values():
        assert sig["repetitions"] * sig["shots_per_rep"] == 37 * 8192
    assert doc["batches"] == [74]
    assert {"toolkit", "config", "seed", "device_hash"} <= set(doc)
    assert doc["toolkit"]["version"]


def test_two_victims_four_labels(tmp_path):
    assert _run("collect", "--victims", "1,0", "--out", tmp_path, *SMALL) == EXIT_OK
    doc = json.loads((tmp_path / "references.json").read_text())
    assert sorted(doc["signatures"]) == ["00", "01", "10", "11"]


def test_invalid_qubit(tmp_path, capsys):
    assert _run("collect", "--adversary", "11", "--out", tmp_path) == EXIT_CONFIG
    assert "adversary" in capsys.readouterr().err


def test_unknown_device(tmp_path, capsys):
    assert _run("collect", "--device", "nope.json", "--out", tmp_path) == EXIT_CONFIG
    assert "device" in capsys.readouterr().err


def test_attack_outputs(tmp_path):
    assert _run("collect", "--out", tmp_path, *SMALL) == EXIT_OK
    assert _run("attack", "--out", tmp_path, *SMALL) == EXIT_OK
    summary = json.loads((tmp_path / "attack_summary.json").read_text())
    assert 0.0 <= summary["summary"]["accuracy"] <= 1.0
    assert summary["summary"]["n_tests"] == 20
    rows = (tmp_path / "attack_tests.csv").read_text().splitlines()
    assert rows[0].split(",")[:6] == ["test", "circuit_seed", "depth", "truth", "predicted", "delta_jsd"]
    assert len(rows) == 21


def test_attack_requires_matching_device(tmp_path, capsys):
    assert _run("collect", "--out", tmp_path, *SMALL) == EXIT_OK
    assert _run("attack", "--device", "tee5", "--out", tmp_path, *SMALL) == EXIT_MISMATCH
    assert "reference/device mismatch" in capsys.readouterr().err


def test_attack_without_references(tmp_path):
    assert _run("attack", "--out", tmp_path, *SMALL) == EXIT_MISMATCH


def test_byte_identical_reruns(tmp_path):
    outs = []
    for i, workers in enumerate((1, 3)):
        out = tmp_path / f"run{i}"
        for cmd in ("collect", "attack", "defend"):
            assert _run(cmd, "--out", out, "--workers", workers, "--seed", 5, *SMALL) == EXIT_OK
        outs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    assert outs[0] == outs[1]
    assert set(outs[0]) == {"references.json", "attack_summary.json", "attack_tests.csv",
                            "defense_report.json"}


def test_defend_report_fields(tmp_path):
    assert _run("defend", "--out", tmp_path, *SMALL) == EXIT_OK
    doc = json.loads((tmp_path / "defense_report.json").read_text())
    for key in ("fidelity_with", "fidelity_without", "loss", "adversary_accuracy_defended",
                "adversary_accuracy_undefended"):
        assert key in doc
    assert doc["loss"] <= 0.002


def test_defense_off_matches_undefended(tmp_path):
    assert _run("defend", "--defense", "off", "--out", tmp_path, *SMALL) == EXIT_OK
    doc = json.loads((tmp_path / "defense_report.json").read_text())
    assert doc["adversary_accuracy_defended"] == doc["adversary_accuracy_undefended"]


def test_two_victim_defense(tmp_path):
    assert _run("defend", "--victims", "1,0", "--reps", "10", "--tests", "200",
                "--out", tmp_path) == EXIT_OK
    doc = json.loads((tmp_path / "defense_report.json").read_text())
    assert doc["adversary_accuracy_defended"] == pytest.approx(0.25, abs=0.1)


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "exp.json"
    cfg.write_text(json.dumps({"victims": [3], "adversary": 4, "reps": 2, "shots": 1024,
                               "seed": 9, "out": str(tmp_path / "a")}))
    assert _run("collect", "--config", cfg, "--seed", 10) == EXIT_OK
    doc = json.loads((tmp_path / "a" / "references.json").read_text())
    assert doc["victims"] == [3] and doc["adversary"] == 4
    assert doc["seed"] == 10 and doc["config"]["reps"] == 2


def test_config_unknown_field(tmp_path):
    cfg = tmp_path / "exp.json"
    cfg.write_text(json.dumps({"qubitz": 3}))
    assert _run("collect", "--config", cfg) == EXIT_CONFIG


def test_report_rerenders(tmp_path, capsys):
    assert _run("collect", "--out", tmp_path, *SMALL) == EXIT_OK
    assert _run("attack", "--out", tmp_path, *SMALL) == EXIT_OK
    csv_path = tmp_path / "attack_tests.csv"
    original = csv_path.read_bytes()
    csv_path.unlink()
    capsys.readouterr()
    assert _run("report", "--out", tmp_path) == EXIT_OK
    assert csv_path.read_bytes() == original
    assert "accuracy" in capsys.readouterr().out


def test_report_nothing(tmp_path):
    assert _run("report", "--out", tmp_path / "empty") == EXIT_MISMATCH


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "qsense", "collect", "--victims", "9",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == EXIT_CONFIG
    assert "victims" in proc.stderr
