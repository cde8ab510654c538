import json
from pathlib import Path

import pytest

from kseq.cli import main

GOLDEN = Path(__file__).parent / "golden" / "quick_suite.json"


def run(tmp_path, *argv):
    out = tmp_path / "out"
    code = main(["--out", str(out), *argv])
    return code, out


def load(out_dir, name):
    with open(out_dir / f"{name}.json") as fh:
        return json.load(fh)


def test_artifact_schema_and_exit_code(tmp_path):
    code, out = run(tmp_path, "count", "--k", "2", "--nmax", "12")
    assert code == 0
    payload = load(out, "count")
    assert payload["schema_version"] == 1
    assert payload["tool"] == "kseq"
    assert payload["config"]["precision"] == 50
    assert payload["passed"] is True
    assert "wall_time_s" in payload
    assert payload["results"]["counts"][4] == "4"


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as err:
        main(["no-such-command"])
    assert err.value.code == 2


def test_flag_override_propagates(tmp_path):
    code, out = run(tmp_path, "--precision", "30", "gk-eval", "--k", "2", "--s", "0.3")
    assert code == 0
    payload = load(out, "gk_eval")
    assert payload["config"]["precision"] == 30


def test_config_file_and_env(tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"precision": 35, "seed": 99}))
    monkeypatch.setenv("KSEQ_CONFIG", str(cfg))
    code, out = run(tmp_path, "count", "--k", "2", "--nmax", "6")
    assert code == 0
    payload = load(out, "count")
    assert payload["config"]["precision"] == 35
    assert payload["config"]["seed"] == 99


def test_bad_config_is_usage_error(tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("{nope")
    monkeypatch.setenv("KSEQ_CONFIG", str(cfg))
    with pytest.raises(SystemExit) as err:
        main(["count", "--k", "2", "--nmax", "4"])
    assert err.value.code == 2


def test_check_failure_exit_code(tmp_path):
    # a transition tail estimate far above tolerance flags and exits 1
    code, out = run(
        tmp_path, "--tol", "1e-30",
        "transition", "--k", "2", "--s", "0.2", "--n", "4", "--m", "30",
    )
    assert code == 1
    assert load(out, "transition")["passed"] is False


def test_csv_format_artifact(tmp_path):
    code, out = run(tmp_path, "--format", "csv", "count", "--k", "2", "--nmax", "8")
    assert code == 0
    lines = (out / "count.csv").read_text().strip().splitlines()
    assert lines[0] == "n,count"
    assert len(lines) == 10


def test_rerun_reproduces_results_bit_for_bit(tmp_path):
    _, out1 = run(tmp_path / "a", "--seed", "7", "simulate", "--k", "2", "--s", "0.5", "--trials", "5000")
    _, out2 = run(tmp_path / "b", "--seed", "7", "simulate", "--k", "2", "--s", "0.5", "--trials", "5000")
    p1, p2 = load(out1, "simulate"), load(out2, "simulate")
    assert p1["results"] == p2["results"]
    _, out3 = run(tmp_path / "c", "gk-eval", "--k", "3", "--s", "0.2")
    _, out4 = run(tmp_path / "d", "gk-eval", "--k", "3", "--s", "0.2")
    assert load(out3, "gk_eval")["results"] == load(out4, "gk_eval")["results"]


def test_golden_quick_suite(tmp_path):
    with open(GOLDEN) as fh:
        golden = json.load(fh)
    _, out = run(tmp_path, "identities", "--nmax", "80")
    assert load(out, "identities")["results"] == golden["identities"]["results"]
    _, out = run(tmp_path, "count", "--k", "2", "--r", "2", "--b", "1",
                 "--nmax", "40", "--oracle", "--oracle-limit", "20")
    assert load(out, "count")["results"] == golden["count"]["results"]
    _, out = run(tmp_path, "gk-eval", "--k", "2", "--s", "0.125")
    assert load(out, "gk_eval")["results"] == golden["gk_eval"]["results"]
    _, out = run(tmp_path, "--seed", "13579", "simulate", "--k", "2", "--s", "0.5",
                 "--trials", "20000")
    assert load(out, "simulate")["results"] == golden["simulate"]["results"]


def test_runup_subcommand(tmp_path):
    code, out = run(tmp_path, "runup", "--k", "2", "--n", "6", "--s", "0.25",
                    "--asymptotic")
    assert code == 0
    results = load(out, "runup")["results"]
    assert len(results["entries"]) == 2
    assert results["asymptotic_log_main"] is not None


def test_spectrum_and_series_subcommands(tmp_path):
    code, out = run(tmp_path, "spectrum", "--k", "3", "--z", "2.0")
    assert code == 0
    assert len(load(out, "spectrum")["results"]["roots"]) == 3
    code, out = run(tmp_path, "series", "--factors", "1,0,-1", "--nmax", "10")
    assert code == 0
    assert load(out, "series")["results"]["coefficients"][10] == "42"
