"""Tests for the command line"""

import json

import pytest
import yaml
from click.testing import CliRunner

from main import EXIT_CONFIG, EXIT_MISMATCH, cli, parse_seeds

CONFIG = {
    "name": "cli_check",
    "objective": {"builtin": "sphere"},
    "n_rounds": 4,
    "n_init": 3,
    "seeds": [0, 1, 2],
    "pool": ["RF-LCB"],
    "surrogate": {"n_trees": 5},
}


@pytest.fixture
def workspace(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    config_path = tmp_path / "run.yaml"
    config_path.write_text(yaml.safe_dump(CONFIG))
    return tmp_path, config_path


def test_run_then_replay(workspace):
    tmp_path, config_path = workspace
    runner = CliRunner()

    result = runner.invoke(cli, ["run", "--config", str(config_path), "--seeds", "0,1", "--out", "out"])
    assert result.exit_code == 0, result.output
    log_path = tmp_path / "out" / "cli_check" / "trials.jsonl"
    records = [json.loads(line) for line in log_path.read_text().splitlines()]
    assert {r["seed"] for r in records} == {0, 1}

    result = runner.invoke(cli, ["replay", "--log", str(log_path)])
    assert result.exit_code == 0, result.output


def test_only_adaptive(workspace):
    tmp_path, config_path = workspace
    result = CliRunner().invoke(cli, ["run", "--config", str(config_path), "--only", "adaptive", "--out", "out"])
    assert result.exit_code == 0, result.output
    summary = json.loads((tmp_path / "out" / "cli_check" / "summary.json").read_text())
    assert [row["optimizer"] for row in summary["rows"]] == ["adaptive"]


def test_replay_mismatch_exit_code(workspace):
    tmp_path, config_path = workspace
    runner = CliRunner()
    runner.invoke(cli, ["run", "--config", str(config_path), "--seeds", "0", "--out", "out"])
    summary_path = tmp_path / "out" / "cli_check" / "summary.json"
    payload = json.loads(summary_path.read_text())
    payload["rows"][0]["max"] = -123.0
    summary_path.write_text(json.dumps(payload))

    result = runner.invoke(cli, ["replay", "--log", str(tmp_path / "out" / "cli_check" / "trials.jsonl")])
    assert result.exit_code == EXIT_MISMATCH


def test_invalid_config_exit_code(workspace):
    tmp_path, _ = workspace
    bad = tmp_path / "bad.yaml"
    bad.write_text(yaml.safe_dump({**CONFIG, "n_rounds": 0}))
    result = CliRunner().invoke(cli, ["run", "--config", str(bad)])
    assert result.exit_code == EXIT_CONFIG


def test_zero_jobs_exit_code(workspace):
    _, config_path = workspace
    result = CliRunner().invoke(cli, ["run", "--config", str(config_path), "--jobs", "0"])
    assert result.exit_code == EXIT_CONFIG


def test_missing_config_exit_code(workspace):
    result = CliRunner().invoke(cli, ["run", "--config", "nowhere.yaml"])
    assert result.exit_code == EXIT_CONFIG


def test_replay_missing_log(workspace):
    result = CliRunner().invoke(cli, ["replay", "--log", "missing/trials.jsonl"])
    assert result.exit_code == EXIT_CONFIG


def test_parse_seeds():
    assert parse_seeds("3, 5,8") == [3, 5, 8]
    assert parse_seeds(None) is None
