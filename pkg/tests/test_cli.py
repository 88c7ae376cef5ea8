"""CLI surface: verbs, flags, exit codes, and artifact emission."""

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from threatscope.cli import main

CORPUS20 = Path(__file__).parent / "fixtures" / "corpus20"
PAGES = CORPUS20 / "pages"


@pytest.fixture
def runner():
    return CliRunner()


def test_analyze_benign_snapshot_exit_zero(runner):
    result = runner.invoke(main, ["analyze", str(PAGES / "b01-docs")])
    assert result.exit_code == 0, result.output
    assert "classification: benign" in result.output


def test_analyze_malicious_snapshot_exit_two(runner):
    result = runner.invoke(main, ["analyze", str(PAGES / "m01-fake-login-exfil")])
    assert result.exit_code == 2
    assert "classification: malicious" in result.output
    assert "threat type:    phishing" in result.output


def test_analyze_json_output(runner):
    result = runner.invoke(
        main, ["analyze", str(PAGES / "b02-blog"), "--output", "json"]
    )
    assert result.exit_code == 0
    data = json.loads(result.output)
    assert data["classification"] == "benign"
    assert "risk_score" in data and "findings" in data


def test_analyze_save_and_replay_evidence(runner, tmp_path):
    evidence = tmp_path / "evidence.json"
    first = runner.invoke(
        main,
        ["analyze", str(PAGES / "m05-delayed-payload"), "--save-evidence", str(evidence)],
    )
    assert first.exit_code == 2
    assert evidence.is_file()
    replay = runner.invoke(main, ["analyze", str(evidence), "--output", "json"])
    assert replay.exit_code == 2
    assert json.loads(replay.output)["classification"] == "malicious"


def test_analyze_failure_exit_one(runner, tmp_path):
    result = runner.invoke(main, ["analyze", "not-a-real-subject"])
    assert result.exit_code == 1


def test_scan_corpus_text(runner):
    result = runner.invoke(main, ["scan-corpus", str(CORPUS20 / "corpus.json")])
    assert result.exit_code == 2  # malicious entries present
    assert "m01-fake-login-exfil: malicious" in result.output
    assert "b01-docs: benign" in result.output


def test_eval_text_summary(runner):
    result = runner.invoke(main, ["eval", str(CORPUS20 / "corpus.json")])
    assert result.exit_code == 2
    assert "accuracy 100%" in result.output
    assert "tp=10" in result.output and "tn=10" in result.output


def test_eval_artifacts_with_figures(runner, tmp_path):
    out_dir = tmp_path / "artifacts"
    result = runner.invoke(
        main,
        ["eval", str(CORPUS20 / "corpus.json"), "--out-dir", str(out_dir),
         "--stable", "--output", "json"],
    )
    assert result.exit_code == 2, result.output
    report = json.loads((out_dir / "report.json").read_text())
    assert report["metrics_display"]["accuracy"] == "100%"
    csv_text = (out_dir / "results.csv").read_text()
    assert csv_text.count("\n") == 21  # header + 20 rows
    figures = sorted(p.name for p in (out_dir / "figures").glob("*.png"))
    assert figures == ["confusion_matrix.png", "metrics.png", "timings.png"]
    # stdout JSON matches the written report
    assert json.loads(result.output) == report


def test_eval_stable_reports_reproducible(runner, tmp_path):
    outputs = []
    for run in ("one", "two"):
        out_dir = tmp_path / run
        result = runner.invoke(
            main,
            ["eval", str(CORPUS20 / "corpus.json"), "--out-dir", str(out_dir),
             "--stable", "--no-figures", "--output", "json"],
        )
        assert result.exit_code == 2
        outputs.append((out_dir / "report.json").read_bytes())
    assert outputs[0] == outputs[1]


def test_http_backend_requires_endpoint(runner):
    result = runner.invoke(
        main, ["analyze", str(PAGES / "b01-docs"), "--backend", "http"], env={}
    )
    assert result.exit_code != 0
    assert "endpoint" in result.output.lower()


def test_endpoint_env_var_honored(runner):
    # endpoint resolves from the environment; unreachable -> runtime failure
    result = runner.invoke(
        main,
        ["analyze", str(PAGES / "b01-docs"), "--backend", "http"],
        env={"THREATSCOPE_ENDPOINT": "http://127.0.0.1:1/dead"},
    )
    assert result.exit_code == 1
    assert "analysis failed" in result.output


def test_fixtures_verify(runner):
    result = runner.invoke(main, ["fixtures", "verify"])
    assert result.exit_code == 0
    assert "25/25 fixture checks passed" in result.output
