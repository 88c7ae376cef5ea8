"""End-to-end pipeline behavior on single subjects."""

from pathlib import Path

from threatscope.evidence import load_bundle, save_bundle
from threatscope.pipeline import (
    AnalysisOptions,
    analyze_bundle,
    analyze_evidence_file,
    analyze_snapshot_dir,
    collect_evidence,
)
from threatscope.corpus import load_snapshot

PAGES = Path(__file__).parent / "fixtures" / "corpus20" / "pages"


def test_malicious_page_end_to_end():
    outcome = analyze_snapshot_dir(PAGES / "m01-fake-login-exfil")
    report = outcome.report
    assert report.classification == "malicious"
    assert report.threat_type == "phishing"
    assert report.risk_level.label in ("High", "Critical")
    assert report.findings
    assert "dom_metadata" in report.explanations


def test_benign_page_end_to_end():
    outcome = analyze_snapshot_dir(PAGES / "b01-docs")
    assert outcome.report.classification == "benign"
    assert outcome.report.threat_type == "none"


def test_timings_sum_within_total():
    outcome = analyze_snapshot_dir(PAGES / "b04-news")
    timings = outcome.report.timings
    # virtual dynamic time is excluded: it is sandbox-clock, not wall
    wall_phases = timings.get("static", 0) + timings.get("dynamic_wall", 0) + timings.get(
        "inference", 0
    )
    assert wall_phases <= timings["total"]


def test_static_only_fallback_flagged(monkeypatch):
    snapshot = load_snapshot(PAGES / "m01-fake-login-exfil")
    options = AnalysisOptions(node_path="definitely-not-a-node-binary")
    bundle = collect_evidence(snapshot, options)
    assert bundle.timings.get("sandbox_failed") == 1.0
    assert bundle.trace == []
    outcome = analyze_bundle(bundle, options)
    # static-only analysis still produces a report (neutral sandbox verdict)
    assert outcome.report.classification in ("benign", "benign_with_warnings", "malicious")
    assert outcome.verdicts["sandbox_behavior"].raw_text.startswith("(sandbox unavailable")


def test_recorded_evidence_round_trip(tmp_path):
    snapshot = load_snapshot(PAGES / "m02-hidden-iframe")
    bundle = collect_evidence(snapshot)
    path = tmp_path / "evidence.json"
    save_bundle(bundle, path)
    from_live = analyze_bundle(load_bundle(path))
    from_file = analyze_evidence_file(path)
    assert from_file.report.classification == from_live.report.classification == "malicious"
    assert from_file.report.risk_score == from_live.report.risk_score


def test_pipeline_deterministic_with_mock():
    a = analyze_snapshot_dir(PAGES / "m03-keylogger")
    b = analyze_snapshot_dir(PAGES / "m03-keylogger")
    assert a.report.risk_score == b.report.risk_score
    assert a.report.classification == b.report.classification
    assert [f.title for f in a.report.findings] == [f.title for f in b.report.findings]


def test_http_backend_full_pipeline():
    # a local completion server that answers with the shipped mock rules,
    # proving any schema-conformant HTTP backend slots in
    import json
    import threading
    from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

    from threatscope.llm import BackendDescriptor
    from threatscope.llm.mock import MockRuleSet, mock_generate
    from threatscope.prompts import RenderedPrompt

    rules = MockRuleSet.load()

    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            length = int(self.headers.get("Content-Length", "0"))
            payload = json.loads(self.rfile.read(length))
            body = payload["prompt"]
            kind = {
                "Analyze sandbox API behavior": "sandbox_behavior",
                "Evaluate trust": "trust",
                "Analyze JavaScript security": "script_security",
                "Analyze global properties": "global_properties",
                "Analyze DOM metadata": "dom_metadata",
            }[next(k for k in (
                "Analyze sandbox API behavior", "Evaluate trust",
                "Analyze JavaScript security", "Analyze global properties",
                "Analyze DOM metadata",
            ) if body.startswith(k))]
            prompt = RenderedPrompt(
                kind=kind, system_preamble=payload["system"], body=body,
                schema_id=f"{kind}/1", token_estimate=0,
            )
            text = mock_generate(prompt, rules)
            out = json.dumps({"text": text}).encode()
            self.send_response(200)
            self.send_header("Content-Length", str(len(out)))
            self.end_headers()
            self.wfile.write(out)

        def log_message(self, *args):
            pass

    server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    try:
        options = AnalysisOptions(
            backend=BackendDescriptor(
                kind="http_local",
                endpoint=f"http://127.0.0.1:{server.server_address[1]}/complete",
                model_name="stub",
            )
        )
        outcome = analyze_snapshot_dir(PAGES / "m01-fake-login-exfil", options)
        assert outcome.report.classification == "malicious"
        benign = analyze_snapshot_dir(PAGES / "b01-docs", options)
        assert benign.report.classification == "benign"
    finally:
        server.shutdown()
        server.server_close()
