"""Evidence scoring and verdict combination, including the randomized
monotonicity/invariant sweep and the threshold-transition check."""

import json
import random
from importlib import resources

import pytest

from threatscope.aggregator import (
    MissingVerdictError,
    RiskReport,
    combine,
    default_weights,
    evidence_categories,
    report_to_dict,
    score_evidence,
)
from threatscope.evidence import (
    DomMetadata,
    EvidenceBundle,
    EvidenceError,
    Finding,
    Severity,
    TraceEvent,
    UrlRecord,
)
from threatscope.llm import parse_verdict
from threatscope.prompts import load_schema

URL = UrlRecord.parse("https://aggregate.test/")

_CLASS_RANK = {"benign": 0, "benign_with_warnings": 1, "malicious": 2}


def verdict(kind, **overrides):
    base = {
        "sandbox_behavior": {
            "sandboxRiskScore": 10,
            "sandboxRiskLevel": "Low",
            "sandboxFindings": [],
        },
        "trust": {"score": 80, "level": "High", "factors": []},
        "script_security": {
            "summary": "ok",
            "securityAnalysis": {"riskLevel": "Low", "vulnerabilities": []},
        },
        "global_properties": {
            "isPhishing": False,
            "confidence": 70,
            "phishingType": "none",
            "riskLevel": "Low",
            "globalPropIndicators": [],
            "behaviorAnalysis": {
                "hasDataExfiltrators": False,
                "hasKeyloggers": False,
                "hasSessionHijackers": False,
            },
            "legitimacyScore": 90,
            "recommendation": "fine",
            "globalPropsRiskScore": 5,
        },
        "dom_metadata": {
            "isPhishing": False,
            "confidence": 0,
            "phishingType": "none",
            "targetedBrand": None,
            "domIndicators": [],
            "formAnalysis": {
                "hasLoginForm": False,
                "credentialFieldCount": 0,
                "suspiciousFormFeatures": [],
                "formRiskScore": 0,
            },
            "brandAnalysis": {"detectedBrand": "", "brandMismatch": False, "brandConfidence": 0},
            "legitimacyScore": 100,
            "recommendation": "Safe",
            "domRiskScore": 0,
        },
    }[kind]
    base.update(overrides)
    return parse_verdict(json.dumps(base), load_schema(kind))


def benign_verdicts():
    return {kind: verdict(kind) for kind in
            ("sandbox_behavior", "trust", "script_security", "global_properties", "dom_metadata")}


# ---------------------------------------------------------------------------
# score_evidence
# ---------------------------------------------------------------------------


def test_empty_bundle_scores_zero():
    assert score_evidence(EvidenceBundle(url=URL)) == 0


def test_hidden_iframe_plus_external_post():
    bundle = EvidenceBundle(
        url=URL,
        trace=[
            TraceEvent(0, "dom_insert", {"api": "Node.appendChild", "tag": "iframe", "hidden": True}),
            TraceEvent(1, "fetch", {"api": "window.fetch", "url": "http://x/", "method": "POST", "external": True}),
        ],
    )
    weights = default_weights()
    # oracle: manual sum from the shipped weight table
    expected = weights.evidence_weights["hidden_iframe"] + weights.evidence_weights["external_post_exfil"]
    assert score_evidence(bundle) == expected == 45


def every_category_bundle():
    from threatscope.evidence import PatternFlag, StaticFeatureSet

    return EvidenceBundle(
        url=URL,
        scripts=[
            StaticFeatureSet(
                script_name="bad.js",
                flags={
                    PatternFlag.EVAL_USAGE,
                    PatternFlag.DELAYED_STRING_EXEC,
                    PatternFlag.SENSITIVE_KEYWORD,
                    PatternFlag.SUSPICIOUS_URL_LITERAL,
                    PatternFlag.BASE64_DECODE,
                    PatternFlag.EVENT_CAPTURE_KEYS,
                },
                obfuscation_score=0.9,
                code_quality_score=10,
            )
        ],
        trace=[
            TraceEvent(0, "fetch", {"api": "window.fetch", "url": "http://x/", "method": "POST", "external": True}),
            TraceEvent(1, "websocket", {"api": "WebSocket", "url": "ws://x/", "external": True}),
            TraceEvent(2, "script_append", {"api": "Node.appendChild", "src": "http://x/a.js", "external": True}),
            TraceEvent(3, "dom_insert", {"api": "Node.appendChild", "tag": "iframe", "hidden": True}),
            TraceEvent(4, "geolocation", {"api": "navigator.geolocation"}),
            TraceEvent(5, "listener_add", {"api": "EventTarget.addEventListener", "event": "keydown"}),
        ],
        dom_meta=DomMetadata(
            total_forms=2, login_forms=1, password_fields=2, hidden_elements=5
        ),
    )


def test_every_category_caps_at_100():
    bundle = every_category_bundle()
    assert evidence_categories(bundle) == set(default_weights().evidence_weights)
    assert score_evidence(bundle) == 100


# ---------------------------------------------------------------------------
# combine: worked examples
# ---------------------------------------------------------------------------


def github_paper_verdicts():
    answers = {}
    for kind, name in [
        ("sandbox_behavior", "sandbox_behavior"),
        ("trust", "trust"),
        ("script_security", "script_security"),
        ("global_properties", "global_properties"),
    ]:
        raw = resources.files("threatscope").joinpath(
            f"fixtures/paper_answers/{name}.json"
        ).read_text()
        answers[kind] = parse_verdict(raw, load_schema(kind))
    answers["dom_metadata"] = verdict("dom_metadata")
    return answers


def test_github_benign_combination():
    report = combine(github_paper_verdicts(), evidence_points=0, url=URL)
    assert report.classification == "benign"
    assert report.threat_type == "none"
    assert report.risk_score <= 25


def test_phishing_override_forces_malicious():
    verdicts = benign_verdicts()
    verdicts["dom_metadata"] = verdict(
        "dom_metadata", isPhishing=True, confidence=90, phishingType="fake-login",
        domRiskScore=80, legitimacyScore=5,
    )
    report = combine(verdicts, evidence_points=0, url=URL)
    # oracle: the documented override rule applied by hand
    assert report.classification == "malicious"
    assert report.threat_type == "phishing"
    assert report.risk_level >= Severity.HIGH


def test_warning_band_from_evidence_with_benign_model():
    weights = default_weights()
    for points in (weights.warnings_min, weights.malicious_min - 1):
        report = combine(benign_verdicts(), evidence_points=points, url=URL)
        assert report.classification == "benign_with_warnings", points


def test_missing_required_verdicts_listed():
    with pytest.raises(MissingVerdictError) as err:
        combine({"trust": verdict("trust")}, evidence_points=0, url=URL)
    assert err.value.missing == ["dom_metadata", "sandbox_behavior"]


def test_behavior_only_malicious_defaults_to_malware():
    verdicts = benign_verdicts()
    verdicts["sandbox_behavior"] = verdict(
        "sandbox_behavior", sandboxRiskScore=95, sandboxRiskLevel="Critical",
        sandboxFindings=[{"title": "exfil", "severity": "High"}],
    )
    report = combine(verdicts, evidence_points=90, url=URL)
    assert report.classification == "malicious"
    assert report.threat_type == "malware"


def test_insecure_practice_findings_kept_but_unscored():
    bundle = EvidenceBundle(url=URL)  # no weighted evidence at all
    verdicts = benign_verdicts()
    verdicts["script_security"] = verdict(
        "script_security",
        securityAnalysis={
            "riskLevel": "Low",
            "vulnerabilities": [{"type": "Asset loaded over plain HTTP", "severity": "Low"}],
        },
    )
    report = combine(verdicts, evidence_points=score_evidence(bundle), url=URL)
    assert any(f.category == "insecure-practice" for f in report.findings)
    assert report.classification == "benign"


def test_explanations_verbatim():
    verdicts = benign_verdicts()
    report = combine(verdicts, evidence_points=0, url=URL)
    assert report.explanations["dom_metadata"] == "Safe"
    assert report.explanations["script_security"] == "ok"


def test_report_serialization_shape():
    report = combine(benign_verdicts(), evidence_points=0, url=URL, timings={"static": 1.0})
    data = report_to_dict(report)
    assert data["classification"] == "benign"
    assert data["risk_level"] == report.risk_level.label
    assert data["timings"] == {"static": 1.0}


# ---------------------------------------------------------------------------
# RiskReport invariants
# ---------------------------------------------------------------------------


def test_malicious_requires_high_risk_level():
    with pytest.raises(EvidenceError):
        RiskReport(
            url=URL, classification="malicious", threat_type="phishing",
            risk_level=Severity.LOW, risk_score=90,
        )


def test_benign_rejects_critical_findings():
    with pytest.raises(EvidenceError):
        RiskReport(
            url=URL, classification="benign", threat_type="none",
            risk_level=Severity.LOW, risk_score=5,
            findings=[Finding("f", "other", Severity.CRITICAL)],
        )


# ---------------------------------------------------------------------------
# Properties: 10k randomized samples + threshold sweep (acceptance)
# ---------------------------------------------------------------------------


def random_verdicts(rng):
    phishing_types = ["none", "credential-harvesting", "clone-site",
                      "brand-impersonation", "fake-login", "social-engineering"]
    levels = ["Low", "Medium", "High", "Critical"]
    verdicts = {
        "sandbox_behavior": verdict(
            "sandbox_behavior",
            sandboxRiskScore=rng.randrange(0, 101),
            sandboxRiskLevel=rng.choice(levels),
            sandboxFindings=[
                {"title": f"finding-{i}", "severity": rng.choice(levels)}
                for i in range(rng.randrange(0, 3))
            ],
        ),
        "dom_metadata": verdict(
            "dom_metadata",
            isPhishing=rng.random() < 0.3,
            confidence=rng.randrange(0, 101),
            phishingType=rng.choice(phishing_types),
            domRiskScore=rng.randrange(0, 101),
            legitimacyScore=rng.randrange(0, 101),
        ),
    }
    if rng.random() < 0.7:
        verdicts["trust"] = verdict("trust", score=rng.randrange(0, 101),
                                    level=rng.choice(["Low", "Medium", "High"]))
    if rng.random() < 0.7:
        verdicts["global_properties"] = verdict(
            "global_properties",
            isPhishing=rng.random() < 0.2,
            confidence=rng.randrange(0, 101),
            phishingType=rng.choice(["none", "data-exfiltrator", "keylogger", "session-hijacker"]),
            globalPropsRiskScore=rng.randrange(0, 101),
        )
    if rng.random() < 0.5:
        verdicts["script_security"] = verdict(
            "script_security",
            securityAnalysis={
                "riskLevel": rng.choice(levels),
                "vulnerabilities": [],
            },
        )
    return verdicts


def test_randomized_monotonicity_and_invariants():
    rng = random.Random(1337)
    for i in range(10_000):
        verdicts = random_verdicts(rng)
        points = rng.randrange(0, 101)
        report = combine(verdicts, evidence_points=points, url=URL)

        # RiskReport invariants (also enforced at construction)
        if report.classification == "malicious":
            assert report.risk_level >= Severity.HIGH
        if report.classification == "benign":
            assert all(f.severity < Severity.CRITICAL for f in report.findings)

        # monotonicity: more evidence never lowers the score or softens the verdict
        bumped = min(100, points + rng.randrange(1, 30))
        bumped_report = combine(verdicts, evidence_points=bumped, url=URL)
        assert bumped_report.risk_score >= report.risk_score
        assert _CLASS_RANK[bumped_report.classification] >= _CLASS_RANK[report.classification]


def test_threshold_sweep_exactly_two_transitions():
    verdicts = benign_verdicts()
    sequence = [
        combine(verdicts, evidence_points=e, url=URL).classification for e in range(101)
    ]
    transitions = [
        (sequence[i - 1], sequence[i])
        for i in range(1, len(sequence))
        if sequence[i - 1] != sequence[i]
    ]
    assert transitions == [
        ("benign", "benign_with_warnings"),
        ("benign_with_warnings", "malicious"),
    ]


def test_combine_deterministic():
    verdicts = benign_verdicts()
    a = combine(verdicts, evidence_points=30, url=URL)
    b = combine(verdicts, evidence_points=30, url=URL)
    assert report_to_dict(a) == report_to_dict(b)
