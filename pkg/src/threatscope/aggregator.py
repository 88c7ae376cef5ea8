"""Final risk aggregation: rule-weighted evidence plus model verdicts.

Evidence categories earn configured points (capped at 100); the model
verdicts blend into a 0-100 risk score; classification falls out of the
configured thresholds, with a phishing-verdict override. Insecure-practice
findings stay in the report but never contribute points.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Optional

from .evidence import (
    EvidenceBundle,
    EvidenceError,
    Finding,
    PatternFlag,
    Severity,
    UrlRecord,
)
from .llm import VerdictDocument


class MissingVerdictError(ValueError):
    def __init__(self, missing: list[str]):
        super().__init__(f"required verdicts absent: {', '.join(sorted(missing))}")
        self.missing = sorted(missing)


# ---------------------------------------------------------------------------
# Weight table
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightTable:
    evidence_weights: dict[str, int]
    verdict_weights: dict[str, float]
    level_scores: dict[str, int]
    benign_max: int
    warnings_min: int
    malicious_min: int
    model_blend: float
    evidence_blend: float
    phishing_override_confidence: int

    def __post_init__(self) -> None:
        if not self.benign_max < self.warnings_min <= self.malicious_min:
            raise EvidenceError(
                "thresholds must satisfy benign_max < warnings_min <= malicious_min"
            )

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "WeightTable":
        return cls(
            evidence_weights=dict(data["evidence_weights"]),
            verdict_weights=dict(data["verdict_weights"]),
            level_scores=dict(data["level_scores"]),
            benign_max=data["thresholds"]["benign_max"],
            warnings_min=data["thresholds"]["warnings_min"],
            malicious_min=data["thresholds"]["malicious_min"],
            model_blend=data["blend"]["model"],
            evidence_blend=data["blend"]["evidence"],
            phishing_override_confidence=data.get("phishing_override_confidence", 70),
        )

    @classmethod
    def load(cls, path: Optional[str | Path] = None) -> "WeightTable":
        if path is None:
            text = resources.files("threatscope").joinpath("assets/weights.json").read_text()
        else:
            text = Path(path).read_text(encoding="utf-8")
        return cls.from_dict(json.loads(text))


_DEFAULT_WEIGHTS: Optional[WeightTable] = None


def default_weights() -> WeightTable:
    global _DEFAULT_WEIGHTS
    if _DEFAULT_WEIGHTS is None:
        _DEFAULT_WEIGHTS = WeightTable.load()
    return _DEFAULT_WEIGHTS


# ---------------------------------------------------------------------------
# Evidence scoring
# ---------------------------------------------------------------------------


def evidence_categories(bundle: EvidenceBundle) -> set[str]:
    """Which weighted evidence categories the bundle triggers."""
    categories: set[str] = set()
    flags: set[PatternFlag] = set()
    for fs in bundle.scripts:
        flags |= fs.flags
        if fs.obfuscation_score >= 0.5:
            categories.add("obfuscated_script")
    if PatternFlag.EVAL_USAGE in flags:
        categories.add("eval_usage")
    if PatternFlag.DELAYED_STRING_EXEC in flags:
        categories.add("delayed_string_exec")
    if PatternFlag.SENSITIVE_KEYWORD in flags:
        categories.add("sensitive_keyword")
    if PatternFlag.SUSPICIOUS_URL_LITERAL in flags:
        categories.add("suspicious_url")
    if PatternFlag.BASE64_DECODE in flags:
        categories.add("base64_decode")

    keylogger_flagged = PatternFlag.EVENT_CAPTURE_KEYS in flags
    for event in bundle.trace:
        detail = event.detail
        if event.kind in ("fetch", "xhr") and str(
            detail.get("method", "")
        ).upper() == "POST" and detail.get("external"):
            categories.add("external_post_exfil")
        elif event.kind == "websocket" and detail.get("external"):
            categories.add("external_websocket")
        elif event.kind == "eval" and detail.get("api") == "window.eval":
            categories.add("eval_usage")
        elif event.kind == "script_append" and detail.get("external"):
            categories.add("external_script_injection")
        elif event.kind == "dom_insert" and detail.get("tag") == "iframe" and detail.get("hidden"):
            categories.add("hidden_iframe")
        elif event.kind == "geolocation":
            categories.add("geolocation_request")
        elif event.kind == "listener_add" and detail.get("event") in ("keydown", "keyup", "keypress"):
            keylogger_flagged = True
        elif event.kind == "timer_set" and detail.get("string_body"):
            categories.add("delayed_string_exec")
    if keylogger_flagged and bundle.dom_meta.password_fields > 0:
        categories.add("keylogger_listener")
    if bundle.dom_meta.login_forms > 0 and bundle.dom_meta.password_fields > 0:
        categories.add("login_form_with_password")
    if bundle.dom_meta.hidden_elements >= 3:
        categories.add("many_hidden_elements")
    return categories


def score_evidence(bundle: EvidenceBundle, weights: Optional[WeightTable] = None) -> int:
    """Sum of matched category points, capped at 100."""
    weights = weights or default_weights()
    total = sum(
        weights.evidence_weights.get(category, 0)
        for category in evidence_categories(bundle)
    )
    return min(100, total)


# ---------------------------------------------------------------------------
# Risk report
# ---------------------------------------------------------------------------

CLASSIFICATIONS = ("malicious", "benign", "benign_with_warnings")
THREAT_TYPES = ("none", "phishing", "scam", "malware", "exploit", "other")


@dataclass
class RiskReport:
    url: UrlRecord
    classification: str
    threat_type: str
    risk_level: Severity
    risk_score: int
    findings: list[Finding] = field(default_factory=list)
    explanations: dict[str, str] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.classification not in CLASSIFICATIONS:
            raise EvidenceError(f"unknown classification: {self.classification!r}")
        if self.threat_type not in THREAT_TYPES:
            raise EvidenceError(f"unknown threat type: {self.threat_type!r}")
        if self.classification == "malicious" and self.risk_level < Severity.HIGH:
            raise EvidenceError("malicious reports carry at least High risk")
        if self.classification == "benign" and any(
            f.severity == Severity.CRITICAL for f in self.findings
        ):
            raise EvidenceError("benign reports must not carry Critical findings")


def report_to_dict(report: RiskReport) -> dict[str, Any]:
    return {
        "url": report.url.raw,
        "classification": report.classification,
        "threat_type": report.threat_type,
        "risk_level": report.risk_level.label,
        "risk_score": report.risk_score,
        "findings": [
            {
                "title": f.title,
                "category": f.category,
                "severity": f.severity.label,
                "evidence_refs": list(f.evidence_refs),
            }
            for f in report.findings
        ],
        "explanations": dict(report.explanations),
        "timings": dict(report.timings),
    }


# ---------------------------------------------------------------------------
# Verdict combination
# ---------------------------------------------------------------------------

_REQUIRED_KINDS = ("dom_metadata", "sandbox_behavior")

_GLOBAL_TYPE_CATEGORY = {
    "data-exfiltrator": "data-exfiltration",
    "keylogger": "keylogging",
    "session-hijacker": "session-hijacking",
}

_DOM_TYPE_CATEGORY = {
    "brand-mismatch": "brand-mismatch",
    "suspicious-form": "credential-harvesting",
}

# verdict phishing types grouped into report threat types
_PHISHING_TYPE_MAP = {
    "credential-harvesting": "phishing",
    "clone-site": "phishing",
    "brand-impersonation": "phishing",
    "fake-login": "phishing",
    "social-engineering": "scam",
    "data-exfiltrator": "malware",
    "keylogger": "malware",
    "session-hijacker": "malware",
}


def _model_aggregate(verdicts: dict[str, VerdictDocument], weights: WeightTable) -> float:
    total = 0.0
    weight_sum = 0.0
    for key, multiplier in weights.verdict_weights.items():
        kind, field_name = key.split(".", 1)
        verdict = verdicts.get(kind)
        if verdict is None:
            continue
        if field_name == "score_inverted":
            value = 100 - float(verdict.get("score", 100))
        elif field_name == "riskLevel":
            level = verdict.get("securityAnalysis", {}).get("riskLevel", "Low")
            value = float(weights.level_scores.get(level, 10))
        else:
            value = float(verdict.get(field_name, 0))
        total += value * multiplier
        weight_sum += multiplier
    return total / weight_sum if weight_sum else 0.0


def _collect_findings(verdicts: dict[str, VerdictDocument]) -> list[Finding]:
    findings: list[Finding] = []
    sandbox = verdicts.get("sandbox_behavior")
    if sandbox:
        for item in sandbox.get("sandboxFindings", []):
            findings.append(
                Finding(
                    title=item["title"],
                    category="other",
                    severity=Severity.from_label(item["severity"]),
                    evidence_refs=("sandbox_behavior",),
                )
            )
    dom = verdicts.get("dom_metadata")
    if dom:
        for item in dom.get("domIndicators", []):
            findings.append(
                Finding(
                    title=item["description"],
                    category=_DOM_TYPE_CATEGORY.get(item["type"], "other"),
                    severity=Severity.from_label(item["severity"]),
                    evidence_refs=("dom_metadata",),
                )
            )
    global_props = verdicts.get("global_properties")
    if global_props:
        for item in global_props.get("globalPropIndicators", []):
            if item.get("type") == "none":
                continue
            findings.append(
                Finding(
                    title=item["description"],
                    category=_GLOBAL_TYPE_CATEGORY.get(item["type"], "other"),
                    severity=Severity.from_label(item["severity"]),
                    evidence_refs=("global_properties",),
                )
            )
    script = verdicts.get("script_security")
    if script:
        for item in script.get("securityAnalysis", {}).get("vulnerabilities", []):
            findings.append(
                Finding(
                    title=item["type"],
                    category="insecure-practice",
                    severity=Severity.from_label(item["severity"]),
                    evidence_refs=("script_security",),
                )
            )
    return findings


def _collect_explanations(verdicts: dict[str, VerdictDocument]) -> dict[str, str]:
    explanations: dict[str, str] = {}
    for kind, verdict in verdicts.items():
        if kind in ("dom_metadata", "global_properties"):
            text = str(verdict.get("recommendation", ""))
        elif kind == "script_security":
            text = str(verdict.get("summary", ""))
        elif kind == "trust":
            text = "Trust factors: " + "; ".join(verdict.get("factors", []))
        else:
            titles = [f["title"] for f in verdict.get("sandboxFindings", [])]
            text = "; ".join(titles) if titles else "No sandbox findings."
        if text:
            explanations[kind] = text
    return explanations


def _threat_type(
    verdicts: dict[str, VerdictDocument], classification: str
) -> str:
    if classification != "malicious":
        return "none"
    best: Optional[tuple[int, str]] = None
    for verdict in verdicts.values():
        if not verdict.get("isPhishing"):
            continue
        confidence = int(verdict.get("confidence", 0))
        phishing_type = str(verdict.get("phishingType", "none"))
        if phishing_type == "none":
            continue
        if best is None or confidence > best[0]:
            best = (confidence, phishing_type)
    if best is None:
        # only code/behavior evidence points at this page
        return "malware"
    return _PHISHING_TYPE_MAP.get(best[1], "other")


def _severity_for_score(score: int) -> Severity:
    if score <= 25:
        return Severity.LOW
    if score <= 59:
        return Severity.MEDIUM
    if score <= 84:
        return Severity.HIGH
    return Severity.CRITICAL


def combine(
    verdicts: dict[str, VerdictDocument],
    evidence_points: int,
    weights: Optional[WeightTable] = None,
    *,
    url: Optional[UrlRecord] = None,
    timings: Optional[dict[str, float]] = None,
) -> RiskReport:
    """Blend model verdicts with evidence points into the final report.

    risk_score = clamp(0.6 * model aggregate + 0.4 * evidence points);
    classification thresholds apply to max(risk_score, evidence_points),
    so strong raw evidence cannot be diluted by bland verdicts. Any
    phishing verdict at or above the override confidence forces malicious.
    """
    weights = weights or default_weights()
    missing = [k for k in _REQUIRED_KINDS if k not in verdicts]
    if missing:
        raise MissingVerdictError(missing)

    model_score = _model_aggregate(verdicts, weights)
    blended = weights.model_blend * model_score + weights.evidence_blend * evidence_points
    risk_score = int(round(max(0.0, min(100.0, blended))))

    findings = _collect_findings(verdicts)
    has_critical_finding = any(f.severity == Severity.CRITICAL for f in findings)

    phishing_override = any(
        v.get("isPhishing") and int(v.get("confidence", 0)) >= weights.phishing_override_confidence
        for v in verdicts.values()
    )
    class_score = max(risk_score, evidence_points)
    if phishing_override or class_score >= weights.malicious_min:
        classification = "malicious"
    elif class_score >= weights.warnings_min or has_critical_finding:
        classification = "benign_with_warnings"
    else:
        classification = "benign"

    risk_level = _severity_for_score(risk_score)
    if classification == "malicious":
        risk_level = max(risk_level, Severity.HIGH)

    return RiskReport(
        url=url or UrlRecord(raw="unknown://analysis", scheme="unknown", host="analysis", path="/"),
        classification=classification,
        threat_type=_threat_type(verdicts, classification),
        risk_level=risk_level,
        risk_score=risk_score,
        findings=findings,
        explanations=_collect_explanations(verdicts),
        timings=dict(timings or {}),
    )
