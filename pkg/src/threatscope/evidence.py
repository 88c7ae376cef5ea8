"""Shared domain types and evidence-bundle semantics.

Every other layer (loader, analyzers, sandbox, prompt builder, aggregator)
exchanges data through the types defined here.  All types are immutable
values after construction; an :class:`EvidenceBundle` serializes to a
documented JSON "trace file" so the pipeline can run from recorded
evidence without a sandbox.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from pathlib import Path
from typing import Any, Iterable, Optional
from urllib.parse import urlsplit

EVIDENCE_FORMAT = "threatscope-evidence/1"


class EvidenceError(ValueError):
    """Invalid evidence data (bad URL, broken invariant, malformed file)."""


class BundleMergeError(EvidenceError):
    """Attempted to merge bundles describing different URLs."""


# ---------------------------------------------------------------------------
# Severity
# ---------------------------------------------------------------------------


class Severity(IntEnum):
    """Ordered severity levels. Low < Medium < High < Critical."""

    LOW = 1
    MEDIUM = 2
    HIGH = 3
    CRITICAL = 4

    @property
    def label(self) -> str:
        return self.name.capitalize()

    @classmethod
    def from_label(cls, label: str) -> "Severity":
        try:
            return cls[label.strip().upper()]
        except KeyError:
            raise EvidenceError(f"unknown severity: {label!r}") from None


def max_severity(findings: Iterable["Finding"]) -> Severity:
    """Highest severity among findings; Low for an empty list."""
    return max((f.severity for f in findings), default=Severity.LOW)


# ---------------------------------------------------------------------------
# URLs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UrlRecord:
    raw: str
    scheme: str
    host: str
    path: str
    label: Optional[str] = None  # "benign" | "malicious" ground truth, if known

    LABELS = ("benign", "malicious")

    def __post_init__(self) -> None:
        if not self.host:
            raise EvidenceError(f"URL has no host: {self.raw!r}")
        if self.label is not None and self.label not in self.LABELS:
            raise EvidenceError(f"unknown label {self.label!r} for {self.raw!r}")

    @classmethod
    def parse(cls, raw: str, label: Optional[str] = None) -> "UrlRecord":
        parts = urlsplit(raw.strip())
        if not parts.scheme or not parts.hostname:
            raise EvidenceError(f"cannot parse URL: {raw!r}")
        return cls(
            raw=raw.strip(),
            scheme=parts.scheme.lower(),
            host=parts.hostname,
            path=parts.path or "/",
            label=label,
        )


# ---------------------------------------------------------------------------
# Findings
# ---------------------------------------------------------------------------

FINDING_CATEGORIES = frozenset(
    {
        "credential-harvesting",
        "data-exfiltration",
        "keylogging",
        "session-hijacking",
        "obfuscation",
        "dynamic-injection",
        "hidden-element",
        "brand-mismatch",
        "insecure-practice",
        "other",
    }
)


@dataclass(frozen=True)
class Finding:
    title: str
    category: str
    severity: Severity
    evidence_refs: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.category not in FINDING_CATEGORIES:
            raise EvidenceError(f"unknown finding category: {self.category!r}")


# ---------------------------------------------------------------------------
# Static feature sets
# ---------------------------------------------------------------------------


class PatternFlag(str, Enum):
    """Suspicious code constructs detectable statically.

    Each flag maps to one documented AST detector plus one regex detector
    used when parsing fails (see static_analyzer).
    """

    EVAL_USAGE = "eval_usage"
    FUNCTION_CONSTRUCTOR = "function_constructor"
    DELAYED_STRING_EXEC = "delayed_string_exec"
    DYNAMIC_SCRIPT_INJECTION = "dynamic_script_injection"
    BASE64_DECODE = "base64_decode"
    NAVIGATOR_WEBDRIVER_CHECK = "navigator_webdriver_check"
    DOM_INJECTION = "dom_injection"
    EVENT_CAPTURE_KEYS = "event_capture_keys"
    EVENT_CAPTURE_MOUSE = "event_capture_mouse"
    COOKIE_ACCESS = "cookie_access"
    STORAGE_ACCESS = "storage_access"
    SENSITIVE_KEYWORD = "sensitive_keyword"
    SUSPICIOUS_URL_LITERAL = "suspicious_url_literal"
    OPAQUE_CONTROL_FLOW = "opaque_control_flow"


STRING_FINDING_KINDS = ("url", "base64_blob", "hex_blob", "sensitive_keyword")


@dataclass(frozen=True)
class StringFinding:
    kind: str  # one of STRING_FINDING_KINDS
    excerpt: str  # at most 80 chars

    def __post_init__(self) -> None:
        if self.kind not in STRING_FINDING_KINDS:
            raise EvidenceError(f"unknown string finding kind: {self.kind!r}")
        if len(self.excerpt) > 80:
            object.__setattr__(self, "excerpt", self.excerpt[:80])


def script_digest(source: str) -> str:
    """Content digest used as script identity (dedupes duplicate inline scripts)."""
    return hashlib.sha256(source.encode("utf-8", "replace")).hexdigest()[:16]


@dataclass
class StaticFeatureSet:
    """Per-script features extracted by the static analyzer.

    When ``parse_ok`` is false the regex fallback ran instead of the AST
    detectors, so only flags and string findings carry signal.
    """

    script_name: str
    parse_ok: bool = True
    function_names: list[str] = field(default_factory=list)
    anonymous_fn_count: int = 0
    variable_names: list[str] = field(default_factory=list)
    flags: set[PatternFlag] = field(default_factory=set)
    string_findings: list[StringFinding] = field(default_factory=list)
    obfuscation_score: float = 0.0
    code_quality_score: int = 100
    dangerous_api_count: int = 0
    invoked_apis: list[str] = field(default_factory=list)
    source_digest: str = ""

    def __post_init__(self) -> None:
        if not self.parse_ok and (self.function_names or self.variable_names):
            raise EvidenceError(
                f"{self.script_name}: fallback feature sets carry no identifiers"
            )
        if not 0.0 <= self.obfuscation_score <= 1.0:
            raise EvidenceError(f"obfuscation score out of range: {self.obfuscation_score}")
        if not 0 <= self.code_quality_score <= 100:
            raise EvidenceError(f"quality score out of range: {self.code_quality_score}")

    @property
    def identity(self) -> str:
        return self.source_digest or self.script_name


# ---------------------------------------------------------------------------
# Dynamic trace
# ---------------------------------------------------------------------------

# "api_call" covers observed host-API invocations (querySelector and friends)
# that have no mutation/network side effect but still feed the API summary.
TRACE_KINDS = frozenset(
    {
        "fetch",
        "xhr",
        "websocket",
        "eval",
        "script_append",
        "dom_insert",
        "dom_remove",
        "cookie_read",
        "cookie_write",
        "storage_access",
        "timer_set",
        "listener_add",
        "listener_remove",
        "global_created",
        "geolocation",
        "interaction_simulated",
        "api_call",
    }
)

_URL_BEARING_KINDS = ("fetch", "xhr", "websocket")


@dataclass(frozen=True)
class TraceEvent:
    """One observed runtime action, timestamped in ms since sandbox start."""

    timestamp: float
    kind: str
    detail: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in TRACE_KINDS:
            raise EvidenceError(f"unknown trace event kind: {self.kind!r}")
        if self.timestamp < 0:
            raise EvidenceError(f"negative trace timestamp: {self.timestamp}")
        if self.kind in _URL_BEARING_KINDS and not isinstance(
            self.detail.get("url"), str
        ):
            raise EvidenceError(f"{self.kind} event lacks a url string")


# ---------------------------------------------------------------------------
# DOM metadata
# ---------------------------------------------------------------------------


@dataclass
class DomMetadata:
    title: str = ""
    total_forms: int = 0
    login_forms: int = 0
    password_fields: int = 0
    email_fields: int = 0
    autocomplete_forms: int = 0
    brand_meta: dict[str, str] = field(default_factory=dict)
    hidden_elements: int = 0

    def __post_init__(self) -> None:
        if self.login_forms > self.total_forms:
            raise EvidenceError("login_forms exceeds total_forms")
        if self.autocomplete_forms > self.total_forms:
            raise EvidenceError("autocomplete_forms exceeds total_forms")


# ---------------------------------------------------------------------------
# Evidence bundle
# ---------------------------------------------------------------------------


@dataclass
class EvidenceBundle:
    """Everything gathered about one URL, the input to prompt building.

    Constructor normalizes: trace sorted by timestamp, new_globals deduped
    with first-seen order preserved.
    """

    url: UrlRecord
    scripts: list[StaticFeatureSet] = field(default_factory=list)
    trace: list[TraceEvent] = field(default_factory=list)
    visible_text: str = ""
    dom_meta: DomMetadata = field(default_factory=DomMetadata)
    new_globals: list[str] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.trace = sorted(self.trace, key=lambda e: e.timestamp)
        self.new_globals = _dedupe(self.new_globals)


def empty_bundle(url: UrlRecord) -> EvidenceBundle:
    return EvidenceBundle(url=url)


def _dedupe(items: Iterable[str]) -> list[str]:
    seen: set[str] = set()
    out: list[str] = []
    for item in items:
        if item not in seen:
            seen.add(item)
            out.append(item)
    return out


def merge_bundles(a: EvidenceBundle, b: EvidenceBundle) -> EvidenceBundle:
    """Merge evidence collected in parallel phases for the same URL.

    Scripts are unioned by content identity, the trace is re-sorted by
    timestamp, and per-phase timings merge with the later value winning.
    Dynamic-phase payloads (visible text, DOM metadata) take b's value
    when b actually carries one.
    """
    if a.url.raw != b.url.raw:
        raise BundleMergeError(
            f"bundle URL mismatch: {a.url.raw!r} vs {b.url.raw!r}"
        )
    scripts: list[StaticFeatureSet] = []
    seen: set[str] = set()
    for fs in list(a.scripts) + list(b.scripts):
        if fs.identity not in seen:
            seen.add(fs.identity)
            scripts.append(fs)
    return EvidenceBundle(
        url=a.url,
        scripts=scripts,
        trace=list(a.trace) + list(b.trace),
        visible_text=b.visible_text or a.visible_text,
        dom_meta=b.dom_meta if b.dom_meta != DomMetadata() else a.dom_meta,
        new_globals=a.new_globals + b.new_globals,
        timings={**a.timings, **b.timings},
    )


def validate_bundle(bundle: EvidenceBundle) -> None:
    """Check cross-field invariants not enforceable per-type."""
    dynamic_ms = bundle.timings.get("dynamic")
    for event in bundle.trace:
        if dynamic_ms is not None and event.timestamp > dynamic_ms:
            raise EvidenceError(
                f"trace timestamp {event.timestamp} exceeds dynamic phase {dynamic_ms}"
            )
    if len(set(bundle.new_globals)) != len(bundle.new_globals):
        raise EvidenceError("duplicate entries in new_globals")


# ---------------------------------------------------------------------------
# JSON serialization (the "trace file")
# ---------------------------------------------------------------------------


def url_to_dict(url: UrlRecord) -> dict[str, Any]:
    return {
        "raw": url.raw,
        "scheme": url.scheme,
        "host": url.host,
        "path": url.path,
        "label": url.label,
    }


def url_from_dict(data: dict[str, Any]) -> UrlRecord:
    return UrlRecord(
        raw=data["raw"],
        scheme=data["scheme"],
        host=data["host"],
        path=data["path"],
        label=data.get("label"),
    )


def feature_set_to_dict(fs: StaticFeatureSet) -> dict[str, Any]:
    return {
        "script_name": fs.script_name,
        "parse_ok": fs.parse_ok,
        "function_names": list(fs.function_names),
        "anonymous_fn_count": fs.anonymous_fn_count,
        "variable_names": list(fs.variable_names),
        "flags": sorted(f.value for f in fs.flags),
        "string_findings": [
            {"kind": sf.kind, "excerpt": sf.excerpt} for sf in fs.string_findings
        ],
        "obfuscation_score": fs.obfuscation_score,
        "code_quality_score": fs.code_quality_score,
        "dangerous_api_count": fs.dangerous_api_count,
        "invoked_apis": list(fs.invoked_apis),
        "source_digest": fs.source_digest,
    }


def feature_set_from_dict(data: dict[str, Any]) -> StaticFeatureSet:
    return StaticFeatureSet(
        script_name=data["script_name"],
        parse_ok=data.get("parse_ok", True),
        function_names=list(data.get("function_names", [])),
        anonymous_fn_count=data.get("anonymous_fn_count", 0),
        variable_names=list(data.get("variable_names", [])),
        flags={PatternFlag(v) for v in data.get("flags", [])},
        string_findings=[
            StringFinding(kind=d["kind"], excerpt=d["excerpt"])
            for d in data.get("string_findings", [])
        ],
        obfuscation_score=data.get("obfuscation_score", 0.0),
        code_quality_score=data.get("code_quality_score", 100),
        dangerous_api_count=data.get("dangerous_api_count", 0),
        invoked_apis=list(data.get("invoked_apis", [])),
        source_digest=data.get("source_digest", ""),
    )


def dom_meta_to_dict(meta: DomMetadata) -> dict[str, Any]:
    return {
        "title": meta.title,
        "total_forms": meta.total_forms,
        "login_forms": meta.login_forms,
        "password_fields": meta.password_fields,
        "email_fields": meta.email_fields,
        "autocomplete_forms": meta.autocomplete_forms,
        "brand_meta": dict(meta.brand_meta),
        "hidden_elements": meta.hidden_elements,
    }


def dom_meta_from_dict(data: dict[str, Any]) -> DomMetadata:
    return DomMetadata(
        title=data.get("title", ""),
        total_forms=data.get("total_forms", 0),
        login_forms=data.get("login_forms", 0),
        password_fields=data.get("password_fields", 0),
        email_fields=data.get("email_fields", 0),
        autocomplete_forms=data.get("autocomplete_forms", 0),
        brand_meta=dict(data.get("brand_meta", {})),
        hidden_elements=data.get("hidden_elements", 0),
    )


def bundle_to_dict(bundle: EvidenceBundle) -> dict[str, Any]:
    return {
        "format": EVIDENCE_FORMAT,
        "url": url_to_dict(bundle.url),
        "scripts": [feature_set_to_dict(fs) for fs in bundle.scripts],
        "trace": [
            {"timestamp": e.timestamp, "kind": e.kind, "detail": dict(e.detail)}
            for e in bundle.trace
        ],
        "visible_text": bundle.visible_text,
        "dom_meta": dom_meta_to_dict(bundle.dom_meta),
        "new_globals": list(bundle.new_globals),
        "timings": dict(bundle.timings),
    }


def bundle_from_dict(data: dict[str, Any]) -> EvidenceBundle:
    fmt = data.get("format")
    if fmt != EVIDENCE_FORMAT:
        raise EvidenceError(f"unsupported evidence format: {fmt!r}")
    return EvidenceBundle(
        url=url_from_dict(data["url"]),
        scripts=[feature_set_from_dict(d) for d in data.get("scripts", [])],
        trace=[
            TraceEvent(
                timestamp=d["timestamp"], kind=d["kind"], detail=dict(d.get("detail", {}))
            )
            for d in data.get("trace", [])
        ],
        visible_text=data.get("visible_text", ""),
        dom_meta=dom_meta_from_dict(data.get("dom_meta", {})),
        new_globals=list(data.get("new_globals", [])),
        timings=dict(data.get("timings", {})),
    )


def save_bundle(bundle: EvidenceBundle, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(bundle_to_dict(bundle), indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def load_bundle(path: str | Path) -> EvidenceBundle:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise EvidenceError(f"cannot read evidence file {path}: {exc}") from exc
    return bundle_from_dict(data)
