"""Renders evidence bundles into the five analysis prompts.

Layouts follow the documented prompt formats field-for-field; rendering
is deterministic. Content that would exceed the token budget shrinks in
documented priority order: suspicious items survive longest, benign
boilerplate and list tails (marked "[truncated]....") go first.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from importlib import resources
from string import Template
from typing import Any, Callable, Optional

from ..evidence import DomMetadata, EvidenceBundle, Severity
from ..sandbox.trace import summarize_trace
from ..static_analyzer import default_config, summarize_for_prompt

PROMPT_KINDS = (
    "sandbox_behavior",
    "trust",
    "script_security",
    "global_properties",
    "dom_metadata",
)

SYSTEM_PREAMBLE = "[System role: Security Analyst AI]"
DEFAULT_BUDGET_TOKENS = 3072  # of a 4k context, reserving space to respond
TRUNCATION_MARK = "[truncated]...."

_WRAP_WIDTH = 60


class PromptBuildError(ValueError):
    """Bundle lacks a section the requested prompt kind needs."""


class PromptBudgetError(ValueError):
    """Budget smaller than the template's mandatory skeleton."""


# ---------------------------------------------------------------------------
# Token estimation
# ---------------------------------------------------------------------------

_registered_tokenizer: Optional[Callable[[str], int]] = None


def register_tokenizer(fn: Optional[Callable[[str], int]]) -> None:
    """Install an adapter-supplied tokenizer; None restores the default."""
    global _registered_tokenizer
    _registered_tokenizer = fn


def estimate_tokens(text: str) -> int:
    """Upper-bound token estimate: ceil(chars/3.5) unless a tokenizer is
    registered."""
    if _registered_tokenizer is not None:
        return _registered_tokenizer(text)
    if not text:
        return 0
    return math.ceil(len(text) / 3.5)


# ---------------------------------------------------------------------------
# Response schemas (machine-readable, consumed by the LLM adapter)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ResponseSchema:
    schema_id: str
    fields: tuple[dict[str, Any], ...]

    @property
    def score_ranges(self) -> dict[str, tuple[int, int]]:
        return {
            f["name"]: tuple(f["range"])
            for f in self.fields
            if f.get("range") is not None
        }


def load_schema(name: str) -> ResponseSchema:
    text = (
        resources.files("threatscope")
        .joinpath(f"prompts/assets/schemas/{name}.json")
        .read_text()
    )
    data = json.loads(text)
    return ResponseSchema(schema_id=data["schema_id"], fields=tuple(data["fields"]))


def _template(kind: str) -> Template:
    text = (
        resources.files("threatscope")
        .joinpath(f"prompts/assets/templates/{kind}.txt")
        .read_text()
    )
    return Template(text)


# ---------------------------------------------------------------------------
# Rendered prompt
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RenderedPrompt:
    kind: str
    system_preamble: str
    body: str
    schema_id: str
    token_estimate: int

    @property
    def full_text(self) -> str:
        return f"{self.system_preamble}\n{self.body}"


# ---------------------------------------------------------------------------
# Shared formatting helpers
# ---------------------------------------------------------------------------


def _wrap_items(items: list[str], width: int = _WRAP_WIDTH) -> str:
    """Comma-join items, wrapping lines without splitting any item."""
    lines: list[str] = []
    current = ""
    for i, item in enumerate(items):
        piece = item + ("," if i < len(items) - 1 else "")
        if current and len(current) + 1 + len(piece) > width:
            lines.append(current)
            current = piece
        else:
            current = f"{current} {piece}" if current else piece
    if current:
        lines.append(current)
    return "\n".join(lines)


def _wrap_words(text: str, width: int = 80) -> str:
    words = text.split()
    lines: list[str] = []
    current = ""
    for word in words:
        if current and len(current) + 1 + len(word) > width:
            lines.append(current)
            current = word
        else:
            current = f"{current} {word}" if current else word
    if current:
        lines.append(current)
    return "\n".join(lines)


_NETWORK_APIS = ("window.fetch", "XMLHttpRequest.send", "WebSocket")


def _api_summary_items(bundle: EvidenceBundle, limit: Optional[int]) -> list[str]:
    summary, _ = summarize_trace(bundle.trace)
    counts = list(summary.counts)
    # suspicious first: network APIs lead, rest keep count order
    network = [c for c in counts if c[0] in _NETWORK_APIS]
    rest = [c for c in counts if c[0] not in _NETWORK_APIS]
    ordered = network + rest
    items = [f"{name}: {count}x" for name, count in ordered]
    if limit is not None and len(items) > limit:
        items = items[:limit] + [TRUNCATION_MARK]
    return items


def _risk_categories_line(bundle: EvidenceBundle) -> str:
    _, categories = summarize_trace(bundle.trace)
    if not categories:
        return "none"
    parts = [
        f"{sev.label.lower()}: {categories[sev]} risks"
        for sev in sorted(categories, reverse=True)
    ]
    return ", ".join(parts)


_EVENT_DESCRIPTIONS: list[tuple[str, Severity, Callable[[dict], Optional[str]]]] = [
    (
        "external_post",
        Severity.HIGH,
        lambda d: f"External POST request to {d.get('url')}"
        if str(d.get("method", "")).upper() == "POST" and d.get("external")
        else None,
    ),
    (
        "websocket",
        Severity.MEDIUM,
        lambda d: f"WebSocket connection to {d.get('url')}" if "url" in d else None,
    ),
    (
        "hidden_iframe",
        Severity.MEDIUM,
        lambda d: f"Inserted a hidden iframe pointing to {d.get('attrs', {}).get('src', '(no src)')}"
        if d.get("tag") == "iframe" and d.get("hidden")
        else None,
    ),
    (
        "password_input",
        Severity.MEDIUM,
        lambda d: "Inserted an input field with type 'password'"
        if d.get("tag") == "input"
        and str(d.get("attrs", {}).get("type", "")).lower() == "password"
        else None,
    ),
    (
        "external_script",
        Severity.MEDIUM,
        lambda d: f"Appended an external script from {d.get('src')}"
        if d.get("src") and d.get("external")
        else None,
    ),
    (
        "eval",
        Severity.MEDIUM,
        lambda d: "Evaluated a dynamic code string via eval"
        if d.get("api") == "window.eval"
        else None,
    ),
    (
        "geolocation",
        Severity.MEDIUM,
        lambda d: "Requested device geolocation",
    ),
]

_EVENT_KIND_FOR_RULE = {
    "external_post": ("fetch", "xhr"),
    "websocket": ("websocket",),
    "hidden_iframe": ("dom_insert",),
    "password_input": ("dom_insert",),
    "external_script": ("script_append",),
    "eval": ("eval",),
    "geolocation": ("geolocation",),
}


def notable_event_lines(bundle: EvidenceBundle) -> list[tuple[Severity, str]]:
    """Severity-tagged one-liners for suspicious trace events.

    External POSTs escalate to Critical when the page carries password
    fields: that combination is the credential-exfiltration signature.
    """
    lines: list[tuple[Severity, str]] = []
    has_password_fields = bundle.dom_meta.password_fields > 0
    for event in bundle.trace:
        for rule_id, severity, describe in _EVENT_DESCRIPTIONS:
            if event.kind not in _EVENT_KIND_FOR_RULE[rule_id]:
                continue
            text = describe(event.detail)
            if text is None:
                continue
            if rule_id == "external_post" and has_password_fields:
                severity = Severity.CRITICAL
            lines.append((severity, text))
            break
    lines.sort(key=lambda pair: -pair[0])
    return lines


# ---------------------------------------------------------------------------
# Per-kind renderers (level = shrink aggressiveness, 0 is full fidelity)
# ---------------------------------------------------------------------------


def _render_sandbox_behavior(bundle: EvidenceBundle, level: int) -> str:
    if not bundle.trace:
        raise PromptBuildError("sandbox_behavior prompt needs a bundle section: trace")
    api_limit = {0: None, 1: 8, 2: 4}.get(level, 3)
    min_severity = {0: Severity.MEDIUM, 1: Severity.HIGH}.get(level, Severity.CRITICAL)
    events = [
        (sev, text) for sev, text in notable_event_lines(bundle) if sev >= min_severity
    ]
    max_events = {0: 12, 1: 8}.get(level, 4)
    events = events[:max_events]
    notable = ""
    if events:
        notable = (
            "\nNOTABLE EVENTS:\n"
            + "\n".join(f"- [{sev.label}] {text}" for sev, text in events)
            + "\n"
        )
    return _template("sandbox_behavior").substitute(
        api_summary=_wrap_items(_api_summary_items(bundle, api_limit)),
        risk_categories=_risk_categories_line(bundle),
        notable_events=notable,
    )


def _quality_floor(bundle: EvidenceBundle) -> int:
    return min((fs.code_quality_score for fs in bundle.scripts), default=100)


_SUSPICIOUS_HOST_RE = re.compile(r"\d{1,3}(?:\.\d{1,3}){3}|l0gin|log1n|-secure|secure-|-verify|verify-")


def _render_trust(bundle: EvidenceBundle, level: int) -> str:
    lines = [
        f"- SSL Certificate: {'Yes' if bundle.url.scheme == 'https' else 'No'}",
        f"- Code Quality Score: {_quality_floor(bundle)}/100",
        f"- Domain: {bundle.url.host}",
    ]
    cfg = default_config()
    obfuscated = sum(
        1 for fs in bundle.scripts if fs.obfuscation_score >= cfg.obfuscated_threshold
    )
    if obfuscated:
        lines.append(f"- Obfuscated scripts: {obfuscated}")
    if _SUSPICIOUS_HOST_RE.search(bundle.url.host) or _SUSPICIOUS_HOST_RE.search(
        bundle.url.path
    ):
        lines.append("- URL hints: suspicious token in domain or path")
    return _template("trust").substitute(
        domain=bundle.url.host, indicators="\n".join(lines)
    )


def _render_script_security(bundle: EvidenceBundle, level: int) -> str:
    if not bundle.scripts:
        raise PromptBuildError("script_security prompt needs a bundle section: scripts")
    cfg = default_config()
    # focus on the most suspicious script: most issue flags, then lowest quality
    target = max(
        bundle.scripts,
        key=lambda fs: (len(fs.flags & cfg.issue_flags), -fs.code_quality_score),
    )
    max_apis = {0: 30, 1: 15, 2: 8}.get(level, 5)
    summary = summarize_for_prompt(target, max_apis=max_apis, config=cfg)
    api_items = list(summary.invoked_apis)
    if len(target.invoked_apis) > max_apis:
        api_items.append(TRUNCATION_MARK)
    api_text = _wrap_items(api_items, width=64) if api_items else "(none)"
    api_lines = api_text.split("\n")
    invoked = "- Invoked APIs: " + api_lines[0]
    if len(api_lines) > 1:
        invoked += "\n" + "\n".join(api_lines[1:])
    lines = [
        f"- Obfuscated: {'Yes' if summary.obfuscated else 'No'}",
        f"- Security issues: {summary.security_issue_count}",
        invoked,
        "- Defined Functions: "
        + (", ".join(summary.defined_functions) if summary.defined_functions else "(none)"),
        f"- Dangerous APIs: {summary.dangerous_api_count}",
    ]
    return _template("script_security").substitute(
        script_name=target.script_name, indicators="\n".join(lines)
    )


def _render_global_properties(bundle: EvidenceBundle, level: int) -> str:
    shown = {0: 10, 1: 5}.get(level, 3)
    names = bundle.new_globals
    if names:
        listed = [f"{i + 1}. {name}" for i, name in enumerate(names[:shown])]
        if len(names) > shown:
            listed.append(TRUNCATION_MARK)
        properties_list = "\n".join(listed)
    else:
        properties_list = "(none)"
    return _template("global_properties").substitute(
        url=bundle.url.raw,
        domain=bundle.url.host,
        total_globals=len(names),
        properties_list=properties_list,
    )


_BRAND_KEY_ORDER = (
    "og:site_name",
    "og:title",
    "application-name",
    "twitter:site",
    "apple-mobile-web-app-title",
)


def _summarize_visible_text(text: str, max_words: int) -> str:
    if not text:
        return ""
    words = text.split()
    head = " ".join(words[:max_words])
    picked = [head]
    keywords = default_config().sensitive_keywords
    for sentence in re.split(r"(?<=[.!?])\s+", text):
        lowered = sentence.lower()
        if any(k in lowered for k in keywords) and sentence not in head:
            picked.append(sentence.strip())
    if len(words) > max_words and len(picked) == 1:
        picked[0] += " " + TRUNCATION_MARK
    return " ".join(picked)


def _render_dom_metadata(bundle: EvidenceBundle, level: int) -> str:
    meta: DomMetadata = bundle.dom_meta
    if meta.brand_meta:
        keys = [k for k in _BRAND_KEY_ORDER if k in meta.brand_meta]
        keys += sorted(k for k in meta.brand_meta if k not in _BRAND_KEY_ORDER)
        brand_block = "Meta tags suggesting brand:\n" + "\n".join(
            f"- {k}: {meta.brand_meta[k]}" for k in keys
        )
    else:
        brand_block = "No brand metadata found."
    max_words = {0: 60, 1: 24}.get(level)
    visible_block = ""
    if max_words is not None and bundle.visible_text:
        summary = _summarize_visible_text(bundle.visible_text, max_words)
        visible_block = "\nVISIBLE TEXT SUMMARY:\n" + _wrap_words(summary) + "\n"
    hidden_line = (
        f"- Hidden elements: {meta.hidden_elements}\n" if meta.hidden_elements else ""
    )
    return _template("dom_metadata").substitute(
        url=bundle.url.raw,
        domain=bundle.url.host,
        title=meta.title or "(none)",
        total_forms=meta.total_forms,
        login_forms=meta.login_forms,
        password_fields=meta.password_fields,
        email_fields=meta.email_fields,
        autocomplete_forms=meta.autocomplete_forms,
        hidden_line=hidden_line,
        brand_block=brand_block,
        visible_block=visible_block,
    )


_RENDERERS = {
    "sandbox_behavior": _render_sandbox_behavior,
    "trust": _render_trust,
    "script_security": _render_script_security,
    "global_properties": _render_global_properties,
    "dom_metadata": _render_dom_metadata,
}

_MAX_SHRINK_LEVEL = 3


def build(
    kind: str,
    bundle: EvidenceBundle,
    budget_tokens: int = DEFAULT_BUDGET_TOKENS,
) -> RenderedPrompt:
    """Render one prompt kind, shrinking content until it fits the budget."""
    if kind not in PROMPT_KINDS:
        raise PromptBuildError(f"unknown prompt kind: {kind!r}")
    renderer = _RENDERERS[kind]
    body = ""
    for level in range(_MAX_SHRINK_LEVEL + 1):
        body = renderer(bundle, level)
        estimate = estimate_tokens(body)
        if estimate <= budget_tokens:
            return RenderedPrompt(
                kind=kind,
                system_preamble=SYSTEM_PREAMBLE,
                body=body,
                schema_id=load_schema(kind).schema_id,
                token_estimate=estimate,
            )
    raise PromptBudgetError(
        f"budget of {budget_tokens} tokens cannot hold the {kind} template "
        f"skeleton ({estimate_tokens(body)} tokens at maximum shrink)"
    )


def build_all(
    bundle: EvidenceBundle, budget_tokens: int = DEFAULT_BUDGET_TOKENS
) -> dict[str, RenderedPrompt]:
    """All prompts whose required sections exist in the bundle."""
    prompts: dict[str, RenderedPrompt] = {}
    for kind in PROMPT_KINDS:
        try:
            prompts[kind] = build(kind, bundle, budget_tokens)
        except PromptBuildError:
            continue  # section missing (static-only runs skip sandbox kinds)
    return prompts
