"""Trace aggregation: per-API call counts and rule-based risk categories."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterable

from ..evidence import Severity, TraceEvent, TRACE_KINDS

# synthetic interactions are sandbox actions, not page API calls
COUNTABLE_KINDS = frozenset(TRACE_KINDS - {"interaction_simulated"})

_KIND_DEFAULT_API = {
    "fetch": "window.fetch",
    "xhr": "XMLHttpRequest.send",
    "websocket": "WebSocket",
    "eval": "window.eval",
    "script_append": "Node.appendChild",
    "dom_insert": "Node.appendChild",
    "dom_remove": "Node.removeChild",
    "cookie_read": "document.cookie",
    "cookie_write": "document.cookie",
    "storage_access": "Storage.getItem",
    "timer_set": "window.setTimeout",
    "listener_add": "EventTarget.addEventListener",
    "listener_remove": "EventTarget.removeEventListener",
    "global_created": "newGlobalProperties",
    "geolocation": "navigator.geolocation",
    "api_call": "unknown",
}


@dataclass(frozen=True)
class ApiCallSummary:
    """Per-API counts, sorted by count descending then name."""

    counts: tuple[tuple[str, int], ...]

    @property
    def total(self) -> int:
        return sum(c for _, c in self.counts)

    def as_line(self) -> str:
        return ", ".join(f"{name}: {count}x" for name, count in self.counts)


# rule table: (rule id, severity, per-event predicate); one triggered rule
# contributes one risk regardless of how many events match it
_RISK_RULES: list[tuple[str, Severity, Callable[[TraceEvent], bool]]] = [
    (
        "external_post",
        Severity.HIGH,
        lambda e: e.kind in ("fetch", "xhr")
        and str(e.detail.get("method", "")).upper() == "POST"
        and bool(e.detail.get("external")),
    ),
    ("websocket_open", Severity.MEDIUM, lambda e: e.kind == "websocket"),
    (
        "eval_call",
        Severity.MEDIUM,
        lambda e: e.kind == "eval" and e.detail.get("api") == "window.eval",
    ),
    (
        "external_script_append",
        Severity.MEDIUM,
        lambda e: e.kind == "script_append" and bool(e.detail.get("external")),
    ),
    (
        "hidden_iframe_insert",
        Severity.MEDIUM,
        lambda e: e.kind == "dom_insert"
        and e.detail.get("tag") == "iframe"
        and bool(e.detail.get("hidden")),
    ),
    (
        "password_input_insert",
        Severity.MEDIUM,
        lambda e: e.kind == "dom_insert"
        and e.detail.get("tag") == "input"
        and str(e.detail.get("attrs", {}).get("type", "")).lower() == "password",
    ),
    (
        "hidden_element_insert",
        Severity.LOW,
        lambda e: e.kind == "dom_insert"
        and e.detail.get("tag") != "iframe"
        and bool(e.detail.get("hidden")),
    ),
    ("geolocation_request", Severity.MEDIUM, lambda e: e.kind == "geolocation"),
    ("cookie_write", Severity.LOW, lambda e: e.kind == "cookie_write"),
    ("cookie_read", Severity.LOW, lambda e: e.kind == "cookie_read"),
    ("storage_access", Severity.LOW, lambda e: e.kind == "storage_access"),
    (
        "string_timer",
        Severity.LOW,
        lambda e: e.kind == "timer_set" and bool(e.detail.get("string_body")),
    ),
    ("new_globals", Severity.LOW, lambda e: e.kind == "global_created"),
]


def summarize_trace(
    trace: Iterable[TraceEvent],
) -> tuple[ApiCallSummary, dict[Severity, int]]:
    """Aggregate per-API counts and count triggered risk rules by severity."""
    counter: Counter[str] = Counter()
    triggered: dict[str, Severity] = {}
    for event in trace:
        if event.kind in COUNTABLE_KINDS:
            api = str(event.detail.get("api") or _KIND_DEFAULT_API.get(event.kind, "unknown"))
            counter[api] += 1
        for rule_id, severity, predicate in _RISK_RULES:
            if rule_id not in triggered and predicate(event):
                triggered[rule_id] = severity
    ordered = tuple(
        sorted(counter.items(), key=lambda item: (-item[1], item[0]))
    )
    categories: dict[Severity, int] = {}
    for severity in triggered.values():
        categories[severity] = categories.get(severity, 0) + 1
    return ApiCallSummary(counts=ordered), categories


# overflow protection: drop lowest-severity kinds first, newest first
_KIND_DROP_SEVERITY = {
    "api_call": 0,
    "listener_add": 0,
    "listener_remove": 0,
    "global_created": 0,
    "timer_set": 0,
    "dom_remove": 1,
    "dom_insert": 1,
    "storage_access": 1,
    "cookie_read": 1,
    "interaction_simulated": 1,
    "eval": 2,
    "script_append": 2,
    "geolocation": 2,
    "cookie_write": 2,
    "fetch": 3,
    "xhr": 3,
    "websocket": 3,
}


def truncate_trace(trace: list[TraceEvent], max_events: int) -> list[TraceEvent]:
    """Cap the trace, shedding the least severe kinds first and appending
    a truncation marker event."""
    if len(trace) <= max_events:
        return trace
    dropped = len(trace) - (max_events - 1)  # reserve a slot for the marker
    keep: list[TraceEvent] = list(trace)
    for tier in (0, 1, 2, 3):
        if dropped <= 0:
            break
        survivors: list[TraceEvent] = []
        tier_events: list[TraceEvent] = []
        for e in keep:
            (tier_events if _KIND_DROP_SEVERITY.get(e.kind, 3) == tier else survivors).append(e)
        if dropped < len(tier_events):
            tier_events = tier_events[: len(tier_events) - dropped]
            dropped = 0
        else:
            dropped -= len(tier_events)
            tier_events = []
        keep = sorted(survivors + tier_events, key=lambda e: e.timestamp)
    marker_ts = keep[-1].timestamp if keep else 0
    keep.append(
        TraceEvent(
            timestamp=marker_ts,
            kind="api_call",
            detail={"api": "trace.truncated", "dropped": len(trace) - len(keep)},
        )
    )
    return keep
