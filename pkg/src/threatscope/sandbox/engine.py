"""Subprocess driver for the engine-side sandbox runner."""

from __future__ import annotations

import json
import shutil
import subprocess
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Optional

from ..corpus import PageSnapshot
from ..evidence import DomMetadata, EvidenceError, TraceEvent
from .domstate import extract_dom_metadata, extract_visible_text
from .trace import truncate_trace


class SandboxError(Exception):
    """Sandbox could not produce a trace (engine missing, shim failure,
    hard-cap kill). Callers fall back to static-only analysis."""


@dataclass(frozen=True)
class SandboxConfig:
    window_ms: int = 4000
    hard_cap_ms: int = 6000
    settle_quiet_ms: int = 750
    simulate_interactions: bool = True
    max_trace_events: int = 10000
    viewport: tuple[int, int] = (1366, 768)

    def __post_init__(self) -> None:
        if self.window_ms > self.hard_cap_ms:
            raise EvidenceError("window_ms must not exceed hard_cap_ms")


@dataclass
class SandboxResult:
    trace: list[TraceEvent]
    dom_meta: DomMetadata
    visible_text: str
    new_globals: list[str]
    timings: dict[str, float]
    camouflage_ok: bool
    shim_version: str
    wrap_failures: list[str] = field(default_factory=list)
    dom_state: dict[str, Any] = field(default_factory=dict)
    raw_messages: Optional[list[dict[str, Any]]] = None
    result_var: Optional[str] = None


def _asset_path(name: str) -> Path:
    return Path(str(resources.files("threatscope").joinpath(f"sandbox/assets/{name}")))


def node_available(node_path: str = "node") -> bool:
    return shutil.which(node_path) is not None


def execute_page(
    snapshot: PageSnapshot,
    cfg: Optional[SandboxConfig] = None,
    *,
    network_stubs: Optional[dict[str, dict[str, Any]]] = None,
    capture_raw_messages: bool = False,
    node_path: str = "node",
    engine_overrides: Optional[dict[str, Any]] = None,
) -> SandboxResult:
    """Run the snapshot's scripts under instrumentation.

    The shim is installed before any page script; execution halts at the
    window (virtual clock) or the wall-clock hard cap, whichever first.
    """
    cfg = cfg or SandboxConfig()
    if not node_available(node_path):
        raise SandboxError(f"embedded engine not available ({node_path!r} not on PATH)")
    shim_path = _asset_path("shim.js")
    try:
        shim_source = shim_path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SandboxError(f"shim asset unreadable: {exc}") from exc

    job = {
        "html": snapshot.html,
        "scripts": [
            {"name": s.name, "source": s.source}
            for s in snapshot.scripts
            if s.source  # scripts that failed to fetch have empty bodies
        ],
        "shim_source": shim_source,
        "base_url": snapshot.url.raw,
        "network_stubs": network_stubs or {},
        "config": {
            "window_ms": cfg.window_ms,
            "hard_cap_ms": cfg.hard_cap_ms,
            "settle_quiet_ms": cfg.settle_quiet_ms,
            "simulate_interactions": cfg.simulate_interactions,
            "max_trace_events": cfg.max_trace_events,
            "viewport": {"width": cfg.viewport[0], "height": cfg.viewport[1]},
            "capture_raw_messages": capture_raw_messages,
            **(engine_overrides or {}),
        },
    }

    try:
        proc = subprocess.run(
            [node_path, str(_asset_path("page_host.js"))],
            input=json.dumps(job),
            capture_output=True,
            text=True,
            timeout=cfg.hard_cap_ms / 1000.0 + 2.0,
        )
    except subprocess.TimeoutExpired as exc:
        raise SandboxError(
            f"sandbox exceeded hard cap ({cfg.hard_cap_ms} ms) and was killed"
        ) from exc

    try:
        result = json.loads(proc.stdout)
    except json.JSONDecodeError as exc:
        raise SandboxError(
            f"engine produced no result (exit {proc.returncode}): {proc.stderr[:500]}"
        ) from exc
    if not result.get("ok"):
        raise SandboxError(result.get("error", "unknown sandbox failure"))

    events = [
        TraceEvent(timestamp=e["timestamp"], kind=e["kind"], detail=dict(e["detail"]))
        for e in result["trace"]
    ]
    events = truncate_trace(events, cfg.max_trace_events)
    source_drops = int(result.get("dropped_at_source", 0))
    if source_drops:
        # engine-side overflow joins the truncation accounting
        last = events[-1] if events else None
        if last is not None and last.detail.get("api") == "trace.truncated":
            detail = dict(last.detail)
            detail["dropped"] += source_drops
            events[-1] = TraceEvent(last.timestamp, last.kind, detail)
        else:
            marker_ts = events[-1].timestamp if events else 0.0
            events.append(
                TraceEvent(
                    marker_ts,
                    "api_call",
                    {"api": "trace.truncated", "dropped": source_drops},
                )
            )
            events = truncate_trace(events, cfg.max_trace_events)

    dom_state = result.get("dom", {})
    dom_meta = extract_dom_metadata(dom_state, title=result.get("title", ""), viewport=cfg.viewport)
    visible = extract_visible_text(dom_state, viewport=cfg.viewport)

    return SandboxResult(
        trace=events,
        dom_meta=dom_meta,
        visible_text=visible,
        new_globals=[str(n) for n in result.get("new_globals", [])],
        timings={
            "dynamic": float(result.get("virtual_elapsed", 0)),
            "dynamic_wall": float(result.get("wall_elapsed", 0)),
        },
        camouflage_ok=bool(result.get("camouflage_ok")),
        shim_version=str(result.get("shim", {}).get("version", "")),
        wrap_failures=[str(w) for w in result.get("wrap_failures", [])],
        dom_state=dom_state,
        raw_messages=result.get("raw_messages"),
        result_var=result.get("result_var"),
    )
