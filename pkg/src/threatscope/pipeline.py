"""End-to-end analysis of one subject: static pass, sandbox run, prompt
construction, inference, and aggregation into a RiskReport."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .aggregator import RiskReport, WeightTable, combine, default_weights, score_evidence
from .corpus import PageSnapshot, fetch_live, load_snapshot
from .evidence import EvidenceBundle, UrlRecord
from .llm import BackendDescriptor, VerdictDocument, generate, parse_verdict
from .prompts import DEFAULT_BUDGET_TOKENS, build_all, load_schema
from .sandbox import SandboxConfig, SandboxError, execute_page
from .static_analyzer import analyze_script

# substituted when the sandbox is unavailable and no behavior was observed
_STATIC_ONLY_SANDBOX_VERDICT = VerdictDocument(
    schema_id="sandbox_behavior/1",
    fields={"sandboxRiskScore": 0, "sandboxRiskLevel": "Low", "sandboxFindings": []},
    raw_text="(sandbox unavailable; static-only analysis)",
    repair_applied=False,
)


@dataclass
class AnalysisOptions:
    backend: BackendDescriptor = field(
        default_factory=lambda: BackendDescriptor(kind="mock")
    )
    sandbox: SandboxConfig = field(default_factory=SandboxConfig)
    weights: Optional[WeightTable] = None
    budget_tokens: int = DEFAULT_BUDGET_TOKENS
    use_sandbox: bool = True
    node_path: str = "node"


@dataclass
class AnalysisOutcome:
    report: RiskReport
    bundle: EvidenceBundle
    verdicts: dict[str, VerdictDocument]


def collect_evidence(
    snapshot: PageSnapshot, options: Optional[AnalysisOptions] = None
) -> EvidenceBundle:
    """Static + dynamic phases; sandbox failure degrades to static-only
    (flagged in timings)."""
    options = options or AnalysisOptions()
    timings: dict[str, float] = {}

    start = time.perf_counter()
    scripts = [analyze_script(s.name, s.source) for s in snapshot.scripts if s.source]
    timings["static"] = round((time.perf_counter() - start) * 1000, 3)

    bundle = EvidenceBundle(url=snapshot.url, scripts=scripts, timings=timings)
    if options.use_sandbox:
        try:
            result = execute_page(snapshot, options.sandbox, node_path=options.node_path)
        except SandboxError:
            bundle.timings["sandbox_failed"] = 1.0
        else:
            bundle = EvidenceBundle(
                url=snapshot.url,
                scripts=scripts,
                trace=result.trace,
                visible_text=result.visible_text,
                dom_meta=result.dom_meta,
                new_globals=result.new_globals,
                timings={**timings, **result.timings},
            )
    return bundle


def analyze_bundle(
    bundle: EvidenceBundle, options: Optional[AnalysisOptions] = None
) -> AnalysisOutcome:
    """Prompt construction, inference, and aggregation over evidence.

    Works for both live bundles and recorded trace files.
    """
    options = options or AnalysisOptions()
    weights = options.weights or default_weights()

    start = time.perf_counter()
    prompts = build_all(bundle, options.budget_tokens)
    verdicts: dict[str, VerdictDocument] = {}
    for kind, prompt in prompts.items():
        raw = generate(prompt, options.backend)
        verdicts[kind] = parse_verdict(raw, load_schema(kind))
    if "sandbox_behavior" not in verdicts:
        verdicts["sandbox_behavior"] = _STATIC_ONLY_SANDBOX_VERDICT
    inference_ms = round((time.perf_counter() - start) * 1000, 3)

    timings = dict(bundle.timings)
    timings["inference"] = inference_ms
    points = score_evidence(bundle, weights)
    report = combine(
        verdicts, points, weights, url=bundle.url, timings=timings
    )
    return AnalysisOutcome(report=report, bundle=bundle, verdicts=verdicts)


def analyze_snapshot(
    snapshot: PageSnapshot, options: Optional[AnalysisOptions] = None
) -> AnalysisOutcome:
    wall_start = time.perf_counter()
    bundle = collect_evidence(snapshot, options)
    outcome = analyze_bundle(bundle, options)
    outcome.report.timings["total"] = round((time.perf_counter() - wall_start) * 1000, 3)
    return outcome


def analyze_snapshot_dir(
    directory: str | Path, options: Optional[AnalysisOptions] = None
) -> AnalysisOutcome:
    return analyze_snapshot(load_snapshot(directory), options)


def analyze_url(
    url: str, options: Optional[AnalysisOptions] = None, timeout_ms: int = 15000
) -> AnalysisOutcome:
    record = UrlRecord.parse(url)
    snapshot = fetch_live(record, timeout_ms=timeout_ms)
    return analyze_snapshot(snapshot, options)


def analyze_evidence_file(
    path: str | Path, options: Optional[AnalysisOptions] = None
) -> AnalysisOutcome:
    """Run the pipeline from a recorded trace file, no sandbox involved."""
    from .evidence import load_bundle

    return analyze_bundle(load_bundle(path), options)
