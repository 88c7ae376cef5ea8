"""Batch evaluation: pipeline over a labeled corpus, confusion-matrix
metrics, and the lexical baseline comparison."""

from __future__ import annotations

import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from .aggregator import RiskReport
from .corpus import CorpusManifest, load_snapshot
from .evidence import EvidenceError
from .pipeline import AnalysisOptions, analyze_snapshot


class HarnessError(Exception):
    pass


@dataclass(frozen=True)
class ConfusionCounts:
    """Malicious is the positive class."""

    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise EvidenceError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class Metrics:
    """Exact fractions; undefined denominators stay None, never 0."""

    accuracy: Optional[float]
    precision: Optional[float]
    recall: Optional[float]
    f1: Optional[float]


def compute_metrics(c: ConfusionCounts) -> Metrics:
    if c.total == 0:
        raise HarnessError("cannot compute metrics over zero samples")
    accuracy = (c.tp + c.tn) / c.total
    precision = c.tp / (c.tp + c.fp) if (c.tp + c.fp) > 0 else None
    recall = c.tp / (c.tp + c.fn) if (c.tp + c.fn) > 0 else None
    if precision is not None and recall is not None and (precision + recall) > 0:
        f1 = 2 * precision * recall / (precision + recall)
    else:
        f1 = None
    return Metrics(accuracy=accuracy, precision=precision, recall=recall, f1=f1)


def display_metrics(m: Metrics) -> dict[str, str]:
    """Rounding happens only here: percent accuracy, 2-decimal ratios."""

    def ratio(value: Optional[float]) -> str:
        return "undefined" if value is None else f"{value:.2f}"

    return {
        "accuracy": "undefined" if m.accuracy is None else f"{round(m.accuracy * 100)}%",
        "precision": ratio(m.precision),
        "recall": ratio(m.recall),
        "f1": ratio(m.f1),
    }


# ---------------------------------------------------------------------------
# Corpus runs
# ---------------------------------------------------------------------------


@dataclass
class CorpusResult:
    snapshot_dir: str
    ground_truth: str
    report: Optional[RiskReport] = None
    error: Optional[str] = None

    @property
    def predicted(self) -> Optional[str]:
        if self.report is None:
            return None
        # warnings stay on the benign side of the binary split
        return "malicious" if self.report.classification == "malicious" else "benign"


@dataclass
class BaselineComparison:
    predictions: list[str]  # aligned with results order
    counts: ConfusionCounts
    metrics: Metrics


@dataclass
class EvalOutcome:
    results: list[CorpusResult]
    counts: ConfusionCounts
    metrics: Metrics
    timing_stats: dict[str, float] = field(default_factory=dict)
    errors: int = 0
    baseline: Optional[BaselineComparison] = None


def run_corpus(
    manifest: CorpusManifest,
    options: Optional[AnalysisOptions] = None,
    workers: int = 0,
) -> list[CorpusResult]:
    """One report per manifest entry, in manifest order. Failures become
    analysis-error entries rather than aborting the run."""
    if not manifest.entries:
        raise HarnessError("corpus manifest has no entries")
    options = options or AnalysisOptions()

    def analyze_one(entry) -> CorpusResult:
        result = CorpusResult(
            snapshot_dir=str(entry.snapshot_dir), ground_truth=entry.label
        )
        try:
            snapshot = load_snapshot(entry.snapshot_dir)
            outcome = analyze_snapshot(snapshot, options)
            result.report = outcome.report
        except Exception as exc:
            result.error = f"{exc.__class__.__name__}: {exc}"
        return result

    if workers <= 0:
        import os

        workers = min(len(manifest.entries), os.cpu_count() or 4)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(analyze_one, manifest.entries))


def confusion_from_results(results: list[CorpusResult]) -> ConfusionCounts:
    tp = fp = tn = fn = 0
    for result in results:
        predicted = result.predicted
        if predicted is None:
            continue  # analysis errors are counted separately, not scored
        if result.ground_truth == "malicious":
            if predicted == "malicious":
                tp += 1
            else:
                fn += 1
        else:
            if predicted == "malicious":
                fp += 1
            else:
                tn += 1
    return ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn)


def _timing_stats(results: list[CorpusResult]) -> dict[str, float]:
    totals = [
        r.report.timings.get("total", 0.0) for r in results if r.report is not None
    ]
    if not totals:
        return {}
    ordered = sorted(totals)
    return {
        "mean_total_ms": round(statistics.fmean(totals), 3),
        "p50_total_ms": round(ordered[len(ordered) // 2], 3),
        "p95_total_ms": round(ordered[min(len(ordered) - 1, int(len(ordered) * 0.95))], 3),
        "max_total_ms": round(ordered[-1], 3),
    }


def run_baseline(manifest: CorpusManifest) -> BaselineComparison:
    """Score the lexical-URL baseline over the corpus for comparison.

    Uses the shipped rule fallback plus the two page features (form count,
    password-field presence) read statically from each snapshot.
    """
    from .baseline import BaselineModel

    model = BaselineModel()
    predictions: list[str] = []
    tp = fp = tn = fn = 0
    for entry in manifest.entries:
        try:
            snapshot = load_snapshot(entry.snapshot_dir)
            lowered = snapshot.html.lower()
            predicted = model.classify_url(
                snapshot.url.raw,
                form_count=lowered.count("<form"),
                has_password_field='type="password"' in lowered
                or "type='password'" in lowered,
            )
        except Exception:
            predictions.append("error")
            continue
        predictions.append(predicted)
        if entry.label == "malicious":
            tp, fn = (tp + 1, fn) if predicted == "malicious" else (tp, fn + 1)
        else:
            fp, tn = (fp + 1, tn) if predicted == "malicious" else (fp, tn + 1)
    counts = ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn)
    metrics = compute_metrics(counts) if counts.total else Metrics(None, None, None, None)
    return BaselineComparison(predictions=predictions, counts=counts, metrics=metrics)


def eval_corpus(
    manifest: CorpusManifest,
    options: Optional[AnalysisOptions] = None,
    workers: int = 0,
    with_baseline: bool = False,
) -> EvalOutcome:
    start = time.perf_counter()
    results = run_corpus(manifest, options, workers=workers)
    counts = confusion_from_results(results)
    metrics = compute_metrics(counts) if counts.total else Metrics(None, None, None, None)
    stats = _timing_stats(results)
    stats["wall_ms"] = round((time.perf_counter() - start) * 1000, 3)
    return EvalOutcome(
        results=results,
        counts=counts,
        metrics=metrics,
        timing_stats=stats,
        errors=sum(1 for r in results if r.error is not None),
        baseline=run_baseline(manifest) if with_baseline else None,
    )
