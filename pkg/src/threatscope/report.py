"""Evaluation report rendering: JSON document, text summary, delimited
per-URL results, and matplotlib figures alongside."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any

from . import __version__
from .aggregator import report_to_dict
from .harness import EvalOutcome, display_metrics

REPORT_FORMAT = "threatscope-eval-report/1"


def outcome_to_dict(outcome: EvalOutcome, stable: bool = False) -> dict[str, Any]:
    """The machine-readable eval document.

    stable=True zeroes wall-clock-derived values so reruns over identical
    inputs serialize byte-for-byte (for diffing and regression gates).
    """
    results = []
    for result in outcome.results:
        entry: dict[str, Any] = {
            "snapshot_dir": result.snapshot_dir,
            "ground_truth": result.ground_truth,
        }
        if result.report is not None:
            entry["report"] = report_to_dict(result.report)
            entry["predicted"] = result.predicted
            entry["agrees"] = result.predicted == result.ground_truth
        else:
            entry["error"] = result.error
        results.append(entry)
    counts = outcome.counts
    document: dict[str, Any] = {
        "format": REPORT_FORMAT,
        "generated_by": f"threatscope {__version__}",
        "results": results,
        "confusion": {"tp": counts.tp, "fp": counts.fp, "tn": counts.tn, "fn": counts.fn},
        "metrics": {
            "accuracy": outcome.metrics.accuracy,
            "precision": outcome.metrics.precision,
            "recall": outcome.metrics.recall,
            "f1": outcome.metrics.f1,
        },
        "metrics_display": display_metrics(outcome.metrics)
        if counts.total
        else {"note": "no data"},
        "analysis_errors": outcome.errors,
        "timings": dict(outcome.timing_stats),
    }
    if outcome.baseline is not None:
        b = outcome.baseline
        document["baseline"] = {
            "predictions": list(b.predictions),
            "confusion": {"tp": b.counts.tp, "fp": b.counts.fp, "tn": b.counts.tn, "fn": b.counts.fn},
            "metrics": {
                "accuracy": b.metrics.accuracy,
                "precision": b.metrics.precision,
                "recall": b.metrics.recall,
                "f1": b.metrics.f1,
            },
            "metrics_display": display_metrics(b.metrics) if b.counts.total else {"note": "no data"},
        }
    if not results:
        document["note"] = "no data"
    if stable:
        document["timings"] = {key: 0.0 for key in document["timings"]}
        for entry in document["results"]:
            report = entry.get("report")
            if report:
                report["timings"] = {key: 0.0 for key in report["timings"]}
    return document


def render_json(outcome: EvalOutcome, stable: bool = False) -> str:
    return json.dumps(outcome_to_dict(outcome, stable=stable), indent=2, sort_keys=True) + "\n"


def render_text(outcome: EvalOutcome) -> str:
    counts = outcome.counts
    lines = ["URL analysis evaluation", "=" * 24, ""]
    width = max((len(Path(r.snapshot_dir).name) for r in outcome.results), default=10)
    for result in outcome.results:
        name = Path(result.snapshot_dir).name
        if result.report is None:
            lines.append(f"{name:<{width}}  ERROR      {result.error}")
            continue
        verdict = result.report.classification
        mark = "ok " if result.predicted == result.ground_truth else "MISS"
        lines.append(
            f"{name:<{width}}  {mark}  truth={result.ground_truth:<9} "
            f"verdict={verdict:<21} score={result.report.risk_score:>3}"
        )
    lines.append("")
    lines.append(f"confusion: tp={counts.tp} fp={counts.fp} tn={counts.tn} fn={counts.fn}")
    if counts.total:
        shown = display_metrics(outcome.metrics)
        lines.append(
            "metrics:   accuracy {accuracy}  precision {precision}  "
            "recall {recall}  F1 {f1}".format(**shown)
        )
    else:
        lines.append("metrics:   no data")
    if outcome.baseline is not None and outcome.baseline.counts.total:
        shown = display_metrics(outcome.baseline.metrics)
        lines.append(
            "baseline:  accuracy {accuracy}  precision {precision}  "
            "recall {recall}  F1 {f1}  (lexical rules)".format(**shown)
        )
    if outcome.errors:
        lines.append(f"analysis errors: {outcome.errors}")
    if outcome.timing_stats:
        lines.append(
            "timing:    mean {mean:.0f} ms  p95 {p95:.0f} ms".format(
                mean=outcome.timing_stats.get("mean_total_ms", 0.0),
                p95=outcome.timing_stats.get("p95_total_ms", 0.0),
            )
        )
    return "\n".join(lines) + "\n"


def write_results_csv(outcome: EvalOutcome, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["snapshot_dir", "url", "ground_truth", "predicted", "classification",
             "threat_type", "risk_score", "error"]
        )
        for result in outcome.results:
            report = result.report
            writer.writerow(
                [
                    result.snapshot_dir,
                    report.url.raw if report else "",
                    result.ground_truth,
                    result.predicted or "",
                    report.classification if report else "",
                    report.threat_type if report else "",
                    report.risk_score if report else "",
                    result.error or "",
                ]
            )


def write_figures(outcome: EvalOutcome, directory: Path) -> list[Path]:
    """Confusion matrix, metric bars, and per-URL timing histogram."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    directory.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    counts = outcome.counts

    fig, ax = plt.subplots(figsize=(4, 3.5))
    grid = [[counts.tp, counts.fn], [counts.fp, counts.tn]]
    image = ax.imshow(grid, cmap="Blues")
    ax.set_xticks([0, 1], labels=["pred malicious", "pred benign"])
    ax.set_yticks([0, 1], labels=["malicious", "benign"])
    for i in range(2):
        for j in range(2):
            ax.text(j, i, str(grid[i][j]), ha="center", va="center")
    ax.set_title("Confusion matrix")
    fig.colorbar(image, ax=ax, fraction=0.046)
    fig.tight_layout()
    path = directory / "confusion_matrix.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    metrics = outcome.metrics
    names, values = [], []
    for name, value in [
        ("accuracy", metrics.accuracy),
        ("precision", metrics.precision),
        ("recall", metrics.recall),
        ("F1", metrics.f1),
    ]:
        if value is not None:
            names.append(name)
            values.append(value)
    if names:
        fig, ax = plt.subplots(figsize=(4.5, 3))
        bars = ax.bar(names, values, color="#3b6ea5")
        ax.set_ylim(0, 1.0)
        ax.bar_label(bars, fmt="%.2f")
        ax.set_title("Detection metrics (malicious = positive)")
        fig.tight_layout()
        path = directory / "metrics.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    totals = [
        r.report.timings.get("total", 0.0)
        for r in outcome.results
        if r.report is not None
    ]
    if totals:
        fig, ax = plt.subplots(figsize=(4.5, 3))
        ax.hist(totals, bins=min(20, max(5, len(totals) // 2)), color="#7a9e7e")
        ax.set_xlabel("total analysis time per URL (ms)")
        ax.set_ylabel("pages")
        ax.set_title("Analysis time distribution")
        fig.tight_layout()
        path = directory / "timings.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written


def write_artifacts(
    outcome: EvalOutcome, out_dir: str | Path, stable: bool = False, figures: bool = True
) -> dict[str, Any]:
    """report.json + results.csv + figures/ under out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(render_json(outcome, stable=stable), encoding="utf-8")
    write_results_csv(outcome, out_dir / "results.csv")
    figure_paths: list[Path] = []
    if figures:
        figure_paths = write_figures(outcome, out_dir / "figures")
    return {
        "report": out_dir / "report.json",
        "csv": out_dir / "results.csv",
        "figures": figure_paths,
    }
