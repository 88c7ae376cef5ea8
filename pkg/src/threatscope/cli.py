"""Command-line interface.

Verbs: analyze <url|snapshot-dir|evidence.json>, scan-corpus <corpus.json>,
eval <corpus.json>, fixtures verify. Exit codes: 0 completed, 2 at least
one URL classified malicious, 1 runtime failure.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .aggregator import WeightTable, report_to_dict
from .corpus import load_corpus
from .evidence import save_bundle
from .harness import eval_corpus, run_corpus
from .llm import BackendDescriptor
from .pipeline import (
    AnalysisOptions,
    analyze_evidence_file,
    analyze_snapshot_dir,
    analyze_url,
)
from .report import render_json, render_text, write_artifacts
from .sandbox import SandboxConfig

ENDPOINT_ENV = "THREATSCOPE_ENDPOINT"

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_MALICIOUS = 2


def _backend_options(fn):
    fn = click.option(
        "--backend", type=click.Choice(["mock", "http"]), default="mock",
        show_default=True, help="Inference backend.",
    )(fn)
    fn = click.option(
        "--endpoint", envvar=ENDPOINT_ENV,
        help=f"HTTP backend endpoint (or ${ENDPOINT_ENV}).",
    )(fn)
    fn = click.option("--model", default="local-model", show_default=True)(fn)
    fn = click.option("--seed", type=int, default=0, show_default=True)(fn)
    fn = click.option(
        "--budget-tokens", type=int, default=3072, show_default=True,
        help="Prompt token budget.",
    )(fn)
    fn = click.option("--window-ms", type=int, default=4000, show_default=True)(fn)
    fn = click.option("--weights", type=click.Path(exists=True), default=None,
                      help="Weight table JSON overriding the shipped defaults.")(fn)
    return fn


def _make_options(backend, endpoint, model, seed, budget_tokens, window_ms, weights):
    if backend == "http":
        if not endpoint:
            raise click.UsageError(
                f"--backend http requires --endpoint or ${ENDPOINT_ENV}"
            )
        descriptor = BackendDescriptor(
            kind="http_local", endpoint=endpoint, model_name=model, seed=seed
        )
    else:
        descriptor = BackendDescriptor(kind="mock", model_name="mock", seed=seed)
    return AnalysisOptions(
        backend=descriptor,
        sandbox=SandboxConfig(window_ms=window_ms, hard_cap_ms=max(6000, window_ms + 2000)),
        weights=WeightTable.load(weights) if weights else None,
        budget_tokens=budget_tokens,
    )


@click.group()
@click.version_option(package_name="threatscope")
def main() -> None:
    """Offline-capable URL threat analysis."""


@main.command()
@click.argument("subject")
@_backend_options
@click.option("--output", type=click.Choice(["json", "text"]), default="text",
              show_default=True)
@click.option("--save-evidence", type=click.Path(), default=None,
              help="Write the collected evidence bundle (trace file) here.")
def analyze(subject, output, save_evidence, **backend_kwargs):
    """Analyze one URL, snapshot directory, or recorded evidence file."""
    options = _make_options(**backend_kwargs)
    try:
        path = Path(subject)
        if path.is_dir():
            outcome = analyze_snapshot_dir(path, options)
        elif path.is_file():
            outcome = analyze_evidence_file(path, options)
        else:
            outcome = analyze_url(subject, options)
    except Exception as exc:
        click.echo(f"analysis failed: {exc}", err=True)
        sys.exit(EXIT_FAILURE)
    if save_evidence:
        save_bundle(outcome.bundle, save_evidence)
    report = outcome.report
    if output == "json":
        click.echo(json.dumps(report_to_dict(report), indent=2, sort_keys=True))
    else:
        click.echo(f"url:            {report.url.raw}")
        click.echo(f"classification: {report.classification}")
        click.echo(f"threat type:    {report.threat_type}")
        click.echo(f"risk:           {report.risk_level.label} ({report.risk_score}/100)")
        for finding in report.findings:
            click.echo(f"  - [{finding.severity.label}] {finding.title}")
        for kind, text in report.explanations.items():
            click.echo(f"  {kind}: {text}")
    sys.exit(EXIT_MALICIOUS if report.classification == "malicious" else EXIT_OK)


@main.command("scan-corpus")
@click.argument("corpus", type=click.Path(exists=True))
@_backend_options
@click.option("--output", type=click.Choice(["json", "text"]), default="text",
              show_default=True)
@click.option("--workers", type=int, default=0, help="Analysis parallelism.")
def scan_corpus(corpus, output, workers, **backend_kwargs):
    """Analyze every snapshot in a corpus; no metrics."""
    options = _make_options(**backend_kwargs)
    try:
        results = run_corpus(load_corpus(corpus), options, workers=workers)
    except Exception as exc:
        click.echo(f"scan failed: {exc}", err=True)
        sys.exit(EXIT_FAILURE)
    any_malicious = False
    rows = []
    for result in results:
        name = Path(result.snapshot_dir).name
        if result.report is None:
            rows.append({"snapshot": name, "error": result.error})
            continue
        any_malicious |= result.report.classification == "malicious"
        rows.append(
            {
                "snapshot": name,
                "classification": result.report.classification,
                "risk_score": result.report.risk_score,
                "threat_type": result.report.threat_type,
            }
        )
    if output == "json":
        click.echo(json.dumps(rows, indent=2, sort_keys=True))
    else:
        for row in rows:
            if "error" in row:
                click.echo(f"{row['snapshot']}: ERROR {row['error']}")
            else:
                click.echo(
                    f"{row['snapshot']}: {row['classification']} "
                    f"(score {row['risk_score']}, {row['threat_type']})"
                )
    sys.exit(EXIT_MALICIOUS if any_malicious else EXIT_OK)


@main.command("eval")
@click.argument("corpus", type=click.Path(exists=True))
@_backend_options
@click.option("--output", type=click.Choice(["json", "text"]), default="text",
              show_default=True)
@click.option("--out-dir", type=click.Path(), default=None,
              help="Write report.json, results.csv, and figures here.")
@click.option("--stable", is_flag=True,
              help="Zero wall-clock timings for byte-reproducible reports.")
@click.option("--no-figures", is_flag=True, help="Skip figure rendering.")
@click.option("--with-baseline", is_flag=True,
              help="Also score the lexical-URL baseline for comparison.")
@click.option("--workers", type=int, default=0)
def eval_command(corpus, output, out_dir, stable, no_figures, with_baseline, workers,
                 **backend_kwargs):
    """Run the pipeline over a labeled corpus and score it."""
    options = _make_options(**backend_kwargs)
    try:
        outcome = eval_corpus(
            load_corpus(corpus), options, workers=workers, with_baseline=with_baseline
        )
    except Exception as exc:
        click.echo(f"eval failed: {exc}", err=True)
        sys.exit(EXIT_FAILURE)
    if out_dir:
        write_artifacts(outcome, out_dir, stable=stable, figures=not no_figures)
    click.echo(
        render_json(outcome, stable=stable) if output == "json" else render_text(outcome),
        nl=False,
    )
    any_malicious = any(
        r.report is not None and r.report.classification == "malicious"
        for r in outcome.results
    )
    sys.exit(EXIT_MALICIOUS if any_malicious else EXIT_OK)


@main.group()
def fixtures() -> None:
    """Shipped-fixture self checks."""


@fixtures.command()
def verify():
    """Re-verify golden prompts, response fixtures, and detectors."""
    from .verify import run_fixture_checks

    passed = run_fixture_checks(echo=click.echo)
    sys.exit(EXIT_OK if passed else EXIT_FAILURE)


if __name__ == "__main__":
    main()
