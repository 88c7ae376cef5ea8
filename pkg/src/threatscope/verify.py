"""Self-verification of the shipped fixtures, used by `fixtures verify`.

Checks the same invariants the test suite pins: golden prompts render
byte-for-byte, recorded response fixtures parse strictly and validate,
and every detector fixture flags exactly as documented.
"""

from __future__ import annotations

import json
from importlib import resources
from typing import Callable

from .evidence import PatternFlag, load_bundle
from .llm import parse_verdict
from .prompts import PROMPT_KINDS, build, load_schema
from .static_analyzer import analyze_script


def _fixture_text(relative: str) -> str:
    return resources.files("threatscope").joinpath(f"fixtures/{relative}").read_text()


def run_fixture_checks(echo: Callable[[str], None] = print) -> bool:
    checks: list[tuple[str, bool, str]] = []

    bundle = load_bundle(
        str(resources.files("threatscope").joinpath("fixtures/github/bundle.json"))
    )
    for kind in PROMPT_KINDS:
        try:
            rendered = build(kind, bundle).full_text
            golden = _fixture_text(f"github/golden_prompts/{kind}.txt")
            checks.append((f"golden prompt: {kind}", rendered == golden, "mismatch"))
        except Exception as exc:
            checks.append((f"golden prompt: {kind}", False, str(exc)))

    for name in ("sandbox_behavior", "trust", "script_security", "global_properties", "baseline"):
        try:
            raw = _fixture_text(f"paper_answers/{name}.json")
            document = parse_verdict(raw, load_schema(name))
            checks.append(
                (f"response fixture: {name}", not document.repair_applied, "needed repair")
            )
        except Exception as exc:
            checks.append((f"response fixture: {name}", False, str(exc)))

    flag_fixtures = json.loads(_fixture_text("flag_fixtures.json"))
    for flag_name, pair in sorted(flag_fixtures.items()):
        positive = analyze_script(flag_name, pair["positive"])
        negative = analyze_script(flag_name, pair["negative"])
        ok = positive.flags == {PatternFlag(flag_name)} and negative.flags == set()
        checks.append((f"detector: {flag_name}", ok, "flag mismatch"))
    empty = analyze_script("empty", "")
    checks.append(("detector: empty input quality", empty.code_quality_score == 100, ""))

    all_ok = True
    for name, ok, detail in checks:
        mark = "PASS" if ok else "FAIL"
        suffix = "" if ok else f"  ({detail})"
        echo(f"[{mark}] {name}{suffix}")
        all_ok &= ok
    echo(f"{sum(1 for _, ok, _ in checks if ok)}/{len(checks)} fixture checks passed")
    return all_ok
