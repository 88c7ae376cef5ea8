"""Prompt rendering: golden files, token budget arithmetic, and the
truncation-priority property."""

import random
from importlib import resources

import pytest

from threatscope.evidence import (
    DomMetadata,
    EvidenceBundle,
    TraceEvent,
    UrlRecord,
    load_bundle,
)
from threatscope.prompts import (
    PROMPT_KINDS,
    PromptBuildError,
    PromptBudgetError,
    build,
    build_all,
    estimate_tokens,
    load_schema,
    register_tokenizer,
)
from threatscope.prompts.builder import notable_event_lines


def github_bundle():
    return load_bundle(
        str(resources.files("threatscope").joinpath("fixtures/github/bundle.json"))
    )


def golden(kind):
    return (
        resources.files("threatscope")
        .joinpath(f"fixtures/github/golden_prompts/{kind}.txt")
        .read_text()
    )


# ---------------------------------------------------------------------------
# Golden prompts (acceptance)
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("kind", PROMPT_KINDS)
def test_golden_prompts_byte_for_byte(kind):
    prompt = build(kind, github_bundle())
    assert prompt.full_text == golden(kind)


def test_golden_contains_documented_lines():
    texts = {kind: golden(kind) for kind in PROMPT_KINDS}
    assert "window.fetch: 1x, EventTarget.addEventListener: 100x" in texts["sandbox_behavior"]
    assert "Risk Categories: low: 1 risks" in texts["sandbox_behavior"]
    assert "Code Quality Score: 99/100" in texts["trust"]
    assert "SSL Certificate: Yes" in texts["trust"]
    assert "Domain: github.com" in texts["trust"]
    assert "Total New Global Properties: 76" in texts["global_properties"]
    assert "webpackChunk" in texts["global_properties"]
    assert "Total forms: 5" in texts["dom_metadata"]
    assert "Defined Functions: s, m, e, _, o" in texts["script_security"]
    assert "Dangerous APIs: 1" in texts["script_security"]
    assert "Security issues: 2" in texts["script_security"]
    for kind in PROMPT_KINDS:
        assert texts[kind].startswith("[System role: Security Analyst AI]\n")


def test_build_deterministic():
    a = build("dom_metadata", github_bundle())
    b = build("dom_metadata", github_bundle())
    assert a == b


# ---------------------------------------------------------------------------
# Token estimation
# ---------------------------------------------------------------------------


def test_estimate_empty():
    assert estimate_tokens("") == 0


def test_estimate_documented_rule():
    assert estimate_tokens("x" * 350) == 100  # ceil(350 / 3.5)


def test_registered_tokenizer_overrides():
    # oracle: the registered tokenizer run standalone
    def whitespace_tokenizer(text):
        return len(text.split())

    sample = "one two three four"
    try:
        register_tokenizer(whitespace_tokenizer)
        assert estimate_tokens(sample) == whitespace_tokenizer(sample) == 4
    finally:
        register_tokenizer(None)


# ---------------------------------------------------------------------------
# Empty / missing-section behavior
# ---------------------------------------------------------------------------


def empty_page_bundle():
    return EvidenceBundle(url=UrlRecord.parse("https://blank.test/"))


def test_empty_bundle_dom_prompt_zero_counts():
    prompt = build("dom_metadata", empty_page_bundle())
    assert "Total forms: 0" in prompt.body
    assert "Login forms: 0" in prompt.body
    assert "Password fields: 0" in prompt.body


def test_missing_trace_section_error_names_section():
    with pytest.raises(PromptBuildError, match="trace"):
        build("sandbox_behavior", empty_page_bundle())


def test_missing_scripts_section_error_names_section():
    with pytest.raises(PromptBuildError, match="scripts"):
        build("script_security", empty_page_bundle())


def test_build_all_skips_missing_sections():
    prompts = build_all(empty_page_bundle())
    assert set(prompts) == {"trust", "global_properties", "dom_metadata"}
    assert set(build_all(github_bundle())) == set(PROMPT_KINDS)


# ---------------------------------------------------------------------------
# Budget and truncation
# ---------------------------------------------------------------------------


def test_budget_exceeded_raises():
    with pytest.raises(PromptBudgetError):
        build("dom_metadata", github_bundle(), budget_tokens=50)


def test_truncation_respects_budget_for_any_bundle():
    rng = random.Random(7)
    for _ in range(15):
        bundle = _random_bundle(rng)
        for kind in ("global_properties", "dom_metadata", "trust"):
            for budget in (400, 800, 3072):
                try:
                    prompt = build(kind, bundle, budget_tokens=budget)
                except PromptBudgetError:
                    continue
                assert estimate_tokens(prompt.body) <= budget


def test_critical_survives_truncation_over_lower_severities():
    rng = random.Random(21)
    for _ in range(25):
        bundle = _random_bundle(rng, force_critical=True, force_medium=True)
        lines = notable_event_lines(bundle)
        critical = [t for s, t in lines if s.name == "CRITICAL"]
        assert critical
        # squeeze until the builder must drop notable lines
        prompt = build("sandbox_behavior", bundle, budget_tokens=300)
        if "NOTABLE EVENTS" in prompt.body:
            assert critical[0] in prompt.body


def _random_bundle(rng, force_critical=False, force_medium=False):
    url = UrlRecord.parse("https://rng-test.example/")
    trace = [
        TraceEvent(
            timestamp=float(i),
            kind="api_call",
            detail={"api": rng.choice(["Document.querySelector", "Node.cloneNode"])},
        )
        for i in range(rng.randrange(0, 30))
    ]
    if force_medium:
        for i in range(rng.randrange(1, 6)):
            trace.append(
                TraceEvent(
                    timestamp=100.0 + i,
                    kind="dom_insert",
                    detail={
                        "api": "Node.appendChild",
                        "tag": "iframe",
                        "hidden": True,
                        "attrs": {"src": f"https://frame{i}.evil.test/"},
                    },
                )
            )
    password_fields = rng.randrange(0, 3)
    if force_critical:
        password_fields = max(1, password_fields)
        trace.append(
            TraceEvent(
                timestamp=200.0,
                kind="fetch",
                detail={
                    "api": "window.fetch",
                    "url": "http://collector.evil.test/gate",
                    "method": "POST",
                    "external": True,
                },
            )
        )
    meta = DomMetadata(
        title="T" * rng.randrange(1, 40),
        total_forms=3,
        login_forms=1,
        password_fields=password_fields,
        email_fields=rng.randrange(0, 3),
        autocomplete_forms=2,
        brand_meta={"og:site_name": "Brand" + str(rng.randrange(10))},
        hidden_elements=rng.randrange(0, 4),
    )
    return EvidenceBundle(
        url=url,
        trace=trace,
        dom_meta=meta,
        visible_text=" ".join(rng.choice(["alpha", "beta", "gamma", "delta"]) for _ in range(rng.randrange(0, 300))),
        new_globals=[f"g{i}" for i in range(rng.randrange(0, 40))],
    )


# ---------------------------------------------------------------------------
# Schemas
# ---------------------------------------------------------------------------


def test_schemas_load_for_all_kinds():
    for kind in PROMPT_KINDS:
        schema = load_schema(kind)
        assert schema.schema_id == f"{kind}/1"


def test_sandbox_schema_ranges():
    schema = load_schema("sandbox_behavior")
    assert schema.score_ranges["sandboxRiskScore"] == (0, 100)
    level = next(f for f in schema.fields if f["name"] == "sandboxRiskLevel")
    assert level["values"] == ["Low", "Medium", "High", "Critical"]


def test_notable_events_absent_for_benign_github():
    assert "NOTABLE EVENTS" not in golden("sandbox_behavior")
