"""Backend dispatch, verdict parsing/repair, schema validation, and the
mock rule table."""

import json
from importlib import resources

import pytest

from threatscope.evidence import load_bundle
from threatscope.llm import (
    BackendDescriptor,
    BackendTransportError,
    MockRuleSet,
    VerdictParseError,
    VerdictValidationError,
    generate,
    mock_generate,
    parse_verdict,
    serialize_verdict,
)
from threatscope.prompts import RenderedPrompt, build, load_schema

PAPER_ANSWER_SCHEMAS = {
    "sandbox_behavior": "sandbox_behavior",
    "trust": "trust",
    "script_security": "script_security",
    "global_properties": "global_properties",
    "baseline": "baseline",
}


def paper_answer(name):
    return (
        resources.files("threatscope")
        .joinpath(f"fixtures/paper_answers/{name}.json")
        .read_text()
    )


def github_bundle():
    return load_bundle(
        str(resources.files("threatscope").joinpath("fixtures/github/bundle.json"))
    )


def fake_prompt(kind, body):
    return RenderedPrompt(
        kind=kind,
        system_preamble="[System role: Security Analyst AI]",
        body=body,
        schema_id=f"{kind}/1",
        token_estimate=10,
    )


# ---------------------------------------------------------------------------
# Acceptance: every printed response block parses strictly and validates
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("name,schema_name", sorted(PAPER_ANSWER_SCHEMAS.items()))
def test_paper_answer_fixtures_parse_without_repair(name, schema_name):
    raw = paper_answer(name)
    document = parse_verdict(raw, load_schema(schema_name))
    assert document.repair_applied is False
    assert document.schema_id == f"{schema_name}/1"


def test_sandbox_answer_values():
    document = parse_verdict(paper_answer("sandbox_behavior"), load_schema("sandbox_behavior"))
    assert document.get("sandboxRiskScore") == 20
    assert document.get("sandboxRiskLevel") == "Low"


def test_global_answer_exercises_optional_boolean():
    # the printed block omits hasSessionHijackers; validation defaults it
    document = parse_verdict(paper_answer("global_properties"), load_schema("global_properties"))
    assert document.get("behaviorAnalysis")["hasSessionHijackers"] is False
    assert document.get("behaviorAnalysis")["hasKeyloggers"] is False
    assert document.get("legitimacyScore") == 20


def test_baseline_answer_values():
    document = parse_verdict(paper_answer("baseline"), load_schema("baseline"))
    assert document.get("confidence") == 0
    assert document.get("legitimacyScore") == 100
    assert document.get("targetedBrand") is None


# ---------------------------------------------------------------------------
# Repair ladder
# ---------------------------------------------------------------------------


def test_fenced_json_repaired():
    raw = "```json\n" + paper_answer("sandbox_behavior") + "\n```"
    document = parse_verdict(raw, load_schema("sandbox_behavior"))
    assert document.repair_applied is True
    # oracle: strict parse of the fence-stripped text gives the same fields
    strict = parse_verdict(paper_answer("sandbox_behavior"), load_schema("sandbox_behavior"))
    assert document.fields == strict.fields


def test_surrounding_prose_trimmed():
    raw = "Sure! Here is my analysis:\n" + paper_answer("trust") + "\nHope this helps."
    document = parse_verdict(raw, load_schema("trust"))
    assert document.repair_applied and document.get("score") == 92


def test_trailing_commas_fixed():
    raw = '{"score": 50, "level": "Medium", "factors": ["a", "b",],}'
    document = parse_verdict(raw, load_schema("trust"))
    assert document.repair_applied and document.get("factors") == ["a", "b"]


def test_unbalanced_braces_closed():
    raw = '{"score": 50, "level": "Medium", "factors": ["a"'
    document = parse_verdict(raw, load_schema("trust"))
    assert document.repair_applied and document.get("score") == 50


def test_unrepairable_text_carries_raw():
    with pytest.raises(VerdictParseError) as err:
        parse_verdict("the page looks fine to me", load_schema("trust"))
    assert err.value.raw_text == "the page looks fine to me"


def test_score_out_of_range_rejected():
    raw = json.dumps(
        {"sandboxRiskScore": 150, "sandboxRiskLevel": "Low", "sandboxFindings": []}
    )
    with pytest.raises(VerdictValidationError) as err:
        parse_verdict(raw, load_schema("sandbox_behavior"))
    assert any("sandboxRiskScore" in p for p in err.value.problems)


def test_validation_lists_all_offending_fields():
    raw = json.dumps({"score": "high", "level": "Extreme", "factors": "nope"})
    with pytest.raises(VerdictValidationError) as err:
        parse_verdict(raw, load_schema("trust"))
    joined = " ".join(err.value.problems)
    assert "score" in joined and "level" in joined and "factors" in joined


def test_parse_serialize_round_trip():
    document = parse_verdict(paper_answer("global_properties"), load_schema("global_properties"))
    again = parse_verdict(serialize_verdict(document), load_schema("global_properties"))
    assert again.fields == document.fields
    assert again.repair_applied is False


# ---------------------------------------------------------------------------
# Mock backend
# ---------------------------------------------------------------------------

MOCK = BackendDescriptor(kind="mock")


def test_mock_github_trust_prompt_reproduces_answer():
    prompt = build("trust", github_bundle())
    raw = generate(prompt, MOCK)
    data = json.loads(raw)
    assert data["score"] == 92 and data["level"] == "High"


def test_mock_github_sandbox_prompt_reproduces_answer():
    prompt = build("sandbox_behavior", github_bundle())
    data = json.loads(generate(prompt, MOCK))
    assert data["sandboxRiskScore"] == 20


def test_mock_empty_evidence_dom_prompt_gives_baseline():
    from threatscope.evidence import EvidenceBundle, UrlRecord

    bundle = EvidenceBundle(url=UrlRecord.parse("https://blank.test/"))
    prompt = build("dom_metadata", bundle)
    data = json.loads(generate(prompt, MOCK))
    assert data["isPhishing"] is False
    assert data["confidence"] == 0
    assert data["legitimacyScore"] == 100


def test_mock_rule_priority_wins():
    rules = MockRuleSet.from_dict(
        {
            "rules": [
                {"name": "low", "schema": "trust", "priority": 5,
                 "contains": ["MARK"], "output": {"score": 1, "level": "Low", "factors": []}},
                {"name": "high", "schema": "trust", "priority": 10,
                 "contains": ["MARK"], "output": {"score": 99, "level": "High", "factors": []}},
            ],
            "defaults": {"trust": {"score": 50, "level": "Medium", "factors": []}},
        }
    )
    raw = mock_generate(fake_prompt("trust", "body with MARK inside"), rules)
    assert json.loads(raw)["score"] == 99


def test_mock_malicious_markers():
    body = (
        "FORMS ANALYSIS:\n- Password fields: 2\n"
        "BRAND ANALYSIS:\n- og:site_name: SecureBank\nDomain: not-the-bank.xyz\n"
    )
    raw = mock_generate(fake_prompt("dom_metadata", body), MockRuleSet.load())
    data = json.loads(raw)
    assert data["isPhishing"] is True and data["confidence"] == 90
    assert data["phishingType"] == "fake-login"


def test_mock_deterministic():
    prompt = build("dom_metadata", github_bundle())
    assert generate(prompt, MOCK) == generate(prompt, MOCK)


def test_mock_outputs_validate_against_schemas():
    rules = MockRuleSet.load()
    for rule in rules.rules:
        parse_verdict(json.dumps(rule.output), load_schema(rule.schema))
    for kind, output in rules.defaults.items():
        parse_verdict(json.dumps(output), load_schema(kind))


# ---------------------------------------------------------------------------
# HTTP backend
# ---------------------------------------------------------------------------


def test_http_backend_requires_endpoint():
    with pytest.raises(ValueError, match="endpoint"):
        BackendDescriptor(kind="http_local")


def test_http_echo_server(http_server):
    canned = paper_answer("trust")
    import json as _json

    def handler(request):  # http_server only routes GET; add POST below
        raise AssertionError("unused")

    # extend the fixture's handler with a POST route
    class PostHandler:
        pass

    # simplest: spin a one-off POST-capable server here
    import threading
    from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            length = int(self.headers.get("Content-Length", "0"))
            payload = _json.loads(self.rfile.read(length))
            assert payload["model"] == "tiny-model"
            assert payload["temperature"] == 0.0
            body = _json.dumps({"text": canned}).encode()
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def log_message(self, *args):
            pass

    server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    try:
        backend = BackendDescriptor(
            kind="http_local",
            model_name="tiny-model",
            endpoint=f"http://127.0.0.1:{server.server_address[1]}/v1/complete",
        )
        prompt = fake_prompt("trust", "anything")
        assert generate(prompt, backend) == canned
    finally:
        server.shutdown()
        server.server_close()


def test_http_connect_failure_distinguished():
    backend = BackendDescriptor(
        kind="http_local", endpoint="http://127.0.0.1:1/nothing", timeout_s=2
    )
    with pytest.raises(BackendTransportError) as err:
        generate(fake_prompt("trust", "x"), backend)
    assert err.value.phase == "connect"
