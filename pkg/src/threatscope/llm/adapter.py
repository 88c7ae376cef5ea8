"""Backend dispatch and strict-JSON verdict parsing/validation.

Responses must be valid JSON conforming to the prompt's response schema.
A failed strict parse gets exactly one repair pass (documented steps, in
order); anything still unparsable is an error carrying the raw text.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Any, Optional

import requests

from ..prompts import RenderedPrompt, ResponseSchema


class BackendError(Exception):
    """Base for inference-backend failures."""


class BackendTimeout(BackendError):
    """Retriable timeout; carries elapsed seconds."""

    def __init__(self, message: str, elapsed_s: float):
        super().__init__(f"{message} (elapsed {elapsed_s:.1f}s)")
        self.elapsed_s = elapsed_s
        self.retriable = True


class BackendTransportError(BackendError):
    """Transport failure; phase distinguishes connect vs mid-stream."""

    def __init__(self, message: str, phase: str):
        super().__init__(f"{message} [phase: {phase}]")
        self.phase = phase


class VerdictParseError(ValueError):
    def __init__(self, message: str, raw_text: str):
        super().__init__(message)
        self.raw_text = raw_text


class VerdictValidationError(ValueError):
    def __init__(self, schema_id: str, problems: list[str]):
        super().__init__(f"{schema_id}: " + "; ".join(problems))
        self.problems = problems


@dataclass(frozen=True)
class BackendDescriptor:
    kind: str  # "http_local" | "mock"
    model_name: str = "mock"
    endpoint: Optional[str] = None
    max_tokens: int = 1024
    temperature: float = 0.0
    seed: int = 0
    timeout_s: float = 120.0
    mock_rules_path: Optional[str] = None

    def __post_init__(self) -> None:
        if self.kind not in ("http_local", "mock"):
            raise ValueError(f"unknown backend kind: {self.kind!r}")
        if self.kind == "http_local" and not self.endpoint:
            raise ValueError("http_local backend requires an endpoint")


@dataclass(frozen=True)
class VerdictDocument:
    schema_id: str
    fields: dict[str, Any]
    raw_text: str
    repair_applied: bool

    def get(self, name: str, default: Any = None) -> Any:
        return self.fields.get(name, default)


# ---------------------------------------------------------------------------
# Generation
# ---------------------------------------------------------------------------


def generate(prompt: RenderedPrompt, backend: BackendDescriptor) -> str:
    """Run the prompt through the backend, returning raw model text."""
    if backend.kind == "mock":
        from .mock import MockRuleSet, mock_generate

        rules = MockRuleSet.load(backend.mock_rules_path)
        return mock_generate(prompt, rules)
    return _http_generate(prompt, backend)


def _http_generate(prompt: RenderedPrompt, backend: BackendDescriptor) -> str:
    # minimal completion protocol: POST {model, system, prompt, max_tokens,
    # temperature, seed} -> {"text": ...}; any local server adapts easily
    payload = {
        "model": backend.model_name,
        "system": prompt.system_preamble,
        "prompt": prompt.body,
        "max_tokens": backend.max_tokens,
        "temperature": backend.temperature,
        "seed": backend.seed,
    }
    try:
        response = requests.post(
            backend.endpoint, json=payload, timeout=backend.timeout_s
        )
    except requests.ConnectTimeout as exc:
        raise BackendTimeout("connect timeout", backend.timeout_s) from exc
    except requests.ReadTimeout as exc:
        raise BackendTimeout("read timeout", backend.timeout_s) from exc
    except requests.ConnectionError as exc:
        raise BackendTransportError(str(exc), phase="connect") from exc
    except requests.RequestException as exc:
        raise BackendTransportError(str(exc), phase="stream") from exc
    if response.status_code != 200:
        raise BackendTransportError(
            f"backend returned {response.status_code}", phase="stream"
        )
    try:
        text = response.json()["text"]
    except (ValueError, KeyError) as exc:
        raise BackendTransportError(
            f"malformed backend response: {exc}", phase="stream"
        ) from exc
    if backend.max_tokens and len(text) > backend.max_tokens * 8:
        text = text[: backend.max_tokens * 8]
    return text


# ---------------------------------------------------------------------------
# Parsing with a single documented repair pass
# ---------------------------------------------------------------------------

_FENCE_RE = re.compile(r"```(?:json)?\s*(.*?)```", re.DOTALL)
_TRAILING_COMMA_RE = re.compile(r",(\s*[}\]])")


def _strip_fences(text: str) -> str:
    match = _FENCE_RE.search(text)
    return match.group(1) if match else text


def _trim_prose(text: str) -> str:
    start = text.find("{")
    end = text.rfind("}")
    if start >= 0 and end > start:
        return text[start : end + 1]
    return text


def _fix_trailing_commas(text: str) -> str:
    return _TRAILING_COMMA_RE.sub(r"\1", text)


def _balance_braces(text: str) -> str:
    stack: list[str] = []
    in_string = False
    escaped = False
    for ch in text:
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
        elif ch == '"':
            in_string = True
        elif ch in "{[":
            stack.append("}" if ch == "{" else "]")
        elif ch in "}]":
            if stack and stack[-1] == ch:
                stack.pop()
    if in_string:
        text += '"'
    return text + "".join(reversed(stack))


_REPAIRS = (_strip_fences, _trim_prose, _fix_trailing_commas, _balance_braces)


def parse_verdict(raw_text: str, schema: ResponseSchema) -> VerdictDocument:
    """Strict parse first; on failure apply the repair steps in order."""
    try:
        data = json.loads(raw_text)
        repaired = False
    except json.JSONDecodeError:
        data = None
        text = raw_text
        for repair in _REPAIRS:
            text = repair(text)
            try:
                data = json.loads(text)
                break
            except json.JSONDecodeError:
                continue
        if data is None:
            raise VerdictParseError("unrepairable model output", raw_text)
        repaired = True
    if not isinstance(data, dict):
        raise VerdictParseError("model output is not a JSON object", raw_text)

    problems: list[str] = []
    normalized = _validate_object(data, schema.fields, "", problems)
    if problems:
        raise VerdictValidationError(schema.schema_id, problems)
    return VerdictDocument(
        schema_id=schema.schema_id,
        fields=normalized,
        raw_text=raw_text,
        repair_applied=repaired,
    )


def serialize_verdict(document: VerdictDocument) -> str:
    return json.dumps(document.fields, indent=2, ensure_ascii=False)


# ---------------------------------------------------------------------------
# Schema validation
# ---------------------------------------------------------------------------


def _validate_object(
    data: dict, fields: tuple | list, path: str, problems: list[str]
) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for spec in fields:
        name = spec["name"]
        where = f"{path}{name}"
        if name not in data:
            if spec.get("optional"):
                out[name] = spec.get("default")
                continue
            problems.append(f"missing required field {where}")
            continue
        out[name] = _validate_value(data[name], spec, where, problems)
    return out


def _validate_value(value: Any, spec: dict, where: str, problems: list[str]) -> Any:
    type_ = spec["type"]
    if value is None:
        if spec.get("nullable"):
            return None
        problems.append(f"{where} must not be null")
        return None
    if type_ == "string":
        if not isinstance(value, str):
            problems.append(f"{where} must be a string")
        return value
    if type_ == "bool":
        if not isinstance(value, bool):
            problems.append(f"{where} must be a boolean")
        return value
    if type_ in ("int", "number"):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            problems.append(f"{where} must be a number")
            return value
        if type_ == "int" and isinstance(value, float) and not value.is_integer():
            problems.append(f"{where} must be an integer")
        rng = spec.get("range")
        if rng and not (rng[0] <= value <= rng[1]):
            problems.append(f"{where}={value} outside range [{rng[0]}, {rng[1]}]")
        return int(value) if type_ == "int" else value
    if type_ == "enum":
        if value not in spec.get("values", []):
            problems.append(f"{where}={value!r} not in {spec.get('values')}")
        return value
    if type_ == "array":
        if not isinstance(value, list):
            problems.append(f"{where} must be an array")
            return value
        item_spec = spec.get("items", {"type": "string"})
        return [
            _validate_value(item, {"name": f"[{i}]", **item_spec}, f"{where}[{i}]", problems)
            if item_spec.get("type") != "object"
            else (
                _validate_object(item, item_spec.get("fields", []), f"{where}[{i}].", problems)
                if isinstance(item, dict)
                else problems.append(f"{where}[{i}] must be an object") or item
            )
            for i, item in enumerate(value)
        ]
    if type_ == "object":
        if not isinstance(value, dict):
            problems.append(f"{where} must be an object")
            return value
        return _validate_object(value, spec.get("fields", []), f"{where}.", problems)
    problems.append(f"{where}: unknown spec type {type_!r}")
    return value
