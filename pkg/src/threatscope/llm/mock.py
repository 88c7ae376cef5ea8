"""Deterministic mock backend: evidence markers in the prompt body select
canned schema-valid outputs from a JSON rule table."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Optional

from ..prompts import RenderedPrompt


@dataclass(frozen=True)
class MockRule:
    name: str
    schema: str  # prompt kind this rule answers
    priority: int
    contains: tuple[str, ...]
    not_contains: tuple[str, ...]
    regex: tuple[str, ...]
    output: dict[str, Any]

    def matches(self, kind: str, body: str) -> bool:
        if self.schema != kind:
            return False
        if any(marker not in body for marker in self.contains):
            return False
        if any(marker in body for marker in self.not_contains):
            return False
        return all(re.search(pattern, body) for pattern in self.regex)


@dataclass(frozen=True)
class MockRuleSet:
    rules: tuple[MockRule, ...]
    defaults: dict[str, dict[str, Any]]

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "MockRuleSet":
        rules = tuple(
            MockRule(
                name=r["name"],
                schema=r["schema"],
                priority=int(r.get("priority", 0)),
                contains=tuple(r.get("contains", [])),
                not_contains=tuple(r.get("not_contains", [])),
                regex=tuple(r.get("regex", [])),
                output=r["output"],
            )
            for r in data.get("rules", [])
        )
        return cls(rules=rules, defaults=dict(data.get("defaults", {})))

    @classmethod
    def load(cls, path: Optional[str | Path] = None) -> "MockRuleSet":
        if path is None:
            text = (
                resources.files("threatscope")
                .joinpath("llm/assets/mock_rules.json")
                .read_text()
            )
        else:
            text = Path(path).read_text(encoding="utf-8")
        return cls.from_dict(json.loads(text))


def mock_generate(prompt: RenderedPrompt, rules: MockRuleSet) -> str:
    """Highest-priority matching rule wins; the benign baseline document for
    the prompt's schema is the fallback."""
    matching = [r for r in rules.rules if r.matches(prompt.kind, prompt.body)]
    if matching:
        best = max(matching, key=lambda r: r.priority)
        return json.dumps(best.output, indent=2, ensure_ascii=False)
    default = rules.defaults.get(prompt.kind)
    if default is None:
        raise KeyError(f"mock rule set has no default for kind {prompt.kind!r}")
    return json.dumps(default, indent=2, ensure_ascii=False)
