"""Static ECMAScript feature extraction.

Each script is parsed to an AST and scanned by per-flag detectors for
identifiers, structure, string patterns, and obfuscation signals. When
parsing fails the same flags are approximated by a regex pass over the
raw text; that is a data state (parse_ok=false), never an error.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Optional

from .evidence import (
    PatternFlag,
    StaticFeatureSet,
    StringFinding,
    script_digest,
)
from .jsparse import ParseError, parse
from .jsparse.nodes import member_path

# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AnalyzerConfig:
    """Detector tuning knobs, loaded from the versioned detectors.json."""

    version: int
    sensitive_keywords: tuple[str, ...]
    credential_regexes: dict[str, str]
    base64_blob_min_chars: int
    hex_blob_min_chars: int
    suspicious_url_tlds: tuple[str, ...]
    suspicious_url_tokens: tuple[str, ...]
    key_events: tuple[str, ...]
    mouse_events: tuple[str, ...]
    obfuscation_weights: dict[str, float]
    obfuscated_threshold: float
    entropy_sample_min_chars: int
    max_nesting_depth: int
    issue_flags: frozenset[PatternFlag]
    quality_obfuscation_penalty: float
    quality_per_issue_penalty: int

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "AnalyzerConfig":
        return cls(
            version=data["version"],
            sensitive_keywords=tuple(k.lower() for k in data["sensitive_keywords"]),
            credential_regexes=dict(data["credential_regexes"]),
            base64_blob_min_chars=data["base64_blob_min_chars"],
            hex_blob_min_chars=data["hex_blob_min_chars"],
            suspicious_url_tlds=tuple(data["suspicious_url_tlds"]),
            suspicious_url_tokens=tuple(data["suspicious_url_tokens"]),
            key_events=tuple(data["key_events"]),
            mouse_events=tuple(data["mouse_events"]),
            obfuscation_weights=dict(data["obfuscation_weights"]),
            obfuscated_threshold=data["obfuscated_threshold"],
            entropy_sample_min_chars=data["entropy_sample_min_chars"],
            max_nesting_depth=data["max_nesting_depth"],
            issue_flags=frozenset(PatternFlag(f) for f in data["issue_flags"]),
            quality_obfuscation_penalty=data["quality"]["obfuscation_penalty"],
            quality_per_issue_penalty=data["quality"]["per_issue_penalty"],
        )

    @classmethod
    def load(cls, path: Optional[str | Path] = None) -> "AnalyzerConfig":
        if path is None:
            text = (
                resources.files("threatscope").joinpath("assets/detectors.json").read_text()
            )
        else:
            text = Path(path).read_text(encoding="utf-8")
        return cls.from_dict(json.loads(text))


_DEFAULT_CONFIG: Optional[AnalyzerConfig] = None


def default_config() -> AnalyzerConfig:
    global _DEFAULT_CONFIG
    if _DEFAULT_CONFIG is None:
        _DEFAULT_CONFIG = AnalyzerConfig.load()
    return _DEFAULT_CONFIG


# ---------------------------------------------------------------------------
# Obfuscation scoring
# ---------------------------------------------------------------------------


@dataclass
class AstStats:
    """Intermediate stats feeding the obfuscation score."""

    identifier_lengths: list[int] = field(default_factory=list)
    whitespace_ratio: float = 0.0
    string_entropy_samples: list[float] = field(default_factory=list)
    hex_identifier_count: int = 0
    source_chars: int = 0


_HEX_IDENT_RE = re.compile(r"^_0x[0-9a-fA-F]+$")


def shannon_entropy(text: str) -> float:
    """Bits per character of the empirical char distribution."""
    if not text:
        return 0.0
    counts: dict[str, int] = {}
    for ch in text:
        counts[ch] = counts.get(ch, 0) + 1
    n = len(text)
    return -sum((c / n) * math.log2(c / n) for c in counts.values())


def _clamp01(x: float) -> float:
    return max(0.0, min(1.0, x))


def score_obfuscation(stats: AstStats, config: Optional[AnalyzerConfig] = None) -> float:
    """Weighted [0,1] obfuscation score; >= threshold renders "Obfuscated: Yes".

    Sub-signals: share of 1-2 char identifiers, missing whitespace,
    high-entropy string literals, and _0x-style hex identifiers.
    """
    config = config or default_config()
    if not stats.identifier_lengths and not stats.string_entropy_samples:
        return 0.0
    w = config.obfuscation_weights

    # snippets too small to carry signal are dampened towards 0
    id_population = min(1.0, len(stats.identifier_lengths) / 8)
    size_population = min(1.0, stats.source_chars / 256) if stats.source_chars else 1.0

    if stats.identifier_lengths:
        short = sum(1 for n in stats.identifier_lengths if n <= 2) / len(
            stats.identifier_lengths
        )
        hex_fraction = stats.hex_identifier_count / len(stats.identifier_lengths)
    else:
        short = 0.0
        hex_fraction = 0.0
    ws_signal = _clamp01((0.12 - stats.whitespace_ratio) / 0.10) * size_population
    if stats.string_entropy_samples:
        mean_entropy = sum(stats.string_entropy_samples) / len(stats.string_entropy_samples)
        entropy_signal = _clamp01((mean_entropy - 3.0) / 1.5)
    else:
        entropy_signal = 0.0

    score = (
        w["short_identifiers"] * _clamp01(short) * id_population
        + w["low_whitespace"] * ws_signal
        + w["string_entropy"] * entropy_signal
        + w["hex_identifiers"] * _clamp01(hex_fraction * 4)
    )
    return round(_clamp01(score), 4)


def quality_score(obfuscation: float, issue_count: int, config: AnalyzerConfig) -> int:
    raw = (
        100
        - round(100 * obfuscation * config.quality_obfuscation_penalty)
        - config.quality_per_issue_penalty * issue_count
    )
    return max(0, min(100, raw))


# ---------------------------------------------------------------------------
# AST detectors
# ---------------------------------------------------------------------------


def _literal_str(node: Any) -> Optional[str]:
    if isinstance(node, dict) and node.get("type") == "Literal" and node.get("kind") == "string":
        return node["value"]
    return None


def _is_stringish(node: Any) -> bool:
    """Expression that evaluates to a string at a glance (literal, template,
    or concatenation touching one)."""
    if not isinstance(node, dict):
        return False
    if _literal_str(node) is not None or node.get("type") == "TemplateLiteral":
        return True
    if node.get("type") == "BinaryExpression" and node.get("operator") == "+":
        return _is_stringish(node["left"]) or _is_stringish(node["right"])
    return False


def _callee_name(node: dict) -> str:
    """Name of a call target: 'eval', 'document.createElement', 'unknown.x'."""
    callee = node.get("callee", {})
    if callee.get("type") == "MemberExpression" and callee.get("computed"):
        # window['eval'] style indirection
        prop = _literal_str(callee.get("property"))
        if prop is not None:
            base = callee["object"]
            base_name = base.get("name") if base.get("type") == "Identifier" else "unknown"
            return f"{base_name}.{prop}"
    return member_path(callee)


_GLOBAL_ALIASES = ("window", "globalThis", "self", "top", "parent")


def _is_global_call(name: str, target: str) -> bool:
    return name == target or name in tuple(f"{g}.{target}" for g in _GLOBAL_ALIASES)


def _prop_name(node: dict) -> Optional[str]:
    if node.get("type") != "MemberExpression":
        return None
    prop = node.get("property", {})
    if not node.get("computed") and prop.get("type") == "Identifier":
        return prop["name"]
    return _literal_str(prop)


class _AstScan:
    """Single traversal collecting flags, identifiers, APIs, and stats."""

    def __init__(self, program: dict, source: str, config: AnalyzerConfig):
        self.config = config
        self.source = source
        self.flags: set[PatternFlag] = set()
        self.function_names: list[str] = []
        self.variable_names: list[str] = []
        self.anonymous_fn_count = 0
        self.invoked_apis: list[str] = []
        self._api_seen: set[str] = set()
        self.dangerous_api_count = 0
        self.string_literals: list[str] = []
        self._declared: list[str] = []
        self._has_atob = False
        self._script_create_calls = 0
        self.max_depth = 0
        self._scan(program)

    # -- helpers

    def _add_api(self, name: str) -> None:
        if name and name not in self._api_seen:
            self._api_seen.add(name)
            self.invoked_apis.append(name)

    def _declare(self, pattern: dict) -> None:
        t = pattern.get("type")
        if t == "Identifier":
            self._declared.append(pattern["name"])
        elif t == "AssignmentPattern":
            self._declare(pattern["left"])
        elif t == "RestElement":
            self._declare(pattern["argument"])
        elif t == "ArrayPattern":
            for el in pattern["elements"]:
                if el:
                    self._declare(el)
        elif t == "ObjectPattern":
            for prop in pattern["properties"]:
                if prop["type"] == "RestElement":
                    self._declare(prop["argument"])
                else:
                    self._declare(prop["value"])

    # -- traversal

    def _scan(self, program: dict) -> None:
        # stack-based preorder that preserves source order (children pushed
        # reversed), so first-seen API order matches document order
        stack: list[tuple[Any, int]] = [(program, 0)]
        while stack:
            node, depth = stack.pop()
            if isinstance(node, list):
                stack.extend(
                    (child, depth)
                    for child in reversed(node)
                    if isinstance(child, (dict, list))
                )
                continue
            if not isinstance(node, dict) or "type" not in node:
                continue
            t = node["type"]
            child_depth = depth + 1 if t == "BlockStatement" else depth
            self.max_depth = max(self.max_depth, child_depth)
            self._visit(node)
            children = [
                value
                for key, value in node.items()
                if key != "type" and isinstance(value, (dict, list))
            ]
            stack.extend((child, child_depth) for child in reversed(children))

    def _visit(self, node: dict) -> None:
        t = node["type"]
        if t in ("FunctionDeclaration", "FunctionExpression"):
            if node.get("id"):
                self.function_names.append(node["id"])
            else:
                self.anonymous_fn_count += 1
            for p in node.get("params", []):
                self._declare(p)
        elif t == "ArrowFunctionExpression":
            self.anonymous_fn_count += 1
            for p in node.get("params", []):
                self._declare(p)
        elif t == "VariableDeclarator":
            self._declare(node["id"])
        elif t == "CatchClause" and node.get("param"):
            self._declare(node["param"])
        elif t == "Literal" and node.get("kind") == "string":
            self.string_literals.append(node["value"])
        elif t == "TemplateLiteral":
            for quasi in node.get("quasis", []):
                if quasi.get("cooked"):
                    self.string_literals.append(quasi["cooked"])
        elif t in ("CallExpression", "NewExpression"):
            self._visit_call(node)
        elif t == "AssignmentExpression":
            self._visit_assignment(node)
        elif t == "MemberExpression":
            self._visit_member(node)
        elif t in ("IfStatement", "WhileStatement", "DoWhileStatement"):
            if _is_opaque_condition(node.get("test")):
                self.flags.add(PatternFlag.OPAQUE_CONTROL_FLOW)

    def _visit_call(self, node: dict) -> None:
        name = _callee_name(node)
        self._add_api(name)
        args = node.get("arguments", [])
        cfg = self.config

        if _is_global_call(name, "eval") or name.endswith(".eval"):
            self.flags.add(PatternFlag.EVAL_USAGE)
            self.dangerous_api_count += 1
        if name == "Function" or name.endswith(".Function"):
            self.flags.add(PatternFlag.FUNCTION_CONSTRUCTOR)
            self.dangerous_api_count += 1
        if _is_global_call(name, "setTimeout") or _is_global_call(name, "setInterval"):
            if args and _is_stringish(args[0]):
                self.flags.add(PatternFlag.DELAYED_STRING_EXEC)
        if name.split(".")[-1] in ("createElement", "createElementNS"):
            created = next(
                (_literal_str(a) for a in args if _literal_str(a) is not None), None
            )
            if created and created.lower() == "script":
                self.flags.add(PatternFlag.DYNAMIC_SCRIPT_INJECTION)
                self._script_create_calls += 1
        if _is_global_call(name, "atob") or name.endswith(".atob"):
            self.flags.add(PatternFlag.BASE64_DECODE)
            self._has_atob = True
        if name in ("document.write", "document.writeln"):
            self.flags.add(PatternFlag.DOM_INJECTION)
            self.dangerous_api_count += 1
        if name.endswith(".insertAdjacentHTML"):
            self.flags.add(PatternFlag.DOM_INJECTION)
        if name.endswith(".addEventListener") and args:
            event = _literal_str(args[0])
            if event in cfg.key_events:
                self.flags.add(PatternFlag.EVENT_CAPTURE_KEYS)
            elif event in cfg.mouse_events:
                self.flags.add(PatternFlag.EVENT_CAPTURE_MOUSE)

    def _visit_assignment(self, node: dict) -> None:
        left = node.get("left", {})
        prop = _prop_name(left) or ""
        if prop in ("innerHTML", "outerHTML"):
            self.flags.add(PatternFlag.DOM_INJECTION)
            self.dangerous_api_count += 1
        elif prop in tuple("on" + e for e in self.config.key_events):
            self.flags.add(PatternFlag.EVENT_CAPTURE_KEYS)
        elif prop in tuple("on" + e for e in self.config.mouse_events):
            self.flags.add(PatternFlag.EVENT_CAPTURE_MOUSE)

    def _visit_member(self, node: dict) -> None:
        path = member_path(node)
        if path.endswith("document.cookie") or path == "document.cookie":
            self.flags.add(PatternFlag.COOKIE_ACCESS)
        if path.endswith("navigator.webdriver") or path == "navigator.webdriver":
            self.flags.add(PatternFlag.NAVIGATOR_WEBDRIVER_CHECK)
        base = path.split(".")[0] if path else ""
        leaf = path.split(".")[-2] if path.count(".") else base
        if base in ("localStorage", "sessionStorage") or leaf in (
            "localStorage",
            "sessionStorage",
        ):
            self.flags.add(PatternFlag.STORAGE_ACCESS)


def _is_opaque_condition(test: Any) -> bool:
    """Obfuscator-style constant conditions: !![], ![], 'ab'==='ab',
    0x1f===0x1f. Plain `while(true)` / `if (flag)` stay clean."""
    if not isinstance(test, dict):
        return False
    if test.get("type") == "UnaryExpression" and test.get("operator") == "!":
        arg = test.get("argument", {})
        if arg.get("type") in ("ArrayExpression", "ObjectExpression"):
            return True
        return _is_opaque_condition(arg) or (
            arg.get("type") == "UnaryExpression" and _is_opaque_condition(arg)
        )
    if test.get("type") == "BinaryExpression" and test.get("operator") in (
        "==",
        "===",
        "!=",
        "!==",
    ):
        left, right = test.get("left", {}), test.get("right", {})
        if left.get("type") == "Literal" and right.get("type") == "Literal":
            return True
    return False


# ---------------------------------------------------------------------------
# String pattern scanning (shared by AST and fallback paths)
# ---------------------------------------------------------------------------

_URL_IN_TEXT_RE = re.compile(r"(?:https?|wss?)://[^\s\"'<>`]+", re.IGNORECASE)
_BASE64_CHARS_RE = re.compile(r"^[A-Za-z0-9+/=_-]+$")
_HEX_CHARS_RE = re.compile(r"^(?:0x)?[0-9a-fA-F]+$")
_IPV4_RE = re.compile(r"^\d{1,3}(?:\.\d{1,3}){3}$")


def _excerpt(text: str) -> str:
    return text if len(text) <= 80 else text[:77] + "..."


def _is_suspicious_url(url: str, config: AnalyzerConfig) -> bool:
    rest = url.split("://", 1)[-1]
    host = rest.split("/", 1)[0].split(":")[0].split("@")[-1].lower()
    lowered = url.lower()
    if _IPV4_RE.match(host):
        return True
    if any(host.endswith(tld) for tld in config.suspicious_url_tlds):
        return True
    return any(token in lowered for token in config.suspicious_url_tokens)


def scan_strings(
    strings: Iterable[str], config: AnalyzerConfig
) -> tuple[list[StringFinding], set[PatternFlag], list[float]]:
    """Classify string literals into findings; returns findings, any flags
    they imply, and entropy samples for the obfuscation score."""
    findings: list[StringFinding] = []
    flags: set[PatternFlag] = set()
    entropies: list[float] = []
    cred_patterns = [re.compile(p) for p in config.credential_regexes.values()]
    for text in strings:
        if not text:
            continue
        if len(text) >= config.entropy_sample_min_chars:
            entropies.append(shannon_entropy(text))
        for url in _URL_IN_TEXT_RE.findall(text):
            findings.append(StringFinding("url", _excerpt(url)))
            if _is_suspicious_url(url, config):
                flags.add(PatternFlag.SUSPICIOUS_URL_LITERAL)
        stripped = text.strip()
        if len(stripped) >= config.hex_blob_min_chars and _HEX_CHARS_RE.match(stripped):
            findings.append(StringFinding("hex_blob", _excerpt(stripped)))
        elif len(stripped) >= config.base64_blob_min_chars and _BASE64_CHARS_RE.match(
            stripped
        ):
            findings.append(StringFinding("base64_blob", _excerpt(stripped)))
        lowered = text.lower()
        for keyword in config.sensitive_keywords:
            if keyword in lowered:
                findings.append(StringFinding("sensitive_keyword", _excerpt(text)))
                flags.add(PatternFlag.SENSITIVE_KEYWORD)
                break
        for pattern in cred_patterns:
            if pattern.search(text):
                findings.append(StringFinding("sensitive_keyword", _excerpt(text)))
                flags.add(PatternFlag.SENSITIVE_KEYWORD)
                break
    return findings, flags, entropies


def _keyword_in_identifiers(names: Iterable[str], config: AnalyzerConfig) -> bool:
    for name in names:
        lowered = name.lower()
        if any(k in lowered for k in config.sensitive_keywords):
            return True
    return False


# ---------------------------------------------------------------------------
# Regex fallback detectors (parse failures)
# ---------------------------------------------------------------------------

_FALLBACK_DETECTORS: dict[PatternFlag, re.Pattern] = {
    PatternFlag.EVAL_USAGE: re.compile(r"\beval\s*\("),
    PatternFlag.FUNCTION_CONSTRUCTOR: re.compile(r"\bnew\s+Function\s*\(|\bFunction\s*\(\s*[\"']"),
    PatternFlag.DELAYED_STRING_EXEC: re.compile(r"\bset(?:Timeout|Interval)\s*\(\s*[\"'`]"),
    PatternFlag.DYNAMIC_SCRIPT_INJECTION: re.compile(
        r"createElement(?:NS)?\s*\(\s*[\"']script[\"']", re.IGNORECASE
    ),
    PatternFlag.BASE64_DECODE: re.compile(r"\batob\s*\("),
    PatternFlag.NAVIGATOR_WEBDRIVER_CHECK: re.compile(r"navigator\s*\.\s*webdriver"),
    PatternFlag.DOM_INJECTION: re.compile(
        r"\.(?:inner|outer)HTML\s*\+?=|document\.write(?:ln)?\s*\(|insertAdjacentHTML\s*\("
    ),
    PatternFlag.EVENT_CAPTURE_KEYS: re.compile(
        r"addEventListener\s*\(\s*[\"']key(?:down|up|press)[\"']|\bonkey(?:down|up|press)\s*="
    ),
    PatternFlag.EVENT_CAPTURE_MOUSE: re.compile(
        r"addEventListener\s*\(\s*[\"']mouse(?:move|down|up)[\"']|\bonmouse(?:move|down|up)\s*="
    ),
    PatternFlag.COOKIE_ACCESS: re.compile(r"document\s*\.\s*cookie"),
    PatternFlag.STORAGE_ACCESS: re.compile(r"\b(?:local|session)Storage\b"),
    PatternFlag.OPAQUE_CONTROL_FLOW: re.compile(
        r"(?:while|if)\s*\(\s*!!?\[\]|[\"'][0-9a-zA-Z]{4,10}[\"']\s*===?\s*[\"'][0-9a-zA-Z]{4,10}[\"']"
    ),
}

_QUOTED_STRING_RE = re.compile(r"\"((?:[^\"\\\n]|\\.)*)\"|'((?:[^'\\\n]|\\.)*)'")
_IDENT_RE = re.compile(r"\b[A-Za-z_$][A-Za-z0-9_$]*\b")


def _regex_fallback(name: str, source: str, config: AnalyzerConfig) -> StaticFeatureSet:
    flags = {
        flag for flag, pattern in _FALLBACK_DETECTORS.items() if pattern.search(source)
    }
    strings = [m.group(1) or m.group(2) or "" for m in _QUOTED_STRING_RE.finditer(source)]
    findings, string_flags, entropies = scan_strings(strings, config)
    flags |= string_flags
    idents = _IDENT_RE.findall(source)
    if _keyword_in_identifiers(idents, config):
        flags.add(PatternFlag.SENSITIVE_KEYWORD)

    stats = AstStats(
        identifier_lengths=[len(i) for i in dict.fromkeys(idents)],
        whitespace_ratio=_whitespace_ratio(source),
        string_entropy_samples=entropies,
        hex_identifier_count=sum(1 for i in dict.fromkeys(idents) if _HEX_IDENT_RE.match(i)),
        source_chars=len(source),
    )
    obf = score_obfuscation(stats, config)
    issue_count = len(flags & config.issue_flags)
    return StaticFeatureSet(
        script_name=name,
        parse_ok=False,
        flags=flags,
        string_findings=findings,
        obfuscation_score=obf,
        code_quality_score=quality_score(obf, issue_count, config),
        dangerous_api_count=0,
        invoked_apis=[],
        source_digest=script_digest(source),
    )


def _whitespace_ratio(source: str) -> float:
    if not source:
        return 0.0
    return sum(1 for c in source if c.isspace()) / len(source)


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------


def analyze_script(
    name: str, source: str, config: Optional[AnalyzerConfig] = None
) -> StaticFeatureSet:
    """Extract the full static feature set for one script."""
    config = config or default_config()
    try:
        program = parse(source)
    except (ParseError, RecursionError):
        return _regex_fallback(name, source, config)

    scan = _AstScan(program, source, config)
    findings, string_flags, entropies = scan_strings(scan.string_literals, config)
    flags = scan.flags | string_flags
    if _keyword_in_identifiers(
        scan.function_names + scan.variable_names + scan._declared, config
    ):
        flags.add(PatternFlag.SENSITIVE_KEYWORD)
    if scan.max_depth >= config.max_nesting_depth:
        flags.add(PatternFlag.OPAQUE_CONTROL_FLOW)
    if scan._has_atob and scan._script_create_calls:
        # the classic atob -> createElement('script') injection idiom
        scan.dangerous_api_count += scan._script_create_calls

    declared = list(dict.fromkeys(scan.function_names + scan._declared))
    stats = AstStats(
        identifier_lengths=[len(n) for n in declared],
        whitespace_ratio=_whitespace_ratio(source),
        string_entropy_samples=entropies,
        hex_identifier_count=sum(1 for n in declared if _HEX_IDENT_RE.match(n)),
        source_chars=len(source),
    )
    obf = score_obfuscation(stats, config)
    issue_count = len(flags & config.issue_flags)
    return StaticFeatureSet(
        script_name=name,
        parse_ok=True,
        function_names=list(dict.fromkeys(scan.function_names)),
        anonymous_fn_count=scan.anonymous_fn_count,
        variable_names=list(dict.fromkeys(scan._declared)),
        flags=flags,
        string_findings=findings,
        obfuscation_score=obf,
        code_quality_score=quality_score(obf, issue_count, config),
        dangerous_api_count=scan.dangerous_api_count,
        invoked_apis=scan.invoked_apis,
        source_digest=script_digest(source),
    )


@dataclass(frozen=True)
class ScriptSummary:
    """Condensed per-script view rendered into the script-security prompt."""

    script_name: str
    obfuscated: bool
    security_issue_count: int
    invoked_apis: tuple[str, ...]
    defined_functions: tuple[str, ...]
    dangerous_api_count: int


def summarize_for_prompt(
    fs: StaticFeatureSet, max_apis: int = 30, config: Optional[AnalyzerConfig] = None
) -> ScriptSummary:
    config = config or default_config()
    return ScriptSummary(
        script_name=fs.script_name,
        obfuscated=fs.obfuscation_score >= config.obfuscated_threshold,
        security_issue_count=len(fs.flags & config.issue_flags),
        invoked_apis=tuple(fs.invoked_apis[:max_apis]),
        defined_functions=tuple(fs.function_names),
        dangerous_api_count=fs.dangerous_api_count,
    )
