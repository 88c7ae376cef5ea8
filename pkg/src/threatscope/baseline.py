"""Lexical URL baseline: a trainable bagged-tree ensemble with a shipped
rule fallback.

Stands in for a classical URL classifier so the evaluation harness can
compare the full pipeline against a features-only approach. Training data
is synthetic and shipped in-repo; the rule fallback needs no training.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Sequence

from sklearn.ensemble import RandomForestClassifier

# seeded from the documented lists; editable via the constructor
SUSPICIOUS_SUBSTRINGS = (
    "login",
    "l0gin",
    "verify",
    "secure",
    "account",
    "update",
    "signin",
    "confirm",
)

_DEFANG_REPLACEMENTS = (
    ("hxxps", "https"),
    ("hxxp", "http"),
    ("[.]", "."),
    ("(.)", "."),
    ("[:]", ":"),
)


class BaselineError(Exception):
    """Baseline cannot classify (untrained and fallback disabled)."""


@dataclass(frozen=True)
class LexicalFeatureVector:
    url_length: int
    dot_count: int
    hyphen_count: int
    has_suspicious_substring: bool
    subdomain_depth: int
    path_length: int
    form_count: int
    has_password_field: bool
    digit_ratio: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.digit_ratio <= 1.0:
            raise ValueError(f"digit_ratio out of range: {self.digit_ratio}")

    def as_row(self) -> list[float]:
        return [
            float(self.url_length),
            float(self.dot_count),
            float(self.hyphen_count),
            1.0 if self.has_suspicious_substring else 0.0,
            float(self.subdomain_depth),
            float(self.path_length),
            float(self.form_count),
            1.0 if self.has_password_field else 0.0,
            self.digit_ratio,
        ]


def refang(url: str) -> str:
    """Undo common defanging (hxxp, bracketed dots) before featurizing."""
    for needle, replacement in _DEFANG_REPLACEMENTS:
        url = url.replace(needle, replacement)
    return url


_HOST_RE = re.compile(r"^[a-z][a-z0-9+.-]*://([^/?#]+)", re.IGNORECASE)


def extract_lexical_features(
    url: str,
    form_count: int = 0,
    has_password_field: bool = False,
    substrings: Sequence[str] = SUSPICIOUS_SUBSTRINGS,
) -> LexicalFeatureVector:
    url = refang(url.strip())
    lowered = url.lower()
    host_match = _HOST_RE.match(url)
    host = host_match.group(1).split("@")[-1].split(":")[0] if host_match else ""
    after_host = url[host_match.end():] if host_match else url
    path = after_host.split("?")[0].split("#")[0]
    labels = [p for p in host.split(".") if p]
    digits = sum(1 for c in url if c.isdigit())
    return LexicalFeatureVector(
        url_length=len(url),
        dot_count=url.count("."),
        hyphen_count=url.count("-"),
        has_suspicious_substring=any(s in lowered for s in substrings),
        subdomain_depth=max(0, len(labels) - 2),
        path_length=len(path),
        form_count=form_count,
        has_password_field=has_password_field,
        digit_ratio=digits / len(url) if url else 0.0,
    )


# ---------------------------------------------------------------------------
# Rule fallback
# ---------------------------------------------------------------------------

RULE_THRESHOLD = 3


def _matched_substrings(url: str, substrings: Sequence[str]) -> list[str]:
    lowered = refang(url).lower()
    return [s for s in substrings if s in lowered]


def rule_score(url: str, v: LexicalFeatureVector, substrings: Sequence[str]) -> int:
    """Documented point rules; >= RULE_THRESHOLD classifies malicious."""
    points = 0
    matched = _matched_substrings(url, substrings)
    leet = [s for s in matched if any(c.isdigit() for c in s)]
    if leet:
        points += 2  # digit-for-letter variants are a strong phish tell
    elif matched:
        points += 1
    if v.path_length > 25:
        points += 1
    if v.hyphen_count >= 1:
        points += 1
    if v.subdomain_depth >= 2:
        points += 1
    if v.digit_ratio > 0.2:
        points += 1
    if v.url_length > 75:
        points += 1
    if v.has_password_field:
        points += 2
    if v.form_count >= 3:
        points += 1
    return points


# ---------------------------------------------------------------------------
# Trainable ensemble
# ---------------------------------------------------------------------------


class BaselineModel:
    """Bagged decision trees over the lexical features, with rule fallback."""

    def __init__(
        self,
        substrings: Sequence[str] = SUSPICIOUS_SUBSTRINGS,
        rule_fallback: bool = True,
        seed: int = 0,
    ):
        self.substrings = tuple(substrings)
        self.rule_fallback = rule_fallback
        self.seed = seed
        self._forest: Optional[RandomForestClassifier] = None

    @property
    def trained(self) -> bool:
        return self._forest is not None

    def fit(self, vectors: Iterable[LexicalFeatureVector], labels: Iterable[str]) -> "BaselineModel":
        rows = [v.as_row() for v in vectors]
        y = [1 if label == "malicious" else 0 for label in labels]
        forest = RandomForestClassifier(n_estimators=25, random_state=self.seed)
        forest.fit(rows, y)
        self._forest = forest
        return self

    def fit_csv(self, path: str | Path) -> "BaselineModel":
        vectors, labels = load_training_csv(path, substrings=self.substrings)
        return self.fit(vectors, labels)

    def classify(self, v: LexicalFeatureVector, url: str = "") -> str:
        if self._forest is not None:
            prediction = self._forest.predict([v.as_row()])[0]
            return "malicious" if prediction == 1 else "benign"
        if not self.rule_fallback:
            raise BaselineError("model is untrained and the rule fallback is disabled")
        return (
            "malicious"
            if rule_score(url, v, self.substrings) >= RULE_THRESHOLD
            else "benign"
        )

    def classify_url(self, url: str, form_count: int = 0, has_password_field: bool = False) -> str:
        v = extract_lexical_features(
            url, form_count=form_count, has_password_field=has_password_field,
            substrings=self.substrings,
        )
        return self.classify(v, url=url)


def load_training_csv(
    path: str | Path, substrings: Sequence[str] = SUSPICIOUS_SUBSTRINGS
) -> tuple[list[LexicalFeatureVector], list[str]]:
    """Rows: url,label[,form_count,has_password_field]."""
    vectors: list[LexicalFeatureVector] = []
    labels: list[str] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            vectors.append(
                extract_lexical_features(
                    row["url"],
                    form_count=int(row.get("form_count") or 0),
                    has_password_field=(row.get("has_password_field") or "").lower()
                    in ("1", "true", "yes"),
                    substrings=substrings,
                )
            )
            labels.append(row["label"].strip())
    return vectors, labels


def shipped_training_csv() -> Path:
    return Path(str(resources.files("threatscope").joinpath("fixtures/baseline_training.csv")))
