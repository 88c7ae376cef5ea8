"""Pluggable inference backends and strict-JSON verdict parsing."""

from .adapter import (
    BackendDescriptor,
    BackendError,
    BackendTimeout,
    BackendTransportError,
    VerdictDocument,
    VerdictParseError,
    VerdictValidationError,
    generate,
    parse_verdict,
    serialize_verdict,
)
from .mock import MockRuleSet, mock_generate

__all__ = [
    "BackendDescriptor",
    "BackendError",
    "BackendTimeout",
    "BackendTransportError",
    "VerdictDocument",
    "VerdictParseError",
    "VerdictValidationError",
    "generate",
    "parse_verdict",
    "serialize_verdict",
    "MockRuleSet",
    "mock_generate",
]
