"""Instrumented execution of page scripts in an embedded engine.

The engine side lives in assets/ (runner, DOM emulation, shim); this
package drives it, normalizes the trace, and derives DOM metadata and
visible text from the serialized final DOM.
"""

from .engine import SandboxConfig, SandboxError, SandboxResult, execute_page, node_available
from .domstate import element_hidden, extract_dom_metadata, extract_visible_text
from .trace import (
    ApiCallSummary,
    COUNTABLE_KINDS,
    summarize_trace,
    truncate_trace,
)

__all__ = [
    "SandboxConfig",
    "SandboxError",
    "SandboxResult",
    "execute_page",
    "node_available",
    "element_hidden",
    "extract_dom_metadata",
    "extract_visible_text",
    "ApiCallSummary",
    "COUNTABLE_KINDS",
    "summarize_trace",
    "truncate_trace",
]
