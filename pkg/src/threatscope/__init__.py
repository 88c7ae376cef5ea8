"""threatscope: offline-capable URL threat analysis engine.

Static ECMAScript analysis, instrumented sandbox execution, structured
prompt construction, pluggable zero-shot LLM inference, and weighted risk
aggregation, plus an evaluation harness for desk-scale metric runs.
"""

__version__ = "0.1.0"
