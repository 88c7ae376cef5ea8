"""Prompt rendering: evidence bundle -> the five analysis prompts."""

from .builder import (
    DEFAULT_BUDGET_TOKENS,
    PROMPT_KINDS,
    PromptBuildError,
    PromptBudgetError,
    RenderedPrompt,
    ResponseSchema,
    build,
    build_all,
    estimate_tokens,
    load_schema,
    register_tokenizer,
)

__all__ = [
    "DEFAULT_BUDGET_TOKENS",
    "PROMPT_KINDS",
    "PromptBuildError",
    "PromptBudgetError",
    "RenderedPrompt",
    "ResponseSchema",
    "build",
    "build_all",
    "estimate_tokens",
    "load_schema",
    "register_tokenizer",
]
