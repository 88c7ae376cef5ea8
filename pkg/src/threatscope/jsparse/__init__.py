"""Self-contained ECMAScript tokenizer and parser.

Produces ESTree-style dict nodes for the static analyzer. Coverage targets
the language as found in real page scripts (ES2020-ish expressions,
classes, template literals, optional chaining); anything it cannot parse
raises ParseError, which callers treat as a data state with a regex
fallback, not a failure.
"""

from .lexer import LexError, Token, tokenize
from .nodes import walk
from .parser import ParseError, parse

__all__ = ["tokenize", "parse", "walk", "Token", "LexError", "ParseError"]
