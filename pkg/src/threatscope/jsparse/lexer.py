"""ECMAScript tokenizer.

Single pass over the source producing a flat token list. Template
literals are lexed as one token carrying their quasis and raw expression
substrings; the parser re-lexes the substrings. Regex-vs-division is
disambiguated with the usual previous-token heuristic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional


class LexError(SyntaxError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, col {col})")
        self.line = line
        self.col = col


# Reserved words always lexed as keywords. Contextual words (let, of,
# async, await, yield, get, set, static, as, from) lex as identifiers and
# are recognized by the parser where grammar allows.
KEYWORDS = frozenset(
    """break case catch class const continue debugger default delete do
    else enum export extends false finally for function if import in
    instanceof new null return super switch this throw true try typeof
    var void while with""".split()
)

PUNCTUATORS = [
    ">>>=",
    "...", "===", "!==", "**=", "<<=", ">>=", ">>>", "&&=", "||=", "??=",
    "=>", "**", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||",
    "??", "?.", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=",
    "{", "}", "(", ")", "[", "]", ";", ",", "<", ">", "+", "-", "*", "/",
    "%", "&", "|", "^", "!", "~", "?", ":", "=", ".", "@",
]
# longest-match order
PUNCTUATORS.sort(key=len, reverse=True)

_LINE_TERMINATORS = "\n\r  "

_ESCAPES = {
    "n": "\n",
    "t": "\t",
    "r": "\r",
    "b": "\b",
    "f": "\f",
    "v": "\v",
    "0": "\0",
}


@dataclass
class Token:
    type: str  # ident | keyword | privname | num | string | template | regex | punct | eof
    value: str
    start: int
    end: int
    line: int
    nl_before: bool = False
    extra: dict[str, Any] = field(default_factory=dict)

    def is_punct(self, *values: str) -> bool:
        return self.type == "punct" and self.value in values

    def is_keyword(self, *values: str) -> bool:
        return self.type == "keyword" and self.value in values

    def is_ident(self, *values: str) -> bool:
        return self.type == "ident" and (not values or self.value in values)


def _is_id_start(ch: str) -> bool:
    return ch.isalpha() or ch in "$_" or ord(ch) > 0x7F and ch.isidentifier()


def _is_id_part(ch: str) -> bool:
    return ch.isalnum() or ch in "$_‌‍" or ord(ch) > 0x7F and ("x" + ch).isidentifier()


class _Lexer:
    def __init__(self, source: str):
        self.src = source
        self.pos = 0
        self.line = 1
        self.nl_pending = False
        self.tokens: list[Token] = []
        self.paren_stack: list[bool] = []

    # -- helpers ------------------------------------------------------------

    def error(self, message: str) -> LexError:
        col = self.pos - self.src.rfind("\n", 0, self.pos)
        return LexError(message, self.line, col)

    def peek(self, offset: int = 0) -> str:
        i = self.pos + offset
        return self.src[i] if i < len(self.src) else ""

    def _emit(self, type_: str, start: int, text: str, **extra: Any) -> Token:
        tok = Token(
            type=type_,
            value=text,
            start=start,
            end=self.pos,
            line=self.line,
            nl_before=self.nl_pending,
            extra=extra,
        )
        self.nl_pending = False
        self.tokens.append(tok)
        # track whether a ')' closes an if/while/for/with condition so the
        # regex-vs-division heuristic can allow `if (x) /re/.test(y)`
        if tok.is_punct("("):
            before = self.tokens[-2] if len(self.tokens) >= 2 else None
            self.paren_stack.append(
                before is not None and before.is_keyword("if", "while", "for", "with")
            )
        elif tok.is_punct(")"):
            tok.extra["cond"] = self.paren_stack.pop() if self.paren_stack else False
        return tok

    def _prev_significant(self) -> Optional[Token]:
        return self.tokens[-1] if self.tokens else None

    # -- whitespace and comments ---------------------------------------------

    def skip_blanks(self) -> None:
        src, n = self.src, len(self.src)
        while self.pos < n:
            ch = src[self.pos]
            if ch in _LINE_TERMINATORS:
                if ch == "\r" and self.peek(1) == "\n":
                    self.pos += 1
                self.line += 1
                self.nl_pending = True
                self.pos += 1
            elif ch.isspace() or ch == "﻿":
                self.pos += 1
            elif ch == "/" and self.peek(1) == "/":
                while self.pos < n and src[self.pos] not in _LINE_TERMINATORS:
                    self.pos += 1
            elif ch == "/" and self.peek(1) == "*":
                end = src.find("*/", self.pos + 2)
                if end < 0:
                    raise self.error("unterminated block comment")
                chunk = src[self.pos : end]
                newlines = sum(chunk.count(t) for t in _LINE_TERMINATORS)
                if newlines:
                    self.line += newlines
                    self.nl_pending = True
                self.pos = end + 2
            elif ch == "<" and src.startswith("<!--", self.pos):
                # HTML-style comment, legal in classic scripts
                while self.pos < n and src[self.pos] not in _LINE_TERMINATORS:
                    self.pos += 1
            elif ch == "-" and src.startswith("-->", self.pos) and self.nl_pending:
                while self.pos < n and src[self.pos] not in _LINE_TERMINATORS:
                    self.pos += 1
            else:
                return

    # -- token scanners --------------------------------------------------------

    def scan_identifier(self) -> Token:
        start = self.pos
        src = self.src
        while self.pos < len(src) and (_is_id_part(src[self.pos]) or src.startswith("\\u", self.pos)):
            if src.startswith("\\u", self.pos):
                self.pos += 2
                if self.peek() == "{":
                    close = src.find("}", self.pos)
                    if close < 0:
                        raise self.error("bad unicode escape in identifier")
                    self.pos = close + 1
                else:
                    self.pos += 4
            else:
                self.pos += 1
        raw = src[start : self.pos]
        name = _decode_ident_escapes(raw)
        kind = "keyword" if name in KEYWORDS else "ident"
        return self._emit(kind, start, name)

    def scan_private_name(self) -> Token:
        start = self.pos
        self.pos += 1  # '#'
        if not (self.pos < len(self.src) and _is_id_start(self.src[self.pos])):
            raise self.error("expected identifier after '#'")
        while self.pos < len(self.src) and _is_id_part(self.src[self.pos]):
            self.pos += 1
        return self._emit("privname", start, self.src[start : self.pos])

    def scan_number(self) -> Token:
        start = self.pos
        src, n = self.src, len(self.src)

        def digits(allowed: str) -> None:
            while self.pos < n and (src[self.pos] in allowed or src[self.pos] == "_"):
                self.pos += 1

        if src[self.pos] == "0" and self.peek(1) in "xX":
            self.pos += 2
            digits("0123456789abcdefABCDEF")
        elif src[self.pos] == "0" and self.peek(1) in "oO":
            self.pos += 2
            digits("01234567")
        elif src[self.pos] == "0" and self.peek(1) in "bB":
            self.pos += 2
            digits("01")
        else:
            digits("0123456789")
            if self.peek() == "." :
                self.pos += 1
                digits("0123456789")
            if self.peek() in "eE":
                save = self.pos
                self.pos += 1
                if self.peek() in "+-":
                    self.pos += 1
                if self.peek().isdigit():
                    digits("0123456789")
                else:
                    self.pos = save
        if self.peek() == "n":  # BigInt suffix
            self.pos += 1
        raw = src[start : self.pos]
        return self._emit("num", start, raw, value=_numeric_value(raw))

    def scan_string(self) -> Token:
        start = self.pos
        quote = self.src[self.pos]
        self.pos += 1
        out: list[str] = []
        src, n = self.src, len(self.src)
        while True:
            if self.pos >= n:
                raise self.error("unterminated string literal")
            ch = src[self.pos]
            if ch == quote:
                self.pos += 1
                break
            if ch in "\n\r":
                raise self.error("newline in string literal")
            if ch in "  ":  # legal in strings since ES2019
                self.line += 1
            if ch == "\\":
                self.pos += 1
                out.append(self._read_escape())
            else:
                out.append(ch)
                self.pos += 1
        return self._emit("string", start, "".join(out), raw=src[start : self.pos])

    def _read_escape(self) -> str:
        src = self.src
        if self.pos >= len(src):
            raise self.error("bad escape at end of input")
        ch = src[self.pos]
        if ch in _LINE_TERMINATORS:  # line continuation
            if ch == "\r" and self.peek(1) == "\n":
                self.pos += 1
            self.line += 1
            self.pos += 1
            return ""
        self.pos += 1
        if ch in _ESCAPES:
            return _ESCAPES[ch]
        if ch == "x":
            hexpart = src[self.pos : self.pos + 2]
            self.pos += 2
            try:
                return chr(int(hexpart, 16))
            except ValueError:
                return "x" + hexpart
        if ch == "u":
            if self.peek() == "{":
                close = src.find("}", self.pos)
                if close < 0:
                    raise self.error("unterminated unicode escape")
                code = src[self.pos + 1 : close]
                self.pos = close + 1
                try:
                    return chr(int(code, 16))
                except (ValueError, OverflowError):
                    return ""
            hexpart = src[self.pos : self.pos + 4]
            self.pos += 4
            try:
                return chr(int(hexpart, 16))
            except ValueError:
                return "u" + hexpart
        return ch

    def scan_template(self) -> Token:
        """Lex a whole template literal, tracking ${...} nesting.

        Emits one token with cooked/raw quasis and the raw source of each
        substitution expression (parsed later by the parser).
        """
        start = self.pos
        self.pos += 1  # backtick
        src, n = self.src, len(self.src)
        quasis: list[dict[str, str]] = []
        exprs: list[str] = []
        raw_start = self.pos
        cooked: list[str] = []
        while True:
            if self.pos >= n:
                raise self.error("unterminated template literal")
            ch = src[self.pos]
            if ch == "`":
                quasis.append({"raw": src[raw_start : self.pos], "cooked": "".join(cooked)})
                self.pos += 1
                break
            if ch == "$" and self.peek(1) == "{":
                quasis.append({"raw": src[raw_start : self.pos], "cooked": "".join(cooked)})
                cooked = []
                self.pos += 2
                expr_start = self.pos
                self._skip_template_expr()
                exprs.append(src[expr_start : self.pos])
                self.pos += 1  # closing '}'
                raw_start = self.pos
                continue
            if ch == "\\":
                self.pos += 1
                cooked.append(self._read_escape())
                continue
            if ch in _LINE_TERMINATORS:
                self.line += 1
            cooked.append(ch)
            self.pos += 1
        return self._emit("template", start, src[start : self.pos], quasis=quasis, expressions=exprs)

    def _skip_template_expr(self) -> None:
        """Advance to the '}' closing a ${...}, honoring nested constructs."""
        src, n = self.src, len(self.src)
        depth = 0
        last_sig = ""  # last significant char, for regex-vs-division
        while self.pos < n:
            ch = src[self.pos]
            if ch == "{":
                depth += 1
            elif ch == "}":
                if depth == 0:
                    return
                depth -= 1
            elif ch == "/" and self.peek(1) not in "/*" and (
                last_sig == "" or last_sig in "(,=:[!&|?{};+-*%~^<>"
            ):
                self._skip_regex_chars()
                last_sig = "/"
                continue
            elif ch in "\"'":
                sub = _Lexer("")
                sub.src, sub.pos, sub.line = src, self.pos, self.line
                sub.scan_string()
                self.pos, self.line = sub.pos, sub.line
                continue
            elif ch == "`":
                sub = _Lexer("")
                sub.src, sub.pos, sub.line = src, self.pos, self.line
                sub.scan_template()
                self.pos, self.line = sub.pos, sub.line
                continue
            elif ch == "/" and self.peek(1) == "/":
                while self.pos < n and src[self.pos] not in _LINE_TERMINATORS:
                    self.pos += 1
                continue
            elif ch == "/" and self.peek(1) == "*":
                end = src.find("*/", self.pos + 2)
                if end < 0:
                    raise self.error("unterminated comment in template")
                self.pos = end + 2
                continue
            elif ch in _LINE_TERMINATORS:
                self.line += 1
            if not ch.isspace():
                last_sig = ch
            self.pos += 1
        raise self.error("unterminated template substitution")

    def _skip_regex_chars(self) -> None:
        """Char-level skip over a regex literal (template-substitution path)."""
        self.pos += 1  # leading '/'
        src, n = self.src, len(self.src)
        in_class = False
        while self.pos < n:
            ch = src[self.pos]
            if ch == "\\":
                self.pos += 2
                continue
            if ch in _LINE_TERMINATORS:
                raise self.error("newline in regular expression")
            if ch == "[":
                in_class = True
            elif ch == "]":
                in_class = False
            elif ch == "/" and not in_class:
                self.pos += 1
                while self.pos < n and _is_id_part(src[self.pos]):
                    self.pos += 1
                return
            self.pos += 1
        raise self.error("unterminated regular expression")

    def scan_regex(self) -> Token:
        start = self.pos
        self.pos += 1  # '/'
        src, n = self.src, len(self.src)
        in_class = False
        while True:
            if self.pos >= n:
                raise self.error("unterminated regular expression")
            ch = src[self.pos]
            if ch == "\\":
                self.pos += 2
                continue
            if ch in _LINE_TERMINATORS:
                raise self.error("newline in regular expression")
            if ch == "[":
                in_class = True
            elif ch == "]":
                in_class = False
            elif ch == "/" and not in_class:
                self.pos += 1
                break
            self.pos += 1
        while self.pos < n and _is_id_part(src[self.pos]):
            self.pos += 1
        return self._emit("regex", start, src[start : self.pos])

    def _regex_allowed(self) -> bool:
        prev = self._prev_significant()
        if prev is None:
            return True
        if prev.type in ("num", "string", "template", "regex", "privname"):
            return False
        if prev.type == "ident":
            return False
        if prev.type == "keyword":
            return prev.value not in ("this", "super", "true", "false", "null")
        # punct: after a closing paren/bracket a '/' is division, except a
        # paren closing an if/while/for/with condition; after a closing
        # brace we guess block end, where a regex may start.
        if prev.value == ")":
            return bool(prev.extra.get("cond"))
        return prev.value not in ("]", "++", "--")

    # -- main loop -------------------------------------------------------------

    def run(self) -> list[Token]:
        src, n = self.src, len(self.src)
        while True:
            self.skip_blanks()
            if self.pos >= n:
                self._emit("eof", self.pos, "")
                return self.tokens
            ch = src[self.pos]
            if _is_id_start(ch) or src.startswith("\\u", self.pos):
                self.scan_identifier()
            elif ch == "#":
                if self.pos == 0 and self.peek(1) == "!":  # shebang
                    while self.pos < n and src[self.pos] not in _LINE_TERMINATORS:
                        self.pos += 1
                    continue
                self.scan_private_name()
            elif ch.isdigit() or (ch == "." and self.peek(1).isdigit()):
                self.scan_number()
            elif ch in "\"'":
                self.scan_string()
            elif ch == "`":
                self.scan_template()
            elif ch == "/" and self._regex_allowed():
                self.scan_regex()
            else:
                for punct in PUNCTUATORS:
                    if src.startswith(punct, self.pos):
                        # `x?.5:y` is a conditional with a decimal, not chaining
                        if punct == "?." and self.peek(2).isdigit():
                            punct = "?"
                        start = self.pos
                        self.pos += len(punct)
                        self._emit("punct", start, punct)
                        break
                else:
                    raise self.error(f"unexpected character {ch!r}")


def _decode_ident_escapes(raw: str) -> str:
    if "\\u" not in raw:
        return raw
    out: list[str] = []
    i = 0
    while i < len(raw):
        if raw.startswith("\\u{", i):
            close = raw.find("}", i)
            out.append(chr(int(raw[i + 3 : close], 16)))
            i = close + 1
        elif raw.startswith("\\u", i):
            out.append(chr(int(raw[i + 2 : i + 6], 16)))
            i += 6
        else:
            out.append(raw[i])
            i += 1
    return "".join(out)


def _numeric_value(raw: str) -> float:
    text = raw.replace("_", "").rstrip("n")
    try:
        if text[:2].lower() in ("0x", "0o", "0b"):
            return float(int(text, 0))
        if len(text) > 1 and text[0] == "0" and text[1:].isdigit():
            return float(int(text, 8))  # legacy octal
        return float(text)
    except (ValueError, IndexError):
        return float("nan")


def tokenize(source: str) -> list[Token]:
    """Tokenize source, returning a list ending with an EOF token."""
    return _Lexer(source).run()
