"""Recursive-descent ECMAScript parser over the lexer's token stream.

Produces ESTree-style dict nodes. Grammar coverage is the practical
ES2020 subset (see package docstring); unsupported syntax raises
ParseError and the caller falls back to regex scanning.
"""

from __future__ import annotations

from typing import Optional

from .lexer import Token, tokenize

Node = dict


class ParseError(SyntaxError):
    def __init__(self, message: str, line: int):
        super().__init__(f"{message} (line {line})")
        self.line = line


_ASSIGN_OPS = frozenset(
    "= += -= *= /= %= **= <<= >>= >>>= &= |= ^= &&= ||= ??=".split()
)

# binary operator precedence; higher binds tighter
_BINARY_PREC = {
    "??": 1,
    "||": 2,
    "&&": 3,
    "|": 4,
    "^": 5,
    "&": 6,
    "==": 7, "!=": 7, "===": 7, "!==": 7,
    "<": 8, ">": 8, "<=": 8, ">=": 8, "in": 8, "instanceof": 8,
    "<<": 9, ">>": 9, ">>>": 9,
    "+": 10, "-": 10,
    "*": 11, "/": 11, "%": 11,
    "**": 12,
}

_UNARY_OPS = frozenset(["+", "-", "~", "!"])


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0
        self.no_in = False

    # ------------------------------------------------------------------ cursor

    @property
    def cur(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        j = min(self.i + k, len(self.tokens) - 1)
        return self.tokens[j]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        if self.i < len(self.tokens) - 1:
            self.i += 1
        return tok

    def error(self, message: str) -> ParseError:
        return ParseError(f"{message}, got {self.cur.type} {self.cur.value!r}", self.cur.line)

    def eat_punct(self, value: str) -> bool:
        if self.cur.is_punct(value):
            self.advance()
            return True
        return False

    def expect_punct(self, value: str) -> Token:
        if not self.cur.is_punct(value):
            raise self.error(f"expected {value!r}")
        return self.advance()

    def eat_keyword(self, value: str) -> bool:
        if self.cur.is_keyword(value):
            self.advance()
            return True
        return False

    def expect_keyword(self, value: str) -> Token:
        if not self.cur.is_keyword(value):
            raise self.error(f"expected keyword {value!r}")
        return self.advance()

    def eat_contextual(self, word: str) -> bool:
        if self.cur.is_ident(word):
            self.advance()
            return True
        return False

    def _find_matching_paren(self, start: int) -> int:
        """Token index of the ')' matching the '(' at token index start."""
        depth = 0
        j = start
        while j < len(self.tokens):
            tok = self.tokens[j]
            if tok.is_punct("(", "[", "{"):
                depth += 1
            elif tok.is_punct(")", "]", "}"):
                depth -= 1
                if depth == 0:
                    return j
            elif tok.type == "eof":
                break
            j += 1
        raise ParseError("unbalanced parentheses", self.tokens[start].line)

    # ------------------------------------------------------------------ program

    def parse_program(self) -> Node:
        body: list[Node] = []
        while self.cur.type != "eof":
            body.append(self.parse_statement())
        return {"type": "Program", "body": body}

    # --------------------------------------------------------------- statements

    def parse_statement(self) -> Node:
        tok = self.cur
        if tok.is_punct("{"):
            return self.parse_block()
        if tok.is_punct(";"):
            self.advance()
            return {"type": "EmptyStatement"}
        if tok.type == "keyword":
            handler = {
                "var": self.parse_var_statement,
                "const": self.parse_var_statement,
                "function": self.parse_function_declaration,
                "class": lambda: self.parse_class(declaration=True),
                "if": self.parse_if,
                "for": self.parse_for,
                "while": self.parse_while,
                "do": self.parse_do_while,
                "switch": self.parse_switch,
                "try": self.parse_try,
                "return": self.parse_return,
                "throw": self.parse_throw,
                "break": lambda: self.parse_break_continue("BreakStatement"),
                "continue": lambda: self.parse_break_continue("ContinueStatement"),
                "debugger": self.parse_debugger,
                "with": self.parse_with,
                "import": self.parse_import,
                "export": self.parse_export,
            }.get(tok.value)
            if handler is not None:
                return handler()
        if tok.is_ident("let") and (
            self.peek().type in ("ident", "privname")
            or self.peek().is_punct("[", "{")
            or self.peek().is_ident()
        ):
            return self.parse_var_statement()
        if tok.is_ident("async") and self.peek().is_keyword("function") and not self.peek().nl_before:
            return self.parse_function_declaration()
        if tok.type == "ident" and self.peek().is_punct(":"):
            label = self.advance().value
            self.advance()
            return {"type": "LabeledStatement", "label": label, "body": self.parse_statement()}
        expr = self.parse_expression()
        self.consume_semicolon()
        return {"type": "ExpressionStatement", "expression": expr}

    def parse_block(self) -> Node:
        self.expect_punct("{")
        # a block inside an expression is always a function/class body, so
        # the for-init no_in restriction never crosses it
        saved, self.no_in = self.no_in, False
        body: list[Node] = []
        while not self.cur.is_punct("}"):
            if self.cur.type == "eof":
                raise self.error("unterminated block")
            body.append(self.parse_statement())
        self.advance()
        self.no_in = saved
        return {"type": "BlockStatement", "body": body}

    def consume_semicolon(self) -> None:
        if self.eat_punct(";"):
            return
        # automatic semicolon insertion
        if self.cur.is_punct("}") or self.cur.type == "eof" or self.cur.nl_before:
            return
        raise self.error("expected ';'")

    def parse_var_statement(self) -> Node:
        kind = self.advance().value  # var | let | const
        declarations = [self.parse_declarator()]
        while self.eat_punct(","):
            declarations.append(self.parse_declarator())
        self.consume_semicolon()
        return {"type": "VariableDeclaration", "kind": kind, "declarations": declarations}

    def parse_declarator(self) -> Node:
        target = self.parse_binding_target()
        init = None
        if self.eat_punct("="):
            init = self.parse_assignment()
        return {"type": "VariableDeclarator", "id": target, "init": init}

    def parse_binding_target(self) -> Node:
        if self.cur.is_punct("["):
            return self.parse_array_pattern()
        if self.cur.is_punct("{"):
            return self.parse_object_pattern()
        return self.parse_identifier_name()

    def parse_identifier_name(self) -> Node:
        tok = self.cur
        if tok.type == "ident" or tok.is_keyword("this"):
            self.advance()
            if tok.is_keyword("this"):
                return {"type": "ThisExpression"}
            return {"type": "Identifier", "name": tok.value}
        # yield/await used as plain names in sloppy-mode scripts
        if tok.type == "keyword" and tok.value in ("yield",):
            self.advance()
            return {"type": "Identifier", "name": tok.value}
        raise self.error("expected identifier")

    def parse_array_pattern(self) -> Node:
        self.expect_punct("[")
        elements: list[Optional[Node]] = []
        while not self.cur.is_punct("]"):
            if self.cur.is_punct(","):
                self.advance()
                elements.append(None)
                continue
            if self.eat_punct("..."):
                elements.append({"type": "RestElement", "argument": self.parse_binding_target()})
            else:
                elements.append(self.parse_binding_element())
            if not self.cur.is_punct("]"):
                self.expect_punct(",")
        self.advance()
        return {"type": "ArrayPattern", "elements": elements}

    def parse_object_pattern(self) -> Node:
        self.expect_punct("{")
        properties: list[Node] = []
        while not self.cur.is_punct("}"):
            if self.eat_punct("..."):
                properties.append({"type": "RestElement", "argument": self.parse_binding_target()})
            else:
                key, computed = self.parse_property_key()
                if self.eat_punct(":"):
                    value = self.parse_binding_element()
                    shorthand = False
                else:
                    value = key
                    if self.eat_punct("="):
                        value = {
                            "type": "AssignmentPattern",
                            "left": key,
                            "right": self.parse_assignment(),
                        }
                    shorthand = True
                properties.append(
                    {
                        "type": "Property",
                        "key": key,
                        "value": value,
                        "computed": computed,
                        "shorthand": shorthand,
                        "kind": "init",
                    }
                )
            if not self.cur.is_punct("}"):
                self.expect_punct(",")
        self.advance()
        return {"type": "ObjectPattern", "properties": properties}

    def parse_binding_element(self) -> Node:
        target = self.parse_binding_target()
        if self.eat_punct("="):
            return {"type": "AssignmentPattern", "left": target, "right": self.parse_assignment()}
        return target

    def parse_function_declaration(self) -> Node:
        node = self.parse_function(require_name=True)
        node["type"] = "FunctionDeclaration"
        return node

    def parse_function(self, require_name: bool) -> Node:
        is_async = self.eat_contextual("async")
        self.expect_keyword("function")
        generator = self.eat_punct("*")
        name = None
        if self.cur.type == "ident":
            name = self.advance().value
        elif require_name:
            raise self.error("function declaration needs a name")
        params = self.parse_params()
        body = self.parse_block()
        return {
            "type": "FunctionExpression",
            "id": name,
            "params": params,
            "body": body,
            "async": is_async,
            "generator": generator,
        }

    def parse_params(self) -> list[Node]:
        self.expect_punct("(")
        params: list[Node] = []
        while not self.cur.is_punct(")"):
            if self.eat_punct("..."):
                params.append({"type": "RestElement", "argument": self.parse_binding_target()})
            else:
                params.append(self.parse_binding_element())
            if not self.cur.is_punct(")"):
                self.expect_punct(",")
        self.advance()
        return params

    def parse_if(self) -> Node:
        self.expect_keyword("if")
        self.expect_punct("(")
        test = self.parse_expression()
        self.expect_punct(")")
        consequent = self.parse_statement()
        alternate = self.parse_statement() if self.eat_keyword("else") else None
        return {"type": "IfStatement", "test": test, "consequent": consequent, "alternate": alternate}

    def parse_for(self) -> Node:
        self.expect_keyword("for")
        is_await = self.eat_contextual("await")
        self.expect_punct("(")
        init: Optional[Node] = None
        if not self.cur.is_punct(";"):
            if self.cur.is_keyword("var", "const") or (
                self.cur.is_ident("let")
                and (self.peek().type == "ident" or self.peek().is_punct("[", "{"))
            ):
                kind = self.advance().value
                declarator = self.parse_declarator_no_in()
                if self.cur.is_keyword("in") or self.cur.is_ident("of"):
                    left = {"type": "VariableDeclaration", "kind": kind, "declarations": [declarator]}
                    return self._finish_for_in_of(left, is_await)
                declarations = [declarator]
                while self.eat_punct(","):
                    declarations.append(self.parse_declarator_no_in())
                init = {"type": "VariableDeclaration", "kind": kind, "declarations": declarations}
            else:
                init = self.parse_expression_no_in()
                if self.cur.is_keyword("in") or self.cur.is_ident("of"):
                    return self._finish_for_in_of(init, is_await)
        self.expect_punct(";")
        test = None if self.cur.is_punct(";") else self.parse_expression()
        self.expect_punct(";")
        update = None if self.cur.is_punct(")") else self.parse_expression()
        self.expect_punct(")")
        body = self.parse_statement()
        return {"type": "ForStatement", "init": init, "test": test, "update": update, "body": body}

    def parse_declarator_no_in(self) -> Node:
        saved, self.no_in = self.no_in, True
        try:
            return self.parse_declarator()
        finally:
            self.no_in = saved

    def parse_expression_no_in(self) -> Node:
        saved, self.no_in = self.no_in, True
        try:
            return self.parse_expression()
        finally:
            self.no_in = saved

    def _finish_for_in_of(self, left: Node, is_await: bool) -> Node:
        if self.eat_keyword("in"):
            type_ = "ForInStatement"
        else:
            self.advance()  # 'of'
            type_ = "ForOfStatement"
        right = self.parse_assignment() if type_ == "ForOfStatement" else self.parse_expression()
        self.expect_punct(")")
        body = self.parse_statement()
        node = {"type": type_, "left": left, "right": right, "body": body}
        if is_await:
            node["await"] = True
        return node

    def parse_while(self) -> Node:
        self.expect_keyword("while")
        self.expect_punct("(")
        test = self.parse_expression()
        self.expect_punct(")")
        return {"type": "WhileStatement", "test": test, "body": self.parse_statement()}

    def parse_do_while(self) -> Node:
        self.expect_keyword("do")
        body = self.parse_statement()
        self.expect_keyword("while")
        self.expect_punct("(")
        test = self.parse_expression()
        self.expect_punct(")")
        self.eat_punct(";")
        return {"type": "DoWhileStatement", "body": body, "test": test}

    def parse_switch(self) -> Node:
        self.expect_keyword("switch")
        self.expect_punct("(")
        discriminant = self.parse_expression()
        self.expect_punct(")")
        self.expect_punct("{")
        cases: list[Node] = []
        while not self.cur.is_punct("}"):
            if self.eat_keyword("case"):
                test = self.parse_expression()
            else:
                self.expect_keyword("default")
                test = None
            self.expect_punct(":")
            consequent: list[Node] = []
            while not (
                self.cur.is_punct("}") or self.cur.is_keyword("case", "default")
            ):
                if self.cur.type == "eof":
                    raise self.error("unterminated switch")
                consequent.append(self.parse_statement())
            cases.append({"type": "SwitchCase", "test": test, "consequent": consequent})
        self.advance()
        return {"type": "SwitchStatement", "discriminant": discriminant, "cases": cases}

    def parse_try(self) -> Node:
        self.expect_keyword("try")
        block = self.parse_block()
        handler = None
        if self.eat_keyword("catch"):
            param = None
            if self.eat_punct("("):
                param = self.parse_binding_target()
                self.expect_punct(")")
            handler = {"type": "CatchClause", "param": param, "body": self.parse_block()}
        finalizer = self.parse_block() if self.eat_keyword("finally") else None
        if handler is None and finalizer is None:
            raise self.error("try without catch or finally")
        return {"type": "TryStatement", "block": block, "handler": handler, "finalizer": finalizer}

    def parse_return(self) -> Node:
        self.expect_keyword("return")
        argument = None
        if not (self.cur.is_punct(";", "}") or self.cur.type == "eof" or self.cur.nl_before):
            argument = self.parse_expression()
        self.consume_semicolon()
        return {"type": "ReturnStatement", "argument": argument}

    def parse_throw(self) -> Node:
        self.expect_keyword("throw")
        if self.cur.nl_before:
            raise self.error("newline after throw")
        argument = self.parse_expression()
        self.consume_semicolon()
        return {"type": "ThrowStatement", "argument": argument}

    def parse_break_continue(self, type_: str) -> Node:
        self.advance()
        label = None
        if self.cur.type == "ident" and not self.cur.nl_before:
            label = self.advance().value
        self.consume_semicolon()
        return {"type": type_, "label": label}

    def parse_debugger(self) -> Node:
        self.expect_keyword("debugger")
        self.consume_semicolon()
        return {"type": "DebuggerStatement"}

    def parse_with(self) -> Node:
        self.expect_keyword("with")
        self.expect_punct("(")
        obj = self.parse_expression()
        self.expect_punct(")")
        return {"type": "WithStatement", "object": obj, "body": self.parse_statement()}

    # ---------------------------------------------------------------- modules

    def parse_import(self) -> Node:
        # dynamic import or import.meta in expression position
        if self.peek().is_punct("(", "."):
            expr = self.parse_expression()
            self.consume_semicolon()
            return {"type": "ExpressionStatement", "expression": expr}
        self.expect_keyword("import")
        specifiers: list[Node] = []
        if self.cur.type == "string":
            source = self.advance().value
            self._eat_import_attributes()
            self.consume_semicolon()
            return {"type": "ImportDeclaration", "specifiers": [], "source": source}
        while True:
            if self.cur.type == "ident":
                specifiers.append({"type": "ImportDefaultSpecifier", "local": self.advance().value})
            elif self.eat_punct("*"):
                if not self.eat_contextual("as"):
                    raise self.error("expected 'as' after import *")
                specifiers.append({"type": "ImportNamespaceSpecifier", "local": self.advance().value})
            elif self.cur.is_punct("{"):
                self.advance()
                while not self.cur.is_punct("}"):
                    imported = self.advance().value
                    local = imported
                    if self.eat_contextual("as"):
                        local = self.advance().value
                    specifiers.append(
                        {"type": "ImportSpecifier", "imported": imported, "local": local}
                    )
                    if not self.cur.is_punct("}"):
                        self.expect_punct(",")
                self.advance()
            if not self.eat_punct(","):
                break
        if not self.eat_contextual("from"):
            raise self.error("expected 'from' in import")
        if self.cur.type != "string":
            raise self.error("expected module source string")
        source = self.advance().value
        self._eat_import_attributes()
        self.consume_semicolon()
        return {"type": "ImportDeclaration", "specifiers": specifiers, "source": source}

    def _eat_import_attributes(self) -> None:
        # `with { type: 'json' }` / legacy `assert { ... }`; parsed, unused
        if self.cur.is_keyword("with") or self.cur.is_ident("assert"):
            self.advance()
            self.parse_object_literal()

    def parse_export(self) -> Node:
        self.expect_keyword("export")
        if self.eat_keyword("default"):
            declaration: Node
            if self.cur.is_keyword("function") or (
                self.cur.is_ident("async") and self.peek().is_keyword("function")
            ):
                declaration = self.parse_function(require_name=False)
            elif self.cur.is_keyword("class"):
                declaration = self.parse_class(declaration=False)
            else:
                declaration = self.parse_assignment()
                self.consume_semicolon()
            return {"type": "ExportDefaultDeclaration", "declaration": declaration}
        if self.eat_punct("*"):
            if self.eat_contextual("as"):
                self.advance()
            if not self.eat_contextual("from"):
                raise self.error("expected 'from' in export *")
            source = self.advance().value
            self._eat_import_attributes()
            self.consume_semicolon()
            return {"type": "ExportAllDeclaration", "source": source}
        if self.cur.is_punct("{"):
            self.advance()
            specifiers: list[Node] = []
            while not self.cur.is_punct("}"):
                local = self.advance().value
                exported = local
                if self.eat_contextual("as"):
                    exported = self.advance().value
                specifiers.append({"type": "ExportSpecifier", "local": local, "exported": exported})
                if not self.cur.is_punct("}"):
                    self.expect_punct(",")
            self.advance()
            source = None
            if self.eat_contextual("from"):
                source = self.advance().value
                self._eat_import_attributes()
            self.consume_semicolon()
            return {"type": "ExportNamedDeclaration", "declaration": None,
                    "specifiers": specifiers, "source": source}
        declaration = self.parse_statement()
        return {"type": "ExportNamedDeclaration", "declaration": declaration,
                "specifiers": [], "source": None}

    # ------------------------------------------------------------- expressions

    def parse_expression(self) -> Node:
        expr = self.parse_assignment()
        if self.cur.is_punct(","):
            expressions = [expr]
            while self.eat_punct(","):
                expressions.append(self.parse_assignment())
            return {"type": "SequenceExpression", "expressions": expressions}
        return expr

    def parse_assignment(self) -> Node:
        # arrow functions need lookahead before normal expression parsing
        arrow = self.try_parse_arrow()
        if arrow is not None:
            return arrow
        if self.cur.is_ident("yield") or (self.cur.type == "keyword" and self.cur.value == "yield"):
            return self.parse_yield()
        left = self.parse_conditional()
        if self.cur.type == "punct" and self.cur.value in _ASSIGN_OPS:
            op = self.advance().value
            right = self.parse_assignment()
            return {"type": "AssignmentExpression", "operator": op, "left": left, "right": right}
        return left

    def parse_yield(self) -> Node:
        self.advance()
        delegate = self.eat_punct("*")
        argument = None
        if not (
            self.cur.nl_before
            or self.cur.is_punct(")", "]", "}", ",", ";", ":")
            or self.cur.type == "eof"
        ):
            argument = self.parse_assignment()
        return {"type": "YieldExpression", "argument": argument, "delegate": delegate}

    def try_parse_arrow(self) -> Optional[Node]:
        tok = self.cur
        is_async = False
        start = self.i
        if tok.is_ident("async") and not self.peek().nl_before:
            if self.peek().type == "ident" and self.peek(2).is_punct("=>"):
                is_async = True
                self.advance()
                tok = self.cur
            elif self.peek().is_punct("("):
                close = self._find_matching_paren(self.i + 1)
                if self.tokens[min(close + 1, len(self.tokens) - 1)].is_punct("=>"):
                    is_async = True
                    self.advance()
                    tok = self.cur
        if tok.type == "ident" and self.peek().is_punct("=>") and not self.peek().nl_before:
            param = {"type": "Identifier", "name": self.advance().value}
            self.advance()  # =>
            return self._finish_arrow([param], is_async)
        if tok.is_punct("("):
            close = self._find_matching_paren(self.i)
            after = self.tokens[min(close + 1, len(self.tokens) - 1)]
            if after.is_punct("=>") and not after.nl_before:
                params = self.parse_params()
                self.expect_punct("=>")
                return self._finish_arrow(params, is_async)
        self.i = start
        return None

    def _finish_arrow(self, params: list[Node], is_async: bool) -> Node:
        if self.cur.is_punct("{"):
            body = self.parse_block()
        else:
            body = self.parse_assignment()
        return {
            "type": "ArrowFunctionExpression",
            "params": params,
            "body": body,
            "async": is_async,
        }

    def parse_conditional(self) -> Node:
        test = self.parse_binary(0)
        if self.eat_punct("?"):
            saved, self.no_in = self.no_in, False
            consequent = self.parse_assignment()
            self.no_in = saved
            self.expect_punct(":")
            alternate = self.parse_assignment()
            return {
                "type": "ConditionalExpression",
                "test": test,
                "consequent": consequent,
                "alternate": alternate,
            }
        return test

    def parse_binary(self, min_prec: int) -> Node:
        left = self.parse_unary()
        while True:
            tok = self.cur
            op = None
            if tok.type == "punct" and tok.value in _BINARY_PREC:
                op = tok.value
            elif tok.is_keyword("in") and not self.no_in:
                op = "in"
            elif tok.is_keyword("instanceof"):
                op = "instanceof"
            if op is None:
                return left
            prec = _BINARY_PREC[op]
            if prec < min_prec:
                return left
            self.advance()
            # ** is right-associative
            right = self.parse_binary(prec if op == "**" else prec + 1)
            node_type = "LogicalExpression" if op in ("&&", "||", "??") else "BinaryExpression"
            left = {"type": node_type, "operator": op, "left": left, "right": right}

    def parse_unary(self) -> Node:
        tok = self.cur
        if tok.is_keyword("delete", "void", "typeof"):
            op = self.advance().value
            return {"type": "UnaryExpression", "operator": op, "argument": self.parse_unary()}
        if tok.type == "punct" and tok.value in _UNARY_OPS:
            op = self.advance().value
            return {"type": "UnaryExpression", "operator": op, "argument": self.parse_unary()}
        if tok.is_punct("++", "--"):
            op = self.advance().value
            return {
                "type": "UpdateExpression",
                "operator": op,
                "argument": self.parse_unary(),
                "prefix": True,
            }
        if tok.is_ident("await"):
            nxt = self.peek()
            starts_expr = (
                nxt.type in ("ident", "num", "string", "template", "regex", "privname")
                or nxt.is_punct("(", "[", "{", "!", "~", "+", "-", "++", "--")
                or (nxt.type == "keyword" and nxt.value in
                    ("this", "super", "new", "function", "class", "typeof", "void",
                     "delete", "true", "false", "null", "import"))
            )
            if starts_expr and not nxt.nl_before:
                self.advance()
                return {"type": "AwaitExpression", "argument": self.parse_unary()}
        return self.parse_postfix()

    def parse_postfix(self) -> Node:
        expr = self.parse_call_member()
        if self.cur.is_punct("++", "--") and not self.cur.nl_before:
            op = self.advance().value
            return {"type": "UpdateExpression", "operator": op, "argument": expr, "prefix": False}
        return expr

    def parse_call_member(self) -> Node:
        if self.cur.is_keyword("new"):
            expr = self.parse_new()
        else:
            expr = self.parse_primary()
        return self.parse_member_chain(expr, allow_call=True)

    def parse_new(self) -> Node:
        self.expect_keyword("new")
        if self.cur.is_punct(".") :
            self.advance()
            meta_prop = self.advance().value  # new.target
            return {"type": "MetaProperty", "meta": "new", "property": meta_prop}
        if self.cur.is_keyword("new"):
            callee = self.parse_new()
        else:
            callee = self.parse_member_chain(self.parse_primary(), allow_call=False)
        arguments: list[Node] = []
        if self.cur.is_punct("("):
            arguments = self.parse_arguments()
        node = {"type": "NewExpression", "callee": callee, "arguments": arguments}
        return node

    def parse_member_chain(self, expr: Node, allow_call: bool) -> Node:
        while True:
            if self.eat_punct("."):
                prop_tok = self.advance()
                if prop_tok.type not in ("ident", "keyword", "privname"):
                    raise self.error("expected property name")
                prop_type = "PrivateName" if prop_tok.type == "privname" else "Identifier"
                expr = {
                    "type": "MemberExpression",
                    "object": expr,
                    "property": {"type": prop_type, "name": prop_tok.value.lstrip("#")},
                    "computed": False,
                }
            elif self.cur.is_punct("?."):
                self.advance()
                if self.cur.is_punct("("):
                    if not allow_call:
                        raise self.error("optional call in new expression")
                    expr = {
                        "type": "CallExpression",
                        "callee": expr,
                        "arguments": self.parse_arguments(),
                        "optional": True,
                    }
                elif self.cur.is_punct("["):
                    self.advance()
                    prop = self.parse_expression()
                    self.expect_punct("]")
                    expr = {
                        "type": "MemberExpression",
                        "object": expr,
                        "property": prop,
                        "computed": True,
                        "optional": True,
                    }
                else:
                    prop_tok = self.advance()
                    expr = {
                        "type": "MemberExpression",
                        "object": expr,
                        "property": {"type": "Identifier", "name": prop_tok.value},
                        "computed": False,
                        "optional": True,
                    }
            elif self.cur.is_punct("["):
                self.advance()
                saved, self.no_in = self.no_in, False
                prop = self.parse_expression()
                self.no_in = saved
                self.expect_punct("]")
                expr = {
                    "type": "MemberExpression",
                    "object": expr,
                    "property": prop,
                    "computed": True,
                }
            elif allow_call and self.cur.is_punct("("):
                expr = {
                    "type": "CallExpression",
                    "callee": expr,
                    "arguments": self.parse_arguments(),
                }
            elif self.cur.type == "template":
                quasi = self.parse_template_token()
                expr = {"type": "TaggedTemplateExpression", "tag": expr, "quasi": quasi}
            else:
                return expr

    def parse_arguments(self) -> list[Node]:
        self.expect_punct("(")
        args: list[Node] = []
        saved, self.no_in = self.no_in, False
        while not self.cur.is_punct(")"):
            if self.eat_punct("..."):
                args.append({"type": "SpreadElement", "argument": self.parse_assignment()})
            else:
                args.append(self.parse_assignment())
            if not self.cur.is_punct(")"):
                self.expect_punct(",")
        self.advance()
        self.no_in = saved
        return args

    # ----------------------------------------------------------------- primary

    def parse_primary(self) -> Node:
        tok = self.cur
        if tok.type == "num":
            self.advance()
            return {"type": "Literal", "value": tok.extra.get("value"), "raw": tok.value, "kind": "number"}
        if tok.type == "string":
            self.advance()
            return {"type": "Literal", "value": tok.value, "raw": tok.extra.get("raw", ""), "kind": "string"}
        if tok.type == "regex":
            self.advance()
            return {"type": "Literal", "value": tok.value, "raw": tok.value, "kind": "regex"}
        if tok.type == "template":
            return self.parse_template_token()
        if tok.type == "keyword":
            if tok.value in ("true", "false"):
                self.advance()
                return {"type": "Literal", "value": tok.value == "true", "raw": tok.value, "kind": "boolean"}
            if tok.value == "null":
                self.advance()
                return {"type": "Literal", "value": None, "raw": "null", "kind": "null"}
            if tok.value == "this":
                self.advance()
                return {"type": "ThisExpression"}
            if tok.value == "super":
                self.advance()
                return {"type": "Super"}
            if tok.value == "function":
                return self.parse_function(require_name=False)
            if tok.value == "class":
                return self.parse_class(declaration=False)
            if tok.value == "import":
                self.advance()
                if self.eat_punct("."):
                    prop = self.advance().value
                    return {"type": "MetaProperty", "meta": "import", "property": prop}
                return {"type": "Import"}
            raise self.error("unexpected keyword")
        if tok.type == "ident":
            if tok.value == "async" and self.peek().is_keyword("function") and not self.peek().nl_before:
                return self.parse_function(require_name=False)
            self.advance()
            return {"type": "Identifier", "name": tok.value}
        if tok.type == "privname":
            # `#field in obj` ergonomic brand check
            self.advance()
            return {"type": "PrivateName", "name": tok.value.lstrip("#")}
        if tok.is_punct("("):
            self.advance()
            saved, self.no_in = self.no_in, False
            expr = self.parse_expression()
            self.no_in = saved
            self.expect_punct(")")
            return expr
        if tok.is_punct("["):
            return self.parse_array_literal()
        if tok.is_punct("{"):
            return self.parse_object_literal()
        raise self.error("unexpected token")

    def parse_template_token(self) -> Node:
        tok = self.advance()
        expressions = []
        for src in tok.extra.get("expressions", []):
            expressions.append(parse_expression_source(src, tok.line))
        return {
            "type": "TemplateLiteral",
            "quasis": tok.extra.get("quasis", []),
            "expressions": expressions,
        }

    def parse_array_literal(self) -> Node:
        self.expect_punct("[")
        elements: list[Optional[Node]] = []
        saved, self.no_in = self.no_in, False
        while not self.cur.is_punct("]"):
            if self.cur.is_punct(","):
                self.advance()
                elements.append(None)
                continue
            if self.eat_punct("..."):
                elements.append({"type": "SpreadElement", "argument": self.parse_assignment()})
            else:
                elements.append(self.parse_assignment())
            if not self.cur.is_punct("]"):
                self.expect_punct(",")
        self.advance()
        self.no_in = saved
        return {"type": "ArrayExpression", "elements": elements}

    def parse_object_literal(self) -> Node:
        self.expect_punct("{")
        properties: list[Node] = []
        saved, self.no_in = self.no_in, False
        while not self.cur.is_punct("}"):
            properties.append(self.parse_object_property())
            if not self.cur.is_punct("}"):
                self.expect_punct(",")
        self.advance()
        self.no_in = saved
        return {"type": "ObjectExpression", "properties": properties}

    def parse_object_property(self) -> Node:
        if self.eat_punct("..."):
            return {"type": "SpreadElement", "argument": self.parse_assignment()}
        is_async = False
        generator = False
        kind = "init"
        if (
            self.cur.is_ident("async")
            and not self.peek().is_punct(":", ",", "}", "(", "=")
            and not self.peek().nl_before
        ):
            is_async = True
            self.advance()
        if self.eat_punct("*"):
            generator = True
        if (
            self.cur.is_ident("get", "set")
            and not self.peek().is_punct(":", ",", "}", "(", "=")
        ):
            kind = self.advance().value
        key, computed = self.parse_property_key()
        if self.cur.is_punct("("):
            params = self.parse_params()
            body = self.parse_block()
            value = {
                "type": "FunctionExpression",
                "id": None,
                "params": params,
                "body": body,
                "async": is_async,
                "generator": generator,
            }
            return {
                "type": "Property",
                "key": key,
                "value": value,
                "computed": computed,
                "kind": kind if kind in ("get", "set") else "init",
                "method": True,
            }
        if kind in ("get", "set"):
            raise self.error("accessor property needs a body")
        if self.eat_punct(":"):
            value = self.parse_assignment()
            return {"type": "Property", "key": key, "value": value, "computed": computed, "kind": "init"}
        if self.eat_punct("="):
            # cover grammar for destructuring assignment
            value = {"type": "AssignmentPattern", "left": key, "right": self.parse_assignment()}
            return {"type": "Property", "key": key, "value": value, "computed": computed,
                    "kind": "init", "shorthand": True}
        return {"type": "Property", "key": key, "value": key, "computed": computed,
                "kind": "init", "shorthand": True}

    def parse_property_key(self) -> tuple[Node, bool]:
        tok = self.cur
        if tok.is_punct("["):
            self.advance()
            key = self.parse_assignment()
            self.expect_punct("]")
            return key, True
        if tok.type in ("ident", "keyword"):
            self.advance()
            return {"type": "Identifier", "name": tok.value}, False
        if tok.type == "privname":
            self.advance()
            return {"type": "PrivateName", "name": tok.value.lstrip("#")}, False
        if tok.type == "string":
            self.advance()
            return {"type": "Literal", "value": tok.value, "raw": tok.extra.get("raw", ""), "kind": "string"}, False
        if tok.type == "num":
            self.advance()
            return {"type": "Literal", "value": tok.extra.get("value"), "raw": tok.value, "kind": "number"}, False
        raise self.error("expected property key")

    # ------------------------------------------------------------------ classes

    def parse_class(self, declaration: bool) -> Node:
        self.expect_keyword("class")
        name = None
        if self.cur.type == "ident":
            name = self.advance().value
        elif declaration:
            raise self.error("class declaration needs a name")
        superclass = None
        if self.eat_keyword("extends"):
            superclass = self.parse_call_member()
        self.expect_punct("{")
        body: list[Node] = []
        while not self.cur.is_punct("}"):
            if self.eat_punct(";"):
                continue
            body.append(self.parse_class_member())
        self.advance()
        return {
            "type": "ClassDeclaration" if declaration else "ClassExpression",
            "id": name,
            "superClass": superclass,
            "body": body,
        }

    def parse_class_member(self) -> Node:
        is_static = False
        if self.cur.is_ident("static") and not self.peek().is_punct("(", "=", ";", "}"):
            is_static = True
            self.advance()
            if self.cur.is_punct("{"):
                return {"type": "StaticBlock", "body": self.parse_block()}
        is_async = False
        generator = False
        kind = "method"
        if (
            self.cur.is_ident("async")
            and not self.peek().is_punct("(", "=", ";", "}")
            and not self.peek().nl_before
        ):
            is_async = True
            self.advance()
        if self.eat_punct("*"):
            generator = True
        if self.cur.is_ident("get", "set") and not self.peek().is_punct("(", "=", ";", "}"):
            kind = self.advance().value
        key, computed = self.parse_property_key()
        if self.cur.is_punct("("):
            params = self.parse_params()
            body = self.parse_block()
            value = {
                "type": "FunctionExpression",
                "id": None,
                "params": params,
                "body": body,
                "async": is_async,
                "generator": generator,
            }
            return {
                "type": "MethodDefinition",
                "key": key,
                "value": value,
                "kind": kind if kind in ("get", "set") else (
                    "constructor"
                    if not computed and key.get("name") == "constructor"
                    else "method"
                ),
                "static": is_static,
                "computed": computed,
            }
        value = None
        if self.eat_punct("="):
            value = self.parse_assignment()
        self.consume_semicolon()
        return {
            "type": "PropertyDefinition",
            "key": key,
            "value": value,
            "static": is_static,
            "computed": computed,
        }


def parse(source: str) -> Node:
    """Parse a script, returning its Program node or raising ParseError."""
    try:
        tokens = tokenize(source)
    except SyntaxError as exc:
        line = getattr(exc, "line", 0)
        raise ParseError(str(exc), line) from exc
    parser = _Parser(tokens)
    program = parser.parse_program()
    if parser.cur.type != "eof":  # pragma: no cover - defensive
        raise parser.error("trailing tokens")
    return program


def parse_expression_source(source: str, line: int = 1) -> Node:
    """Parse a bare expression (used for template substitutions)."""
    try:
        tokens = tokenize(source)
    except SyntaxError as exc:
        raise ParseError(str(exc), line) from exc
    parser = _Parser(tokens)
    expr = parser.parse_expression()
    if parser.cur.type != "eof":
        raise parser.error("trailing tokens in expression")
    return expr
