"""AST node helpers.

Nodes are plain dicts with a ``type`` key, shaped after ESTree so the
analyzer code reads like any other AST walker.
"""

from __future__ import annotations

from typing import Any, Iterator

Node = dict


def walk(node: Any) -> Iterator[dict]:
    """Yield every node in the subtree, preorder."""
    stack = [node]
    while stack:
        current = stack.pop()
        if isinstance(current, dict):
            if "type" in current:
                yield current
            stack.extend(v for v in current.values() if isinstance(v, (dict, list)))
        elif isinstance(current, list):
            stack.extend(v for v in current if isinstance(v, (dict, list)))


def member_path(node: dict) -> str:
    """Dotted rendering of a callee: ``a.b.c`` with unknown bases collapsed.

    Computed or complex receivers become ``unknown``; a plain identifier
    stays as-is. Mirrors how invoked-API names are reported.
    """
    if node.get("type") == "Identifier":
        return node["name"]
    if node.get("type") == "ThisExpression":
        return "this"
    if node.get("type") == "MemberExpression":
        prop = node["property"]
        if node.get("computed"):
            name = "()"
        elif prop.get("type") == "Identifier":
            name = prop["name"]
        elif prop.get("type") == "PrivateName":
            name = prop["name"]
        else:
            name = "()"
        obj = node["object"]
        if obj.get("type") == "Identifier":
            base = obj["name"]
        elif obj.get("type") == "ThisExpression":
            base = "this"
        elif obj.get("type") == "MemberExpression":
            base = member_path(obj)
        else:
            base = "unknown"
        return f"{base}.{name}"
    return "unknown"
