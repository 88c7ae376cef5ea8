"""Visible-text and DOM-metadata extraction from the serialized final DOM.

The hidden heuristic mirrors the engine side: display:none,
visibility:hidden, zero area, or fully off a 1366x768 virtual viewport.
"""

from __future__ import annotations

from typing import Any, Iterator, Optional

from ..evidence import DomMetadata

_INVISIBLE_TAGS = frozenset(
    {"script", "style", "noscript", "template", "head", "title", "meta", "link", "base"}
)

_BRAND_META_KEYS = frozenset(
    {"og:site_name", "og:title", "application-name", "twitter:site", "apple-mobile-web-app-title"}
)

_LOGIN_TOKENS = ("login", "log-in", "signin", "sign-in", "session")
_EMAIL_TOKENS = ("email", "e-mail", "login", "user")


def _style_px(value: Any) -> Optional[float]:
    if value is None:
        return None
    try:
        return float(str(value).strip().rstrip("px%").strip() or "nan")
    except ValueError:
        return None


def element_hidden(node: dict, viewport: tuple[int, int] = (1366, 768)) -> bool:
    """Whether this element's own properties hide it (subtree inherits)."""
    style = node.get("style", {})
    attrs = node.get("attrs", {})
    if style.get("display", "").strip() == "none":
        return True
    if style.get("visibility", "").strip() == "hidden":
        return True
    if "hidden" in attrs:
        return True
    width = _style_px(style.get("width", attrs.get("width")))
    height = _style_px(style.get("height", attrs.get("height")))
    if width == 0 or height == 0:
        return True
    if style.get("position") in ("absolute", "fixed"):
        left = _style_px(style.get("left"))
        top = _style_px(style.get("top"))
        vw, vh = viewport
        if left is not None and (left <= -vw or left >= vw):
            return True
        if top is not None and (top <= -vh or top >= vh):
            return True
    return False


def _walk_elements(node: dict) -> Iterator[dict]:
    stack = [node]
    while stack:
        current = stack.pop()
        if "tag" not in current:
            continue
        yield current
        stack.extend(reversed(current.get("children", [])))


def _find_tag(dom: dict, tag: str) -> Optional[dict]:
    for el in _walk_elements(dom):
        if el.get("tag") == tag:
            return el
    return None


def extract_visible_text(dom: dict, viewport: tuple[int, int] = (1366, 768)) -> str:
    """Concatenated, whitespace-normalized text of visible body nodes.

    Hidden elements prune their whole subtree; traversal is iterative so
    pathological nesting depth cannot exhaust the stack.
    """
    body = _find_tag(dom, "body")
    if body is None:
        return ""
    parts: list[str] = []
    stack: list[dict] = list(reversed(body.get("children", [])))
    while stack:
        node = stack.pop()
        if "text" in node:
            parts.append(node["text"])
            continue
        tag = node.get("tag", "")
        if tag in _INVISIBLE_TAGS or element_hidden(node, viewport):
            continue
        stack.extend(reversed(node.get("children", [])))
    return " ".join(" ".join(parts).split())


def _value_of(attrs: dict, *names: str) -> str:
    for name in names:
        if name in attrs:
            return str(attrs[name]).lower()
    return ""


def _is_email_field(attrs: dict) -> bool:
    input_type = _value_of(attrs, "type")
    if input_type == "email":
        return True
    if input_type in ("", "text"):
        ident = _value_of(attrs, "name") + " " + _value_of(attrs, "id")
        return any(token in ident for token in _EMAIL_TOKENS)
    return False


def _form_is_login(form: dict) -> bool:
    attrs = form.get("attrs", {})
    ident = " ".join(
        _value_of(attrs, key) for key in ("action", "id", "name", "class")
    )
    if any(token in ident for token in _LOGIN_TOKENS):
        return True
    for el in _walk_elements(form):
        if el.get("tag") == "input" and _value_of(el.get("attrs", {}), "type") == "password":
            return True
    return False


def _form_has_autocomplete(form: dict) -> bool:
    attrs = form.get("attrs", {})
    if "autocomplete" in attrs:
        return _value_of(attrs, "autocomplete") != "off"
    for el in _walk_elements(form):
        if el.get("tag") == "input":
            ac = el.get("attrs", {}).get("autocomplete")
            if ac is not None and str(ac).lower() != "off":
                return True
    return False


def extract_dom_metadata(
    dom: dict, title: str = "", viewport: tuple[int, int] = (1366, 768)
) -> DomMetadata:
    if not dom:
        return DomMetadata(title=title)
    forms = []
    password_fields = 0
    email_fields = 0
    hidden_elements = 0
    brand_meta: dict[str, str] = {}

    for el in _walk_elements(dom):
        tag = el.get("tag", "")
        attrs = el.get("attrs", {})
        if tag == "form":
            forms.append(el)
        elif tag == "input":
            if _value_of(attrs, "type") == "password":
                password_fields += 1
            elif _is_email_field(attrs):
                email_fields += 1
        elif tag == "meta":
            key = attrs.get("property") or attrs.get("name") or ""
            if key in _BRAND_META_KEYS and "content" in attrs:
                brand_meta[key] = str(attrs["content"])
        if tag not in _INVISIBLE_TAGS and element_hidden(el, viewport):
            hidden_elements += 1

    if not title:
        title_el = _find_tag(dom, "title")
        if title_el is not None:
            title = "".join(c.get("text", "") for c in title_el.get("children", [])).strip()

    return DomMetadata(
        title=title,
        total_forms=len(forms),
        login_forms=sum(1 for f in forms if _form_is_login(f)),
        password_fields=password_fields,
        email_fields=email_fields,
        autocomplete_forms=sum(1 for f in forms if _form_has_autocomplete(f)),
        brand_meta=brand_meta,
        hidden_elements=hidden_elements,
    )
