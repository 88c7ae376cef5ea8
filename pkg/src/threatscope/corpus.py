"""Analysis-subject ingestion: saved page snapshots and live URL fetches.

A snapshot is a directory with ``page.html``, a ``manifest.json`` listing
external script files, and the script files themselves. A corpus is a
``corpus.json`` mapping snapshot directories to ground-truth labels.
"""

from __future__ import annotations

import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from html.parser import HTMLParser
from pathlib import Path
from typing import Any, Optional
from urllib.parse import urljoin, urlsplit

import requests
from requests.cookies import RequestsCookieJar
from http.cookiejar import CookiePolicy

from .evidence import EvidenceError, UrlRecord

SNAPSHOT_FORMAT = "threatscope-snapshot/1"
CORPUS_FORMAT = "threatscope-corpus/1"

# a typical desktop browser identity; analysis fetches look like a user
DESKTOP_USER_AGENT = (
    "Mozilla/5.0 (Windows NT 10.0; Win64; x64) AppleWebKit/537.36 "
    "(KHTML, like Gecko) Chrome/124.0.0.0 Safari/537.36"
)
MAX_REDIRECTS = 5


class SnapshotLoadError(Exception):
    """A snapshot directory is missing required pieces."""


class LiveFetchError(Exception):
    """Fatal failure fetching a live URL.

    ``partial`` carries an html-only snapshot when the main document had
    already arrived before the failure.
    """

    def __init__(self, message: str, partial: Optional["PageSnapshot"] = None):
        super().__init__(message)
        self.partial = partial


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScriptResource:
    name: str
    source: str
    origin: str  # "inline" | "external"
    warning: Optional[str] = None


@dataclass
class PageSnapshot:
    url: UrlRecord
    html: str
    scripts: list[ScriptResource] = field(default_factory=list)
    fetched_at: str = ""
    tls_present: bool = False

    def __post_init__(self) -> None:
        externals = [s.name for s in self.scripts if s.origin == "external"]
        if len(set(externals)) != len(externals):
            raise EvidenceError("duplicate external script names in snapshot")


@dataclass(frozen=True)
class CorpusEntry:
    snapshot_dir: Path
    label: str  # benign | malicious
    threat_type: Optional[str] = None


@dataclass
class CorpusManifest:
    entries: list[CorpusEntry]

    def __post_init__(self) -> None:
        for entry in self.entries:
            if entry.label not in UrlRecord.LABELS:
                raise EvidenceError(f"corpus label must be benign/malicious: {entry.label!r}")


# ---------------------------------------------------------------------------
# HTML script extraction (tolerant, never fatal)
# ---------------------------------------------------------------------------


class _ScriptCollector(HTMLParser):
    """Collects <script> bodies and src attributes in document order."""

    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.inline_sources: list[str] = []
        self.external_srcs: list[str] = []
        self._in_script = False
        self._current: list[str] = []

    def handle_starttag(self, tag: str, attrs: list[tuple[str, Optional[str]]]) -> None:
        if tag.lower() != "script":
            return
        attr_map = {k.lower(): (v or "") for k, v in attrs}
        src = attr_map.get("src", "").strip()
        if src:
            self.external_srcs.append(src)
        else:
            self._in_script = True
            self._current = []

    def handle_endtag(self, tag: str) -> None:
        if tag.lower() == "script" and self._in_script:
            self._in_script = False
            self.inline_sources.append("".join(self._current))

    def handle_data(self, data: str) -> None:
        if self._in_script:
            self._current.append(data)


def extract_scripts_from_html(html: str) -> tuple[list[str], list[str]]:
    """(inline sources, external src attributes), both in document order."""
    collector = _ScriptCollector()
    try:
        collector.feed(html)
        collector.close()
    except Exception:
        pass  # best-effort parse, never fatal
    return collector.inline_sources, collector.external_srcs


# ---------------------------------------------------------------------------
# Snapshot loading / saving
# ---------------------------------------------------------------------------


def load_snapshot(directory: str | Path) -> PageSnapshot:
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.is_file():
        raise SnapshotLoadError(f"manifest.json missing in {directory}")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SnapshotLoadError(f"malformed manifest.json in {directory}: {exc}") from exc

    page_path = directory / "page.html"
    if not page_path.is_file():
        raise SnapshotLoadError(f"page.html missing in {directory}")
    html = page_path.read_text(encoding="utf-8", errors="replace")
    if not html:
        raise SnapshotLoadError(f"page.html is empty in {directory}")

    scripts: list[ScriptResource] = []
    for entry in manifest.get("scripts", []):
        file_name = entry["file"]
        script_path = directory / file_name
        if not script_path.is_file():
            raise SnapshotLoadError(f"script file missing: {file_name} (in {directory})")
        scripts.append(
            ScriptResource(
                name=file_name,
                source=script_path.read_text(encoding="utf-8", errors="replace"),
                origin="external",
                warning=entry.get("warning"),
            )
        )
    inline_sources, _ = extract_scripts_from_html(html)
    for k, source in enumerate(inline_sources):
        scripts.append(ScriptResource(name=f"inline#{k}", source=source, origin="inline"))

    return PageSnapshot(
        url=UrlRecord.parse(manifest["url"]),
        html=html,
        scripts=scripts,
        fetched_at=manifest.get("fetched_at", ""),
        tls_present=bool(manifest.get("tls", manifest.get("url", "").startswith("https"))),
    )


_UNSAFE_FILE_CHARS = re.compile(r"[^A-Za-z0-9._-]")


def _file_name_for(url: str, index: int, taken: set[str]) -> str:
    base = Path(urlsplit(url).path).name or f"script-{index}.js"
    base = _UNSAFE_FILE_CHARS.sub("_", base)[:80]
    if not base.endswith(".js"):
        base += ".js"
    candidate, n = base, 1
    while candidate in taken or candidate in ("page.html", "manifest.json"):
        candidate = f"{Path(base).stem}-{n}.js"
        n += 1
    taken.add(candidate)
    return candidate


def save_snapshot(snapshot: PageSnapshot, directory: str | Path) -> Path:
    """Write the documented snapshot layout; returns the directory."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "page.html").write_text(snapshot.html, encoding="utf-8")
    entries = []
    for script in snapshot.scripts:
        if script.origin != "external":
            continue  # inline scripts live in page.html
        (directory / script.name).write_text(script.source, encoding="utf-8")
        entry: dict[str, Any] = {"url": script.name, "file": script.name}
        if script.warning:
            entry["warning"] = script.warning
        entries.append(entry)
    manifest = {
        "format": SNAPSHOT_FORMAT,
        "url": snapshot.url.raw,
        "fetched_at": snapshot.fetched_at,
        "tls": snapshot.tls_present,
        "scripts": entries,
    }
    (directory / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )
    return directory


def snapshot_to_dict(snapshot: PageSnapshot) -> dict[str, Any]:
    return {
        "url": snapshot.url.raw,
        "html": snapshot.html,
        "fetched_at": snapshot.fetched_at,
        "tls": snapshot.tls_present,
        "scripts": [
            {
                "name": s.name,
                "source": s.source,
                "origin": s.origin,
                "warning": s.warning,
            }
            for s in snapshot.scripts
        ],
    }


# ---------------------------------------------------------------------------
# Live fetching
# ---------------------------------------------------------------------------


class _BlockAllCookies(CookiePolicy):
    # analysis is anonymous by design: no cookie jar, no credentialed fetches
    return_ok = set_ok = domain_return_ok = path_return_ok = (
        lambda self, *args, **kwargs: False
    )
    netscape = True
    rfc2965 = hide_cookie2 = False


def _make_session() -> requests.Session:
    session = requests.Session()
    session.max_redirects = MAX_REDIRECTS
    session.headers["User-Agent"] = DESKTOP_USER_AGENT
    jar = RequestsCookieJar(policy=_BlockAllCookies())
    session.cookies = jar
    return session


def fetch_live(url: UrlRecord, timeout_ms: int = 15000) -> PageSnapshot:
    """Fetch a page and its external scripts anonymously.

    Main-document failures are fatal; a failing script is recorded with an
    empty source and a warning so analysis can continue.
    """
    if url.scheme not in ("http", "https"):
        raise LiveFetchError(f"unsupported scheme: {url.scheme}")
    timeout = timeout_ms / 1000.0
    session = _make_session()
    try:
        response = session.get(url.raw, timeout=timeout)
    except requests.Timeout as exc:
        raise LiveFetchError(f"timeout fetching {url.raw}") from exc
    except requests.TooManyRedirects as exc:
        raise LiveFetchError(f"redirect limit ({MAX_REDIRECTS}) exceeded for {url.raw}") from exc
    except requests.RequestException as exc:
        raise LiveFetchError(f"fetch failed for {url.raw}: {exc}") from exc
    if not response.ok:
        raise LiveFetchError(f"main document returned {response.status_code} for {url.raw}")
    html = response.text

    inline_sources, external_srcs = extract_scripts_from_html(html)

    def fetch_script(src: str) -> tuple[str, Optional[str]]:
        absolute = urljoin(response.url, src)
        try:
            r = session.get(absolute, timeout=timeout)
        except requests.RequestException as exc:
            return "", f"fetch failed: {exc.__class__.__name__}"
        if not r.ok:
            return "", f"http {r.status_code}"
        return r.text, None

    scripts: list[ScriptResource] = []
    taken: set[str] = set()
    if external_srcs:
        with ThreadPoolExecutor(max_workers=min(8, len(external_srcs))) as pool:
            bodies = list(pool.map(fetch_script, external_srcs))
        for i, (src, (body, warning)) in enumerate(zip(external_srcs, bodies)):
            scripts.append(
                ScriptResource(
                    name=_file_name_for(src, i, taken),
                    source=body,
                    origin="external",
                    warning=warning,
                )
            )
    for k, source in enumerate(inline_sources):
        scripts.append(ScriptResource(name=f"inline#{k}", source=source, origin="inline"))

    return PageSnapshot(
        url=url,
        html=html,
        scripts=scripts,
        fetched_at=datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
        tls_present=url.scheme == "https",
    )


# ---------------------------------------------------------------------------
# Corpus manifests
# ---------------------------------------------------------------------------


def load_corpus(path: str | Path) -> CorpusManifest:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SnapshotLoadError(f"cannot read corpus manifest {path}: {exc}") from exc
    if data.get("format") != CORPUS_FORMAT:
        raise SnapshotLoadError(f"unsupported corpus format: {data.get('format')!r}")
    root = path.parent
    entries = [
        CorpusEntry(
            snapshot_dir=(root / e["snapshot_dir"]).resolve(),
            label=e["label"],
            threat_type=e.get("threat_type"),
        )
        for e in data.get("entries", [])
    ]
    return CorpusManifest(entries=entries)


def save_corpus(manifest: CorpusManifest, path: str | Path, root: Optional[Path] = None) -> None:
    path = Path(path)
    root = root or path.parent
    data = {
        "format": CORPUS_FORMAT,
        "entries": [
            {
                "snapshot_dir": str(
                    e.snapshot_dir.relative_to(root)
                    if e.snapshot_dir.is_absolute()
                    else e.snapshot_dir
                ),
                "label": e.label,
                "threat_type": e.threat_type,
            }
            for e in manifest.entries
        ],
    }
    path.write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")
