"""Shared test fixtures: a configurable local HTTP server and snapshot
directory builders."""

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest


class RouteTable:
    """Mutable route map the server consults per request.

    Values are (status, content_type, body) or a callable returning that
    tuple; requests are appended to ``log``.
    """

    def __init__(self):
        self.routes = {}
        self.log = []

    def set(self, path, body, status=200, content_type="text/html"):
        self.routes[path] = (status, content_type, body)


@pytest.fixture
def http_server():
    table = RouteTable()

    class Handler(BaseHTTPRequestHandler):
        def do_GET(self):
            table.log.append(self.path)
            entry = table.routes.get(self.path)
            if entry is None:
                self.send_response(404)
                self.end_headers()
                self.wfile.write(b"not found")
                return
            if callable(entry):
                entry = entry(self)
            status, content_type, body = entry
            self.send_response(status)
            if 300 <= status < 400:
                self.send_header("Location", body)
                self.end_headers()
                return
            if isinstance(body, str):
                body = body.encode("utf-8")
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def log_message(self, *args):
            pass

    server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    table.base_url = f"http://127.0.0.1:{server.server_address[1]}"
    yield table
    server.shutdown()
    server.server_close()


def make_snapshot_dir(root, url="https://example.test/", html=None, scripts=(), tls=True):
    """Write a snapshot directory; scripts is a list of (file, source)."""
    root.mkdir(parents=True, exist_ok=True)
    if html is None:
        html = "<html><head><title>t</title></head><body>hello</body></html>"
    (root / "page.html").write_text(html, encoding="utf-8")
    manifest = {
        "format": "threatscope-snapshot/1",
        "url": url,
        "fetched_at": "2025-01-01T00:00:00Z",
        "tls": tls,
        "scripts": [{"url": name, "file": name} for name, _ in scripts],
    }
    (root / "manifest.json").write_text(json.dumps(manifest, indent=2), encoding="utf-8")
    for name, source in scripts:
        (root / name).write_text(source, encoding="utf-8")
    return root
