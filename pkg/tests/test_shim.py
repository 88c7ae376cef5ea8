"""Shim behavior inside the embedded engine: camouflage, idempotence,
transparency, and exactly-once message emission per hooked invocation."""

from pathlib import Path

import pytest

from threatscope.corpus import PageSnapshot, ScriptResource
from threatscope.evidence import UrlRecord
from threatscope.sandbox import execute_page, node_available
from threatscope.sandbox.engine import _asset_path

pytestmark = pytest.mark.skipif(
    not node_available(), reason="embedded engine (node) not available"
)

URL = UrlRecord.parse("http://sandbox.local/")


def run(scripts, html="<html><body></body></html>", **kwargs):
    snapshot = PageSnapshot(
        url=URL,
        html=html,
        scripts=[ScriptResource(f"inline#{i}", s, "inline") for i, s in enumerate(scripts)],
    )
    return execute_page(snapshot, capture_raw_messages=True, **kwargs)


def messages_of(result, type_):
    return [m for m in result.raw_messages if m["type"] == type_]


# ---------------------------------------------------------------------------
# Camouflage
# ---------------------------------------------------------------------------


def test_camouflage_check_true_after_install():
    result = run(["1;"])
    assert result.camouflage_ok is True
    assert result.wrap_failures == []


def test_wrapped_fetch_stringifies_to_native_code():
    result = run(
        [
            "window.__result = [String(window.fetch), window.fetch.name,"
            " String(window.eval).indexOf('native code') >= 0].join('|');"
        ]
    )
    text, name, eval_native = result.result_var.split("|")
    assert "native code" in text
    assert name == "fetch"
    assert eval_native == "true"


# ---------------------------------------------------------------------------
# Idempotence: installing twice wraps exactly once
# ---------------------------------------------------------------------------


def test_double_install_wraps_once():
    shim_source = _asset_path("shim.js").read_text(encoding="utf-8")
    # the page itself re-runs the installer, then calls one hooked API
    result = run([shim_source, "fetch('http://x.test/once');"])
    assert len(messages_of(result, "logFetch")) == 1
    assert result.camouflage_ok


# ---------------------------------------------------------------------------
# Transparency on a pure-computation corpus
# ---------------------------------------------------------------------------

PURE_PROGRAMS = [
    # arithmetic and string building
    "var acc = 0; for (var i = 0; i < 500; i++) acc = (acc * 31 + i) % 99991;"
    "window.__result = 'acc:' + acc;",
    # array/object transforms
    "var xs = [];+function(){for(var i=0;i<50;i++)xs.push(i*i);}();"
    "window.__result = JSON.stringify(xs.filter(function(x){return x % 3 === 0;}));",
    # closures and recursion
    "function fib(n){return n < 2 ? n : fib(n-1)+fib(n-2);}"
    "window.__result = String(fib(17));",
]


@pytest.mark.parametrize("program", PURE_PROGRAMS)
def test_pure_computation_state_identical_with_and_without_shim(program):
    with_shim = run([program])
    without_shim = run([program], engine_overrides={"install_shim": False})
    assert with_shim.result_var == without_shim.result_var is not None


# ---------------------------------------------------------------------------
# Every hook emits its documented message exactly once per invocation
# ---------------------------------------------------------------------------

HOOK_CALLS = """
(function () {
  fetch('http://one.test/a', {method: 'POST'});
  var x = new XMLHttpRequest(); x.open('GET', '/r'); x.send();
  new WebSocket('ws://sock.test/');
  eval('2+2');
  var d = document.createElement('div');
  document.body.appendChild(d);
  var s = document.createElement('script');
  s.src = 'http://cdn.test/s.js';
  document.body.appendChild(s);
  document.body.removeChild(d);
  document.cookie = 'a=1';
  var jar = document.cookie;
  localStorage.setItem('k', 'v');
  localStorage.getItem('k');
  setTimeout(function(){}, 10);
  setInterval(function(){}, 100000);
  var handler = function(){};
  document.addEventListener('click', handler);
  document.removeEventListener('click', handler);
})();
"""

EXPECTED_MESSAGE_COUNTS = {
    "logFetch": 1,
    "logXhr": 1,
    "logWebSocket": 1,
    "logEval": 1,
    "logDomMutation": 2,  # div insert + div remove
    "logScriptAppend": 1,
    "logCookie": 2,  # one write, one read
    "logStorage": 2,  # setItem + getItem
    "logTimer": 2,  # setTimeout + setInterval
    "logListener": 2,  # add + remove
    "logGlobalDiff": 1,  # emitted once at finalize
}


def test_each_hook_emits_exactly_once_per_invocation():
    result = run([HOOK_CALLS])
    by_type = {}
    for message in result.raw_messages:
        by_type[message["type"]] = by_type.get(message["type"], 0) + 1
    for type_, expected in EXPECTED_MESSAGE_COUNTS.items():
        assert by_type.get(type_, 0) == expected, (type_, by_type)


def test_message_payload_shapes():
    result = run([HOOK_CALLS])
    (fetch_msg,) = messages_of(result, "logFetch")
    assert fetch_msg["payload"] == {"url": "http://one.test/a", "method": "POST"}
    (append_msg,) = messages_of(result, "logScriptAppend")
    assert append_msg["payload"]["src"] == "http://cdn.test/s.js"
    cookie_ops = [m["payload"]["op"] for m in messages_of(result, "logCookie")]
    assert sorted(cookie_ops) == ["read", "write"]
    (diff_msg,) = messages_of(result, "logGlobalDiff")
    assert "jar" not in diff_msg["payload"]["added"]  # IIFE-local, not global


def test_payload_excerpts_capped_at_4k():
    big = "x" * 20000
    result = run([f"eval('\"{big}\"');"])
    (eval_msg,) = messages_of(result, "logEval")
    assert len(eval_msg["payload"]["code"]) <= 4096


def test_guard_symbol_excluded_from_global_diff():
    result = run(["window.pageGlobal = 1;"])
    assert result.new_globals == ["pageGlobal"]
    assert "__tsShimGuard" not in result.new_globals
    assert "__tsShim" not in result.new_globals


def test_shim_version_reported():
    result = run(["1;"])
    assert result.shim_version.startswith("shim/")


def test_vendored_asset_matches_committed_build():
    # the shim/ project is the source of truth; its committed build output
    # must equal the asset the sandbox actually loads
    repo_root = Path(__file__).parent.parent
    built = repo_root / "shim" / "dist" / "shim.js"
    vendored = _asset_path("shim.js")
    assert built.is_file(), "run `npm run build && npm run sync` in shim/"
    assert vendored.read_text(encoding="utf-8") == built.read_text(encoding="utf-8")


def test_host_bridge_withdrawn_before_page_scripts():
    result = run(["window.__result = typeof __tsHost;"])
    assert result.result_var == "undefined"


def test_location_is_realm_local_no_engine_escape():
    # the classic vm escape: reach the host realm's Function constructor
    # through an injected object's prototype chain
    probe = """
    var outcome;
    try {
        var fn = location.constructor.constructor('return typeof process');
        outcome = 'ran:' + fn();
    } catch (e) {
        outcome = 'threw:' + e.name;
    }
    window.__result = outcome + '|' + location.href;
    """
    result = run([probe])
    outcome, href = result.result_var.split("|")
    # in-realm Function sees the sandbox global, where process must not exist
    assert outcome in ("ran:undefined", "threw:ReferenceError")
    assert href == "http://sandbox.local/"


def test_shim_control_object_tamper_resistant():
    result = run(
        [
            "window.pageGlobal = 1;"
            "try { __tsShim.finalize = function(){ return ['forged']; }; } catch (e) {}"
            "try { __tsShim.wrapFailures.push('forged'); } catch (e) {}"
        ]
    )
    # frozen control object: the real finalize still runs and diffs honestly
    assert result.new_globals == ["pageGlobal"]
    assert "forged" not in result.wrap_failures
    assert result.camouflage_ok
