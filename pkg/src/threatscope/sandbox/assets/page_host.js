/*
 * Sandbox runner. Reads a JSON job from stdin:
 *   { html, scripts: [{name, source}], shim_source, config: {...},
 *     network_stubs: {urlPrefix: {status, body}}, base_url }
 * and writes a JSON result to stdout.
 *
 * Page scripts execute in a fresh vm context holding the DOM emulation,
 * with the instrumentation shim installed first. Timers run on a virtual
 * clock: delays fast-forward (bounded by window_ms) so delayed payloads
 * fire inside the window while wall time stays small. A wall-clock cap
 * bounds runaway scripts via vm timeouts.
 */

'use strict';

const vm = require('node:vm');
const fs = require('node:fs');
const path = require('node:path');

function main() {
  let job;
  try {
    job = JSON.parse(fs.readFileSync(0, 'utf8'));
  } catch (e) {
    process.stdout.write(JSON.stringify({ ok: false, error: 'bad job: ' + e.message }));
    process.exit(1);
  }
  // write with a flush callback: process.exit would truncate large
  // payloads still buffered in the stdout pipe
  run(job).then(
    (result) => {
      process.stdout.write(JSON.stringify(result), () => process.exit(0));
    },
    (err) => {
      process.stdout.write(
        JSON.stringify({ ok: false, error: String((err && err.stack) || err) }),
        () => process.exit(1)
      );
    }
  );
}

async function run(job) {
  const cfg = Object.assign(
    {
      window_ms: 4000,
      hard_cap_ms: 6000,
      settle_quiet_ms: 750,
      simulate_interactions: true,
      max_trace_events: 10000,
      viewport: { width: 1366, height: 768 },
      capture_raw_messages: false,
      user_agent:
        'Mozilla/5.0 (Windows NT 10.0; Win64; x64) AppleWebKit/537.36 ' +
        '(KHTML, like Gecko) Chrome/124.0.0.0 Safari/537.36',
    },
    job.config || {}
  );
  const wallStart = Date.now();
  const hardCapLeft = () => Math.max(50, cfg.hard_cap_ms - (Date.now() - wallStart));

  // -- trace collection -------------------------------------------------------

  let virtualNow = 0;
  const trace = [];
  const rawMessages = [];
  let droppedAtSource = 0;
  let networkEvents = 0;
  let eventSeq = 0;
  const nodeCap = cfg.max_trace_events * 2 + 100;

  const baseHost = hostOf(job.base_url || 'http://sandbox.invalid/');

  function pushEvent(kind, detail) {
    eventSeq += 1;
    if (trace.length >= nodeCap) {
      droppedAtSource += 1;
      return;
    }
    if (kind === 'fetch' || kind === 'xhr' || kind === 'websocket') networkEvents += 1;
    trace.push({ timestamp: virtualNow, kind, detail });
  }

  function hostOf(url) {
    const m = /^[a-z][a-z0-9+.-]*:\/\/([^/:?#]+)/i.exec(String(url));
    return m ? m[1].toLowerCase() : '';
  }

  function isExternal(url) {
    const h = hostOf(url);
    return h !== '' && h !== baseHost;
  }

  // shim/emulation message -> normalized trace event
  const MESSAGE_MAP = {
    logFetch: (p) =>
      pushEvent('fetch', {
        api: 'window.fetch',
        url: p.url,
        method: p.method || 'GET',
        external: isExternal(p.url),
      }),
    logXhr: (p) =>
      pushEvent('xhr', {
        api: 'XMLHttpRequest.send',
        url: p.url,
        method: p.method || 'GET',
        external: isExternal(p.url),
      }),
    logWebSocket: (p) =>
      pushEvent('websocket', {
        api: 'WebSocket',
        url: p.url,
        external: isExternal(p.url),
      }),
    logEval: (p) => pushEvent('eval', { api: 'window.eval', code: p.code }),
    logScriptAppend: (p) =>
      pushEvent('script_append', {
        api: p.api || 'Node.appendChild',
        src: p.src,
        content: p.content,
        external: p.src ? isExternal(p.src) : false,
      }),
    logDomMutation: (p) =>
      pushEvent(p.action === 'remove' ? 'dom_remove' : 'dom_insert', {
        api: p.api || 'Node.appendChild',
        tag: p.tag,
        attrs: p.attrs,
        hidden: !!p.hidden,
      }),
    logCookie: (p) =>
      pushEvent(p.op === 'write' ? 'cookie_write' : 'cookie_read', {
        api: 'document.cookie',
        op: p.op,
        value: p.value,
      }),
    logStorage: (p) =>
      pushEvent('storage_access', {
        api: 'Storage.' + (p.op === 'set' ? 'setItem' : 'getItem'),
        area: p.area,
        op: p.op,
        key: p.key,
      }),
    logTimer: (p) =>
      pushEvent('timer_set', {
        api: p.api || 'window.setTimeout',
        delay: p.delay,
        repeats: !!p.repeats,
        string_body: !!p.stringBody,
      }),
    logListener: (p) =>
      pushEvent(p.op === 'remove' ? 'listener_remove' : 'listener_add', {
        api: 'EventTarget.' + (p.op === 'remove' ? 'removeEventListener' : 'addEventListener'),
        event: p.event,
      }),
    geolocation: (p) => pushEvent('geolocation', { api: p.api || 'navigator.geolocation' }),
    domInnerHtml: () => {}, // structural change; nodes logged via appendChild path
    pageError: (p) =>
      pushEvent('eval', { api: 'engine.error', error: p.error, during: p.during }),
  };

  let globalDiff = null;
  let wrapFailures = [];

  function onMessage(type, payload) {
    if (cfg.capture_raw_messages) {
      rawMessages.push({ type, payload: JSON.parse(JSON.stringify(payload || {})) });
    }
    if (type === 'logGlobalDiff') {
      if (payload.added && payload.added.length) globalDiff = payload.added;
      if (payload.wrapFailures && payload.wrapFailures.length) {
        wrapFailures = payload.wrapFailures;
      }
      return;
    }
    const handler = MESSAGE_MAP[type];
    if (handler) handler(payload || {});
  }

  // -- virtual timers ----------------------------------------------------------

  let timerSeq = 0;
  let timers = []; // {id, time, fn, repeats, interval, seq}

  function scheduleTimer(fn, delay, repeats) {
    timerSeq += 1;
    const id = timerSeq;
    const interval = Math.max(0, Number(delay) || 0);
    timers.push({ id, time: virtualNow + interval, fn, repeats: !!repeats, interval, seq: timerSeq });
    return id;
  }

  function cancelTimer(id) {
    timers = timers.filter((t) => t.id !== id);
  }

  function nextTimer() {
    if (!timers.length) return null;
    timers.sort((a, b) => a.time - b.time || a.seq - b.seq);
    return timers[0];
  }

  // -- context ------------------------------------------------------------------

  const ctx = {};
  const hostBridge = {
    emit: onMessage,
    countApi: (api) => pushEvent('api_call', { api }),
    scheduleTimer,
    cancelTimer,
    now: () => virtualNow,
    atob: (s) => Buffer.from(s, 'base64').toString('binary'),
    btoa: (s) => Buffer.from(s, 'binary').toString('base64'),
    userAgent: () => cfg.user_agent,
    viewport: () => cfg.viewport,
    networkStubs: () => job.network_stubs || {},
    // JSON keeps host-realm objects out of the page: anything reachable
    // from the page must be built inside the context
    locationJson: () => JSON.stringify(locationFor(job.base_url || 'http://sandbox.invalid/')),
    isHidden: (el) => emuApi.isElementHidden(el),
    evalInPage: (code) => {
      try {
        return vm.runInContext(String(code), ctx, { timeout: hardCapLeft() });
      } catch (e) {
        pushEvent('eval', { api: 'engine.error', error: String(e && e.message || e), during: 'string-timer' });
      }
    },
  };
  // configurable so it can be withdrawn once emulation and shim hold it
  // in their closures; pages must never reach host-realm functions
  Object.defineProperty(ctx, '__tsHost', {
    value: hostBridge,
    enumerable: false,
    configurable: true,
  });
  vm.createContext(ctx, { name: 'threatscope-sandbox' });

  function locationFor(url) {
    const m = /^([a-z][a-z0-9+.-]*):\/\/([^/:?#]+)(?::(\d+))?([^?#]*)(\?[^#]*)?(#.*)?$/i.exec(url);
    const proto = m ? m[1] + ':' : 'http:';
    const host = m ? m[2] + (m[3] ? ':' + m[3] : '') : 'sandbox.invalid';
    return {
      href: url,
      protocol: proto,
      host,
      hostname: m ? m[2] : 'sandbox.invalid',
      pathname: m ? m[4] || '/' : '/',
      search: m ? m[5] || '' : '',
      hash: m ? m[6] || '' : '',
      origin: proto + '//' + host,
      toString: () => url,
    };
  }

  const emulationSource = fs.readFileSync(path.join(__dirname, 'dom_emulation.js'), 'utf8');
  const emuApi = vm.runInContext(emulationSource, ctx, {
    filename: 'dom_emulation.js',
    timeout: hardCapLeft(),
  });
  emuApi.initDocument(String(job.html || '<html><body></body></html>'));

  // placeholder for the timer trampoline; created pre-shim so the global
  // diff baseline contains it
  Object.defineProperty(ctx, '__tsPendingCb', {
    value: null,
    enumerable: false,
    writable: true,
  });

  // -- shim install (must precede any page script) --------------------------------

  let camouflageOk = false;
  let shimInfo = {};
  const shimEnabled = cfg.install_shim !== false; // test hook: transparency checks
  try {
    if (!shimEnabled) throw { skip: true };
    if (!job.shim_source) throw new Error('no shim source provided');
    vm.runInContext(job.shim_source, ctx, { filename: 'shim.js', timeout: hardCapLeft() });
    const probe = vm.runInContext(
      '({ guard: !!globalThis.__tsShimGuard, version: __tsShim.version,' +
        ' wrapped: __tsShim.wrappedCount, failures: __tsShim.wrapFailures.slice() })',
      ctx,
      { timeout: hardCapLeft() }
    );
    if (!probe.guard) throw new Error('shim guard missing after install');
    shimInfo = probe;
  } catch (e) {
    if (!(e && e.skip)) {
      return { ok: false, error: 'shim_install_failed: ' + String((e && e.message) || e) };
    }
  }
  // emulation and shim captured the bridge in their closures; withdraw the
  // global so page scripts cannot reach host-realm objects through it
  delete ctx.__tsHost;

  // -- page scripts in document order ----------------------------------------------

  const drainMicrotasks = () => new Promise((resolve) => setImmediate(resolve));

  for (const script of job.scripts || []) {
    if (Date.now() - wallStart > cfg.hard_cap_ms) break;
    try {
      vm.runInContext(String(script.source || ''), ctx, {
        filename: script.name || 'page-script.js',
        timeout: hardCapLeft(),
      });
    } catch (e) {
      pushEvent('eval', {
        api: 'engine.error',
        error: String((e && e.message) || e),
        script: script.name || '',
      });
    }
    await drainMicrotasks();
  }

  // -- virtual event loop -------------------------------------------------------------

  let clicked = false;
  let deadline = cfg.window_ms;

  while (Date.now() - wallStart <= cfg.hard_cap_ms) {
    const timer = nextTimer();
    if (timer && timer.time <= deadline) {
      timers.shift();
      virtualNow = Math.max(virtualNow, timer.time);
      if (timer.repeats) {
        // re-arm, guarding zero-interval storms
        timers.push({
          id: timer.id,
          time: virtualNow + Math.max(1, timer.interval),
          fn: timer.fn,
          repeats: true,
          interval: timer.interval,
          seq: ++timerSeq,
        });
      }
      try {
        ctx.__tsPendingCb = timer.fn;
        vm.runInContext('__tsPendingCb()', ctx, { timeout: hardCapLeft() });
      } catch (e) {
        pushEvent('eval', {
          api: 'engine.error',
          error: String((e && e.message) || e),
          during: 'timer',
        });
      } finally {
        ctx.__tsPendingCb = null;
      }
      await drainMicrotasks();
      continue;
    }

    // queue drained (or next timer beyond the window): settle or interact
    if (
      cfg.simulate_interactions &&
      !clicked &&
      networkEvents === 0 &&
      virtualNow < deadline
    ) {
      clicked = true;
      const target = emuApi.findClickable();
      if (target) {
        deadline = Math.min(cfg.window_ms + cfg.settle_quiet_ms, deadline + cfg.settle_quiet_ms);
        pushEvent('interaction_simulated', {
          api: 'sandbox.click',
          target: emuApi.describeNode(target),
        });
        try {
          emuApi.dispatchClick(target);
        } catch (e) {
          pushEvent('eval', {
            api: 'engine.error',
            error: String((e && e.message) || e),
            during: 'click',
          });
        }
        pushEvent('interaction_simulated', { api: 'sandbox.mousemove', target: 'document' });
        try {
          emuApi.dispatchMouseMove();
        } catch (e) { /* listeners already reported page errors */ }
        await drainMicrotasks();
        continue;
      }
    }
    break; // settled: no runnable timers, nothing more will happen
  }

  if (nextTimer() && nextTimer().time > deadline) {
    virtualNow = deadline; // window consumed by fast-forward limit
  }

  // -- finalize --------------------------------------------------------------------------

  let newGlobals = [];
  if (shimEnabled) {
    try {
      newGlobals = vm.runInContext('__tsShim.finalize()', ctx, { timeout: hardCapLeft() });
      camouflageOk = vm.runInContext('__tsShim.camouflageCheck()', ctx, {
        timeout: hardCapLeft(),
      });
    } catch (e) {
      wrapFailures.push('finalize: ' + String((e && e.message) || e));
    }
  }
  virtualNow = Math.min(Math.max(virtualNow, 0), deadline);
  for (const name of Array.isArray(newGlobals) ? newGlobals : []) {
    pushEvent('global_created', { api: 'newGlobalProperties', name: String(name) });
  }

  return {
    ok: true,
    trace,
    new_globals: Array.isArray(newGlobals) ? newGlobals.map(String) : [],
    camouflage_ok: !!camouflageOk,
    shim: shimInfo,
    wrap_failures: wrapFailures,
    dom: emuApi.serializeDom(),
    title: emuApi.pageTitle(),
    cookie: emuApi.cookieString(),
    storage: emuApi.storageDump(),
    virtual_elapsed: Math.max(virtualNow, 0),
    wall_elapsed: Date.now() - wallStart,
    dropped_at_source: droppedAtSource,
    raw_messages: cfg.capture_raw_messages ? rawMessages : undefined,
    result_var: typeof ctx.__result === 'string' ? ctx.__result : null,
  };
}

main();
