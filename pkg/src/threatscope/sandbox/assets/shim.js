"use strict";
/*
 * Instrumentation shim, version shim/1.0.0.
 *
 * Self-contained script evaluated inside the sandbox context before any
 * page script. Wraps host APIs with Proxy interceptors that (a) emit a
 * structured message over the host-bound channel, (b) delegate to the
 * original with unchanged arguments, and (c) return the original result.
 * Wrapped functions keep name/length and stringify to native code so the
 * page cannot fingerprint the hooks cheaply.
 *
 * Message payloads are JSON-serializable and capped at 4 KiB per field.
 * A single guard flag (__tsShimGuard, non-enumerable) makes install
 * idempotent; it is excluded from the new-global diff.
 *
 * This file has no imports: the compiled output is the single script
 * asset the sandbox engine loads.
 */
(function installShim() {
    'use strict';
    const g = globalThis;
    if (g.__tsShimGuard)
        return; // idempotent: wrap exactly once
    const VERSION = 'shim/1.0.0';
    const host = g.__tsHost;
    const failures = [];
    const wrappedRegistry = [];
    const EXCERPT_LIMIT = 4096;
    function excerpt(value) {
        const text = String(value === undefined ? '' : value);
        return text.length > EXCERPT_LIMIT ? text.slice(0, EXCERPT_LIMIT) : text;
    }
    function emit(type, payload) {
        try {
            host.emit(type, payload);
        }
        catch (e) {
            /* never break the page */
        }
    }
    function wrapMethod(owner, name, onApply) {
        try {
            const original = owner[name];
            if (typeof original !== 'function')
                throw new Error('not a function: ' + name);
            const proxy = new Proxy(original, {
                apply(target, thisArg, argumentsList) {
                    try {
                        onApply(thisArg, argumentsList);
                    }
                    catch (e) {
                        /* swallow */
                    }
                    return Reflect.apply(target, thisArg, argumentsList);
                },
            });
            owner[name] = proxy;
            wrappedRegistry.push({ owner, name, original });
        }
        catch (e) {
            failures.push(name + ': ' + String(e?.message ?? e));
        }
    }
    function wrapConstructor(name, onConstruct) {
        try {
            const original = g[name];
            if (typeof original !== 'function')
                throw new Error('not a constructor: ' + name);
            const proxy = new Proxy(original, {
                construct(target, argumentsList, newTarget) {
                    try {
                        onConstruct(argumentsList);
                    }
                    catch (e) {
                        /* swallow */
                    }
                    return Reflect.construct(target, argumentsList, newTarget);
                },
                apply(target, thisArg, argumentsList) {
                    try {
                        onConstruct(argumentsList);
                    }
                    catch (e) {
                        /* swallow */
                    }
                    return Reflect.apply(target, thisArg, argumentsList);
                },
            });
            g[name] = proxy;
            wrappedRegistry.push({ owner: g, name, original });
        }
        catch (e) {
            failures.push(name + ': ' + String(e?.message ?? e));
        }
    }
    // -- network ---------------------------------------------------------------
    wrapMethod(g, 'fetch', (thisArg, argumentsList) => {
        const input = argumentsList[0];
        const url = typeof input === 'string'
            ? input
            : String(input?.url ?? '');
        const init = argumentsList[1];
        const method = init && init.method ? init.method : 'GET';
        emit('logFetch', { url: excerpt(url), method: String(method).toUpperCase() });
    });
    const xhrCtor = g.XMLHttpRequest;
    if (xhrCtor && xhrCtor.prototype) {
        const xhrProto = xhrCtor.prototype;
        wrapMethod(xhrProto, 'open', (thisArg, argumentsList) => {
            try {
                Object.defineProperty(thisArg, '__tsXhr', {
                    value: {
                        method: String(argumentsList[0] ?? 'GET').toUpperCase(),
                        url: excerpt(argumentsList[1] ?? ''),
                    },
                    enumerable: false,
                    configurable: true,
                    writable: true,
                });
            }
            catch (e) {
                /* swallow */
            }
        });
        wrapMethod(xhrProto, 'send', (thisArg, argumentsList) => {
            const info = (thisArg?.__tsXhr) ?? { method: 'GET', url: '' };
            emit('logXhr', {
                url: info.url,
                method: info.method,
                bodyBytes: argumentsList[0] ? String(argumentsList[0]).length : 0,
            });
        });
    }
    wrapConstructor('WebSocket', (argumentsList) => {
        emit('logWebSocket', { url: excerpt(argumentsList[0] ?? '') });
    });
    // -- eval --------------------------------------------------------------------
    wrapMethod(g, 'eval', (thisArg, argumentsList) => {
        emit('logEval', { code: excerpt(argumentsList[0]) });
    });
    // -- DOM mutation ---------------------------------------------------------------
    const ATTR_SUBSET = {
        IFRAME: ['src', 'width', 'height', 'style'],
        INPUT: ['type', 'name', 'autocomplete', 'style'],
        FORM: ['action', 'method', 'autocomplete', 'style'],
        SCRIPT: ['src', 'type'],
    };
    function nodeSummary(node) {
        if (!node || node.nodeType !== 1) {
            return { tag: '#text', attrs: {}, hidden: false };
        }
        const picked = {};
        const wanted = ATTR_SUBSET[node.tagName] || ['id', 'style'];
        for (let i = 0; i < wanted.length; i++) {
            const name = wanted[i];
            if (node.attributes && Object.prototype.hasOwnProperty.call(node.attributes, name)) {
                picked[name] = excerpt(node.attributes[name]);
            }
        }
        let hidden = false;
        try {
            hidden = host.isHidden(node);
        }
        catch (e) {
            /* swallow */
        }
        return { tag: node.tagName.toLowerCase(), attrs: picked, hidden };
    }
    function logMutation(action, node, api) {
        if (node && node.nodeType === 1 && node.tagName === 'SCRIPT' && action === 'insert') {
            emit('logScriptAppend', {
                src: excerpt((node.attributes && node.attributes.src) || ''),
                content: excerpt(node.textContent || ''),
                api,
            });
            return;
        }
        const summary = nodeSummary(node);
        emit('logDomMutation', {
            action,
            tag: summary.tag,
            attrs: summary.attrs,
            hidden: summary.hidden,
            api,
        });
    }
    const elementCtor = g.Element;
    if (elementCtor && elementCtor.prototype) {
        const elementProto = elementCtor.prototype;
        wrapMethod(elementProto, 'appendChild', (thisArg, argumentsList) => {
            logMutation('insert', argumentsList[0], 'Node.appendChild');
        });
        wrapMethod(elementProto, 'insertBefore', (thisArg, argumentsList) => {
            logMutation('insert', argumentsList[0], 'Node.insertBefore');
        });
        wrapMethod(elementProto, 'removeChild', (thisArg, argumentsList) => {
            logMutation('remove', argumentsList[0], 'Node.removeChild');
        });
    }
    // -- cookies ------------------------------------------------------------------------
    try {
        const documentObj = g.document;
        const cookieDesc = Object.getOwnPropertyDescriptor(documentObj, 'cookie');
        if (cookieDesc && cookieDesc.get && cookieDesc.set) {
            const getCookie = cookieDesc.get;
            const setCookie = cookieDesc.set;
            Object.defineProperty(documentObj, 'cookie', {
                get() {
                    emit('logCookie', { op: 'read' });
                    return getCookie.call(documentObj);
                },
                set(value) {
                    emit('logCookie', { op: 'write', value: excerpt(value) });
                    setCookie.call(documentObj, value);
                },
                configurable: true,
                enumerable: cookieDesc.enumerable,
            });
        }
        else {
            failures.push('cookie: accessor pair not found');
        }
    }
    catch (e) {
        failures.push('cookie: ' + String(e?.message ?? e));
    }
    // -- storage -------------------------------------------------------------------------
    ['localStorage', 'sessionStorage'].forEach((area) => {
        const storage = g[area];
        if (!storage) {
            failures.push(area + ': missing');
            return;
        }
        wrapMethod(storage, 'getItem', (thisArg, argumentsList) => {
            emit('logStorage', { area, op: 'get', key: excerpt(argumentsList[0]) });
        });
        wrapMethod(storage, 'setItem', (thisArg, argumentsList) => {
            emit('logStorage', {
                area,
                op: 'set',
                key: excerpt(argumentsList[0]),
                value: excerpt(argumentsList[1]),
            });
        });
    });
    // -- timers ---------------------------------------------------------------------------
    wrapMethod(g, 'setTimeout', (thisArg, argumentsList) => {
        emit('logTimer', {
            api: 'window.setTimeout',
            delay: Number(argumentsList[1]) || 0,
            repeats: false,
            stringBody: typeof argumentsList[0] === 'string',
        });
    });
    wrapMethod(g, 'setInterval', (thisArg, argumentsList) => {
        emit('logTimer', {
            api: 'window.setInterval',
            delay: Number(argumentsList[1]) || 0,
            repeats: true,
            stringBody: typeof argumentsList[0] === 'string',
        });
    });
    // -- listeners -------------------------------------------------------------------------
    // registration is logged; keystroke/mouse payloads are never captured
    const eventTargetProto = elementCtor && elementCtor.prototype
        ? Object.getPrototypeOf(elementCtor.prototype)
        : null;
    if (eventTargetProto && typeof eventTargetProto.addEventListener === 'function') {
        wrapMethod(eventTargetProto, 'addEventListener', (thisArg, argumentsList) => {
            emit('logListener', { op: 'add', event: excerpt(argumentsList[0]) });
        });
        wrapMethod(eventTargetProto, 'removeEventListener', (thisArg, argumentsList) => {
            emit('logListener', { op: 'remove', event: excerpt(argumentsList[0]) });
        });
    }
    else {
        failures.push('addEventListener: prototype not found');
    }
    // -- global baseline & finalize -----------------------------------------------------------
    const baseline = Object.getOwnPropertyNames(g);
    const baselineSet = {};
    for (let i = 0; i < baseline.length; i++)
        baselineSet[baseline[i]] = true;
    function camouflageCheck() {
        for (let i = 0; i < wrappedRegistry.length; i++) {
            const entry = wrappedRegistry[i];
            const current = entry.owner[entry.name];
            try {
                if (String(current).indexOf('native code') < 0)
                    return false;
                if (current.name !== entry.original.name)
                    return false;
                if (current.length !== entry.original.length)
                    return false;
            }
            catch (e) {
                return false;
            }
        }
        return true;
    }
    function finalize() {
        const names = Object.getOwnPropertyNames(g);
        const added = [];
        for (let i = 0; i < names.length; i++) {
            const name = names[i];
            if (baselineSet[name])
                continue;
            if (name === '__tsShimGuard' || name === '__tsShim')
                continue; // guard excluded from diff
            added.push(name);
        }
        emit('logGlobalDiff', { added, wrapFailures: failures.slice() });
        return added;
    }
    if (failures.length) {
        // report wrap problems once, without breaking the page
        emit('logGlobalDiff', { added: [], wrapFailures: failures.slice() });
    }
    const control = {
        version: VERSION,
        finalize,
        camouflageCheck,
        wrapFailures: failures,
        wrappedCount: wrappedRegistry.length,
    };
    // a hostile page must not be able to swap finalize/camouflageCheck or
    // retouch the failure list
    Object.freeze(failures);
    Object.freeze(control);
    Object.defineProperty(g, '__tsShimGuard', {
        value: true,
        enumerable: false,
        configurable: false,
        writable: false,
    });
    Object.defineProperty(g, '__tsShim', {
        value: control,
        enumerable: false,
        configurable: false,
        writable: false,
    });
})();
