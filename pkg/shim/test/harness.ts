/*
 * Minimal sandbox-context harness for exercising the shim under vitest.
 * Provides just enough host surface: an Element prototype chain with an
 * EventTarget parent, document with cookie accessors, storages, network
 * and timer stubs, and the non-enumerable host bridge.
 */

import { readFileSync } from 'node:fs';
import { join, dirname } from 'node:path';
import { fileURLToPath } from 'node:url';
import vm from 'node:vm';

const here = dirname(fileURLToPath(new URL(import.meta.url)));

export interface ShimMessage {
  type: string;
  payload: Record<string, unknown>;
}

export interface Harness {
  ctx: vm.Context;
  messages: ShimMessage[];
  run(code: string): unknown;
  installShim(): void;
  shimSource: string;
}

const SETUP = `
  (function () {
    'use strict';
    function maskNative(fn, name) {
      Object.defineProperty(fn, 'name', { value: name, configurable: true });
      Object.defineProperty(fn, 'toString', {
        value: function () { return 'function ' + name + '() { [native code] }'; },
        writable: true, configurable: true,
      });
      return fn;
    }

    var EventTargetProto = {
      addEventListener: maskNative(function addEventListener(type, listener) {}, 'addEventListener'),
      removeEventListener: maskNative(function removeEventListener(type, listener) {}, 'removeEventListener'),
    };

    function Element(tag) {
      this.nodeType = 1;
      this.tagName = String(tag).toUpperCase();
      this.attributes = {};
      this.childNodes = [];
      this.textContent = '';
    }
    Element.prototype = Object.create(EventTargetProto);
    Element.prototype.constructor = Element;
    Element.prototype.appendChild = maskNative(function appendChild(child) {
      this.childNodes.push(child); return child;
    }, 'appendChild');
    Element.prototype.insertBefore = maskNative(function insertBefore(child, ref) {
      this.childNodes.push(child); return child;
    }, 'insertBefore');
    Element.prototype.removeChild = maskNative(function removeChild(child) {
      var i = this.childNodes.indexOf(child);
      if (i >= 0) this.childNodes.splice(i, 1);
      return child;
    }, 'removeChild');

    var cookieJar = '';
    var documentObj = Object.create(EventTargetProto);
    documentObj.nodeType = 9;
    documentObj.body = new Element('body');
    documentObj.createElement = maskNative(function createElement(tag) {
      return new Element(tag);
    }, 'createElement');
    Object.defineProperty(documentObj, 'cookie', {
      get: function () { return cookieJar; },
      set: function (value) { cookieJar = String(value).split(';')[0]; },
      configurable: true,
      enumerable: true,
    });

    function makeStorage() {
      var data = {};
      return {
        getItem: maskNative(function getItem(key) {
          return Object.prototype.hasOwnProperty.call(data, key) ? data[key] : null;
        }, 'getItem'),
        setItem: maskNative(function setItem(key, value) { data[String(key)] = String(value); }, 'setItem'),
      };
    }

    function XMLHttpRequest() { this.readyState = 0; }
    XMLHttpRequest.prototype.open = maskNative(function open(method, url) {
      this.readyState = 1;
    }, 'open');
    XMLHttpRequest.prototype.send = maskNative(function send(body) {
      this.readyState = 4;
    }, 'send');
    maskNative(XMLHttpRequest, 'XMLHttpRequest');

    function WebSocket(url) { this.url = String(url || ''); }
    maskNative(WebSocket, 'WebSocket');

    globalThis.window = globalThis;
    globalThis.document = documentObj;
    globalThis.Element = Element;
    globalThis.XMLHttpRequest = XMLHttpRequest;
    globalThis.WebSocket = WebSocket;
    globalThis.localStorage = makeStorage();
    globalThis.sessionStorage = makeStorage();
    globalThis.fetch = maskNative(function fetch(input, init) {
      return Promise.resolve({ status: 204, ok: true });
    }, 'fetch');
    globalThis.setTimeout = maskNative(function setTimeout(cb, delay) { return 1; }, 'setTimeout');
    globalThis.setInterval = maskNative(function setInterval(cb, delay) { return 2; }, 'setInterval');
  })();
`;

export function makeHarness(): Harness {
  const shimSource = readFileSync(join(here, '..', 'dist', 'shim.js'), 'utf8');
  const messages: ShimMessage[] = [];
  const ctx: Record<string, unknown> = {};
  Object.defineProperty(ctx, '__tsHost', {
    value: {
      emit(type: string, payload: Record<string, unknown>): void {
        messages.push({ type, payload: JSON.parse(JSON.stringify(payload ?? {})) });
      },
      isHidden(node: { attributes?: Record<string, string> }): boolean {
        const style = node.attributes?.style ?? '';
        return /display:\s*none|width:\s*0|height:\s*0/.test(style);
      },
    },
    enumerable: false,
  });
  vm.createContext(ctx);
  vm.runInContext(SETUP, ctx);
  return {
    ctx,
    messages,
    shimSource,
    run: (code: string) => vm.runInContext(code, ctx, { timeout: 5000 }),
    installShim: () => void vm.runInContext(shimSource, ctx, { timeout: 5000 }),
  };
}
