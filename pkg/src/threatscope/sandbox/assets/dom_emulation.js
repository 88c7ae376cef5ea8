/*
 * Minimal DOM emulation installed into the sandbox context before the
 * instrumentation shim and any page script.
 *
 * Scope: elements, attributes, tree mutation, querySelector(All),
 * getElementById, innerHTML (shallow parse), the inline style subset
 * {display, visibility, width, height, position, left, top}, cookie
 * string, local/session storage maps, virtual timers (host-scheduled),
 * event listeners, and stubbed network (fetch/XHR/WebSocket resolve from
 * job-local stubs or a synthetic 204; no real egress).
 *
 * Evaluated with vm.runInContext; the completion value is the host-facing
 * API object. `__tsHost` is the non-enumerable host bridge (emit,
 * scheduling, base64 helpers) injected before evaluation.
 */

(function setupEmulation() {
  'use strict';
  var host = __tsHost;
  var g = globalThis;

  // -- masking: emulated natives must look native ---------------------------

  function maskNative(fn, name) {
    try {
      Object.defineProperty(fn, 'name', { value: name, configurable: true });
      Object.defineProperty(fn, 'toString', {
        value: function toString() { return 'function ' + name + '() { [native code] }'; },
        writable: true,
        configurable: true,
      });
    } catch (e) { /* masking is best-effort */ }
    return fn;
  }

  // -- tiny tolerant HTML parser --------------------------------------------

  var VOID_TAGS = { area: 1, base: 1, br: 1, col: 1, embed: 1, hr: 1, img: 1, input: 1, link: 1, meta: 1, param: 1, source: 1, track: 1, wbr: 1 };
  var RAW_TAGS = { script: 1, style: 1 };

  function parseHtml(html) {
    // returns a list of node descriptors {tag, attrs, children} | {text}
    var pos = 0, n = html.length;
    var root = { tag: '#root', attrs: {}, children: [] };
    var stack = [root];

    function top() { return stack[stack.length - 1]; }

    function parseAttrs(chunk) {
      var attrs = {};
      var re = /([^\s=\/>"']+)(?:\s*=\s*("([^"]*)"|'([^']*)'|[^\s>]*))?/g;
      var m;
      while ((m = re.exec(chunk)) !== null) {
        var name = m[1].toLowerCase();
        if (!name || name === '/') continue;
        var value = m[3] !== undefined ? m[3] : (m[4] !== undefined ? m[4] : (m[2] || ''));
        attrs[name] = value;
      }
      return attrs;
    }

    while (pos < n) {
      var lt = html.indexOf('<', pos);
      if (lt < 0) { addText(html.slice(pos)); break; }
      if (lt > pos) addText(html.slice(pos, lt));
      if (html.startsWith('<!--', lt)) {
        var endc = html.indexOf('-->', lt + 4);
        pos = endc < 0 ? n : endc + 3;
        continue;
      }
      if (html[lt + 1] === '!' || html[lt + 1] === '?') {
        var endd = html.indexOf('>', lt);
        pos = endd < 0 ? n : endd + 1;
        continue;
      }
      var gt = html.indexOf('>', lt);
      if (gt < 0) { addText(html.slice(lt)); break; }
      var inner = html.slice(lt + 1, gt);
      pos = gt + 1;
      if (inner[0] === '/') {
        var closeTag = inner.slice(1).trim().toLowerCase();
        for (var i = stack.length - 1; i > 0; i--) {
          if (stack[i].tag === closeTag) { stack.length = i; break; }
        }
        continue;
      }
      var selfClose = /\/\s*$/.test(inner);
      var m2 = /^([a-zA-Z][a-zA-Z0-9:-]*)/.exec(inner);
      if (!m2) { addText('<' + inner + '>'); continue; }
      var tag = m2[1].toLowerCase();
      var node = { tag: tag, attrs: parseAttrs(inner.slice(m2[1].length)), children: [] };
      top().children.push(node);
      if (RAW_TAGS[tag] && !selfClose) {
        var closer = new RegExp('</' + tag + '\\s*>', 'i');
        var rest = html.slice(pos);
        var cm = closer.exec(rest);
        var rawEnd = cm ? pos + cm.index : n;
        node.children.push({ text: html.slice(pos, rawEnd) });
        pos = cm ? rawEnd + cm[0].length : n;
        continue;
      }
      if (!selfClose && !VOID_TAGS[tag]) stack.push(node);
    }

    function addText(text) {
      if (text) top().children.push({ text: text });
    }
    return root;
  }

  // -- style handling ---------------------------------------------------------

  var STYLE_PROPS = ['display', 'visibility', 'width', 'height', 'position', 'left', 'top'];

  function parseStyleAttr(text) {
    var style = {};
    String(text || '').split(';').forEach(function (pair) {
      var idx = pair.indexOf(':');
      if (idx < 0) return;
      var prop = pair.slice(0, idx).trim().toLowerCase();
      var value = pair.slice(idx + 1).trim();
      if (STYLE_PROPS.indexOf(prop) >= 0) style[prop] = value;
    });
    return style;
  }

  // -- event plumbing ---------------------------------------------------------

  function EventImpl(type, init) {
    this.type = type;
    this.target = null;
    this.currentTarget = null;
    this.isTrusted = !!(init && init.isTrusted);
    this.defaultPrevented = false;
    this.bubbles = !init || init.bubbles !== false;
  }
  EventImpl.prototype.preventDefault = function () { this.defaultPrevented = true; };
  EventImpl.prototype.stopPropagation = function () { this.bubbles = false; };

  var EventTargetProto = {};

  EventTargetProto.addEventListener = maskNative(function addEventListener(type, listener) {
    if (!this.__listeners) {
      Object.defineProperty(this, '__listeners', { value: {}, enumerable: false, writable: true });
    }
    (this.__listeners[type] = this.__listeners[type] || []).push(listener);
  }, 'addEventListener');

  EventTargetProto.removeEventListener = maskNative(function removeEventListener(type, listener) {
    var list = this.__listeners && this.__listeners[type];
    if (!list) return;
    var idx = list.indexOf(listener);
    if (idx >= 0) list.splice(idx, 1);
  }, 'removeEventListener');

  EventTargetProto.dispatchEvent = maskNative(function dispatchEvent(event) {
    var node = this;
    event.target = event.target || this;
    while (node) {
      event.currentTarget = node;
      var list = node.__listeners && node.__listeners[event.type];
      if (list) {
        list.slice().forEach(function (listener) {
          try {
            if (typeof listener === 'function') listener.call(node, event);
            else if (listener && typeof listener.handleEvent === 'function') listener.handleEvent(event);
          } catch (e) {
            host.emit('pageError', { error: String(e && e.message || e), during: 'listener:' + event.type });
          }
        });
      }
      var inline = node['on' + event.type];
      if (typeof inline === 'function') {
        try { inline.call(node, event); } catch (e) {
          host.emit('pageError', { error: String(e && e.message || e), during: 'on' + event.type });
        }
      }
      var attrCode = node.attributes && node.attributes['on' + event.type];
      if (attrCode) {
        try { host.evalInPage(attrCode); } catch (e) { /* reported by host */ }
      }
      if (!event.bubbles) break;
      node = node.parentNode || null;
    }
    return !event.defaultPrevented;
  }, 'dispatchEvent');

  // -- element -----------------------------------------------------------------

  function TextNode(data) {
    this.nodeType = 3;
    this.data = String(data);
    this.parentNode = null;
  }
  Object.defineProperty(TextNode.prototype, 'textContent', {
    get: function () { return this.data; },
    set: function (v) { this.data = String(v); },
  });

  var elementCounter = 0;

  function Element(tagName) {
    this.nodeType = 1;
    this.tagName = String(tagName).toUpperCase();
    this.attributes = {};
    this.style = {};
    this.childNodes = [];
    this.parentNode = null;
    this.__uid = ++elementCounter;
  }
  Element.prototype = Object.create(EventTargetProto);
  Element.prototype.constructor = Element;

  function syncStyleFromAttr(el) {
    el.style = parseStyleAttr(el.attributes.style);
  }

  Element.prototype.getAttribute = maskNative(function getAttribute(name) {
    name = String(name).toLowerCase();
    return Object.prototype.hasOwnProperty.call(this.attributes, name) ? this.attributes[name] : null;
  }, 'getAttribute');

  Element.prototype.setAttribute = maskNative(function setAttribute(name, value) {
    name = String(name).toLowerCase();
    this.attributes[name] = String(value);
    if (name === 'style') syncStyleFromAttr(this);
    host.countApi('Element.setAttribute');
  }, 'setAttribute');

  Element.prototype.hasAttribute = maskNative(function hasAttribute(name) {
    return Object.prototype.hasOwnProperty.call(this.attributes, String(name).toLowerCase());
  }, 'hasAttribute');

  Element.prototype.removeAttribute = maskNative(function removeAttribute(name) {
    delete this.attributes[String(name).toLowerCase()];
  }, 'removeAttribute');

  Element.prototype.appendChild = maskNative(function appendChild(child) {
    if (child.parentNode) removeFromParent(child);
    this.childNodes.push(child);
    child.parentNode = this;
    return child;
  }, 'appendChild');

  Element.prototype.insertBefore = maskNative(function insertBefore(child, ref) {
    if (child.parentNode) removeFromParent(child);
    var idx = ref ? this.childNodes.indexOf(ref) : -1;
    if (idx < 0) this.childNodes.push(child);
    else this.childNodes.splice(idx, 0, child);
    child.parentNode = this;
    return child;
  }, 'insertBefore');

  Element.prototype.removeChild = maskNative(function removeChild(child) {
    var idx = this.childNodes.indexOf(child);
    if (idx < 0) throw new Error('NotFoundError: node is not a child');
    this.childNodes.splice(idx, 1);
    child.parentNode = null;
    return child;
  }, 'removeChild');

  Element.prototype.cloneNode = maskNative(function cloneNode(deep) {
    host.countApi('Node.cloneNode');
    var copy = new Element(this.tagName);
    copy.attributes = Object.assign({}, this.attributes);
    syncStyleFromAttr(copy);
    if (deep) {
      this.childNodes.forEach(function (child) {
        copy.childNodes.push(child.nodeType === 3 ? new TextNode(child.data) : child.cloneNode(true));
      });
      copy.childNodes.forEach(function (child) { child.parentNode = copy; });
    }
    return copy;
  }, 'cloneNode');

  Element.prototype.click = maskNative(function click() {
    return this.dispatchEvent(new EventImpl('click', { isTrusted: true }));
  }, 'click');

  Element.prototype.getElementsByTagName = maskNative(function getElementsByTagName(tag) {
    host.countApi('Document.getElementsByTagName');
    var want = String(tag).toUpperCase();
    var out = [];
    walkTree(this, function (el) {
      if (want === '*' || el.tagName === want) out.push(el);
    });
    return out;
  }, 'getElementsByTagName');

  Element.prototype.querySelector = maskNative(function querySelector(sel) {
    host.countApi('Document.querySelector');
    return queryAll(this, sel)[0] || null;
  }, 'querySelector');

  Element.prototype.querySelectorAll = maskNative(function querySelectorAll(sel) {
    host.countApi('Document.querySelectorAll');
    return queryAll(this, sel);
  }, 'querySelectorAll');

  function removeFromParent(node) {
    var parent = node.parentNode;
    if (!parent) return;
    var idx = parent.childNodes.indexOf(node);
    if (idx >= 0) parent.childNodes.splice(idx, 1);
    node.parentNode = null;
  }

  function walkTree(root, fn) {
    var stack = root.childNodes.slice().reverse();
    while (stack.length) {
      var node = stack.pop();
      if (node.nodeType === 1) {
        fn(node);
        for (var i = node.childNodes.length - 1; i >= 0; i--) stack.push(node.childNodes[i]);
      }
    }
  }

  Object.defineProperty(Element.prototype, 'id', {
    get: function () { return this.attributes.id || ''; },
    set: function (v) { this.attributes.id = String(v); },
  });
  Object.defineProperty(Element.prototype, 'className', {
    get: function () { return this.attributes['class'] || ''; },
    set: function (v) { this.attributes['class'] = String(v); },
  });
  ['src', 'href', 'type', 'name', 'value', 'action', 'width', 'height'].forEach(function (prop) {
    Object.defineProperty(Element.prototype, prop, {
      get: function () { var v = this.attributes[prop]; return v === undefined ? '' : v; },
      set: function (v) { this.attributes[prop] = String(v); },
    });
  });
  Object.defineProperty(Element.prototype, 'textContent', {
    get: function () {
      var parts = [];
      (function collect(node) {
        node.childNodes.forEach(function (child) {
          if (child.nodeType === 3) parts.push(child.data);
          else collect(child);
        });
      })(this);
      return parts.join('');
    },
    set: function (v) {
      this.childNodes = [];
      if (v !== '' && v !== null && v !== undefined) this.appendChild(new TextNode(v));
    },
  });
  Object.defineProperty(Element.prototype, 'innerText', {
    get: function () { return this.textContent; },
    set: function (v) { this.textContent = v; },
  });
  Object.defineProperty(Element.prototype, 'innerHTML', {
    get: function () { return ''; },
    set: function (html) {
      // shallow parse: children replaced by the parsed fragment
      var desc = parseHtml(String(html));
      var self = this;
      self.childNodes = [];
      desc.children.forEach(function (childDesc) {
        self.appendChild(buildNode(childDesc));
      });
      host.emit('domInnerHtml', { tag: this.tagName.toLowerCase(), length: String(html).length });
    },
  });
  Object.defineProperty(Element.prototype, 'children', {
    get: function () {
      return this.childNodes.filter(function (c) { return c.nodeType === 1; });
    },
  });
  Object.defineProperty(Element.prototype, 'firstChild', {
    get: function () { return this.childNodes[0] || null; },
  });
  Object.defineProperty(Element.prototype, 'ownerDocument', {
    get: function () { return documentObj; },
  });

  // -- selectors ----------------------------------------------------------------

  function parseSimpleSelector(sel) {
    // tag, #id, .class, [attr], [attr=value] compounds
    var spec = { tag: null, id: null, classes: [], attrs: [] };
    var re = /([a-zA-Z][a-zA-Z0-9-]*|\*)|#([\w-]+)|\.([\w-]+)|\[([\w-]+)(?:=("[^"]*"|'[^']*'|[^\]]*))?\]/g;
    var m;
    while ((m = re.exec(sel)) !== null) {
      if (m[1]) spec.tag = m[1] === '*' ? null : m[1].toUpperCase();
      else if (m[2]) spec.id = m[2];
      else if (m[3]) spec.classes.push(m[3]);
      else if (m[4]) {
        var raw = m[5];
        if (raw && (raw[0] === '"' || raw[0] === "'")) raw = raw.slice(1, -1);
        spec.attrs.push([m[4].toLowerCase(), raw === undefined ? null : raw]);
      }
    }
    return spec;
  }

  function matches(el, spec) {
    if (spec.tag && el.tagName !== spec.tag) return false;
    if (spec.id && el.attributes.id !== spec.id) return false;
    for (var i = 0; i < spec.classes.length; i++) {
      var classes = (el.attributes['class'] || '').split(/\s+/);
      if (classes.indexOf(spec.classes[i]) < 0) return false;
    }
    for (var j = 0; j < spec.attrs.length; j++) {
      var name = spec.attrs[j][0], want = spec.attrs[j][1];
      if (!Object.prototype.hasOwnProperty.call(el.attributes, name)) return false;
      if (want !== null && el.attributes[name] !== want) return false;
    }
    return true;
  }

  function queryAll(root, selector) {
    var out = [];
    String(selector).split(',').forEach(function (part) {
      var chain = part.trim().split(/\s+/).map(parseSimpleSelector);
      walkTree(root, function (el) {
        if (!matches(el, chain[chain.length - 1])) return;
        // verify ancestor chain for descendant combinators
        var idx = chain.length - 2;
        var node = el.parentNode;
        while (idx >= 0 && node && node.nodeType === 1) {
          if (matches(node, chain[idx])) idx--;
          node = node.parentNode;
        }
        if (idx < 0 && out.indexOf(el) < 0) out.push(el);
      });
    });
    return out;
  }

  // -- document -------------------------------------------------------------------

  function buildNode(desc) {
    if ('text' in desc) return new TextNode(desc.text);
    var el = new Element(desc.tag);
    el.attributes = desc.attrs || {};
    syncStyleFromAttr(el);
    (desc.children || []).forEach(function (childDesc) {
      var child = buildNode(childDesc);
      el.childNodes.push(child);
      child.parentNode = el;
    });
    return el;
  }

  var documentObj = Object.create(EventTargetProto);
  documentObj.nodeType = 9;
  var cookieString = '';

  function initDocument(html) {
    var rootDesc = parseHtml(html);
    var htmlEl = null;
    rootDesc.children.forEach(function (desc) {
      if (desc.tag === 'html') htmlEl = buildNode(desc);
    });
    if (!htmlEl) {
      htmlEl = new Element('html');
      var bodyAll = new Element('body');
      htmlEl.appendChild(bodyAll);
      rootDesc.children.forEach(function (desc) {
        bodyAll.appendChild(buildNode(desc));
      });
    }
    var head = null, body = null;
    htmlEl.childNodes.forEach(function (child) {
      if (child.nodeType !== 1) return;
      if (child.tagName === 'HEAD') head = child;
      if (child.tagName === 'BODY') body = child;
    });
    if (!head) { head = new Element('head'); htmlEl.insertBefore(head, htmlEl.childNodes[0] || null); }
    if (!body) { body = new Element('body'); htmlEl.appendChild(body); }
    documentObj.documentElement = htmlEl;
    documentObj.head = head;
    documentObj.body = body;
  }

  documentObj.createElement = maskNative(function createElement(tag) {
    host.countApi('Document.createElement');
    return new Element(tag);
  }, 'createElement');
  documentObj.createTextNode = maskNative(function createTextNode(data) {
    return new TextNode(data);
  }, 'createTextNode');
  documentObj.getElementById = maskNative(function getElementById(id) {
    host.countApi('Document.getElementById');
    var found = null;
    walkTree(documentObj.documentElement, function (el) {
      if (!found && el.attributes.id === String(id)) found = el;
    });
    return found;
  }, 'getElementById');
  documentObj.querySelector = maskNative(function querySelector(sel) {
    host.countApi('Document.querySelector');
    return queryAll(documentObj.documentElement, sel)[0] || null;
  }, 'querySelector');
  documentObj.querySelectorAll = maskNative(function querySelectorAll(sel) {
    host.countApi('Document.querySelectorAll');
    return queryAll(documentObj.documentElement, sel);
  }, 'querySelectorAll');
  documentObj.getElementsByTagName = maskNative(function getElementsByTagName(tag) {
    host.countApi('Document.getElementsByTagName');
    return documentObj.documentElement.getElementsByTagName
      ? Element.prototype.getElementsByTagName.call(documentObj.documentElement, tag)
      : [];
  }, 'getElementsByTagName');
  documentObj.appendChild = Element.prototype.appendChild;
  documentObj.removeChild = Element.prototype.removeChild;
  Object.defineProperty(documentObj, 'title', {
    get: function () {
      var titles = queryAll(documentObj.documentElement, 'title');
      return titles.length ? titles[0].textContent : '';
    },
    configurable: true,
  });
  Object.defineProperty(documentObj, 'cookie', {
    get: function () { return cookieString; },
    set: function (value) {
      var pair = String(value).split(';')[0];
      if (!pair) return;
      var name = pair.split('=')[0].trim();
      var parts = cookieString ? cookieString.split('; ').filter(function (p) {
        return p.split('=')[0] !== name;
      }) : [];
      parts.push(pair.trim());
      cookieString = parts.join('; ');
    },
    configurable: true,
    enumerable: true,
  });

  // -- storage ---------------------------------------------------------------------

  function makeStorage(label) {
    var data = {};
    var storage = {};
    storage.getItem = maskNative(function getItem(key) {
      return Object.prototype.hasOwnProperty.call(data, key) ? data[key] : null;
    }, 'getItem');
    storage.setItem = maskNative(function setItem(key, value) {
      data[String(key)] = String(value);
    }, 'setItem');
    storage.removeItem = maskNative(function removeItem(key) { delete data[key]; }, 'removeItem');
    storage.clear = maskNative(function clear() { data = {}; }, 'clear');
    Object.defineProperty(storage, '__dump', { value: function () { return data; }, enumerable: false });
    Object.defineProperty(storage, '__label', { value: label, enumerable: false });
    return storage;
  }

  // -- network stubs -----------------------------------------------------------------

  function stubResponseFor(url) {
    var stubs = host.networkStubs() || {};
    for (var prefix in stubs) {
      if (String(url).indexOf(prefix) === 0) {
        return { status: stubs[prefix].status || 200, body: String(stubs[prefix].body || '') };
      }
    }
    return { status: 204, body: '' };
  }

  function makeResponse(url, stub) {
    return {
      url: String(url),
      status: stub.status,
      ok: stub.status >= 200 && stub.status < 300,
      text: maskNative(function text() { return Promise.resolve(stub.body); }, 'text'),
      json: maskNative(function json() {
        try { return Promise.resolve(JSON.parse(stub.body || 'null')); }
        catch (e) { return Promise.reject(new Error('invalid json')); }
      }, 'json'),
    };
  }

  var fetchImpl = maskNative(function fetch(input, init) {
    var url = typeof input === 'string' ? input : (input && input.url) || '';
    return Promise.resolve(makeResponse(url, stubResponseFor(url)));
  }, 'fetch');

  function XMLHttpRequest() {
    this.readyState = 0;
    this.status = 0;
    this.responseText = '';
    this.onreadystatechange = null;
    this.onload = null;
    this.onerror = null;
  }
  XMLHttpRequest.prototype.open = maskNative(function open(method, url) {
    this.__method = String(method || 'GET').toUpperCase();
    this.__url = String(url || '');
    this.readyState = 1;
  }, 'open');
  XMLHttpRequest.prototype.setRequestHeader = maskNative(function setRequestHeader() {}, 'setRequestHeader');
  XMLHttpRequest.prototype.send = maskNative(function send(body) {
    var xhr = this;
    var stub = stubResponseFor(xhr.__url);
    host.scheduleTimer(function () {
      xhr.readyState = 4;
      xhr.status = stub.status;
      xhr.responseText = stub.body;
      if (typeof xhr.onreadystatechange === 'function') { try { xhr.onreadystatechange(); } catch (e) {} }
      if (typeof xhr.onload === 'function') { try { xhr.onload(); } catch (e) {} }
    }, 0, false);
  }, 'send');
  maskNative(XMLHttpRequest, 'XMLHttpRequest');

  function WebSocket(url) {
    this.url = String(url || '');
    this.readyState = 0; // CONNECTING, never progresses: no real egress
    this.send = maskNative(function send() {}, 'send');
    this.close = maskNative(function close() {}, 'close');
    this.addEventListener = EventTargetProto.addEventListener;
    this.removeEventListener = EventTargetProto.removeEventListener;
  }
  maskNative(WebSocket, 'WebSocket');

  // -- timers -------------------------------------------------------------------------

  function runStringOrFn(code) {
    if (typeof code === 'function') return code;
    var text = String(code);
    return function () { host.evalInPage(text); };
  }

  var setTimeoutImpl = maskNative(function setTimeout(cb, delay) {
    var extra = Array.prototype.slice.call(arguments, 2);
    var fn = runStringOrFn(cb);
    return host.scheduleTimer(function () { fn.apply(g, extra); }, Number(delay) || 0, false);
  }, 'setTimeout');
  var setIntervalImpl = maskNative(function setInterval(cb, delay) {
    var extra = Array.prototype.slice.call(arguments, 2);
    var fn = runStringOrFn(cb);
    return host.scheduleTimer(function () { fn.apply(g, extra); }, Number(delay) || 0, true);
  }, 'setInterval');
  var clearTimerImpl = maskNative(function clearTimeout(id) { host.cancelTimer(id); }, 'clearTimeout');
  var clearIntervalImpl = maskNative(function clearInterval(id) { host.cancelTimer(id); }, 'clearInterval');

  // -- navigator / misc ------------------------------------------------------------------

  var navigatorObj = {
    userAgent: host.userAgent(),
    language: 'en-US',
    languages: ['en-US', 'en'],
    platform: 'Win32',
    webdriver: false,
    cookieEnabled: true,
    geolocation: {
      getCurrentPosition: maskNative(function getCurrentPosition(success, error) {
        host.emit('geolocation', { api: 'navigator.geolocation.getCurrentPosition' });
        if (typeof error === 'function') {
          host.scheduleTimer(function () {
            error({ code: 1, message: 'User denied Geolocation' });
          }, 0, false);
        }
      }, 'getCurrentPosition'),
    },
  };

  function MutationObserverStub(callback) { this.__cb = callback; }
  MutationObserverStub.prototype.observe = maskNative(function observe() {}, 'observe');
  MutationObserverStub.prototype.disconnect = maskNative(function disconnect() {}, 'disconnect');
  MutationObserverStub.prototype.takeRecords = maskNative(function takeRecords() { return []; }, 'takeRecords');
  maskNative(MutationObserverStub, 'MutationObserver');

  // -- install globals ---------------------------------------------------------------------

  g.window = g;
  g.self = g;
  g.top = g;
  g.parent = g;
  g.document = documentObj;
  g.navigator = navigatorObj;
  // parsed in-realm: the page must never see a host-realm object
  g.location = JSON.parse(host.locationJson());
  g.location.toString = maskNative(function toString() { return g.location.href; }, 'toString');
  g.screen = { width: host.viewport().width, height: host.viewport().height, availWidth: host.viewport().width, availHeight: host.viewport().height };
  g.innerWidth = host.viewport().width;
  g.innerHeight = host.viewport().height;
  g.fetch = fetchImpl;
  g.XMLHttpRequest = XMLHttpRequest;
  g.WebSocket = WebSocket;
  g.setTimeout = setTimeoutImpl;
  g.setInterval = setIntervalImpl;
  g.clearTimeout = clearTimerImpl;
  g.clearInterval = clearIntervalImpl;
  g.localStorage = makeStorage('localStorage');
  g.sessionStorage = makeStorage('sessionStorage');
  g.Element = Element;
  g.Node = Element;
  g.Event = maskNative(EventImpl, 'Event');
  g.MouseEvent = maskNative(EventImpl, 'MouseEvent');
  g.KeyboardEvent = maskNative(EventImpl, 'KeyboardEvent');
  g.MutationObserver = MutationObserverStub;
  g.atob = maskNative(function atob(s) { return host.atob(String(s)); }, 'atob');
  g.btoa = maskNative(function btoa(s) { return host.btoa(String(s)); }, 'btoa');
  g.console = {
    log: maskNative(function log() {}, 'log'),
    warn: maskNative(function warn() {}, 'warn'),
    error: maskNative(function error() {}, 'error'),
    info: maskNative(function info() {}, 'info'),
    debug: maskNative(function debug() {}, 'debug'),
  };
  g.alert = maskNative(function alert() {}, 'alert');
  g.confirm = maskNative(function confirm() { return false; }, 'confirm');
  g.prompt = maskNative(function prompt() { return null; }, 'prompt');
  g.requestAnimationFrame = maskNative(function requestAnimationFrame(cb) {
    return host.scheduleTimer(function () { cb(host.now()); }, 16, false);
  }, 'requestAnimationFrame');

  // -- host-facing API -------------------------------------------------------------------

  function serializeNode(node) {
    if (node.nodeType === 3) return { text: node.data };
    var out = {
      tag: node.tagName.toLowerCase(),
      attrs: Object.assign({}, node.attributes),
      style: Object.assign({}, node.style),
      children: node.childNodes.map(serializeNode),
    };
    return out;
  }

  function isElementHidden(el) {
    var s = el.style || {};
    if (s.display === 'none' || s.visibility === 'hidden') return true;
    var w = s.width !== undefined ? parseFloat(s.width) : (el.attributes.width !== undefined ? parseFloat(el.attributes.width) : NaN);
    var h = s.height !== undefined ? parseFloat(s.height) : (el.attributes.height !== undefined ? parseFloat(el.attributes.height) : NaN);
    if (w === 0 || h === 0) return true;
    if (s.position === 'absolute' || s.position === 'fixed') {
      var left = parseFloat(s.left), top = parseFloat(s.top);
      var vp = host.viewport();
      if (left <= -vp.width || top <= -vp.height || left >= vp.width || top >= vp.height) return true;
    }
    if (el.attributes.hidden !== undefined) return true;
    return false;
  }

  function findClickable() {
    var candidates = [];
    walkTree(documentObj.documentElement, function (el) {
      var clickable =
        el.tagName === 'BUTTON' ||
        (el.tagName === 'INPUT' && (el.attributes.type === 'submit' || el.attributes.type === 'button')) ||
        el.tagName === 'A' ||
        typeof el.onclick === 'function' ||
        el.attributes.onclick !== undefined ||
        (el.__listeners && el.__listeners.click && el.__listeners.click.length);
      if (clickable && !isElementHidden(el)) candidates.push(el);
    });
    if (!candidates.length) return null;
    // prominence: prefer buttons/submits with listeners, then links
    candidates.sort(function (a, b) {
      function rank(el) {
        var hasHandler =
          (el.__listeners && el.__listeners.click && el.__listeners.click.length) ||
          typeof el.onclick === 'function' ||
          el.attributes.onclick !== undefined;
        var base = el.tagName === 'BUTTON' ? 3 : el.tagName === 'INPUT' ? 2 : 1;
        return base + (hasHandler ? 4 : 0);
      }
      return rank(b) - rank(a) || a.__uid - b.__uid;
    });
    return candidates[0];
  }

  return {
    initDocument: initDocument,
    serializeDom: function () { return serializeNode(documentObj.documentElement); },
    describeNode: function (el) {
      return el ? el.tagName.toLowerCase() + (el.attributes.id ? '#' + el.attributes.id : '') : '';
    },
    isElementHidden: isElementHidden,
    findClickable: findClickable,
    dispatchClick: function (el) { return el.click(); },
    dispatchMouseMove: function () {
      return documentObj.dispatchEvent(new EventImpl('mousemove', { isTrusted: true }));
    },
    cookieString: function () { return cookieString; },
    storageDump: function () {
      return { localStorage: g.localStorage.__dump(), sessionStorage: g.sessionStorage.__dump() };
    },
    pageTitle: function () { return documentObj.title; },
  };
})()
