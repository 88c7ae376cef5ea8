fetch('/api/toc').then(function(r){return r.text();}).then(function(t){document.getElementById('toc').textContent = 'sections';});