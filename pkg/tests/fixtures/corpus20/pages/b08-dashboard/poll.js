fetch('/health').then(function(r){document.getElementById('api').textContent = r.status;});