document.getElementById('login').addEventListener('submit', function(e){ if (!e.target) { e.preventDefault(); } });