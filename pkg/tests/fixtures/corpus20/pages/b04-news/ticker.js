var n=0; setInterval(function(){n+=1;}, 1000);document.addEventListener('scroll', function(){});