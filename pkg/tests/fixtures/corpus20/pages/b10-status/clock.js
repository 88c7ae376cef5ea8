setTimeout(function(){document.title = 'Larkspur Status · live';}, 250);