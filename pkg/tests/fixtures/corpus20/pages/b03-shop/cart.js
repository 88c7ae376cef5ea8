document.getElementById('add').addEventListener('click',function(){document.title = 'Copper Kettle (1)';});