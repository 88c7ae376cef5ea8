localStorage.setItem('theme', 'tide');var theme = localStorage.getItem('theme');