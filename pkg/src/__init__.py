# nkcert - certified Newton-Kantorovich solver for f(x) + g(x) = 0
