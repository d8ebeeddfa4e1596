"""Reference computations that share no code with the package's normal forms."""

from __future__ import annotations

import itertools
from collections import deque
from fractions import Fraction

import numpy as np

# ---------------------------------------------------------------------------
# faithful matrix representations

SANOV = {"a": np.array([[1, 2], [0, 1]], dtype=object), "b": np.array([[1, 0], [2, 1]], dtype=object)}


def _inv2(m):
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    return np.array([[d, -b], [-c, a]], dtype=object)


def f2_matrix(text):
    """Image in SL(2, Z) of a dotted word over a, A, b, B (Sanov: faithful)."""
    out = np.eye(2, dtype=int).astype(object)
    for s in filter(None, text.split(".")):
        m = SANOV[s.lower()]
        out = out.dot(m if s.islower() else _inv2(m))
    return out


PSL = {"a": np.array([[0, -1], [1, 0]], dtype=object), "b": np.array([[0, -1], [1, 1]], dtype=object)}


def psl_matrix(text):
    """Image in PSL(2, Z) = Z2 * Z3, normalized up to sign."""
    out = np.eye(2, dtype=int).astype(object)
    for s in filter(None, text.split(".")):
        m = PSL[s.lower()]
        out = out.dot(m if s.islower() or s == "a" else _inv2(m))
    flat = [x for x in out.flatten()]
    first = next(x for x in flat if x != 0)
    return tuple(x if first > 0 else -x for x in flat)


def f2xf2_matrix(text):
    """F(a, b) x F(c, d) as a pair of Sanov images."""
    left = ".".join(s for s in text.split(".") if s and s.lower() in "ab")
    right = ".".join({"c": "a", "C": "A", "d": "b", "D": "B"}[s] for s in text.split(".") if s and s.lower() in "cd")
    return tuple(f2_matrix(left).flatten()) + tuple(f2_matrix(right).flatten())


# ---------------------------------------------------------------------------
# growth series (truncated power series as integer lists)


def series_mul(p, q, n):
    out = [0] * (n + 1)
    for i, a in enumerate(p[: n + 1]):
        for j, b in enumerate(q[: n + 1 - i]):
            out[i + j] += a * b
    return out


def series_inv(p, n):
    out = [Fraction(0)] * (n + 1)
    out[0] = Fraction(1, p[0])
    for k in range(1, n + 1):
        out[k] = -sum(p[j] * out[k - j] for j in range(1, min(k, len(p) - 1) + 1)) / p[0]
    return out


def free_series(rank, n):
    return [1] + [2 * rank * (2 * rank - 1) ** (k - 1) for k in range(1, n + 1)]


def cyclic_series(order, n):
    out = [1] + [0] * n
    for k in range(1, order):
        out[min(k, order - k)] += 1 if min(k, order - k) <= n else 0
    return out


def free_product_series(p, q, n):
    """1/S = 1/P + 1/Q - 1."""
    ip, iq = series_inv(p, n), series_inv(q, n)
    s = [ip[k] + iq[k] - (1 if k == 0 else 0) for k in range(n + 1)]
    return [int(x) for x in series_inv(s, n)]


def raag_series(vertices, edges, n):
    """Spherical growth of a RAAG from its clique polynomial:
    1/S(z) = sum over cliques K of (-2z/(1+z))^|K|."""
    adj = {frozenset(e) for e in edges}
    cliques = [c for k in range(len(vertices) + 1) for c in itertools.combinations(vertices, k)
               if all(frozenset(p) in adj for p in itertools.combinations(c, 2))]
    u = [Fraction(0)] * (n + 1)  # 2z/(1+z) = 2z - 2z^2 + ...
    for k in range(1, n + 1):
        u[k] = Fraction(2 * (-1) ** (k - 1))
    total = [Fraction(0)] * (n + 1)
    for c in cliques:
        term = [Fraction(1)] + [Fraction(0)] * n
        for _ in c:
            term = [-x for x in series_mul(term, u, n)]
        total = [a + b for a, b in zip(total, term)]
    return [int(x) for x in series_inv(total, n)]


def cumulative(spheres):
    return list(itertools.accumulate(spheres))


# ---------------------------------------------------------------------------
# Cayley graph BFS driven only by a faithful representation


def bfs_by_matrix(letters, matrix, n):
    """{key: distance} for all elements of length <= n, where elements are
    identified by their matrix images."""
    seen = {_key(matrix, ""): 0}
    todo = deque([""])
    while todo:
        w = todo.popleft()
        d = seen[_key(matrix, w)]
        if d == n:
            continue
        for s in letters:
            v = f"{w}.{s}" if w else s
            k = _key(matrix, v)
            if k not in seen:
                seen[k] = d + 1
                todo.append(v)
    return seen


def _key(matrix, w):
    m = matrix(w)
    return tuple(np.asarray(m).flatten()) if not isinstance(m, tuple) else m
