"""Independent reference implementations shared by the test modules.

Everything here is written from the definitions with dense numpy or plain
Python loops, so it shares no code with the package under test.
"""

import itertools
import math

import numpy as np

from rewirelab.graph import Graph


def dense_laplacian(n, edges):
    """Normalized Laplacian with identity rows for isolated nodes (independent construction)."""
    A = np.zeros((n, n))
    for u, v in edges:
        A[u, v] = A[v, u] = 1.0
    d = A.sum(1)
    L = np.eye(n)
    nz = d > 0
    s = np.zeros(n)
    s[nz] = 1 / np.sqrt(d[nz])
    L -= s[:, None] * A * s[None, :]
    return L


def dense_gap(n, edges):
    return np.linalg.eigvalsh(dense_laplacian(n, edges))[1]


def expected_adjacency_gap(sizes, p, q):
    """Second-smallest eigenvalue of the normalized Laplacian of the expected
    block adjacency with unit diagonal."""
    block = np.repeat(np.arange(len(sizes)), sizes)
    A = np.where(block[:, None] == block[None, :], p, q)
    np.fill_diagonal(A, 1.0)
    s = 1 / np.sqrt(A.sum(1))
    L = np.eye(A.shape[0]) - s[:, None] * A * s[None, :]
    return np.linalg.eigvalsh(L)[1]


def barbell(m):
    e = [(i, j) for i, j in itertools.combinations(range(m), 2)]
    e += [(i + m, j + m) for i, j in itertools.combinations(range(m), 2)]
    return Graph(2 * m, e + [(m - 1, m)])


def path(n):
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def cos(x, y):
    nx_, ny = math.sqrt(sum(a * a for a in x)), math.sqrt(sum(b * b for b in y))
    if nx_ == 0 or ny == 0:
        return 0.0
    return sum(a * b for a, b in zip(x, y)) / (nx_ * ny)


def feast_oracle(g, X, op, k):
    """Enumerate every candidate and sort by the rank formulas."""
    E = g.edge_set()
    m = len(E)
    mean = sum(cos(X[u], X[v]) for u, v in E) / m if m else 0.0
    if op == "Add":
        cand = [(u, v) for u, v in itertools.combinations(range(g.num_nodes), 2) if (u, v) not in E]
        rank = {e: (mean * m + cos(X[e[0]], X[e[1]])) / (m + 1) for e in cand}
    else:
        cand = sorted(E)
        if m == 1:
            rank = {e: -cos(X[e[0]], X[e[1]]) for e in cand}
        else:
            rank = {e: (mean * m - cos(X[e[0]], X[e[1]])) / (m - 1) for e in cand}
    return sorted(cand, key=lambda e: (-round(rank[e], 9), e))[:k]


def comfy_oracle(g, X, comm, op, k):
    E = g.edge_set()
    ids = sorted(set(comm))
    size = {c: sum(1 for x in comm if x == c) for c in ids}
    pairs = [(i, j) for i in ids for j in ids if i <= j]
    total = sum(size[i] * size[j] for i, j in pairs)
    out = []
    for i, j in pairs:
        b = round(k * size[i] * size[j] / total)
        if b == 0:
            continue
        if op == "Add":
            cand = [(u, v) for u, v in itertools.combinations(range(g.num_nodes), 2)
                    if (u, v) not in E and {comm[u], comm[v]} == {i, j}]
            key = lambda e: (-round(cos(X[e[0]], X[e[1]]), 9), e)  # noqa: E731
        else:
            cand = [e for e in sorted(E) if {comm[e[0]], comm[e[1]]} == {i, j}]
            key = lambda e: (round(cos(X[e[0]], X[e[1]]), 9), e)  # noqa: E731
        out.extend(sorted(cand, key=key)[:b])
    return out
