"""Brute-force reference implementations used as test oracles.

Everything here works on plain Python lists with explicit double loops over
node pairs and shares no code with ``netcorr``: weight matrices are rebuilt
from edge lists, shortest paths come from a hand-written BFS, and masked
nodes are handled by taking the induced subgraph first.
"""

from __future__ import annotations

import itertools
import math
from collections import deque


def adjacency_sets(n, edges):
    nb = [set() for _ in range(n)]
    for a, b in edges:
        if a != b:
            nb[a].add(b)
            nb[b].add(a)
    return nb


def bfs_dist(n, edges):
    nb = adjacency_sets(n, edges)
    dist = [[-1] * n for _ in range(n)]
    for s in range(n):
        dist[s][s] = 0
        q = deque([s])
        while q:
            u = q.popleft()
            for v in nb[u]:
                if dist[s][v] < 0:
                    dist[s][v] = dist[s][u] + 1
                    q.append(v)
    return dist


def dense_weights(n, edges, kind, d=None):
    """Dense list-of-lists weight matrix built straight from the definition."""
    nb = adjacency_sets(n, edges)
    w = [[0.0] * n for _ in range(n)]
    if kind == "distance":
        dist = bfs_dist(n, edges)
        for i in range(n):
            for j in range(n):
                if i != j and dist[i][j] == d:
                    w[i][j] = 1.0
        return w
    for i in range(n):
        cols = sorted(nb[i] | ({i} if kind == "row+self" else set()))
        for j in cols:
            w[i][j] = 1.0 if kind == "binary" else 1.0 / len(cols)
    return w


def induced(n, edges, keep):
    """Relabel the subgraph induced on nodes with ``keep[i]`` true."""
    idx = {}
    for i in range(n):
        if keep[i]:
            idx[i] = len(idx)
    sub = [(idx[a], idx[b]) for a, b in edges if a in idx and b in idx]
    return len(idx), sub, [i for i in range(n) if keep[i]]


def _moments(x):
    n = len(x)
    mean = sum(x) / n
    z = [v - mean for v in x]
    return n, z, sum(v * v for v in z)


def moran(w, x):
    n, z, ss = _moments(x)
    s0 = sum(w[i][j] for i in range(n) for j in range(n))
    num = sum(w[i][j] * z[i] * z[j] for i in range(n) for j in range(n))
    return (n / s0) * num / ss


def local_moran(w, x):
    n, z, ss = _moments(x)
    return [z[i] * sum(w[i][j] * z[j] for j in range(n)) / ss for i in range(n)]


def geary(w, x):
    n, _, ss = _moments(x)
    s0 = sum(w[i][j] for i in range(n) for j in range(n))
    num = sum(w[i][j] * (x[i] - x[j]) ** 2 for i in range(n) for j in range(n))
    return (n - 1) * num / (2 * s0 * ss)


def getis_global(w, x):
    n = len(x)
    num = sum(w[i][j] * x[i] * x[j] for i in range(n) for j in range(n) if i != j)
    den = sum(x[i] * x[j] for i in range(n) for j in range(n) if i != j)
    return 0.0 if den == 0 else num / den


def getis_local(w, x):
    n = len(x)
    out = []
    for i in range(n):
        num = sum(w[i][j] * x[j] for j in range(n) if j != i)
        den = sum(x[j] for j in range(n) if j != i)
        out.append(math.nan if den == 0 else num / den)
    return out


def assortativity(n, edges, x):
    a = dense_weights(n, edges, "binary")
    k = [sum(row) for row in a]
    two_e = sum(k)
    kbar = two_e / n
    var_k = sum((ki - kbar) ** 2 for ki in k) / n
    num = sum(x[i] * (a[i][j] - k[i] * k[j] / two_e) * x[j] for i in range(n) for j in range(n))
    return num / var_k


def coscia(w, x, y):
    n, zx, _ = _moments(x)
    _, zy, _ = _moments(y)
    sxy = sum(w[i][j] * zx[i] * zy[j] for i in range(n) for j in range(n))
    sxx = sum(w[i][j] * zx[i] * zx[j] for i in range(n) for j in range(n))
    syy = sum(w[i][j] * zy[i] * zy[j] for i in range(n) for j in range(n))
    if sxx <= 0 or syy <= 0:
        return None
    return sxy / math.sqrt(sxx * syy)


def network_variances(w, x, y):
    n, zx, _ = _moments(x)
    _, zy, _ = _moments(y)
    sxx = sum(w[i][j] * zx[i] * zx[j] for i in range(n) for j in range(n))
    syy = sum(w[i][j] * zy[i] * zy[j] for i in range(n) for j in range(n))
    return sxx, syy


def lee(w, x, y):
    n, zx, ssx = _moments(x)
    _, zy, ssy = _moments(y)
    rs2 = sum(sum(w[i][j] for j in range(n)) ** 2 for i in range(n))
    num = sum(
        sum(w[i][j] * zx[j] for j in range(n)) * sum(w[i][j] * zy[j] for j in range(n))
        for i in range(n)
    )
    return (n / rs2) * num / math.sqrt(ssx * ssy)


def scatter_slope(w, x):
    n, z, ss = _moments(x)
    lagged = [sum(w[i][j] * z[j] for j in range(n)) for i in range(n)]
    return sum(z[i] * lagged[i] for i in range(n)) / ss


def all_permutation_values(stat, values):
    """Statistic evaluated on every distinct permutation of ``values``."""
    return [stat(list(p)) for p in itertools.permutations(values)]


def degree_sequence_graphs(n, degrees):
    """All simple graphs on ``n`` labelled nodes with the given degree sequence."""
    pairs = list(itertools.combinations(range(n), 2))
    m = sum(degrees) // 2
    out = []
    for chosen in itertools.combinations(pairs, m):
        k = [0] * n
        for a, b in chosen:
            k[a] += 1
            k[b] += 1
        if k == list(degrees):
            out.append(frozenset(chosen))
    return out
