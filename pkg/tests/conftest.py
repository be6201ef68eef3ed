import itertools
from collections import deque

import numpy as np
import pytest
from hypothesis import settings

from coevolve import MultiRelationalGraph

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def random_temporal_graph(rng, n=12, m=60, horizon=8, relations=("trust", "trade")):
    src = rng.integers(0, n, size=m)
    dst = (src + rng.integers(1, n, size=m)) % n
    rel = rng.integers(0, len(relations), size=m)
    week = rng.integers(0, horizon + 1, size=m)
    return MultiRelationalGraph.from_arrays(src, dst, rel, week, relations=relations, n=n, horizon=horizon)


def brute_cliques(n, edges, k):
    adj = {(min(u, v), max(u, v)) for u, v in edges}
    return [c for c in itertools.combinations(range(n), k) if all(p in adj for p in itertools.combinations(c, 2))]


def brute_percolation(n, edges, k):
    """Set of community member sets from pairwise clique comparison plus BFS."""
    cliques = [frozenset(c) for c in brute_cliques(n, edges, k)]
    seen = [False] * len(cliques)
    out = set()
    for i in range(len(cliques)):
        if seen[i]:
            continue
        seen[i] = True
        queue, nodes = deque([i]), set()
        while queue:
            a = queue.popleft()
            nodes |= cliques[a]
            for b in range(len(cliques)):
                if not seen[b] and len(cliques[a] & cliques[b]) == k - 1:
                    seen[b] = True
                    queue.append(b)
        out.add(frozenset(nodes))
    return out


def brute_modularity(n, edges, labels):
    """Newman-Girvan modularity as the double sum over node pairs."""
    m = len(edges)
    A = np.zeros((n, n))
    for u, v in edges:
        A[u, v] = A[v, u] = 1
    k = A.sum(axis=1)
    total = 0.0
    for i in range(n):
        for j in range(n):
            if labels[i] == labels[j]:
                total += A[i, j] - k[i] * k[j] / (2 * m)
    return total / (2 * m)


def random_simple_edges(rng, n, p):
    return [(u, v) for u, v in itertools.combinations(range(n), 2) if rng.random() < p]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
