"""k-clique enumeration and clique percolation (CPM)."""

from __future__ import annotations

from collections import defaultdict
from itertools import combinations

import numpy as np

from ..transform import SimpleGraph
from .cover import Community, CommunityCover


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, x: int, y: int) -> int:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return rx
        if self.size[rx] < self.size[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        self.size[rx] += self.size[ry]
        return rx


def enumerate_k_cliques(g: SimpleGraph, k: int) -> list[tuple[int, ...]]:
    """All k-node cliques as sorted tuples, in lexicographic order."""
    if k < 3:
        raise ValueError(f"k must be >= 3, got {k}")
    adj = g.adjacency
    deg = g.degree
    # orient each edge from lower to higher (degree, id) rank
    rank = np.empty(g.n, dtype=np.int64)
    rank[np.lexsort((np.arange(g.n), deg))] = np.arange(g.n)
    rank = rank.tolist()
    fwd = [{u for u in adj[v] if rank[u] > rank[v]} for v in range(g.n)]

    out: list[tuple[int, ...]] = []

    def extend(clique: list[int], cands: set[int]) -> None:
        if len(clique) == k:
            out.append(tuple(sorted(clique)))
            return
        if len(cands) < k - len(clique):
            return
        for v in cands:
            clique.append(v)
            extend(clique, cands & fwd[v])
            clique.pop()

    for v in range(g.n):
        if len(fwd[v]) >= k - 1:
            extend([v], fwd[v])
    out.sort()
    return out


def cpm(g: SimpleGraph, k: int = 3) -> CommunityCover:
    """Clique percolation: unions of k-cliques chained by shared (k-1)-node faces.

    Nodes that belong to no k-clique are left uncovered. Communities are
    ordered by their sorted member tuples, which fixes the ids.
    """
    cliques = enumerate_k_cliques(g, k)
    uf = UnionFind(len(cliques))
    owner: dict[tuple[int, ...], int] = {}
    for idx, clique in enumerate(cliques):
        for face in combinations(clique, k - 1):
            j = owner.setdefault(face, idx)
            if j != idx:
                uf.union(j, idx)
    nodes: dict[int, set[int]] = defaultdict(set)
    for idx, clique in enumerate(cliques):
        nodes[uf.find(idx)].update(clique)
    ordered = sorted(tuple(sorted(s)) for s in nodes.values())
    comms = [Community(i, frozenset(m), "cpm", k) for i, m in enumerate(ordered)]
    return CommunityCover(comms, "cpm", k=k, disjoint=False, min_size=k)
