"""Undirected, unweighted views of one relation, used for community detection."""

from __future__ import annotations

from functools import cached_property

import numpy as np

from .graph import MultiRelationalGraph, SelfLoopError


class SimpleGraph:
    """Undirected simple graph on nodes ``0..n-1``.

    ``edges`` is an ``(m, 2)`` array of unique pairs with ``u < v``, sorted
    lexicographically.
    """

    def __init__(self, n: int, edges=None):
        self.n = int(n)
        e = np.asarray(edges if edges is not None else np.zeros((0, 2)), dtype=np.int64).reshape(-1, 2)
        if len(e):
            if np.any(e[:, 0] == e[:, 1]):
                raise SelfLoopError("self-loops are not allowed in a SimpleGraph")
            if e.min() < 0 or e.max() >= self.n:
                raise ValueError("edge endpoint outside node range")
            lo, hi = np.minimum(e[:, 0], e[:, 1]), np.maximum(e[:, 0], e[:, 1])
            keys = np.unique(lo * self.n + hi)
            e = np.stack([keys // self.n, keys % self.n], axis=1)
        self.edges = e

    @classmethod
    def from_pairs(cls, pairs, n: int | None = None) -> SimpleGraph:
        pairs = list(pairs)
        if n is None:
            n = max((max(p) for p in pairs), default=-1) + 1
        return cls(n, pairs)

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def degree(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n)

    @cached_property
    def adjacency(self) -> list[set[int]]:
        adj: list[set[int]] = [set() for _ in range(self.n)]
        for u, v in self.edges.tolist():
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def edge_set(self) -> set[tuple[int, int]]:
        return set(map(tuple, self.edges.tolist()))

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adjacency[u]

    def __repr__(self) -> str:
        return f"SimpleGraph(n={self.n}, m={self.m})"


def _undirected_counts(graph: MultiRelationalGraph, relation) -> tuple[np.ndarray, np.ndarray]:
    s, d, _ = graph.edges(relation)
    n = graph.n
    keys = np.minimum(s, d) * n + np.maximum(s, d)
    return np.unique(keys, return_counts=True)


def simplify(graph: MultiRelationalGraph, relation) -> SimpleGraph:
    """Drop direction, time and multiplicity of one relation over the whole period."""
    keys, _ = _undirected_counts(graph, relation)
    n = graph.n
    return SimpleGraph(n, np.stack([keys // n, keys % n], axis=1))


def reduce_by_frequency(graph: MultiRelationalGraph, relation, threshold: int = 5) -> SimpleGraph:
    """Keep undirected pairs that interacted at least ``threshold`` times.

    Both directions count toward the same pair; the result is unweighted.
    Nodes left isolated stay in the node set.
    """
    if threshold < 1:
        raise ValueError(f"threshold must be >= 1, got {threshold}")
    keys, counts = _undirected_counts(graph, relation)
    keys = keys[counts >= threshold]
    n = graph.n
    return SimpleGraph(n, np.stack([keys // n, keys % n], axis=1))
