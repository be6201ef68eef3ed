"""Newman-Girvan modularity and Clauset-Newman-Moore greedy agglomeration."""

from __future__ import annotations

import heapq
import warnings
from typing import Iterable

import numpy as np

from ..transform import SimpleGraph
from .cover import Community, CommunityCover, Merge


def partition_labels(partition, n: int) -> np.ndarray:
    """Normalize a partition to a label-per-node array, validating coverage."""
    if isinstance(partition, np.ndarray) and partition.ndim == 1 and partition.dtype.kind in "iu":
        if len(partition) != n:
            raise ValueError(f"label array has length {len(partition)}, expected {n}")
        return partition.astype(np.int64, copy=False)
    labels = np.full(n, -1, dtype=np.int64)
    for c, block in enumerate(partition):
        for v in block:
            if not 0 <= v < n:
                raise ValueError(f"node {v} outside graph")
            if labels[v] != -1:
                raise ValueError(f"node {v} appears in more than one block")
            labels[v] = c
    if np.any(labels < 0):
        raise ValueError(f"partition misses node {int(np.argmax(labels < 0))}")
    return labels


def modularity(g: SimpleGraph, partition: np.ndarray | Iterable[Iterable[int]]) -> float:
    """Modularity of a disjoint partition covering every node.

    ``sum_c [e_c / m - (d_c / 2m)^2]`` with ``e_c`` the intra-block edge
    count and ``d_c`` the block's total degree. An edgeless graph scores 0.
    """
    labels = partition_labels(partition, g.n)
    m = g.m
    if m == 0:
        warnings.warn("modularity of an edgeless graph is defined as 0", RuntimeWarning, stacklevel=2)
        return 0.0
    n_labels = int(labels.max()) + 1 if len(labels) else 0
    lu, lv = labels[g.edges[:, 0]], labels[g.edges[:, 1]]
    intra = np.bincount(lu[lu == lv], minlength=n_labels).astype(np.float64)
    tot = np.bincount(labels, weights=g.degree, minlength=n_labels)
    return float(np.sum(intra / m - (tot / (2.0 * m)) ** 2))


def cnm(g: SimpleGraph, min_size: int = 4) -> CommunityCover:
    """Greedy modularity maximization (Clauset, Newman & Moore).

    Starts from singletons and repeatedly merges the pair of connected
    communities with the largest modularity gain until no gain is positive.
    Ties go to the lexicographically smallest ``(id, id)`` pair, where the
    merged community keeps the smaller id.

    Gains are held as exact integers scaled by ``4 m^2``:
    ``gain_ij = 2m * w_ij - K_i * K_j`` (``w_ij`` edges between the blocks,
    ``K`` block degree sums), so ``dQ = 2 * gain / (4 m^2)``.

    The returned cover lists blocks of at least ``min_size`` nodes; the full
    partition is kept on ``cover.partition``.
    """
    n, m = g.n, g.m
    members: list[list[int]] = [[v] for v in range(n)]
    history: list[Merge] = []
    if m == 0:
        q = 0.0
    else:
        two_m = 2 * m
        scale = 4 * m * m
        K = [int(d) for d in g.degree]
        rows: list[dict[int, int] | None] = [dict() for _ in range(n)]
        for u, v in g.edges.tolist():
            gain = two_m - K[u] * K[v]
            rows[u][v] = gain
            rows[v][u] = gain
        heap = [(-gain, u, v) for u, row in enumerate(rows) for v, gain in row.items() if u < v and gain > 0]
        heapq.heapify(heap)
        q_num = -sum(d * d for d in K)

        while heap:
            neg, i, j = heapq.heappop(heap)
            row_i = rows[i]
            if row_i is None or row_i.get(j) != -neg:
                continue  # stale entry
            gain = -neg
            row_j = rows[j]
            del row_i[j]
            del row_j[i]
            Ki, Kj = K[i], K[j]
            merged: dict[int, int] = {}
            for c, g_ic in row_i.items():
                g_jc = row_j.get(c)
                merged[c] = g_ic + g_jc if g_jc is not None else g_ic - Kj * K[c]
            for c, g_jc in row_j.items():
                if c not in row_i:
                    merged[c] = g_jc - Ki * K[c]
            rows[i], rows[j] = merged, None
            K[i], K[j] = Ki + Kj, 0
            for c, val in merged.items():
                row_c = rows[c]
                row_c.pop(j, None)
                row_c[i] = val
                if val > 0:
                    heapq.heappush(heap, (-val, i, c) if i < c else (-val, c, i))
            if len(members[i]) < len(members[j]):
                members[i], members[j] = members[j], members[i]
            members[i].extend(members[j])
            members[j] = []
            q_num += 2 * gain
            history.append(Merge(i, j, 2 * gain / scale, q_num / scale))
        q = q_num / scale

    blocks = sorted((sorted(b) for b in members if b), key=lambda b: b[0])
    partition = np.empty(n, dtype=np.int64)
    for label, block in enumerate(blocks):
        partition[block] = label
    comms = [
        Community(i, frozenset(b), "cnm")
        for i, b in enumerate(b for b in blocks if len(b) >= min_size)
    ]
    return CommunityCover(
        comms,
        "cnm",
        disjoint=True,
        min_size=min_size,
        partition=partition,
        modularity=q,
        history=history,
    )
