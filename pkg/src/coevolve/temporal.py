"""Interval form of snapshot membership and batched per-community tallies.

Evaluating a snapshot per week per community is quadratic in practice, so the
pipeline works on *presence intervals* instead: for every deduplicated pair,
the disjoint runs of weeks ``[start, end]`` during which the pair belongs to
the snapshot. Counting a pair set at week ``t`` then reduces to a difference
array over weeks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .graph import MultiRelationalGraph, SnapshotMode


@dataclass
class Presence:
    src: np.ndarray
    dst: np.ndarray
    key: np.ndarray  # sorted; ties ordered by start
    start: np.ndarray
    end: np.ndarray  # inclusive
    n: int
    horizon: int

    def __len__(self) -> int:
        return len(self.key)

    def count_at(self, t: int) -> int:
        return int(np.count_nonzero((self.start <= t) & (self.end >= t)))


def presence(
    graph: MultiRelationalGraph,
    relation,
    mode: SnapshotMode,
    undirected: bool = False,
    horizon: int | None = None,
) -> Presence:
    """Presence intervals of one relation's pairs under ``mode``.

    With ``undirected=True`` pairs are canonicalized to ``(min, max)`` so a
    pair is present whenever either direction is.
    """
    T = graph.horizon if horizon is None else horizon
    n = graph.n
    s, d, w = graph.edges(relation)
    if undirected:
        s, d = np.minimum(s, d), np.maximum(s, d)
    key = s * n + d
    kw = np.unique(key * (T + 1) + w)
    key, w = kw // (T + 1), kw % (T + 1)
    if mode.is_cumulative:
        end = np.full(len(w), T, dtype=np.int64)
    else:
        end = np.minimum(w + mode.width - 1, T)
    if len(key) > 1:
        # clip at the next occurrence of the same pair so runs stay disjoint
        same = key[1:] == key[:-1]
        nxt = np.where(same, w[1:] - 1, end[:-1])
        end[:-1] = np.minimum(end[:-1], nxt)
    if mode.is_cumulative and len(key):
        # cumulative runs chain into one; keep just the first occurrence
        first = np.ones(len(key), dtype=bool)
        first[1:] = key[1:] != key[:-1]
        key, w = key[first], w[first]
        end = np.full(len(w), T, dtype=np.int64)
    return Presence(key // n, key % n, key, w, end, n, T)


def weekly_totals(rows: np.ndarray, start: np.ndarray, end: np.ndarray, n_rows: int, T: int) -> np.ndarray:
    """Per-row, per-week count of intervals covering each week.

    Returns an ``(n_rows, T + 1)`` integer array.
    """
    width = T + 2
    if len(rows) == 0:
        return np.zeros((n_rows, T + 1), dtype=np.int64)
    diff = np.bincount(rows * width + start, minlength=n_rows * width)
    diff -= np.bincount(rows * width + end + 1, minlength=n_rows * width)
    return np.cumsum(diff.reshape(n_rows, width), axis=1)[:, : T + 1]


class CommunityIndex:
    """Node-to-community incidence for a (possibly overlapping) cover."""

    def __init__(self, communities: Sequence[Iterable[int]], n: int):
        members = [np.fromiter(sorted(set(c)), dtype=np.int64) for c in communities]
        self.n = n
        self.k = len(members)
        self.sizes = np.array([len(m) for m in members], dtype=np.int64)
        nodes = np.concatenate(members) if members else np.zeros(0, dtype=np.int64)
        comms = np.repeat(np.arange(self.k, dtype=np.int64), self.sizes)
        if len(nodes) and (nodes.min() < 0 or nodes.max() >= n):
            raise ValueError("community contains nodes outside the graph")
        order = np.argsort(nodes, kind="stable")
        self._comm_by_node = comms[order]
        self._indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(nodes, minlength=n), out=self._indptr[1:])
        self._member_keys = np.sort(nodes * max(self.k, 1) + comms)

    def expand(self, nodes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """``(row, community)`` for every community containing ``nodes[row]``."""
        lo = self._indptr[nodes]
        cnt = self._indptr[nodes + 1] - lo
        rows = np.repeat(np.arange(len(nodes), dtype=np.int64), cnt)
        offsets = np.arange(len(rows), dtype=np.int64) - np.repeat(np.cumsum(cnt) - cnt, cnt)
        return rows, self._comm_by_node[np.repeat(lo, cnt) + offsets]

    def contains(self, nodes: np.ndarray, comms: np.ndarray) -> np.ndarray:
        if len(self._member_keys) == 0:
            return np.zeros(len(nodes), dtype=bool)
        keys = nodes * max(self.k, 1) + comms
        pos = np.minimum(np.searchsorted(self._member_keys, keys), len(self._member_keys) - 1)
        return self._member_keys[pos] == keys


def internal_rows(pres: Presence, index: CommunityIndex) -> tuple[np.ndarray, np.ndarray]:
    """Presence rows internal to a community, as ``(row, community)``."""
    rows, comms = index.expand(pres.src)
    keep = index.contains(pres.dst[rows], comms)
    return rows[keep], comms[keep]


def internal_counts(pres: Presence, index: CommunityIndex) -> np.ndarray:
    rows, comms = internal_rows(pres, index)
    return weekly_totals(comms, pres.start[rows], pres.end[rows], index.k, pres.horizon)


def peripheral_counts(pres: Presence, index: CommunityIndex) -> np.ndarray:
    rows_s, comms_s = index.expand(pres.src)
    out_s = ~index.contains(pres.dst[rows_s], comms_s)
    rows_d, comms_d = index.expand(pres.dst)
    out_d = ~index.contains(pres.src[rows_d], comms_d)
    rows = np.concatenate([rows_s[out_s], rows_d[out_d]])
    comms = np.concatenate([comms_s[out_s], comms_d[out_d]])
    return weekly_totals(comms, pres.start[rows], pres.end[rows], index.k, pres.horizon)


def intersect(
    key: np.ndarray, start: np.ndarray, end: np.ndarray, other: Presence
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Intersect query intervals with ``other``'s intervals of the same key.

    Returns ``(query_row, start, end)`` for every non-empty overlap. Because
    ``other`` is disjoint per key, overlaps of one query row are disjoint too.
    """
    lo = np.searchsorted(other.key, key, side="left")
    hi = np.searchsorted(other.key, key, side="right")
    cnt = hi - lo
    rows = np.repeat(np.arange(len(key), dtype=np.int64), cnt)
    j = np.repeat(lo, cnt) + np.arange(len(rows), dtype=np.int64) - np.repeat(np.cumsum(cnt) - cnt, cnt)
    s = np.maximum(start[rows], other.start[j])
    e = np.minimum(end[rows], other.end[j])
    keep = s <= e
    return rows[keep], s[keep], e[keep]


def overlap_counts(
    activity: Presence,
    relationship: Presence,
    index: CommunityIndex,
    undirected: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Internal activity pair counts and how many of them carry a relationship link.

    ``relationship`` must have been built with the matching ``undirected``
    flag. Returns ``(internal, overlapping)`` arrays of shape ``(k, T + 1)``.
    """
    rows, comms = internal_rows(activity, index)
    T = activity.horizon
    internal = weekly_totals(comms, activity.start[rows], activity.end[rows], index.k, T)
    s, d = activity.src[rows], activity.dst[rows]
    if undirected:
        s, d = np.minimum(s, d), np.maximum(s, d)
    hit, hs, he = intersect(s * activity.n + d, activity.start[rows], activity.end[rows], relationship)
    overlapping = weekly_totals(comms[hit], hs, he, index.k, T)
    return internal, overlapping
