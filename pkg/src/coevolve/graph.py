"""Temporal multi-relational graph storage and snapshot queries.

Edges are directed, relation-typed and stamped with an integer week index.
The edge container is a multiset: the same (src, dst, relation, week) may be
recorded more than once. Snapshots expose the deduplicated directed pair set
per relation, which is what the co-evolution metrics count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np


class GraphError(ValueError):
    """Raised for invalid graph construction or queries."""


class SelfLoopError(GraphError):
    pass


class UnknownRelationError(GraphError, KeyError):
    pass


class TemporalEdge(NamedTuple):
    src: int
    dst: int
    relation: int | str
    week: int


@dataclass(frozen=True)
class SnapshotMode:
    """How edges accumulate into the snapshot at week ``t``.

    ``width=None`` is cumulative (every edge with week <= t); an integer width
    is a sliding window over weeks in ``(t - width, t]``.
    """

    width: int | None = None

    def __post_init__(self):
        if self.width is not None and self.width < 1:
            raise ValueError(f"window width must be >= 1, got {self.width}")

    @classmethod
    def cumulative(cls) -> SnapshotMode:
        return cls(None)

    @classmethod
    def windowed(cls, width: int = 1) -> SnapshotMode:
        return cls(int(width))

    @property
    def is_cumulative(self) -> bool:
        return self.width is None

    @classmethod
    def parse(cls, text: str) -> SnapshotMode:
        """Parse ``cumulative``, ``windowed`` or ``windowed:<width>``."""
        text = text.strip().lower()
        if text == "cumulative":
            return cls.cumulative()
        if text.startswith("windowed"):
            _, _, width = text.partition(":")
            return cls.windowed(int(width) if width else 1)
        raise ValueError(f"unknown snapshot mode {text!r}")

    def __str__(self) -> str:
        return "cumulative" if self.width is None else f"windowed:{self.width}"


CUMULATIVE = SnapshotMode.cumulative()
WEEKLY = SnapshotMode.windowed(1)


def default_mode(relation_name: str) -> SnapshotMode:
    # trade links are instant interactions; everything else persists
    return WEEKLY if relation_name == "trade" else CUMULATIVE


class MultiRelationalGraph:
    """Node set plus a multiset of timestamped, relation-typed directed edges.

    Nodes are dense integers ``0..n-1``; ``labels`` optionally keeps the
    original identifiers they were remapped from.
    """

    def __init__(
        self,
        relations: Sequence[str] = ("trust", "trade"),
        n: int = 0,
        horizon: int = 0,
        labels: Sequence[str] | None = None,
    ):
        self.relations: list[str] = []
        for name in relations:
            self.add_relation(name)
        self._n = int(n)
        self._horizon = int(horizon)
        self.labels: list[str] | None = list(labels) if labels is not None else None
        self._src: list[int] = []
        self._dst: list[int] = []
        self._rel: list[int] = []
        self._week: list[int] = []
        self._arrays: tuple[np.ndarray, ...] | None = None
        # rows rejected during ingestion, as (line, message)
        self.rejected: list[tuple[int, str]] = []

    @classmethod
    def from_arrays(
        cls,
        src,
        dst,
        rel,
        week,
        relations: Sequence[str] = ("trust", "trade"),
        n: int | None = None,
        horizon: int = 0,
        labels: Sequence[str] | None = None,
    ) -> MultiRelationalGraph:
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        rel = np.asarray(rel, dtype=np.int64)
        week = np.asarray(week, dtype=np.int64)
        if not (len(src) == len(dst) == len(rel) == len(week)):
            raise GraphError("edge arrays must have equal length")
        g = cls(relations, n=0, horizon=horizon, labels=labels)
        if len(src):
            if np.any(src == dst):
                i = int(np.argmax(src == dst))
                raise SelfLoopError(f"self-loop at edge {i}: node {int(src[i])}")
            if src.min() < 0 or dst.min() < 0 or week.min() < 0:
                raise GraphError("node ids and weeks must be non-negative")
            if rel.min() < 0 or rel.max() >= len(g.relations):
                raise UnknownRelationError(f"relation id out of range: {int(rel.max())}")
            g._n = int(max(src.max(), dst.max())) + 1
            g._horizon = max(g._horizon, int(week.max()))
        if n is not None:
            if n < g._n:
                raise GraphError(f"n={n} smaller than largest endpoint {g._n - 1}")
            g._n = int(n)
        g._arrays = (src, dst, rel, week)
        return g

    def add_relation(self, name: str) -> int:
        if not name:
            raise GraphError("relation name must be non-empty")
        if name not in self.relations:
            self.relations.append(name)
        return self.relations.index(name)

    def relation_id(self, relation: int | str) -> int:
        if isinstance(relation, (int, np.integer)):
            if 0 <= relation < len(self.relations):
                return int(relation)
            raise UnknownRelationError(f"unknown relation id {relation}")
        try:
            return self.relations.index(relation)
        except ValueError:
            raise UnknownRelationError(f"unknown relation {relation!r}") from None

    def relation_name(self, relation: int | str) -> str:
        return self.relations[self.relation_id(relation)]

    def add_edge(self, src, dst=None, relation=None, week=None) -> MultiRelationalGraph:
        """Append one edge; accepts a ``TemporalEdge`` or its four fields."""
        if dst is None:
            src, dst, relation, week = src
        src, dst, week = int(src), int(dst), int(week)
        if src == dst:
            raise SelfLoopError(f"self-loop on node {src} rejected")
        if src < 0 or dst < 0 or week < 0:
            raise GraphError("node ids and weeks must be non-negative")
        rid = self.relation_id(relation)
        self._flush_arrays_to_lists()
        self._src.append(src)
        self._dst.append(dst)
        self._rel.append(rid)
        self._week.append(week)
        self._n = max(self._n, src + 1, dst + 1)
        self._horizon = max(self._horizon, week)
        return self

    def _flush_arrays_to_lists(self):
        if self._arrays is not None:
            self._src, self._dst, self._rel, self._week = (a.tolist() for a in self._arrays)
            self._arrays = None

    def _materialize(self) -> tuple[np.ndarray, ...]:
        if self._arrays is None:
            self._arrays = tuple(
                np.asarray(x, dtype=np.int64)
                for x in (self._src, self._dst, self._rel, self._week)
            )
            self._src, self._dst, self._rel, self._week = [], [], [], []
        return self._arrays

    @property
    def n(self) -> int:
        return self._n

    @property
    def horizon(self) -> int:
        return self._horizon

    @property
    def num_edges(self) -> int:
        return len(self._materialize()[0])

    @property
    def src(self) -> np.ndarray:
        return self._materialize()[0]

    @property
    def dst(self) -> np.ndarray:
        return self._materialize()[1]

    @property
    def rel(self) -> np.ndarray:
        return self._materialize()[2]

    @property
    def week(self) -> np.ndarray:
        return self._materialize()[3]

    def edges(self, relation) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(src, dst, week)`` arrays for one relation, in insertion order."""
        rid = self.relation_id(relation)
        src, dst, rel, week = self._materialize()
        mask = rel == rid
        return src[mask], dst[mask], week[mask]

    def multiplicity(self, src: int, dst: int, relation) -> int:
        s, d, _ = self.edges(relation)
        return int(np.count_nonzero((s == src) & (d == dst)))

    def label(self, node: int) -> str:
        return self.labels[node] if self.labels is not None else str(node)

    def pair_key(self, src, dst):
        return np.asarray(src, dtype=np.int64) * self._n + np.asarray(dst, dtype=np.int64)

    def __repr__(self) -> str:
        return (
            f"MultiRelationalGraph(n={self.n}, edges={self.num_edges}, "
            f"relations={self.relations}, horizon={self.horizon})"
        )


def resolve_modes(graph: MultiRelationalGraph, modes=None) -> dict[int, SnapshotMode]:
    if isinstance(modes, SnapshotMode):
        return {rid: modes for rid in range(len(graph.relations))}
    modes = dict(modes or {})
    out = {}
    for rid, name in enumerate(graph.relations):
        mode = modes.get(name, modes.get(rid))
        out[rid] = mode if mode is not None else default_mode(name)
    return out


@dataclass
class Snapshot:
    """Edge set existing at week ``week``, per relation."""

    week: int
    n: int
    relations: list[str]
    modes: dict[int, SnapshotMode]
    keys: dict[int, np.ndarray] = field(repr=False)
    raw_counts: dict[int, int]

    def _rid(self, relation) -> int:
        if isinstance(relation, (int, np.integer)):
            return int(relation)
        try:
            return self.relations.index(relation)
        except ValueError:
            raise UnknownRelationError(f"unknown relation {relation!r}") from None

    def pair_keys(self, relation) -> np.ndarray:
        """Sorted unique ``src * n + dst`` keys of the relation's pairs."""
        return self.keys[self._rid(relation)]

    def pairs(self, relation) -> tuple[np.ndarray, np.ndarray]:
        k = self.pair_keys(relation)
        return k // self.n, k % self.n

    def pair_set(self, relation) -> set[tuple[int, int]]:
        s, d = self.pairs(relation)
        return set(zip(s.tolist(), d.tolist()))

    def num_pairs(self, relation) -> int:
        return len(self.pair_keys(relation))

    def raw_count(self, relation) -> int:
        return self.raw_counts[self._rid(relation)]

    def mode(self, relation) -> SnapshotMode:
        return self.modes[self._rid(relation)]


def snapshot(graph: MultiRelationalGraph, t: int, modes=None) -> Snapshot:
    """Snapshot at week ``t``.

    ``modes`` is a single ``SnapshotMode`` applied to every relation, or a
    mapping from relation name/id to mode. Unlisted relations fall back to
    ``default_mode``.
    """
    if t < 0 or t > graph.horizon:
        raise GraphError(f"week {t} outside [0, {graph.horizon}]")
    resolved = resolve_modes(graph, modes)
    src, dst, rel, week = graph.src, graph.dst, graph.rel, graph.week
    keys, raw = {}, {}
    for rid, mode in resolved.items():
        mask = (rel == rid) & (week <= t)
        if not mode.is_cumulative:
            mask &= week > t - mode.width
        raw[rid] = int(np.count_nonzero(mask))
        keys[rid] = np.unique(graph.pair_key(src[mask], dst[mask]))
    return Snapshot(t, graph.n, list(graph.relations), resolved, keys, raw)


def _member_mask(n: int, community: Iterable[int]) -> np.ndarray:
    members = np.fromiter(community, dtype=np.int64)
    if members.size == 0:
        raise GraphError("community must be non-empty")
    if members.min() < 0 or members.max() >= n:
        raise GraphError("community contains nodes outside the graph")
    inside = np.zeros(n, dtype=bool)
    inside[members] = True
    return inside


def internal_edges(snap: Snapshot, community: Iterable[int], relation) -> set[tuple[int, int]]:
    """Snapshot pairs with both endpoints inside ``community``."""
    inside = _member_mask(snap.n, community)
    s, d = snap.pairs(relation)
    keep = inside[s] & inside[d]
    return set(zip(s[keep].tolist(), d[keep].tolist()))


def peripheral_edges(snap: Snapshot, community: Iterable[int], relation) -> set[tuple[int, int]]:
    """Snapshot pairs with exactly one endpoint inside ``community``."""
    inside = _member_mask(snap.n, community)
    s, d = snap.pairs(relation)
    keep = inside[s] != inside[d]
    return set(zip(s[keep].tolist(), d[keep].tolist()))
