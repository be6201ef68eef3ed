"""Per-community, per-week co-evolution metrics.

The scalar functions take a single ``Snapshot`` and return ``None`` when the
metric is undefined (a 0/0 case). ``cover_metrics`` computes the same
quantities for every community and week at once and marks undefined cells
with NaN.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .community.cover import Community, CommunityCover
from .graph import MultiRelationalGraph, Snapshot, internal_edges, peripheral_edges, resolve_modes
from .temporal import CommunityIndex, internal_counts, overlap_counts, peripheral_counts, presence

METRIC_KINDS = ("connectivity", "overlap_directed", "overlap_undirected", "inter_intra")


def connectivity(snap: Snapshot, community: Iterable[int], relation) -> float | None:
    members = set(community)
    size = len(members)
    if size < 2:
        return None
    return len(internal_edges(snap, members, relation)) / (size * (size - 1))


def _overlap(snap, community, activity, relationship, undirected: bool) -> float | None:
    trade = internal_edges(snap, community, activity)
    if not trade:
        return None
    trust = snap.pair_set(relationship)
    if undirected:
        hits = sum(1 for u, v in trade if (u, v) in trust or (v, u) in trust)
    else:
        hits = sum(1 for e in trade if e in trust)
    return hits / len(trade)


def directed_overlap(snap: Snapshot, community: Iterable[int], activity="trade", relationship="trust") -> float | None:
    """Share of internal activity pairs whose exact direction is also a relationship pair.

    Membership is checked against the snapshot's whole relationship pair
    set, not only the community's internal part.
    """
    return _overlap(snap, community, activity, relationship, undirected=False)


def undirected_overlap(snap: Snapshot, community: Iterable[int], activity="trade", relationship="trust") -> float | None:
    """Like ``directed_overlap`` but either direction of the relationship counts."""
    return _overlap(snap, community, activity, relationship, undirected=True)


def inter_intra_ratio(snap: Snapshot, community: Iterable[int], relation) -> float | None:
    members = set(community)
    intra = len(internal_edges(snap, members, relation))
    if intra == 0:
        return None
    return len(peripheral_edges(snap, members, relation)) / intra


@dataclass
class MetricSeries:
    community_id: int
    relation: str
    kind: str
    values: np.ndarray  # NaN where undefined

    @property
    def defined(self) -> np.ndarray:
        return ~np.isnan(self.values)


@dataclass
class GroupSeries:
    relation: str
    values: np.ndarray  # NaN on weeks with no defined contributor
    n_defined: np.ndarray
    group: str | None = None


def masked_mean(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column means over non-NaN entries of a ``(k, weeks)`` array."""
    values = np.atleast_2d(values)
    ok = ~np.isnan(values)
    count = ok.sum(axis=0)
    total = np.where(ok, values, 0.0).sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.where(count > 0, total / np.maximum(count, 1), np.nan)
    return mean, count


def avg_connectivity(snaps: Sequence[Snapshot], group: Sequence[Iterable[int]], relation) -> GroupSeries:
    """Weekly mean connectivity over a group of communities."""
    group = [set(c) for c in group]
    if not group:
        raise ValueError("group must contain at least one community")
    table = np.array(
        [[np.nan if (q := connectivity(s, c, relation)) is None else q for s in snaps] for c in group],
        dtype=np.float64,
    )
    mean, count = masked_mean(table)
    name = relation if isinstance(relation, str) else snaps[0].relations[relation]
    return GroupSeries(name, mean, count)


@dataclass
class OverallSeries:
    relation: str
    total: np.ndarray
    mean: np.ndarray
    n_defined: np.ndarray


def _sum_and_mean(ratios: np.ndarray, relation: str) -> OverallSeries:
    mean, count = masked_mean(ratios)
    total = np.where(count > 0, np.nansum(ratios, axis=0) if len(ratios) else 0.0, np.nan)
    return OverallSeries(relation, total, mean, count)


def overall_inter_intra(snaps: Sequence[Snapshot], cover: CommunityCover | Sequence[Iterable[int]], relation) -> OverallSeries:
    """Weekly sum (and mean) of the defined per-community inter/intra ratios."""
    comms = [set(c) for c in cover]
    if not comms:
        raise ValueError("cover must contain at least one community")
    ratios = np.array(
        [[np.nan if (r := inter_intra_ratio(s, c, relation)) is None else r for s in snaps] for c in comms],
        dtype=np.float64,
    )
    name = relation if isinstance(relation, str) else snaps[0].relations[relation]
    return _sum_and_mean(ratios, name)


def _ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(den > 0, num / np.maximum(den, 1), np.nan)


@dataclass
class CoverMetrics:
    """Every metric for every community of a cover, weeks ``0..T``."""

    relations: list[str]
    activity: str
    relationship: str
    sizes: np.ndarray
    internal: dict[str, np.ndarray]
    peripheral: dict[str, np.ndarray]
    overlap_hits: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def n_communities(self) -> int:
        return len(self.sizes)

    def connectivity(self, relation: str) -> np.ndarray:
        cap = (self.sizes * (self.sizes - 1)).astype(np.float64)[:, None]
        return _ratio(self.internal[relation], np.broadcast_to(cap, self.internal[relation].shape))

    def inter_intra(self, relation: str) -> np.ndarray:
        return _ratio(self.peripheral[relation], self.internal[relation])

    def overlap(self, undirected: bool = False) -> np.ndarray:
        hits = self.overlap_hits["undirected" if undirected else "directed"]
        return _ratio(hits, self.internal[self.activity])

    def values(self, kind: str, relation: str | None = None) -> np.ndarray:
        if kind == "connectivity":
            return self.connectivity(relation)
        if kind == "inter_intra":
            return self.inter_intra(relation)
        if kind == "overlap_directed":
            return self.overlap(False)
        if kind == "overlap_undirected":
            return self.overlap(True)
        raise ValueError(f"unknown metric {kind!r}")

    def series(self, community_id: int, kind: str, relation: str | None = None) -> MetricSeries:
        rel = relation if relation is not None else self.activity
        return MetricSeries(community_id, rel, kind, self.values(kind, relation)[community_id])

    def group_mean(self, kind: str, relation: str | None, rows: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
        vals = self.values(kind, relation)[np.asarray(rows, dtype=np.int64)]
        if len(vals) == 0:
            weeks = self.internal[self.activity].shape[1]
            return np.full(weeks, np.nan), np.zeros(weeks, dtype=np.int64)
        return masked_mean(vals)

    def overall_inter_intra(self, relation: str) -> OverallSeries:
        return _sum_and_mean(self.inter_intra(relation), relation)


def cover_metrics(
    graph: MultiRelationalGraph,
    cover: CommunityCover | Sequence[Iterable[int]],
    modes=None,
    activity: str = "trade",
    relationship: str = "trust",
) -> CoverMetrics:
    """Batch evaluation of connectivity, overlap and inter/intra counts."""
    communities = [c.members if isinstance(c, Community) else set(c) for c in cover]
    index = CommunityIndex(communities, graph.n)
    resolved = resolve_modes(graph, modes)
    internal, peripheral, pres = {}, {}, {}
    for rid, name in enumerate(graph.relations):
        if name not in (activity, relationship):
            continue
        pres[name] = presence(graph, rid, resolved[rid])
        internal[name] = internal_counts(pres[name], index)
        peripheral[name] = peripheral_counts(pres[name], index)
    rel_id = graph.relation_id(relationship)
    hits = {}
    _, hits["directed"] = overlap_counts(pres[activity], pres[relationship], index)
    undirected_rel = presence(graph, rel_id, resolved[rel_id], undirected=True)
    _, hits["undirected"] = overlap_counts(pres[activity], undirected_rel, index, undirected=True)
    return CoverMetrics(
        [activity, relationship] if activity != relationship else [activity],
        activity,
        relationship,
        index.sizes,
        internal,
        peripheral,
        hits,
    )
