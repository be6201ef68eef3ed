"""Event detection on per-community link-count series and precursor tallies.

A week is an event when the series crosses ``mean + lam * std`` of the
whole series: above it for jumps (``lam > 0``), below it for drops
(``lam < 0``). ``std`` is the population standard deviation and constant
series never fire.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .community.cover import Community, CommunityCover
from .graph import MultiRelationalGraph, SnapshotMode, default_mode, resolve_modes
from .temporal import CommunityIndex, internal_counts, presence

JUMP_LAMBDAS = (1.0, 1.5, 2.0, 2.5)
DROP_LAMBDAS = tuple(-lam for lam in JUMP_LAMBDAS)
KINDS = ("jump", "drop")


@dataclass
class LinkTimeSeries:
    community_id: int
    relation: str
    counts: np.ndarray

    def __len__(self) -> int:
        return len(self.counts)


@dataclass(frozen=True)
class EventSpec:
    relation: str
    kind: str
    lam: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be 'jump' or 'drop', got {self.kind!r}")
        if (self.kind == "jump") != (self.lam > 0) or self.lam == 0:
            raise ValueError(f"lambda {self.lam} does not match kind {self.kind!r}")

    @classmethod
    def of(cls, relation: str, kind: str, magnitude: float) -> EventSpec:
        """Build an ``EventSpec`` from an unsigned magnitude; the sign follows ``kind``."""
        lam = abs(magnitude)
        return cls(relation, kind, lam if kind == "jump" else -lam)


@dataclass
class EventRecord:
    community_id: int
    spec: EventSpec
    weeks: list[int] = field(default_factory=list)

    @property
    def first_week(self) -> int | None:
        return first_event_time(self)


def build_time_series(
    graph: MultiRelationalGraph,
    community: Iterable[int] | Community,
    relation,
    mode: SnapshotMode | None = None,
    community_id: int | None = None,
) -> LinkTimeSeries:
    """Internal deduplicated pair count of ``community`` at every week ``0..T``."""
    if isinstance(community, Community):
        community_id = community.id if community_id is None else community_id
        members = community.members
    else:
        members = set(community)
    name = graph.relation_name(relation)
    mode = mode if mode is not None else default_mode(name)
    index = CommunityIndex([members], graph.n)
    counts = internal_counts(presence(graph, relation, mode), index)[0]
    return LinkTimeSeries(community_id if community_id is not None else 0, name, counts)


def thresholds(series: np.ndarray, lam: float) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise ``mean + lam * std`` and a flag for non-constant rows."""
    series = np.atleast_2d(series)
    n = series.shape[1]
    if series.dtype.kind in "iub":
        x = series.astype(np.int64)
        total = x.sum(axis=1)
        # exact integer variance numerator: n * sum(x^2) - (sum x)^2
        spread = n * (x * x).sum(axis=1) - total * total
        mu = total / n
        rho = np.sqrt(spread.astype(np.float64)) / n
        varies = spread > 0
    else:
        x = series.astype(np.float64)
        mu = x.mean(axis=1)
        rho = x.std(axis=1)
        varies = rho > 0
    return mu + lam * rho, varies


def event_mask(series: np.ndarray, lam: float) -> np.ndarray:
    """Boolean ``(rows, weeks)`` event mask for jump (``lam > 0``) or drop (``lam < 0``)."""
    series = np.atleast_2d(series)
    if series.shape[1] < 2:
        raise ValueError("series must have at least 2 weeks")
    limit, varies = thresholds(series, lam)
    if lam > 0:
        hit = series > limit[:, None]
    elif lam < 0:
        hit = series < limit[:, None]
    else:
        raise ValueError("lambda must be non-zero")
    return hit & varies[:, None]


def detect_events(ts: LinkTimeSeries | np.ndarray | list, spec: EventSpec) -> EventRecord:
    if isinstance(ts, LinkTimeSeries):
        counts, cid = np.asarray(ts.counts), ts.community_id
    else:
        counts, cid = np.asarray(ts), 0
    if counts.ndim != 1 or len(counts) < 2:
        raise ValueError("series must be one-dimensional with at least 2 weeks")
    weeks = np.flatnonzero(event_mask(counts, spec.lam)[0])
    return EventRecord(cid, spec, weeks.tolist())


def first_event_time(rec: EventRecord) -> int | None:
    return min(rec.weeks) if rec.weeks else None


def first_event_weeks(series: np.ndarray, lam: float) -> np.ndarray:
    """First event week per row, ``-1`` where a row has none."""
    mask = event_mask(series, lam)
    return np.where(mask.any(axis=1), mask.argmax(axis=1), -1)


@dataclass
class PrecursorStats:
    lam: float
    kind: str
    trade_first: int
    trust_first: int
    co_occurrence: int
    activity: str = "trade"
    relationship: str = "trust"

    @property
    def total_with_both(self) -> int:
        return self.trade_first + self.trust_first + self.co_occurrence


def precursor_from_series(
    activity_series: np.ndarray,
    relationship_series: np.ndarray,
    lam: float,
    kind: str,
    activity: str = "trade",
    relationship: str = "trust",
) -> PrecursorStats:
    """Tally which relation's first event comes first, per community.

    Rows are communities; only communities with at least one event of
    ``kind`` in both relations take part.
    """
    signed = EventSpec.of(activity, kind, lam).lam
    a = first_event_weeks(activity_series, signed)
    r = first_event_weeks(relationship_series, signed)
    both = (a >= 0) & (r >= 0)
    a, r = a[both], r[both]
    return PrecursorStats(
        abs(lam),
        kind,
        int(np.count_nonzero(a < r)),
        int(np.count_nonzero(a > r)),
        int(np.count_nonzero(a == r)),
        activity,
        relationship,
    )


def cover_series(
    graph: MultiRelationalGraph,
    cover: CommunityCover | Iterable[Iterable[int]],
    relation,
    modes=None,
) -> np.ndarray:
    """``(k, T + 1)`` link-count series for every community of a cover."""
    communities = [c.members if isinstance(c, Community) else set(c) for c in cover]
    rid = graph.relation_id(relation)
    mode = resolve_modes(graph, modes)[rid]
    return internal_counts(presence(graph, rid, mode), CommunityIndex(communities, graph.n))


def precursor_analysis(
    graph: MultiRelationalGraph,
    cover: CommunityCover | Iterable[Iterable[int]],
    lam: float = 1.0,
    kind: str = "jump",
    activity: str = "trade",
    relationship: str = "trust",
    modes=None,
) -> PrecursorStats:
    communities = list(cover)
    return precursor_from_series(
        cover_series(graph, communities, activity, modes),
        cover_series(graph, communities, relationship, modes),
        lam,
        kind,
        activity,
        relationship,
    )
