"""Co-evolution analysis of relations in temporal multi-relational networks."""

__version__ = "0.1.0"

from .community import (
    Community,
    CommunityCover,
    SizeGroup,
    cnm,
    cpm,
    enumerate_k_cliques,
    group_by_size,
    modularity,
)
from .events import (
    EventRecord,
    EventSpec,
    LinkTimeSeries,
    PrecursorStats,
    build_time_series,
    detect_events,
    first_event_time,
    precursor_analysis,
)
from .graph import (
    MultiRelationalGraph,
    Snapshot,
    SnapshotMode,
    TemporalEdge,
    internal_edges,
    peripheral_edges,
    snapshot,
)
from .metrics import (
    avg_connectivity,
    connectivity,
    cover_metrics,
    directed_overlap,
    inter_intra_ratio,
    overall_inter_intra,
    undirected_overlap,
)
from .transform import SimpleGraph, reduce_by_frequency, simplify
