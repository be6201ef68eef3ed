import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from coevolve.graph import (
    GraphError,
    MultiRelationalGraph,
    SelfLoopError,
    SnapshotMode,
    TemporalEdge,
    UnknownRelationError,
    default_mode,
    internal_edges,
    peripheral_edges,
    snapshot,
)
from coevolve.temporal import CommunityIndex, internal_counts, peripheral_counts, presence

from conftest import random_temporal_graph

CUM = SnapshotMode.cumulative()


def test_single_insertion():
    g = MultiRelationalGraph().add_edge(0, 1, "trust", 2)
    assert g.num_edges == 1 and g.horizon == 2 and g.n == 2


def test_duplicate_edge_is_multiset():
    g = MultiRelationalGraph().add_edge(0, 1, "trust", 2).add_edge(TemporalEdge(0, 1, "trust", 2))
    assert g.multiplicity(0, 1, "trust") == 2
    assert snapshot(g, 2).num_pairs("trust") == 1
    assert snapshot(g, 2).raw_count("trust") == 2


def test_self_loop_rejected():
    with pytest.raises(SelfLoopError):
        MultiRelationalGraph().add_edge(0, 0, "trade", 1)
    with pytest.raises(SelfLoopError):
        MultiRelationalGraph.from_arrays([1], [1], [0], [0])


def test_unknown_relation():
    with pytest.raises(UnknownRelationError):
        MultiRelationalGraph().add_edge(0, 1, "gift", 1)
    with pytest.raises(UnknownRelationError):
        MultiRelationalGraph().relation_id(7)


def test_snapshot_filters():
    g = MultiRelationalGraph()
    for i, w in enumerate((0, 1, 5)):
        g.add_edge(i, i + 1, "trade", w)
    assert snapshot(g, 1, CUM).num_pairs("trade") == 2
    assert snapshot(g, 5, SnapshotMode.windowed(1)).num_pairs("trade") == 1
    assert snapshot(g, 5, CUM).num_pairs("trade") == 3
    assert snapshot(g, 4, SnapshotMode.windowed(3)).num_pairs("trade") == 0
    assert snapshot(g, 6 - 1, SnapshotMode.windowed(5)).num_pairs("trade") == 2


def test_snapshot_out_of_range():
    g = MultiRelationalGraph().add_edge(0, 1, "trust", 2)
    with pytest.raises(GraphError):
        snapshot(g, 3)
    with pytest.raises(GraphError):
        snapshot(g, -1)


def test_mode_parse_and_defaults():
    assert SnapshotMode.parse("cumulative") == CUM
    assert SnapshotMode.parse("windowed") == SnapshotMode.windowed(1)
    assert SnapshotMode.parse("windowed:4").width == 4
    assert str(SnapshotMode.windowed(3)) == "windowed:3"
    assert default_mode("trust").is_cumulative
    assert default_mode("trade") == SnapshotMode.windowed(1)
    with pytest.raises(ValueError):
        SnapshotMode.parse("weekly")
    with pytest.raises(ValueError):
        SnapshotMode.windowed(0)


def test_internal_and_peripheral_examples():
    a, b, c, d = range(4)
    g = MultiRelationalGraph().add_edge(a, b, "trust", 0).add_edge(a, d, "trust", 0)
    snap = snapshot(g, 0)
    assert internal_edges(snap, {a, b, c}, "trust") == {(a, b)}
    g2 = MultiRelationalGraph(n=5).add_edge(a, b, "trust", 0)
    assert internal_edges(snapshot(g2, 0), {c, d, 4}, "trust") == set()

    g = MultiRelationalGraph()
    for u in range(3):
        for v in range(3):
            if u != v:
                g.add_edge(u, v, "trust", 0)
    assert len(internal_edges(snapshot(g, 0), {0, 1, 2}, "trust")) == 6

    g = MultiRelationalGraph().add_edge(a, b, "trust", 0).add_edge(a, c, "trust", 0).add_edge(d, b, "trust", 0)
    snap = snapshot(g, 0)
    assert peripheral_edges(snap, {a, b}, "trust") == {(a, c), (d, b)}
    assert peripheral_edges(snap, range(4), "trust") == set()


def test_community_validation():
    snap = snapshot(MultiRelationalGraph().add_edge(0, 1, "trust", 0), 0)
    with pytest.raises(GraphError):
        internal_edges(snap, set(), "trust")
    with pytest.raises(GraphError):
        peripheral_edges(snap, {0, 9}, "trust")


def test_peripheral_matches_classifier(rng):
    g = random_temporal_graph(rng, n=20, m=150)
    for t in range(g.horizon + 1):
        snap = snapshot(g, t)
        comm = set(rng.choice(20, size=7, replace=False).tolist())
        for rel in g.relations:
            pairs = snap.pair_set(rel)
            inside = {(u, v) for u, v in pairs if u in comm and v in comm}
            across = {(u, v) for u, v in pairs if (u in comm) != (v in comm)}
            assert internal_edges(snap, comm, rel) == inside
            assert peripheral_edges(snap, comm, rel) == across


@given(st.integers(0, 2**32 - 1))
def test_snapshot_invariants(seed):
    rng = np.random.default_rng(seed)
    g = random_temporal_graph(rng, n=int(rng.integers(2, 15)), m=int(rng.integers(1, 80)))
    everything = {rel: {(int(s), int(d)) for s, d, _ in zip(*g.edges(rel))} for rel in g.relations}
    prev = {rel: set() for rel in g.relations}
    for t in range(g.horizon + 1):
        snap = snapshot(g, t, CUM)
        comm = set(rng.choice(g.n, size=int(rng.integers(1, g.n + 1)), replace=False).tolist())
        for rel in g.relations:
            pairs = snap.pair_set(rel)
            assert prev[rel] <= pairs
            prev[rel] = pairs
            inside, across = internal_edges(snap, comm, rel), peripheral_edges(snap, comm, rel)
            assert not inside & across
            assert inside | across == {(u, v) for u, v in pairs if u in comm or v in comm}
            assert internal_edges(snap, range(g.n), rel) == pairs
            assert snap.num_pairs(rel) <= snap.raw_count(rel)
            s, d, w = g.edges(rel)
            rows = list(zip(s[w <= t].tolist(), d[w <= t].tolist()))
            assert (snap.num_pairs(rel) == snap.raw_count(rel)) == (len(set(rows)) == len(rows))
    for rel in g.relations:
        assert snapshot(g, g.horizon, CUM).pair_set(rel) == everything[rel]


@given(st.integers(0, 2**32 - 1), st.sampled_from(["cumulative", "windowed:1", "windowed:3"]))
def test_presence_matches_snapshots(seed, mode_text):
    rng = np.random.default_rng(seed)
    g = random_temporal_graph(rng, n=10, m=int(rng.integers(1, 70)))
    mode = SnapshotMode.parse(mode_text)
    comms = [set(rng.choice(10, size=int(rng.integers(1, 6)), replace=False).tolist()) for _ in range(4)]
    index = CommunityIndex(comms, g.n)
    for rid, rel in enumerate(g.relations):
        pres = presence(g, rid, mode)
        inner, outer = internal_counts(pres, index), peripheral_counts(pres, index)
        for t in range(g.horizon + 1):
            snap = snapshot(g, t, mode)
            assert pres.count_at(t) == snap.num_pairs(rel)
            for i, c in enumerate(comms):
                assert inner[i, t] == len(internal_edges(snap, c, rel))
                assert outer[i, t] == len(peripheral_edges(snap, c, rel))
