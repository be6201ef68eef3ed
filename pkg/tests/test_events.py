import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from coevolve.community import Community
from coevolve.events import (
    DROP_LAMBDAS,
    JUMP_LAMBDAS,
    EventRecord,
    EventSpec,
    build_time_series,
    detect_events,
    first_event_time,
    precursor_analysis,
    precursor_from_series,
    thresholds,
)
from coevolve.graph import MultiRelationalGraph, SnapshotMode

JUMP = EventSpec("trust", "jump", 1.0)


def test_worked_jump():
    limit, _ = thresholds(np.array([1, 1, 1, 10, 1]), 1.0)
    assert limit[0] == pytest.approx(2.8 + 3.6)
    assert detect_events([1, 1, 1, 10, 1], JUMP).weeks == [3]


def test_worked_drop():
    limit, _ = thresholds(np.array([5, 5, 5, 0, 5]), -1.0)
    assert limit[0] == pytest.approx(2.0)
    assert detect_events([5, 5, 5, 0, 5], EventSpec("trade", "drop", -1.0)).weeks == [3]


def test_constant_series_is_quiet():
    for lam in JUMP_LAMBDAS:
        assert detect_events([4, 4, 4, 4], EventSpec.of("trust", "jump", lam)).weeks == []
        assert detect_events([4, 4, 4, 4], EventSpec.of("trust", "drop", lam)).weeks == []


def test_spec_validation():
    with pytest.raises(ValueError):
        EventSpec("trust", "jump", -1.0)
    with pytest.raises(ValueError):
        EventSpec("trust", "drop", 1.0)
    with pytest.raises(ValueError):
        EventSpec("trust", "spike", 1.0)
    assert EventSpec.of("trust", "drop", 2.0).lam == -2.0
    with pytest.raises(ValueError):
        detect_events([3], JUMP)


def test_first_event_time():
    assert first_event_time(EventRecord(0, JUMP, [5, 9])) == 5
    assert first_event_time(EventRecord(0, JUMP, [])) is None
    assert first_event_time(EventRecord(0, JUMP, [0])) == 0


def test_time_series_examples():
    g = MultiRelationalGraph(n=5, horizon=6)
    g.add_edge(0, 1, "trust", 1).add_edge(0, 1, "trust", 1).add_edge(1, 2, "trust", 3)
    ts = build_time_series(g, Community(7, frozenset({0, 1, 2}), "cpm", 3), "trust")
    assert ts.counts.tolist() == [0, 1, 1, 2, 2, 2, 2]
    assert ts.community_id == 7
    assert build_time_series(g, {3, 4}, "trust").counts.tolist() == [0] * 7

    g = MultiRelationalGraph(n=5, horizon=8)
    for u, v in ((0, 1), (1, 2), (2, 0)):
        g.add_edge(u, v, "trade", 5)
    ts = build_time_series(g, {0, 1, 2}, "trade", SnapshotMode.windowed(1))
    assert ts.counts.tolist() == [0, 0, 0, 0, 0, 3, 0, 0, 0]


def test_precursor_classification():
    trade = np.array([[0, 0, 0, 9, 0, 0, 0, 0], [0, 0, 0, 0, 9, 0, 0, 0], [0] * 8, [0, 0, 0, 0, 0, 0, 9, 0]])
    trust = np.array([[0, 0, 0, 0, 0, 9, 0, 0], [0, 0, 0, 0, 9, 0, 0, 0], [0, 9, 0, 0, 0, 0, 0, 0], [0, 0, 9, 0, 0, 0, 0, 0]])
    s = precursor_from_series(trade, trust, 1.0, "jump")
    assert (s.trade_first, s.trust_first, s.co_occurrence) == (1, 1, 1)
    assert s.total_with_both == 3


def test_precursor_on_graph():
    g = MultiRelationalGraph(n=6, horizon=7)
    comm = frozenset({0, 1, 2})
    g.add_edge(0, 1, "trade", 3).add_edge(1, 2, "trade", 3)
    g.add_edge(0, 1, "trust", 5).add_edge(1, 2, "trust", 5)
    s = precursor_analysis(g, [comm], 1.0, "jump")
    assert s.trade_first == 1 and s.total_with_both == 1


series_strategy = st.lists(st.integers(0, 30), min_size=2, max_size=40)


@given(series_strategy)
def test_event_sets_shrink_with_lambda(values):
    x = np.array(values)
    for lams in (JUMP_LAMBDAS, DROP_LAMBDAS):
        kind = "jump" if lams[0] > 0 else "drop"
        sets = [set(detect_events(x, EventSpec("r", kind, lam)).weeks) for lam in lams]
        for looser, tighter in zip(sets, sets[1:]):
            assert tighter <= looser


@given(series_strategy, st.sampled_from(JUMP_LAMBDAS + DROP_LAMBDAS))
def test_reverse_mirrors_events(values, lam):
    kind = "jump" if lam > 0 else "drop"
    spec = EventSpec("r", kind, lam)
    x = np.array(values)
    fwd = detect_events(x, spec).weeks
    back = detect_events(x[::-1], spec).weeks
    assert sorted(len(x) - 1 - w for w in back) == fwd


@given(series_strategy, st.sampled_from(JUMP_LAMBDAS))
def test_every_event_satisfies_predicate(values, lam):
    x = np.array(values, dtype=float)
    weeks = detect_events(x, EventSpec("r", "jump", lam)).weeks
    mu, rho = x.mean(), x.std()
    assert weeks == [t for t in range(len(x)) if rho > 0 and x[t] > mu + lam * rho]


@given(series_strategy)
def test_thresholds_recomputed_after_edit(values):
    x = np.array(values)
    mu = x.mean()
    if mu != int(mu):
        return
    extended = np.concatenate([x, [int(mu)] * 3])
    limit, _ = thresholds(extended, 1.0)
    assert limit[0] == pytest.approx(extended.mean() + extended.std())
