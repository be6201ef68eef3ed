"""Synthetic two-relation temporal networks with planted communities and event lags.

Each planted community gets a relationship ("trust") formation burst and an
activity ("trade") burst. The coupling decides how the two burst weeks
relate: ``trade_leads`` puts the trust burst ``lag`` weeks after the trade
burst, ``trust_leads`` the reverse, and ``none`` samples them independently.

Burst weeks are drawn from the last third of the horizon by default. A
cumulative trust series only crosses ``mean + std`` at a step that leaves
fewer than half the weeks above it, so earlier formation bursts would not
register as trust events at all.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .community.cover import Community, CommunityCover
from .graph import MultiRelationalGraph

RNG_ALGORITHM = "numpy.random.PCG64"
COUPLINGS = ("none", "trade_leads", "trust_leads")


class SynthConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Coupling:
    kind: str = "none"
    lag: int = 2
    multiplier: float = 5.0

    def __post_init__(self):
        if self.kind not in COUPLINGS:
            raise SynthConfigError(f"coupling must be one of {COUPLINGS}, got {self.kind!r}")
        if self.lag < 1:
            raise SynthConfigError("lag must be >= 1")
        if self.multiplier <= 1:
            raise SynthConfigError("multiplier must be > 1")

    @classmethod
    def trade_leads(cls, lag: int = 2, multiplier: float = 5.0) -> Coupling:
        return cls("trade_leads", lag, multiplier)

    @classmethod
    def trust_leads(cls, lag: int = 2, multiplier: float = 5.0) -> Coupling:
        return cls("trust_leads", lag, multiplier)


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    n_communities: int = 100
    # share of communities in G1 (size 3), G2 (4-9) and G3 (10..max_size)
    size_weights: tuple[float, float, float] = (0.4, 0.45, 0.15)
    max_size: int = 20
    sizes: tuple[int, ...] | None = None  # explicit sizes override size_weights
    p_in: float = 0.6
    p_out: float = 0.0
    trade_rate: float = 0.2  # expected weekly trades per ordered intra pair
    background_trades: float = 0.0  # expected random trades per week, any pair
    n_background: int = 0  # nodes outside every community
    coupling: Coupling = field(default_factory=Coupling)
    trust_burst_share: float = 0.8  # share of a community's trust links granted at its burst
    burst_window: tuple[int, int] | None = None
    horizon: int = 40  # last week index T
    relationship: str = "trust"
    activity: str = "trade"

    def __post_init__(self):
        if not 0 <= self.p_out < self.p_in <= 1:
            raise SynthConfigError("need 0 <= p_out < p_in <= 1")
        if self.n_communities < 0 or self.n_background < 0:
            raise SynthConfigError("counts must be non-negative")
        if self.trade_rate < 0 or self.background_trades < 0:
            raise SynthConfigError("rates must be non-negative")
        if not 0 <= self.trust_burst_share <= 1:
            raise SynthConfigError("trust_burst_share must lie in [0, 1]")
        if self.sizes is not None:
            if len(self.sizes) != self.n_communities:
                raise SynthConfigError("len(sizes) must equal n_communities")
            if any(s < 3 for s in self.sizes):
                raise SynthConfigError("community sizes must be >= 3")
        else:
            w = self.size_weights
            if len(w) != 3 or any(x < 0 for x in w) or sum(w) <= 0:
                raise SynthConfigError(f"infeasible size weights {w}")
            if w[2] > 0 and self.max_size < 10:
                raise SynthConfigError("max_size must be >= 10 when G3 weight is positive")
        lo, hi = self.window()
        if lo < 0 or hi > self.horizon - 1 or hi - lo < self._lead_span():
            raise SynthConfigError(f"burst window {lo, hi} cannot fit lag within horizon {self.horizon}")

    def _lead_span(self) -> int:
        return 0 if self.coupling.kind == "none" else self.coupling.lag

    def window(self) -> tuple[int, int]:
        if self.burst_window is not None:
            return tuple(self.burst_window)
        return math.ceil(2 * self.horizon / 3), self.horizon - 1

    def to_dict(self) -> dict:
        d = asdict(self)
        d["coupling"] = asdict(self.coupling)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> SynthConfig:
        d = dict(d)
        if "coupling" in d and isinstance(d["coupling"], dict):
            d["coupling"] = Coupling(**d["coupling"])
        for key in ("size_weights", "sizes", "burst_window"):
            if d.get(key) is not None:
                d[key] = tuple(d[key])
        return cls(**d)


@dataclass
class GroundTruth:
    communities: list[tuple[int, ...]]
    trade_bursts: list[int]
    trust_bursts: list[int]
    metadata: dict = field(default_factory=dict)

    def cover(self) -> CommunityCover:
        comms = [Community(i, frozenset(c), "planted") for i, c in enumerate(self.communities)]
        return CommunityCover(comms, "planted", disjoint=True)

    def labels(self, n: int) -> np.ndarray:
        """Planted block per node; background nodes get singleton labels."""
        lab = np.arange(n, dtype=np.int64) + len(self.communities)
        for i, c in enumerate(self.communities):
            lab[list(c)] = i
        return lab

    def to_json(self, labels: list[str] | None = None) -> str:
        name = (lambda v: labels[v]) if labels is not None else str
        return json.dumps(
            {
                "communities": [[name(v) for v in c] for c in self.communities],
                "event_weeks": {
                    "trade": self.trade_bursts,
                    "trust": self.trust_bursts,
                },
                "metadata": self.metadata,
            },
            indent=2,
            sort_keys=True,
        )


def _sample_sizes(cfg: SynthConfig, rng: np.random.Generator) -> np.ndarray:
    if cfg.sizes is not None:
        return np.asarray(cfg.sizes, dtype=np.int64)
    w = np.asarray(cfg.size_weights, dtype=np.float64)
    group = rng.choice(3, size=cfg.n_communities, p=w / w.sum())
    sizes = np.full(cfg.n_communities, 3, dtype=np.int64)
    g2, g3 = group == 1, group == 2
    sizes[g2] = rng.integers(4, 10, size=int(g2.sum()))
    sizes[g3] = rng.integers(10, cfg.max_size + 1, size=int(g3.sum()))
    return sizes


def _burst_weeks(cfg: SynthConfig, rng: np.random.Generator, k: int) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = cfg.window()
    c = cfg.coupling
    if c.kind == "none":
        return rng.integers(lo, hi + 1, size=k), rng.integers(lo, hi + 1, size=k)
    lead = rng.integers(lo, hi - c.lag + 1, size=k)
    if c.kind == "trade_leads":
        return lead, lead + c.lag
    return lead + c.lag, lead


def generate(cfg: SynthConfig) -> tuple[MultiRelationalGraph, GroundTruth]:
    """Sample a graph and its ground truth; identical configs give identical output."""
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    T = cfg.horizon
    sizes = _sample_sizes(cfg, rng)
    k = len(sizes)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    n = int(offsets[-1]) + cfg.n_background
    trade_burst, trust_burst = _burst_weeks(cfg, rng, k)
    multiplier = cfg.coupling.multiplier

    parts: list[tuple[np.ndarray, ...]] = []  # (src, dst, relation, week)
    rel_trust, rel_trade = 0, 1

    for s in np.unique(sizes).tolist():
        comm = np.flatnonzero(sizes == s)
        base = offsets[comm][:, None]
        # trust: one directed link per formed unordered pair
        iu, ju = np.triu_indices(s, 1)
        formed = rng.random((len(comm), len(iu))) < cfg.p_in
        flip = rng.random(formed.shape) < 0.5
        at_burst = rng.random(formed.shape) < cfg.trust_burst_share
        uniform_week = rng.integers(0, T + 1, size=formed.shape)
        week = np.where(at_burst, trust_burst[comm][:, None], uniform_week)
        a = base + np.where(flip, ju, iu)
        b = base + np.where(flip, iu, ju)
        parts.append((a[formed], b[formed], np.full(int(formed.sum()), rel_trust), week[formed]))

        # trade: Poisson count per ordered pair per week
        io, jo = np.nonzero(~np.eye(s, dtype=bool))
        rate = np.full((len(comm), T + 1), cfg.trade_rate)
        rate[np.arange(len(comm)), trade_burst[comm]] *= multiplier
        counts = rng.poisson(rate[:, :, None], size=(len(comm), T + 1, len(io)))
        ci, wk, pi = np.nonzero(counts)
        reps = counts[ci, wk, pi]
        src = np.repeat(offsets[comm][ci] + io[pi], reps)
        dst = np.repeat(offsets[comm][ci] + jo[pi], reps)
        parts.append((src, dst, np.full(len(src), rel_trade), np.repeat(wk, reps)))

    community_of = np.full(n, -1, dtype=np.int64)
    community_of[: offsets[-1]] = np.repeat(np.arange(k), sizes)

    if cfg.p_out > 0 and n > 1:
        total_pairs = n * (n - 1) // 2 - int(np.sum(sizes * (sizes - 1) // 2))
        m = int(rng.binomial(total_pairs, cfg.p_out))
        u = rng.integers(0, n, size=2 * m + 16)
        v = rng.integers(0, n, size=2 * m + 16)
        ok = (u != v) & ((community_of[u] != community_of[v]) | (community_of[u] < 0))
        lo_, hi_ = np.minimum(u[ok], v[ok]), np.maximum(u[ok], v[ok])
        keys, first = np.unique(lo_ * n + hi_, return_index=True)
        keys = keys[np.argsort(first)][:m]
        lo_, hi_ = keys // n, keys % n
        flip = rng.random(len(keys)) < 0.5
        parts.append(
            (
                np.where(flip, hi_, lo_),
                np.where(flip, lo_, hi_),
                np.full(len(keys), rel_trust),
                rng.integers(0, T + 1, size=len(keys)),
            )
        )

    if cfg.background_trades > 0 and n > 1:
        per_week = rng.poisson(cfg.background_trades, size=T + 1)
        wk = np.repeat(np.arange(T + 1), per_week)
        u = rng.integers(0, n, size=len(wk))
        v = (u + rng.integers(1, n, size=len(wk))) % n
        parts.append((u, v, np.full(len(wk), rel_trade), wk))

    src, dst, rel, week = (np.concatenate([p[i] for p in parts]).astype(np.int64) for i in range(4))
    order = np.lexsort((dst, src, rel, week))
    graph = MultiRelationalGraph.from_arrays(
        src[order],
        dst[order],
        rel[order],
        week[order],
        relations=(cfg.relationship, cfg.activity),
        n=n,
        horizon=T,
        labels=[f"v{i}" for i in range(n)],
    )
    truth = GroundTruth(
        [tuple(range(int(offsets[i]), int(offsets[i + 1]))) for i in range(k)],
        trade_burst.tolist(),
        trust_burst.tolist(),
        {"rng": RNG_ALGORITHM, "seed": cfg.seed, "config": cfg.to_dict()},
    )
    return graph, truth


def scale_config(
    n_nodes: int = 100_000,
    n_edges: int = 1_000_000,
    weeks: int = 40,
    seed: int = 0,
    background_share: float = 0.1,
) -> SynthConfig:
    """Config whose node and edge counts land just above the targets."""
    # sampled sizes and Poisson counts scatter around their means
    n_nodes = int(n_nodes * 1.01)
    n_edges = int(n_edges * 1.02)
    weights = np.array([0.4, 0.45, 0.15])
    max_size = 20
    g2, g3 = np.arange(4, 10), np.arange(10, max_size + 1)
    mean_size = weights @ [3, g2.mean(), g3.mean()]
    mean_pairs = weights @ [6, (g2 * (g2 - 1)).mean(), (g3 * (g3 - 1)).mean()]
    n_comm = int(n_nodes * (1 - background_share) / mean_size)
    n_comm_nodes = int(round(n_comm * mean_size))
    p_in = 0.5
    trust = n_comm * mean_pairs / 2 * p_in
    background = 0.05 * n_edges
    multiplier = 5.0
    rate = (n_edges - trust - background) / (n_comm * mean_pairs * (weeks + multiplier - 1))
    return SynthConfig(
        seed=seed,
        n_communities=n_comm,
        size_weights=tuple(weights.tolist()),
        max_size=max_size,
        p_in=p_in,
        trade_rate=float(rate),
        background_trades=background / weeks,
        n_background=max(n_nodes - n_comm_nodes, 0),
        coupling=Coupling("trade_leads", 2, multiplier),
        horizon=weeks - 1,
    )
