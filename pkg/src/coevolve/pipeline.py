"""End-to-end batch analysis: ingest, fragment, measure, detect, tally, write."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import shutil
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .community import SizeGroup, cnm, cpm, group_by_size
from .community.cover import CommunityCover
from .events import JUMP_LAMBDAS, KINDS, EventSpec, cover_series, event_mask, precursor_from_series
from .graph import MultiRelationalGraph, SnapshotMode
from .io import cover_to_jsonl, csv_text, parse_edge_list
from .metrics import CoverMetrics, cover_metrics
from .transform import reduce_by_frequency, simplify

log = logging.getLogger(__name__)

ALGORITHMS = ("cpm", "cnm")
STAGES = ("communities", "metrics", "events", "precursor")
METRIC_COLUMNS = (
    "week",
    "algorithm",
    "community_source_relation",
    "size_group",
    "metric",
    "relation",
    "value",
    "n_defined",
)


class PipelineError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException | str):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {cause}")


@dataclass
class PipelineConfig:
    inputs: list[str]
    output_dir: str = "coevolve-out"
    relationship: str = "trust"
    activity: str = "trade"
    modes: dict[str, str] = field(default_factory=dict)
    threshold: int = 5
    k: int = 3
    lambdas: tuple[float, ...] = JUMP_LAMBDAS
    size_bounds: tuple[int, int, int] = (3, 4, 10)
    cnm_min_size: int = 4
    start_date: str | None = None
    bucket_days: int = 7

    def __post_init__(self):
        if self.relationship == self.activity:
            raise ValueError("relationship and activity relations must differ")
        if self.threshold < 1:
            raise ValueError("threshold must be >= 1")
        if self.k < 3:
            raise ValueError("k must be >= 3")
        if not self.lambdas or any(lam <= 0 for lam in self.lambdas):
            raise ValueError("lambdas are positive magnitudes")
        b = tuple(self.size_bounds)
        if len(b) != 3 or not b[0] < b[1] < b[2]:
            raise ValueError(f"size bounds must be increasing, got {b}")

    def snapshot_modes(self) -> dict[str, SnapshotMode]:
        modes = {self.relationship: SnapshotMode.cumulative(), self.activity: SnapshotMode.windowed(1)}
        modes.update({rel: SnapshotMode.parse(text) for rel, text in self.modes.items()})
        return modes

    def as_dict(self) -> dict:
        d = asdict(self)
        d["modes"] = {rel: str(m) for rel, m in sorted(self.snapshot_modes().items())}
        d["lambdas"] = [float(x) for x in self.lambdas]
        d["size_bounds"] = list(self.size_bounds)
        d.pop("output_dir")
        return d


@dataclass
class Analysis:
    """In-memory results; ``files`` maps bundle-relative paths to contents."""

    graph: MultiRelationalGraph
    covers: dict[tuple[str, str], CommunityCover] = field(default_factory=dict)
    metrics: dict[tuple[str, str], CoverMetrics] = field(default_factory=dict)
    files: dict[str, str] = field(default_factory=dict)


def _sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def load_graph(cfg: PipelineConfig) -> MultiRelationalGraph:
    if not cfg.inputs:
        raise ValueError("no input files given")
    graph = None
    for path in cfg.inputs:
        graph = parse_edge_list(path, cfg.start_date, cfg.bucket_days, graph, (cfg.relationship, cfg.activity))
    for line, msg in graph.rejected[:20]:
        log.warning("rejected row %d: %s", line, msg)
    if len(graph.rejected) > 20:
        log.warning("... %d rejected rows in total", len(graph.rejected))
    return graph


def fragment(graph: MultiRelationalGraph, cfg: PipelineConfig) -> dict[tuple[str, str], CommunityCover]:
    """Detect CPM and CNM communities on both relations.

    The relationship relation is simplified as is; the activity relation is
    first reduced to pairs with at least ``threshold`` interactions.
    """
    covers = {}
    for source in (cfg.relationship, cfg.activity):
        if source == cfg.activity:
            sg = reduce_by_frequency(graph, source, cfg.threshold)
        else:
            sg = simplify(graph, source)
        log.info("%s detection graph: %d nodes, %d edges", source, sg.n, sg.m)
        covers[(source, "cpm")] = cpm(sg, cfg.k)
        covers[(source, "cnm")] = cnm(sg, cfg.cnm_min_size)
    return covers


def _group_rows(cover: CommunityCover, bounds) -> dict[str, np.ndarray]:
    groups = group_by_size(cover, bounds)
    rows = {g.value: np.array([c.id for c in groups[g]], dtype=np.int64) for g in SizeGroup}
    rows["all"] = np.arange(len(cover), dtype=np.int64)
    return rows


def community_tables(covers, cfg: PipelineConfig) -> dict[str, str]:
    counts = []
    for source in (cfg.relationship, cfg.activity):
        cnm_cover = covers[(source, "cnm")]
        counts.append(
            (f"{source}-communities", len(cnm_cover), len(cnm_cover.raw()), len(covers[(source, "cpm")]))
        )
    header = ("communities", f"CNM(size>={cfg.cnm_min_size})", "CNM(size>=3)", f"CPM(k={cfg.k})")
    groups = []
    for source in (cfg.relationship, cfg.activity):
        for alg in ALGORITHMS:
            cover = covers[(source, alg)]
            g = group_by_size(cover, cfg.size_bounds)
            total = sum(len(v) for v in g.values())
            row = [source, cover.label, total]
            for sg in SizeGroup:
                row += [len(g[sg]), 100.0 * len(g[sg]) / total if total else float("nan")]
            groups.append(row)
    b1, b2, b3 = cfg.size_bounds
    group_header = (
        "source_relation",
        "algorithm",
        "total",
        f"G1[{b1},{b2})",
        "G1_pct",
        f"G2[{b2},{b3})",
        "G2_pct",
        f"G3[{b3},inf)",
        "G3_pct",
    )
    return {
        "community_counts.csv": csv_text(header, counts),
        "size_groups.csv": csv_text(group_header, groups),
    }


def metric_rows(source: str, cover: CommunityCover, cm: CoverMetrics, cfg: PipelineConfig) -> list[tuple]:
    rows = []
    T1 = cm.internal[cfg.activity].shape[1]
    weeks = range(T1)
    spec = [("connectivity", r) for r in (cfg.relationship, cfg.activity)]
    spec += [("overlap_directed", cfg.activity), ("overlap_undirected", cfg.activity)]
    spec += [("inter_intra", r) for r in (cfg.relationship, cfg.activity)]
    for group, idx in _group_rows(cover, cfg.size_bounds).items():
        for kind, rel in spec:
            mean, count = cm.group_mean(kind, rel, idx)
            rows += [(t, cover.label, source, group, kind, rel, mean[t], count[t]) for t in weeks]
    for rel in (cfg.relationship, cfg.activity):
        overall = cm.overall_inter_intra(rel)
        rows += [(t, cover.label, source, "all", "inter_intra_sum", rel, overall.total[t], overall.n_defined[t]) for t in weeks]
    return rows


def event_table(series: dict[str, np.ndarray], cfg: PipelineConfig) -> str:
    header = ["event"] + [repr(float(lam)) for lam in cfg.lambdas]
    k = len(next(iter(series.values())))
    rows = []
    for rel in (cfg.relationship, cfg.activity):
        for kind in ("drop", "jump"):
            row = [f"{kind}({rel})"]
            for lam in cfg.lambdas:
                signed = EventSpec.of(rel, kind, lam).lam
                hit = event_mask(series[rel], signed).any(axis=1) if k else np.zeros(0, bool)
                row.append(int(hit.sum()))
            rows.append(row)
    rows.append(["communities"] + [k] * len(cfg.lambdas))
    return csv_text(header, rows)


def precursor_table(series: dict[str, np.ndarray], kind: str, cfg: PipelineConfig) -> str:
    stats = [
        precursor_from_series(series[cfg.activity], series[cfg.relationship], lam, kind, cfg.activity, cfg.relationship)
        for lam in cfg.lambdas
    ]
    header = ["precursor"] + [repr(float(lam)) for lam in cfg.lambdas]
    rows = [
        [cfg.activity] + [s.trade_first for s in stats],
        [cfg.relationship] + [s.trust_first for s in stats],
        ["co_occurrence"] + [s.co_occurrence for s in stats],
        ["total"] + [s.total_with_both for s in stats],
    ]
    return csv_text(header, rows)


def analyze(cfg: PipelineConfig, stages: Sequence[str] = STAGES, graph: MultiRelationalGraph | None = None) -> Analysis:
    """Run the requested stages in memory; raises ``PipelineError`` tagged with the failing stage."""
    stage = "ingest"
    try:
        if graph is None:
            graph = load_graph(cfg)
        else:
            for rel in (cfg.relationship, cfg.activity):
                graph.add_relation(rel)
        if graph.horizon < 1:
            raise ValueError("need at least two weeks of data")
        out = Analysis(graph)
        modes = cfg.snapshot_modes()

        stage = "communities"
        out.covers = fragment(graph, cfg)
        if "communities" in stages:
            for (source, alg), cover in out.covers.items():
                out.files[f"communities/{source}_{alg}.jsonl"] = cover_to_jsonl(cover, graph, source)
                if alg == "cnm":
                    out.files[f"communities/{source}_{alg}_raw.jsonl"] = cover_to_jsonl(cover.raw(), graph, source)
            out.files.update(community_tables(out.covers, cfg))

        if "metrics" in stages:
            stage = "metrics"
            rows = []
            for (source, alg), cover in out.covers.items():
                cm = cover_metrics(graph, cover, modes, cfg.activity, cfg.relationship)
                out.metrics[(source, alg)] = cm
                rows += metric_rows(source, cover, cm, cfg)
            out.files["metrics.csv"] = csv_text(METRIC_COLUMNS, rows)

        if "events" in stages or "precursor" in stages:
            stage = "events"
            series = {
                key: {rel: cover_series(graph, cover, rel, modes) for rel in (cfg.relationship, cfg.activity)}
                for key, cover in out.covers.items()
            }
            if "events" in stages:
                for (source, alg), s in series.items():
                    out.files[f"events/{source}_{alg}.csv"] = event_table(s, cfg)
            if "precursor" in stages:
                stage = "precursor"
                for (source, alg), s in series.items():
                    for kind in KINDS:
                        out.files[f"precursor/{source}_{alg}_{kind}.csv"] = precursor_table(s, kind, cfg)
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError(stage, exc) from exc
    return out


def run_pipeline(cfg: PipelineConfig, stages: Sequence[str] = STAGES) -> Analysis:
    """Run ``analyze`` and write the bundle plus ``manifest.json`` into ``cfg.output_dir``.

    Files are staged in a temporary directory and moved into place only
    after every stage succeeded.
    """
    result = analyze(cfg, stages)
    target = Path(cfg.output_dir)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        staging = Path(tempfile.mkdtemp(prefix=f".{target.name}-", dir=target.parent))
    except OSError as exc:
        raise PipelineError("write", exc) from exc
    try:
        for rel_path, text in sorted(result.files.items()):
            p = staging / rel_path
            p.parent.mkdir(parents=True, exist_ok=True)
            p.write_text(text, encoding="utf-8")
        manifest = {
            "tool": "coevolve",
            "version": __version__,
            "config": cfg.as_dict(),
            "stages": [s for s in STAGES if s in stages],
            "inputs": [{"path": str(p), "sha256": _sha256(p)} for p in cfg.inputs],
            "graph": {
                "nodes": result.graph.n,
                "edges": result.graph.num_edges,
                "horizon": result.graph.horizon,
                "relations": result.graph.relations,
                "rejected_rows": len(result.graph.rejected),
            },
            "outputs": {
                name: hashlib.sha256(text.encode("utf-8")).hexdigest()
                for name, text in sorted(result.files.items())
            },
        }
        (staging / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        target.mkdir(parents=True, exist_ok=True)
        for p in sorted(staging.rglob("*")):
            if p.is_file():
                dest = target / p.relative_to(staging)
                dest.parent.mkdir(parents=True, exist_ok=True)
                os.replace(p, dest)
    except OSError as exc:
        raise PipelineError("write", exc) from exc
    finally:
        shutil.rmtree(staging, ignore_errors=True)
    return result
