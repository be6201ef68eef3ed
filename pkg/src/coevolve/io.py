"""Edge-list CSV ingestion and report serialization."""

from __future__ import annotations

import csv
import io
import json
from datetime import date, datetime
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

from .community.cover import CommunityCover
from .graph import MultiRelationalGraph

EDGE_COLUMNS = ("src", "dst", "relation", "timestamp")


class IngestError(ValueError):
    pass


def _parse_date(text: str) -> date:
    return datetime.fromisoformat(text).date() if "T" in text or " " in text else date.fromisoformat(text)


class WeekParser:
    """Turns a timestamp cell into a week index.

    Integers are taken as week indices. ISO-8601 dates need ``start``, the
    observation start; weeks are ``bucket_days``-day buckets from it.
    """

    def __init__(self, start: date | str | None = None, bucket_days: int = 7):
        self.start = _parse_date(start) if isinstance(start, str) else start
        if bucket_days < 1:
            raise ValueError("bucket_days must be >= 1")
        self.bucket_days = bucket_days

    def __call__(self, text: str) -> int:
        text = text.strip()
        if text.lstrip("-").isdigit():
            week = int(text)
        else:
            if self.start is None:
                raise ValueError(f"date {text!r} needs an observation start date")
            try:
                when = _parse_date(text)
            except ValueError:
                raise ValueError(f"unparseable timestamp {text!r}") from None
            week = (when - self.start).days // self.bucket_days
        if week < 0:
            raise ValueError(f"timestamp {text!r} precedes the observation start")
        return week


def parse_edge_list(
    stream: IO[str] | str | Path,
    start_date: date | str | None = None,
    bucket_days: int = 7,
    graph: MultiRelationalGraph | None = None,
    relations: Sequence[str] = (),
) -> MultiRelationalGraph:
    """Read a ``src,dst,relation,timestamp`` CSV (header required, any column order).

    Labels are remapped to dense node ids in order of first appearance and
    kept on ``graph.labels``. Bad rows do not abort the read; they are
    collected on ``graph.rejected`` as ``(line, message)``. Passing an
    existing ``graph`` appends to it, reusing its label map.
    """
    if isinstance(stream, (str, Path)):
        with open(stream, newline="", encoding="utf-8") as fh:
            return parse_edge_list(fh, start_date, bucket_days, graph, relations)
    reader = csv.reader(stream)
    header = next(reader, None)
    if header is None or not any(h.strip() for h in header):
        raise IngestError("empty input: no header row")
    cols = [h.strip().lower() for h in header]
    missing = [c for c in EDGE_COLUMNS if c not in cols]
    if missing:
        raise IngestError(f"header lacks column(s): {', '.join(missing)}")
    i_src, i_dst, i_rel, i_ts = (cols.index(c) for c in EDGE_COLUMNS)
    width = max(i_src, i_dst, i_rel, i_ts) + 1

    if graph is None:
        graph = MultiRelationalGraph(relations=(), labels=[])
    if graph.labels is None:
        graph.labels = [str(i) for i in range(graph.n)]
    for name in relations:
        graph.add_relation(name)
    ids = {label: i for i, label in enumerate(graph.labels)}
    labels = graph.labels
    weeks = WeekParser(start_date, bucket_days)
    rel_ids = {name: i for i, name in enumerate(graph.relations)}
    src, dst, rel, wk = [], [], [], []
    rows = 0

    for line, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        rows += 1
        if len(row) < width:
            graph.rejected.append((line, f"expected at least {width} columns, got {len(row)}"))
            continue
        a, b, r = row[i_src].strip(), row[i_dst].strip(), row[i_rel].strip()
        if not a or not b:
            graph.rejected.append((line, "empty node label"))
            continue
        if not r:
            graph.rejected.append((line, "empty relation"))
            continue
        if a == b:
            graph.rejected.append((line, f"self-loop on {a!r}"))
            continue
        try:
            week = weeks(row[i_ts])
        except ValueError as exc:
            graph.rejected.append((line, str(exc)))
            continue
        for label in (a, b):
            if label not in ids:
                ids[label] = len(labels)
                labels.append(label)
        if r not in rel_ids:
            rel_ids[r] = graph.add_relation(r)
        src.append(ids[a])
        dst.append(ids[b])
        rel.append(rel_ids[r])
        wk.append(week)

    if rows == 0 and graph.num_edges == 0:
        raise IngestError("empty input: no data rows")
    merged = MultiRelationalGraph.from_arrays(
        np.concatenate([graph.src, np.asarray(src, dtype=np.int64)]),
        np.concatenate([graph.dst, np.asarray(dst, dtype=np.int64)]),
        np.concatenate([graph.rel, np.asarray(rel, dtype=np.int64)]),
        np.concatenate([graph.week, np.asarray(wk, dtype=np.int64)]),
        relations=graph.relations,
        n=len(labels),
        horizon=graph.horizon,
        labels=labels,
    )
    merged.rejected = graph.rejected
    return merged


def write_edge_list(graph: MultiRelationalGraph, out: IO[str] | str | Path) -> None:
    if isinstance(out, (str, Path)):
        with open(out, "w", newline="", encoding="utf-8") as fh:
            return write_edge_list(graph, fh)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(EDGE_COLUMNS)
    names = graph.relations
    for s, d, r, t in zip(graph.src.tolist(), graph.dst.tolist(), graph.rel.tolist(), graph.week.tolist()):
        w.writerow((graph.label(s), graph.label(d), names[r], t))


def cover_to_jsonl(cover: CommunityCover, graph: MultiRelationalGraph, source_relation: str | None = None) -> str:
    lines = []
    for c in cover:
        record = {
            "community_id": c.id,
            "algorithm": cover.label,
            "members": [graph.label(v) for v in sorted(c.members)],
            "size": c.size,
            "size_group": c.size_group.value if c.size_group else None,
        }
        if source_relation is not None:
            record["source_relation"] = source_relation
        lines.append(json.dumps(record, separators=(",", ":")))
    return "".join(line + "\n" for line in lines)


def read_cover_jsonl(stream: IO[str] | str | Path, graph: MultiRelationalGraph) -> list[frozenset[int]]:
    """Member sets of a serialized cover, mapped back onto ``graph``'s node ids."""
    if isinstance(stream, (str, Path)):
        with open(stream, encoding="utf-8") as fh:
            return read_cover_jsonl(fh, graph)
    ids = {graph.label(i): i for i in range(graph.n)}
    out = []
    for line in stream:
        if line.strip():
            out.append(frozenset(ids[m] for m in json.loads(line)["members"]))
    return out


def format_value(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return "" if np.isnan(x) else repr(float(x))
    return str(x)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_value(x) for x in row])
    return buf.getvalue()
