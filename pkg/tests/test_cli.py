import csv
import io
import json

import numpy as np
import pytest

from coevolve.cli import main
from coevolve.community import Community, CommunityCover
from coevolve.events import cover_series, precursor_from_series
from coevolve.graph import snapshot
from coevolve.io import parse_edge_list, read_cover_jsonl, write_edge_list
from coevolve.metrics import connectivity
from coevolve.pipeline import PipelineConfig, PipelineError, analyze, run_pipeline
from coevolve.synth import Coupling, SynthConfig, generate


@pytest.fixture
def edges(tmp_path):
    graph, _ = generate(SynthConfig(seed=4, n_communities=40, coupling=Coupling.trade_leads(), p_out=0.002))
    path = tmp_path / "edges.csv"
    write_edge_list(graph, path)
    return path


def _bundle(path):
    return {p.relative_to(path).as_posix(): p.read_bytes() for p in sorted(path.rglob("*")) if p.is_file()}


def test_report_bundle(edges, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["report", str(edges), "-o", str(out)]) == 0
    files = _bundle(out)
    for name in (
        "manifest.json",
        "community_counts.csv",
        "size_groups.csv",
        "metrics.csv",
        "communities/trust_cpm.jsonl",
        "communities/trade_cnm.jsonl",
        "communities/trade_cnm_raw.jsonl",
        "events/trust_cnm.csv",
        "precursor/trust_cpm_jump.csv",
        "precursor/trade_cnm_drop.csv",
    ):
        assert name in files, name
    manifest = json.loads(files["manifest.json"])
    assert manifest["config"]["threshold"] == 5 and manifest["config"]["k"] == 3
    assert manifest["config"]["lambdas"] == [1.0, 1.5, 2.0, 2.5]
    assert manifest["config"]["modes"] == {"trade": "windowed:1", "trust": "cumulative"}
    assert len(manifest["inputs"][0]["sha256"]) == 64
    rows = list(csv.reader(io.StringIO(files["precursor/trust_cpm_jump.csv"].decode())))
    assert rows[0] == ["precursor", "1.0", "1.5", "2.0", "2.5"]
    trade, trust = int(rows[1][1]), int(rows[2][1])
    assert trade > trust


def test_rerun_is_byte_identical(edges, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["report", str(edges), "-o", str(a)]) == 0
    assert main(["report", str(edges), "-o", str(b)]) == 0
    assert _bundle(a) == _bundle(b)


def test_rows_rederivable_from_cover(edges, tmp_path):
    out = tmp_path / "out"
    main(["report", str(edges), "-o", str(out)])
    graph = parse_edge_list(edges)
    members = read_cover_jsonl(out / "communities" / "trust_cpm.jsonl", graph)
    cover = CommunityCover([Community(i, m, "cpm", 3) for i, m in enumerate(members)], "cpm", 3)
    series = {rel: cover_series(graph, cover, rel) for rel in ("trust", "trade")}
    stats = precursor_from_series(series["trade"], series["trust"], 1.0, "jump")
    rows = list(csv.reader((out / "precursor" / "trust_cpm_jump.csv").open()))
    assert [int(r[1]) for r in rows[1:]] == [
        stats.trade_first,
        stats.trust_first,
        stats.co_occurrence,
        stats.total_with_both,
    ]
    with (out / "metrics.csv").open() as fh:
        table = list(csv.DictReader(fh))
    row = next(
        r for r in table
        if r["community_source_relation"] == "trust" and r["algorithm"] == "CPM(k=3)"
        and r["size_group"] == "all" and r["metric"] == "connectivity" and r["relation"] == "trust" and r["week"] == "20"
    )
    snap = snapshot(graph, 20)
    expect = np.mean([connectivity(snap, c, "trust") for c in members])
    assert float(row["value"]) == pytest.approx(expect)


def test_stage_subcommands(edges, tmp_path, capsys):
    for cmd, expect in (("metrics", "metrics.csv"), ("events", "events/"), ("precursor", "precursor/")):
        out = tmp_path / cmd
        assert main([cmd, str(edges), "-o", str(out)]) == 0
        assert any(name.startswith(expect) for name in _bundle(out))
        assert "metrics.csv" not in _bundle(out) or cmd == "metrics"


def test_communities_command(edges, tmp_path, capsys):
    assert main(["communities", str(edges), "--algorithm", "cnm"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines and all(json.loads(line)["size"] >= 4 for line in lines)
    target = tmp_path / "c.jsonl"
    assert main(["communities", str(edges), "--relation", "trade", "--k", "4", "-o", str(target)]) == 0
    assert all(json.loads(line)["algorithm"] == "CPM(k=4)" for line in target.read_text().splitlines())


def test_ingest_validate(tmp_path, capsys):
    good = tmp_path / "good.csv"
    good.write_text("src,dst,relation,timestamp\na,b,trust,1\n")
    assert main(["ingest-validate", str(good)]) == 0
    assert json.loads(capsys.readouterr().out)["edges"] == 1
    bad = tmp_path / "bad.csv"
    bad.write_text("src,dst,relation,timestamp\na,a,trust,1\na,b,trade,x\n")
    assert main(["ingest-validate", str(bad)]) == 1
    report = json.loads(capsys.readouterr().out)
    assert [r["line"] for r in report["rejected"]] == [2, 3]


def test_errors_name_the_stage(tmp_path, capsys):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert main(["report", str(empty), "-o", str(tmp_path / "out")]) == 2
    assert "stage ingest" in capsys.readouterr().err
    assert not (tmp_path / "out").exists()
    with pytest.raises(PipelineError) as err:
        analyze(PipelineConfig([str(tmp_path / "missing.csv")]))
    assert err.value.stage == "ingest"


def test_empty_trust_relation(tmp_path):
    rows = ["src,dst,relation,timestamp"] + [f"n{i},n{(i + 1) % 6},trade,{w}" for w in range(6) for i in range(6)]
    path = tmp_path / "trade_only.csv"
    path.write_text("\n".join(rows) + "\n")
    result = run_pipeline(PipelineConfig([str(path)], output_dir=str(tmp_path / "out")))
    assert len(result.covers[("trust", "cpm")]) == 0 and len(result.covers[("trust", "cnm")]) == 0
    counts = list(csv.reader(io.StringIO(result.files["community_counts.csv"])))
    assert counts[1][0] == "trust-communities" and counts[1][1:] == ["0", "0", "0"]
    assert (tmp_path / "out" / "manifest.json").exists()


def test_config_overrides(edges, tmp_path):
    out = tmp_path / "out"
    args = ["report", str(edges), "-o", str(out), "--threshold", "2", "--k", "4", "--lambdas", "1,2",
            "--mode", "trust=windowed:2", "--size-bounds", "3,5,8"]
    assert main(args) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["modes"]["trust"] == "windowed:2"
    assert manifest["config"]["size_bounds"] == [3, 5, 8]
    header = (out / "precursor" / "trust_cpm_jump.csv").read_text().splitlines()[0]
    assert header == "precursor,1.0,2.0"


def test_synth_command(tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert main(["synth", "-o", str(out), "--communities", "5", "--coupling", "trade_leads", "--seed", "3"]) == 0
    truth = json.loads((tmp_path / "s.truth.json").read_text())
    assert len(truth["communities"]) == 5
    assert truth["metadata"]["seed"] == 3
    assert parse_edge_list(out).num_edges > 0
