"""Command-line entry point: ``coevolve <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import __version__
from .community import cnm, cpm
from .events import JUMP_LAMBDAS
from .io import cover_to_jsonl, write_edge_list
from .pipeline import PipelineConfig, PipelineError, load_graph, run_pipeline
from .synth import Coupling, SynthConfig, generate, scale_config
from .transform import reduce_by_frequency, simplify

OUTPUT_ENV = "COEVOLVE_OUTPUT_DIR"


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x.strip())


def _mode(text: str) -> tuple[str, str]:
    rel, sep, mode = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected RELATION=MODE, got {text!r}")
    return rel, mode


def _add_input_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("inputs", nargs="+", help="edge-list CSV file(s) with src,dst,relation,timestamp")
    p.add_argument("--start-date", help="observation start (ISO date) for date timestamps")
    p.add_argument("--bucket-days", type=int, default=7, help="days per week bucket (default 7)")
    p.add_argument("--relationship", default="trust", help="relationship-like relation (default trust)")
    p.add_argument("--activity", default="trade", help="activity-like relation (default trade)")


def _add_analysis_args(p: argparse.ArgumentParser, with_output: bool = True) -> None:
    _add_input_args(p)
    p.add_argument(
        "--mode",
        type=_mode,
        action="append",
        default=[],
        metavar="REL=MODE",
        help="snapshot mode per relation: cumulative | windowed[:W] (repeatable)",
    )
    p.add_argument("--threshold", type=int, default=5, help="activity reduction threshold (default 5)")
    p.add_argument("--k", type=int, default=3, help="CPM clique size (default 3)")
    p.add_argument("--lambdas", type=_floats, default=JUMP_LAMBDAS, help="event lambda magnitudes")
    p.add_argument("--size-bounds", type=_ints, default=(3, 4, 10), help="lower bounds of G1,G2,G3")
    p.add_argument("--cnm-min-size", type=int, default=4, help="smallest reported CNM community (default 4)")
    if with_output:
        p.add_argument(
            "-o",
            "--output-dir",
            default=os.environ.get(OUTPUT_ENV, "coevolve-out"),
            help=f"report directory (default ${OUTPUT_ENV} or ./coevolve-out)",
        )


def _config(args) -> PipelineConfig:
    return PipelineConfig(
        inputs=list(args.inputs),
        output_dir=getattr(args, "output_dir", "coevolve-out"),
        relationship=args.relationship,
        activity=args.activity,
        modes=dict(getattr(args, "mode", [])),
        threshold=getattr(args, "threshold", 5),
        k=getattr(args, "k", 3),
        lambdas=tuple(getattr(args, "lambdas", JUMP_LAMBDAS)),
        size_bounds=tuple(getattr(args, "size_bounds", (3, 4, 10))),
        cnm_min_size=getattr(args, "cnm_min_size", 4),
        start_date=args.start_date,
        bucket_days=args.bucket_days,
    )


def cmd_ingest_validate(args) -> int:
    cfg = _config(args)
    try:
        graph = load_graph(cfg)
    except (OSError, ValueError) as exc:
        raise PipelineError("ingest", exc) from exc
    per_relation = {name: int((graph.rel == i).sum()) for i, name in enumerate(graph.relations)}
    report = {
        "nodes": graph.n,
        "edges": graph.num_edges,
        "horizon": graph.horizon,
        "edges_per_relation": per_relation,
        "rejected": [{"line": line, "error": msg} for line, msg in graph.rejected],
    }
    print(json.dumps(report, indent=2))
    return 1 if graph.rejected else 0


def cmd_communities(args) -> int:
    cfg = _config(args)
    try:
        graph = load_graph(cfg)
    except (OSError, ValueError) as exc:
        raise PipelineError("ingest", exc) from exc
    try:
        relation = args.relation or cfg.relationship
        if relation == cfg.activity and not args.no_reduce:
            sg = reduce_by_frequency(graph, relation, cfg.threshold)
        else:
            sg = simplify(graph, relation)
        if args.algorithm == "cpm":
            cover = cpm(sg, cfg.k)
        else:
            cover = cnm(sg, cfg.cnm_min_size)
        if args.min_size:
            cover = cover.filtered(args.min_size)
    except Exception as exc:
        raise PipelineError("communities", exc) from exc
    text = cover_to_jsonl(cover, graph, relation)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _stage_runner(stages):
    def run(args) -> int:
        result = run_pipeline(_config(args), stages)
        for name in sorted(result.files):
            print(os.path.join(args.output_dir, name))
        print(os.path.join(args.output_dir, "manifest.json"))
        return 0

    return run


def cmd_synth(args) -> int:
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            cfg = SynthConfig.from_dict(json.load(fh))
    elif args.scale_nodes:
        cfg = scale_config(args.scale_nodes, args.scale_edges, args.horizon + 1, args.seed)
    else:
        cfg = SynthConfig(
            seed=args.seed,
            n_communities=args.communities,
            p_in=args.p_in,
            p_out=args.p_out,
            trade_rate=args.trade_rate,
            n_background=args.background_nodes,
            coupling=Coupling(args.coupling, args.lag, args.multiplier),
            horizon=args.horizon,
        )
    graph, truth = generate(cfg)
    write_edge_list(graph, args.output)
    truth_path = args.truth or os.path.splitext(args.output)[0] + ".truth.json"
    with open(truth_path, "w", encoding="utf-8") as fh:
        fh.write(truth.to_json(graph.labels) + "\n")
    print(f"{args.output}: {graph.n} nodes, {graph.num_edges} edges, weeks 0..{graph.horizon}")
    print(truth_path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coevolve", description=__doc__)
    parser.add_argument("--version", action="version", version=f"coevolve {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest-validate", help="parse edge lists and report rejected rows")
    _add_input_args(p)
    p.set_defaults(func=cmd_ingest_validate)

    p = sub.add_parser("communities", help="detect communities on one relation (JSON lines)")
    _add_analysis_args(p, with_output=False)
    p.add_argument("--relation", help="relation to fragment (default: the relationship relation)")
    p.add_argument("--algorithm", choices=("cpm", "cnm"), default="cpm")
    p.add_argument("--min-size", type=int, default=0, help="drop communities smaller than this")
    p.add_argument("--no-reduce", action="store_true", help="do not threshold the activity relation")
    p.add_argument("-o", "--output", help="write JSON lines here instead of stdout")
    p.set_defaults(func=cmd_communities)

    for name, stages, text in (
        ("metrics", ("metrics",), "per-group connectivity, overlap and inter/intra CSV"),
        ("events", ("events",), "event-occurrence tables"),
        ("precursor", ("precursor",), "precursor (direction of influence) tables"),
        ("report", ("communities", "metrics", "events", "precursor"), "full report bundle"),
    ):
        p = sub.add_parser(name, help=text)
        _add_analysis_args(p)
        p.set_defaults(func=_stage_runner(stages))

    p = sub.add_parser("synth", help="generate a synthetic edge list with planted ground truth")
    p.add_argument("-o", "--output", required=True, help="edge-list CSV to write")
    p.add_argument("--truth", help="ground-truth JSON path (default <output>.truth.json)")
    p.add_argument("--config", help="JSON file with SynthConfig fields")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--communities", type=int, default=100)
    p.add_argument("--p-in", type=float, default=0.6)
    p.add_argument("--p-out", type=float, default=0.0)
    p.add_argument("--trade-rate", type=float, default=0.2)
    p.add_argument("--background-nodes", type=int, default=0)
    p.add_argument("--coupling", choices=("none", "trade_leads", "trust_leads"), default="none")
    p.add_argument("--lag", type=int, default=2)
    p.add_argument("--multiplier", type=float, default=5.0)
    p.add_argument("--horizon", type=int, default=40, help="last week index")
    p.add_argument("--scale-nodes", type=int, help="size the network for this many nodes")
    p.add_argument("--scale-edges", type=int, default=1_000_000)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except PipelineError as exc:
        print(f"coevolve: error in stage {exc.stage}: {exc.cause}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"coevolve: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
