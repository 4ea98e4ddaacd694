"""Command line front end.

    satchase run     --mapping m.map --data dir [--engine ...] [--out dir]
    satchase bench   --family of --tgds 30 --fds 10 --rows 50000 ...
    satchase iso     --mapping m.map --left dir --right dir
    satchase gen     --family of ... --out dir
    satchase analyze --mapping m.map [--dump-graph]

Exit codes: 0 success, 1 usage or input error, 2 chase failure,
3 instances not isomorphic.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import analysis as ana
from .bench import FAMILIES, ScenarioSpec, generate_scenario, run_benchmark
from .chase import run_engine
from .core import SchemaError
from .iso import is_isomorphic
from .parser import (
    ParseError,
    load_instance,
    parse_mapping,
    print_mapping,
    serialize_solution,
)


def _read_mapping(path: str):
    with open(path, encoding="utf-8") as fh:
        return parse_mapping(fh.read())


def _default_seed() -> int:
    return int(os.environ.get("SATCHASE_SEED", "0"))


def _stats_json(outcome) -> str:
    stats = dict(vars(outcome.stats))
    stats["phase_times"] = {k: round(v, 6) for k, v in stats["phase_times"].items()}
    if outcome.failed:
        fd_id, witnesses = outcome.failure
        stats["failure"] = {"fd": fd_id, "witnesses": [repr(w) for w in witnesses]}
    return json.dumps(stats, indent=2, default=str)


def cmd_run(args) -> int:
    scenario = _read_mapping(args.mapping)
    source = load_instance(args.data, scenario.source)
    outcome = run_engine(
        args.engine,
        scenario,
        source,
        workers=args.workers,
        parallel=args.parallel,
        discovery=args.discovery,
        seed=args.seed,
        debug=args.debug_invariants,
    )
    if args.stats:
        print(_stats_json(outcome))
    if outcome.failed:
        fd_id, (w1, w2) = outcome.failure
        print(f"chase failed: fd {fd_id} forces distinct constants", file=sys.stderr)
        print(f"  {w1[0]}{w1[1]}", file=sys.stderr)
        print(f"  {w2[0]}{w2[1]}", file=sys.stderr)
        return 2
    if args.debug_invariants and (
        outcome.stats.debug_violations or outcome.stats.partition_ok is False
    ):
        for v in outcome.stats.debug_violations:
            print(f"invariant violation: {v}", file=sys.stderr)
        if outcome.stats.partition_ok is False:
            print("invariant violation: saturation sets do not partition", file=sys.stderr)
        return 1
    if args.out:
        serialize_solution(outcome.solution, args.out)
        print(f"solution written to {args.out}")
    elif not args.stats:
        print(json.dumps(outcome.solution.counts(), indent=2))
    return 0


def cmd_bench(args) -> int:
    specs = [
        ScenarioSpec(
            family=args.family,
            tgds=args.tgds,
            fds=args.fds,
            rows=rows,
            existentials=args.existentials,
            batches=args.batches,
            fusion=args.fusion,
            seed=args.seed,
        )
        for rows in args.rows
    ]
    engines = args.engines.split(",")
    rows = run_benchmark(
        specs,
        engines,
        args.out,
        repeats=args.repeats,
        warmup=not args.no_warmup,
        timeout=args.timeout,
        workers=args.workers,
        parallel=args.parallel,
    )
    for row in rows:
        print(
            f"{row.engine:12s} rows={row.rows:>8d} rep={row.repeat} "
            f"{row.elapsed:8.3f}s {row.status}"
        )
    print(f"results written to {args.out}")
    return 0


def cmd_iso(args) -> int:
    scenario = _read_mapping(args.mapping)
    left = load_instance(args.left, scenario.target, allow_nulls=True)
    right = load_instance(args.right, scenario.target, allow_nulls=True)
    if is_isomorphic(left, right):
        print("isomorphic")
        return 0
    print("not isomorphic")
    return 3


def cmd_gen(args) -> int:
    spec = ScenarioSpec(
        family=args.family,
        tgds=args.tgds,
        fds=args.fds,
        rows=args.rows[0] if isinstance(args.rows, list) else args.rows,
        existentials=args.existentials,
        batches=args.batches,
        fusion=args.fusion,
        seed=args.seed,
    )
    scenario, instance = generate_scenario(spec)
    os.makedirs(args.out, exist_ok=True)
    mapping_path = os.path.join(args.out, "scenario.map")
    with open(mapping_path, "w", encoding="utf-8") as fh:
        fh.write(print_mapping(scenario))
    serialize_solution(instance, args.out, schema=scenario.source)
    print(f"mapping and source written to {args.out}")
    return 0


def cmd_analyze(args) -> int:
    scenario = _read_mapping(args.mapping)
    result = ana.analyze(scenario)
    for tgd in scenario.tgds:
        mut = sorted(result.mutables[tgd.id])
        print(f"tgd {tgd.id}: mutable existentials {{{', '.join(mut)}}}")
    if args.dump_graph:
        print(ana.dump_graph(result.graph), end="")
    else:
        graph = result.graph
        print(
            f"conflict graph: {len(graph.vertices)} vertices, {len(graph.edges)} edges, "
            f"{len(graph.self_loops)} self-loops, {len(graph.components)} components"
        )
    return 0


def _add_spec_args(parser, rows_many: bool):
    parser.add_argument("--family", choices=FAMILIES, default="of")
    parser.add_argument("--tgds", type=int, default=30)
    parser.add_argument("--fds", type=int, default=10)
    if rows_many:
        parser.add_argument("--rows", type=int, nargs="+", default=[50_000])
    else:
        parser.add_argument("--rows", type=int, default=50_000)
    parser.add_argument("--existentials", type=int, default=3)
    parser.add_argument("--batches", type=int, default=None)
    parser.add_argument("--fusion", type=float, default=0.10)
    parser.add_argument("--seed", type=int, default=_default_seed())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="satchase")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="chase a mapping over a source instance")
    run.add_argument("--mapping", required=True)
    run.add_argument("--data", required=True, help="directory of <relation>.csv files")
    run.add_argument(
        "--engine", choices=("interleaved", "classical", "oblivious"), default="interleaved"
    )
    run.add_argument("--discovery", choices=("masked", "naive"), default="masked")
    run.add_argument("--parallel", action="store_true")
    run.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    run.add_argument("--out", help="directory for the solution CSVs")
    run.add_argument("--stats", action="store_true", help="print run statistics as JSON")
    run.add_argument("--debug-invariants", action="store_true")
    run.add_argument("--seed", type=int, default=_default_seed())
    run.set_defaults(func=cmd_run)

    bench = sub.add_parser("bench", help="generate scenarios and time the engines")
    _add_spec_args(bench, rows_many=True)
    bench.add_argument("--engines", default="interleaved,classical,oblivious")
    bench.add_argument("--out", default="bench_results.csv")
    bench.add_argument("--repeats", type=int, default=3)
    bench.add_argument("--no-warmup", action="store_true")
    bench.add_argument("--timeout", type=float, default=600.0)
    bench.add_argument("--parallel", action="store_true")
    bench.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    bench.set_defaults(func=cmd_bench)

    iso = sub.add_parser("iso", help="check two target instances for isomorphism")
    iso.add_argument("--mapping", required=True)
    iso.add_argument("--left", required=True)
    iso.add_argument("--right", required=True)
    iso.set_defaults(func=cmd_iso)

    gen = sub.add_parser("gen", help="write a generated scenario to disk")
    _add_spec_args(gen, rows_many=False)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_gen)

    analyze = sub.add_parser("analyze", help="static analysis of a mapping")
    analyze.add_argument("--mapping", required=True)
    analyze.add_argument("--dump-graph", action="store_true")
    analyze.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, SchemaError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
