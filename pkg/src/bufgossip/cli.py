"""bufgossip command line: gen, run, couple, bounds, experiment.

Exit codes: 0 success, 1 usage or configuration error, 2 run censored at
--max-rounds, 3 I/O error.  ``GOSSIP_SEED`` supplies the base seed when
--seed is not given.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

from .bounds import BoundConstants, bounds_report
from .coupling import run_coupled
from .engine import Model, Protocol, RunConfig, TieBreak, run
from .experiment import ExperimentPlan, results_csv, run_experiment, summary_csv
from .graph import GRAPH_KINDS, GraphError, GraphSpec, format_edge_list, generate
from .tape import derive_seed

EXIT_OK, EXIT_USAGE, EXIT_CENSORED, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _write_atomic(path: str, text: str) -> None:
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=f".{target.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _emit(text: str, path: str | None) -> None:
    if path:
        _write_atomic(path, text)
    else:
        sys.stdout.write(text)


def _base_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("GOSSIP_SEED")
    if env is None:
        return 0
    try:
        return int(env, 0)
    except ValueError:
        raise UsageError(f"GOSSIP_SEED must be an integer, got {env!r}") from None


def _add_graph_args(p: argparse.ArgumentParser, seed_flag: str = "--graph-seed") -> None:
    g = p.add_argument_group("graph source (an edge-list file or a generator)")
    g.add_argument("--graph", metavar="PATH", help="edge-list file")
    g.add_argument("--kind", choices=[k for k in GRAPH_KINDS if k != "edge-list"],
                   help="generator kind")
    g.add_argument("--n", type=int, help="node count (complete, path, random-regular)")
    g.add_argument("--d", type=int, help="number of stars (star-chain)")
    g.add_argument("--delta", type=int, help="leaves per star (star, star-chain)")
    g.add_argument("--degree", type=int, help="degree (random-regular)")
    g.add_argument(seed_flag, dest="graph_seed", type=int, default=0,
                   help="generator seed (random-regular; default 0)")


def _graph_spec(args) -> GraphSpec:
    if args.graph and args.kind:
        raise UsageError("give either --graph or --kind, not both")
    if args.graph:
        return GraphSpec.edge_list(args.graph)
    if not args.kind:
        raise UsageError("a graph source is required: --graph PATH or --kind KIND")
    return GraphSpec(args.kind, n=args.n, d=args.d, delta=args.delta, degree=args.degree,
                     seed=args.graph_seed)


def _add_run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--protocol", choices=[x.value for x in Protocol], required=True)
    p.add_argument("--source", type=int, default=0, help="source node (default 0)")
    p.add_argument("--seed", type=int, help="run seed (default: $GOSSIP_SEED or 0)")
    p.add_argument("--tie-break", choices=[x.value for x in TieBreak],
                   default=TieBreak.UNIFORM_RANDOM.value,
                   help="order of same-round arrivals in a buffer (default uniform)")
    p.add_argument("--max-rounds", type=int, default=1_000_000,
                   help="safety cap on rounds (default 1000000)")


def cmd_gen(args) -> int:
    g = generate(_graph_spec(args))
    _emit(format_edge_list(g), args.out)
    return EXIT_OK


def cmd_run(args) -> int:
    g = generate(_graph_spec(args))
    config = RunConfig(args.protocol, model=args.model, source=args.source,
                       seed=_base_seed(args), tie_break=args.tie_break,
                       buffer_capacity=args.buffer_capacity, max_rounds=args.max_rounds)
    trace = run(g, config)
    if args.trace:
        _write_atomic(args.trace, trace.to_jsonl())
    if trace.censored:
        print("censored")
        return EXIT_CENSORED
    print(trace.completion_round)
    return EXIT_OK


def cmd_couple(args) -> int:
    if args.seeds < 1:
        raise UsageError("--seeds must be >= 1")
    g = generate(_graph_spec(args))
    base = _base_seed(args)
    reports = [run_coupled(g, args.source, args.protocol, derive_seed(base, i),
                           max_rounds=args.max_rounds, tie_break=TieBreak(args.tie_break))
               for i in range(args.seeds)]
    _emit(json.dumps([r.to_dict() for r in reports], indent=2) + "\n", args.out)
    equal = sum(r.informed_sets_equal_every_round for r in reports)
    print(f"{equal}/{len(reports)} seeds equal every round", file=sys.stderr)
    return EXIT_OK


def cmd_bounds(args) -> int:
    spec = _graph_spec(args)
    g = generate(spec)
    constants = BoundConstants()
    if args.constants:
        constants = BoundConstants.from_dict(json.loads(Path(args.constants).read_text()))
    chain = (spec.d, spec.delta) if spec.kind == "star-chain" else None
    report = bounds_report(g, constants, chain)
    if args.format == "json":
        text = json.dumps(report.to_dict(), indent=2) + "\n"
    else:
        text = report.table()
    _emit(text, args.out)
    return EXIT_OK


def cmd_experiment(args) -> int:
    data = json.loads(Path(args.plan).read_text(encoding="utf-8"))
    if args.seed is not None:
        data["base_seed"] = args.seed
    elif "base_seed" not in data and os.environ.get("GOSSIP_SEED") is not None:
        data["base_seed"] = _base_seed(args)
    plan = ExperimentPlan.from_dict(data)
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    result = run_experiment(plan, jobs=args.jobs)
    rows_text = results_csv(result.rows)
    summary_text = summary_csv(result.summaries)
    if args.results:
        _write_atomic(args.results, rows_text)
    _emit(summary_text, args.summary)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bufgossip", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="write a generated graph as an edge list")
    _add_graph_args(p, seed_flag="--seed")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("run", help="simulate one run and print its completion round")
    _add_graph_args(p)
    _add_run_args(p)
    p.add_argument("--model", choices=[x.value for x in Model], default=Model.BUFFERED.value)
    p.add_argument("--buffer-capacity", type=int,
                   help="finite buffer size with drop-tail (default unbounded)")
    p.add_argument("--trace", help="write the per-round trace as JSON lines")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("couple", help="run both models on shared randomness and compare")
    _add_graph_args(p)
    _add_run_args(p)
    p.add_argument("--seeds", type=int, required=True, help="number of coupled runs")
    p.add_argument("--out", help="JSON report file (default stdout)")
    p.set_defaults(func=cmd_couple)

    p = sub.add_parser("bounds", help="evaluate the Pull and Push bounds for a graph")
    _add_graph_args(p)
    p.add_argument("--constants", help="JSON file of bound constants")
    p.add_argument("--format", choices=["table", "json"], default="table")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("experiment", help="run a JSON experiment plan")
    p.add_argument("plan", help="plan file (JSON, fields as ExperimentPlan)")
    p.add_argument("--seed", type=int, help="override the plan's base_seed")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (output unchanged)")
    p.add_argument("--results", help="per-trial CSV file")
    p.add_argument("--summary", help="summary CSV file (default stdout)")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"bufgossip: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"bufgossip: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (GraphError, ValueError, KeyError, TypeError) as exc:
        # json.JSONDecodeError is a ValueError
        print(f"bufgossip: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
