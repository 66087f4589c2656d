"""Command line: `join run|analyze|gen|bench`.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import bench, engine, querygraph
from .queries import QuerySyntaxError, parse_query
from .storage import DataError


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


def _read_query_arg(value: str) -> str:
    if os.path.exists(value):
        with open(value) as fh:
            return fh.read()
    return value


def cmd_run(args) -> int:
    inst = bench.load_instance(_read_query_arg(args.query), args.data_dir,
                               delimiter=args.delimiter, numeric=args.numeric)
    gao = None
    if args.gao:
        names = [s.strip() for s in args.gao.split(",")]
        gao = tuple(inst.query.attr_id(a) for a in names)
    trace = [] if args.trace else None
    prep = engine.prepare(inst, mode=args.mode, gao=gao, numeric=args.numeric)
    res = engine.evaluate(prep, trace=trace)
    rows = sorted(res.tuples)
    sink = open(args.out, "w") if args.out else sys.stdout
    try:
        print("\t".join(inst.query.attrs), file=sink)
        for row in rows:
            print("\t".join(str(v) for v in row), file=sink)
    finally:
        if args.out:
            sink.close()
    stats = res.stats.as_dict()
    stats["gao"] = [inst.query.attrs[i] for i in prep.plan.gao]
    stats["mode"] = prep.plan.mode
    if args.stats:
        with open(args.stats, "w") as fh:
            json.dump(stats, fh, indent=2, sort_keys=True)
    else:
        print(json.dumps(stats, sort_keys=True), file=sys.stderr)
    if args.trace:
        with open(args.trace, "w") as fh:
            for event in trace:
                fh.write("\t".join(str(x) for x in event) + "\n")
    return 0


def cmd_analyze(args) -> int:
    q = parse_query(_read_query_arg(args.query))
    h = q.hypergraph()
    alpha, _ = querygraph.gyo_reduce(h)
    beta = querygraph.is_beta_acyclic(h)
    choice = querygraph.choose_gao(h)
    info = {
        "attributes": list(q.attrs),
        "alphaAcyclic": alpha,
        "betaAcyclic": beta,
        "mode": choice.mode,
        "gao": [q.attrs[i] for i in choice.gao],
        "eliminationWidth": choice.width,
    }
    if args.all_neos:
        info["nestedEliminationOrders"] = [
            [q.attrs[i] for i in order]
            for order in querygraph.all_nested_elimination_orders(h)
        ]
    print(json.dumps(info, indent=2, sort_keys=True))
    return 0


def cmd_gen(args) -> int:
    params = {}
    for kv in args.params or []:
        if "=" not in kv:
            raise DataError(f"bad parameter {kv!r}, expected key=value")
        k, v = kv.split("=", 1)
        params[k] = v
    try:
        inst = bench.generate_instance(args.family, params)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    os.makedirs(args.out_dir, exist_ok=True)
    q = inst.query
    head = ",".join(q.attrs)
    body = ", ".join(f"{a.name}({','.join(a.attrs)})" for a in q.atoms)
    with open(os.path.join(args.out_dir, "query.txt"), "w") as fh:
        fh.write(f"Q({head}) :- {body}.\n")
    for atom in q.atoms:
        with open(os.path.join(args.out_dir, f"{atom.name}.tsv"), "w") as fh:
            fh.write("\t".join(atom.attrs) + "\n")
            for row in sorted(inst.data[atom.name]):
                fh.write("\t".join(str(v) for v in row) + "\n")
    print(f"wrote {len(q.atoms)} relations to {args.out_dir}")
    return 0


def cmd_bench(args) -> int:
    try:
        report = bench.run_suite(args.suite, seed=args.seed)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    text = bench.report_to_json(report)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(text + "\n")
        print(f"wrote {args.report}")
    else:
        print(text)
    return 0


def build_parser() -> _Parser:
    p = _Parser(prog="join", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="evaluate a query over TSV data")
    run.add_argument("--query", required=True, help="query text or a file containing it")
    run.add_argument("--data-dir", required=True)
    run.add_argument("--gao", help="comma-separated attribute order")
    run.add_argument("--mode", default="auto", choices=["auto", "beta", "general", "triangle"])
    run.add_argument("--delimiter", default="\t")
    run.add_argument("--numeric", default="auto", choices=["auto", "always", "never"])
    run.add_argument("--out", help="output TSV path (default stdout)")
    run.add_argument("--stats", help="stats JSON path (default stderr)")
    run.add_argument("--trace", help="write probe/constraint trace to this file")
    run.set_defaults(fn=cmd_run)

    an = sub.add_parser("analyze", help="acyclicity, GAO choice, widths")
    an.add_argument("--query", required=True)
    an.add_argument("--all-neos", action="store_true",
                    help="enumerate every nested elimination order")
    an.set_defaults(fn=cmd_analyze)

    gen = sub.add_parser("gen", help="write a generated instance as TSV files")
    gen.add_argument("--family", required=True, choices=sorted(bench.FAMILIES))
    gen.add_argument("--params", nargs="*", metavar="k=v")
    gen.add_argument("--out-dir", required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.set_defaults(fn=cmd_gen)

    be = sub.add_parser("bench", help="run a benchmark suite")
    be.add_argument("--suite", required=True, choices=sorted(bench.SUITES))
    be.add_argument("--report", help="write the JSON report here (default stdout)")
    be.add_argument("--seed", type=int, default=0)
    be.set_defaults(fn=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (DataError, QuerySyntaxError, FileNotFoundError) as exc:
        print(f"join: data error: {exc}", file=sys.stderr)
        return 2
    except engine.PlanError as exc:
        print(f"join: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
