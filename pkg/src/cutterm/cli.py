"""Command-line front end: ``cutterm {run,graph,transform,validate,check}``.

Exit codes: 0 ok, 1 parse or input error, 2 run budget exceeded, 3 run stuck
on a variable goal, 4 graph node budget exhausted, 5 validation or check
violations, 6 graph not proper.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from .graph import BudgetExhausted, BuildConfig, TerminationGraph, build, to_dot, validate
from .harness import CORPUS_DIR, Corpus, CorpusEntry, check_entry, load_corpus
from .interpreter import BUDGET_EXCEEDED, STUCK, format_trace, run
from .parser import ParseError, QuerySpec, load_program, parse_goal, parse_query, print_program
from .synth import synthesize
from .terms import Program

OK, PARSE_ERROR, RUN_BUDGET, RUN_STUCK, NODE_BUDGET, VIOLATIONS, NOT_PROPER = range(7)


class CliError(Exception):
    def __init__(self, msg: str, code: int = PARSE_ERROR):
        super().__init__(msg)
        self.code = code


def _positive(text: str) -> int:
    n = int(text)
    if n <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return n


def _natural(text: str) -> int:
    n = int(text)
    if n < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return n


def _load(path: str) -> tuple[Program, Optional[QuerySpec]]:
    try:
        return load_program(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}")


def _query(args, directive: Optional[QuerySpec]) -> QuerySpec:
    if args.query:
        return parse_query(args.query)
    if directive is not None:
        return directive
    raise CliError(f"{args.file}: no query given; pass --query or add a '%query: p(g,v)' line")


def _emit(text: str, out: Optional[str]) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _build(args) -> tuple[TerminationGraph, list]:
    program, directive = _load(args.file)
    query = _query(args, directive)
    g = build(program, query, BuildConfig(max_nodes=args.max_nodes))
    return g, validate(g)


def _report_violations(violations) -> int:
    for v in violations:
        print(f"violation: {v}", file=sys.stderr)
    return VIOLATIONS if violations else OK


def cmd_run(args) -> int:
    program, _ = _load(args.file)
    goal = parse_goal(args.goal)
    result = run(goal, program, args.budget)
    lines = [format_trace(result)]
    for ans in result.answers:
        lines.append(f"answer {ans}")
    lines.append(f"status {result.status} after {result.steps} steps")
    _emit("\n".join(lines), args.out)
    return {BUDGET_EXCEEDED: RUN_BUDGET, STUCK: RUN_STUCK}.get(result.status, OK)


def cmd_graph(args) -> int:
    g, violations = _build(args)
    if args.format == "dot":
        text = to_dot(g)
    elif args.format == "json":
        text = g.dumps()
    else:
        text = str(g)
    _emit(text, args.out)
    return _report_violations(violations)


def cmd_validate(args) -> int:
    g, violations = _build(args)
    counts = ", ".join(f"{k} {v}" for k, v in sorted(g.counts().items()))
    print(f"{len(g)} nodes ({counts}); {'proper' if g.proper else 'not proper'}; {len(violations)} violations")
    return _report_violations(violations)


def cmd_transform(args) -> int:
    g, violations = _build(args)
    if violations:
        return _report_violations(violations)
    if not g.proper:
        names = ", ".join(str(n.state) for n in g.stuck_leaves())
        print(f"graph is not proper; leaves starting with a variable: {names}", file=sys.stderr)
        return NOT_PROPER
    s = synthesize(g)
    _emit(print_program(s.program, s.query), args.out)
    return OK


def cmd_check(args) -> int:
    if args.file is None:
        corpus = load_corpus(CORPUS_DIR)
    elif Path(args.file).is_dir():
        corpus = load_corpus(args.file)
    else:
        program, directive = _load(args.file)
        corpus = Corpus([CorpusEntry(Path(args.file).stem, program, _query(args, directive))])
    if args.samples == 0:
        print("warning: --samples 0 makes the simulation check vacuous", file=sys.stderr)
    cfg = BuildConfig(max_nodes=args.max_nodes)
    failed = 0
    lines = []
    for entry in corpus:
        r = check_entry(entry, cfg, samples=args.samples, queries=args.queries, budget=args.budget)
        lines.append(r.summary())
        failed += not r.passed
    lines.append(f"{'PASS' if not failed else 'FAIL'}: {len(corpus) - failed}/{len(corpus)}")
    _emit("\n".join(lines), args.out)
    return VIOLATIONS if failed else OK


def parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cutterm", description="Cut elimination for termination analysis.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, file_required=True):
        if file_required:
            p.add_argument("file", help="logic program source")
        p.add_argument("--out", help="write output here instead of stdout")

    def graph_opts(p):
        p.add_argument("--query", help="moded query such as div(g,g,v); overrides the %%query: directive")
        p.add_argument("--max-nodes", type=_positive, default=10_000, help="graph node budget (default 10000)")

    p = sub.add_parser("run", help="run a concrete goal and print the trace")
    common(p)
    p.add_argument("goal", help='goal such as "div(0,0,Z)"')
    p.add_argument("--budget", type=_positive, default=10_000, help="step budget (default 10000)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("graph", help="build and print the termination graph")
    common(p)
    graph_opts(p)
    p.add_argument("--format", choices=("text", "dot", "json"), default="text")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("validate", help="build the graph and check its well-formedness")
    common(p)
    graph_opts(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("transform", help="print the synthesized cut-free program")
    common(p)
    graph_opts(p)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("check", help="run the simulation and soundness checks")
    p.add_argument("file", nargs="?", help="program or corpus directory (default: bundled corpus)")
    p.add_argument("--out", help="write the report here instead of stdout")
    graph_opts(p)
    p.add_argument("--samples", type=_natural, default=20, help="concretizations per node (default 20)")
    p.add_argument("--queries", type=_natural, default=50, help="sampled queries (default 50)")
    p.add_argument("--budget", type=_positive, default=10_000,
                   help="step budget for the synthesized program; the original gets ten times as many")
    p.set_defaults(func=cmd_check)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return PARSE_ERROR
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except BudgetExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return NODE_BUDGET


if __name__ == "__main__":
    sys.exit(main())
