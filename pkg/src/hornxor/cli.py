"""Command-line interface.

Subcommands:

* ``check``  -- parse a theory, report linearity/domination and the
  computed constant set.
* ``reduce`` -- build the xor-free companion theory and print it in the
  ProVerif-compatible dialect; optionally write a statistics report
  (CSV plus a rendered figure).
* ``solve``  -- run the bounded derivation engine on the theory's query
  (or an explicit goal) and print a trace when a derivation is found.
* ``corpus`` -- list the bundled example theories.

Theory paths may be ``corpus:NAME`` to use a bundled example.

Exit codes: 0 the query holds within bounds (or the command succeeded),
1 the query is violated (a derivation was found), 2 the search was
inconclusive, 3 bad input.
"""

from __future__ import annotations

import argparse
import csv
import re
import sys
from pathlib import Path

from .corpus import CORPUS_PREFIX, example_source, list_examples
from .domination import (
    CSet,
    DEFAULT_CLOSURE_CAP,
    NotXorLinear,
    compute_c_set,
    is_c_dominated,
    is_xor_linear,
)
from .emitter import EmitOptions, emit_proverif
from .engine import (
    MODE_SYNTACTIC,
    MODE_XOR,
    SearchBounds,
    STATUS_FOUND,
    check_correspondence,
    derive_mod_xor,
    derive_syntactic,
    format_trace,
    trace_json,
    VERDICT_HOLDS,
    VERDICT_VIOLATED,
)
from .normalization import NotCDominated
from .reduction import build_t_plus, reduce_stats
from .terms import Term, Var, Xor, ZERO, App
from .theory import (
    Atom,
    CorrespondenceQuery,
    SecrecyQuery,
    is_variable_name,
    parse_theory,
    print_atom,
    print_term,
)

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_INCONCLUSIVE = 2
EXIT_INPUT = 3


class CliError(Exception):
    pass


# ---------------------------------------------------------------------------
# Input loading

def read_source(spec: str) -> str:
    if spec.startswith(CORPUS_PREFIX):
        name = spec[len(CORPUS_PREFIX):]
        try:
            return example_source(name)
        except KeyError as exc:
            raise CliError(str(exc.args[0])) from exc
    path = Path(spec)
    if not path.is_file():
        raise CliError(f"no such file: {spec}")
    return path.read_text(encoding="utf-8")


def load(spec: str):
    result = parse_theory(read_source(spec))
    if result.diagnostics:
        msgs = "\n".join(f"  {d}" for d in result.diagnostics)
        raise CliError(f"{spec}:\n{msgs}")
    return result


# ---------------------------------------------------------------------------
# Goal parsing for --goal

_GOAL_TOKEN = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_']*|0|[(),+])")


class _GoalParser:
    def __init__(self, text: str):
        self.tokens: list[str] = []
        pos = 0
        while pos < len(text):
            m = _GOAL_TOKEN.match(text, pos)
            if not m:
                if text[pos:].strip():
                    raise CliError(f"bad goal syntax near {text[pos:]!r}")
                break
            self.tokens.append(m.group(1))
            pos = m.end()
        self.i = 0

    def peek(self) -> str | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self, expect: str | None = None) -> str:
        tok = self.peek()
        if tok is None or (expect is not None and tok != expect):
            raise CliError(f"bad goal syntax: expected "
                           f"{expect or 'a token'}, got {tok!r}")
        self.i += 1
        return tok

    def atom(self) -> Atom:
        name = self.take()
        self.take("(")
        args: list[Term] = []
        if self.peek() != ")":
            args.append(self.term())
            while self.peek() == ",":
                self.take(",")
                args.append(self.term())
        self.take(")")
        if self.peek() is not None:
            raise CliError("trailing tokens after goal atom")
        return Atom(name, tuple(args))

    def term(self) -> Term:
        t = self.factor()
        while self.peek() == "+":
            self.take("+")
            t = Xor(t, self.factor())
        return t

    def factor(self) -> Term:
        tok = self.take()
        if tok == "0":
            return ZERO
        if tok in "(),+":
            raise CliError(f"bad goal syntax near {tok!r}")
        if self.peek() == "(":
            self.take("(")
            args = [self.term()]
            while self.peek() == ",":
                self.take(",")
                args.append(self.term())
            self.take(")")
            return App(tok, tuple(args))
        if is_variable_name(tok):
            return Var(tok)
        return App(tok)


def parse_goal(text: str) -> Atom:
    return _GoalParser(text).atom()


# ---------------------------------------------------------------------------
# check

def cmd_check(args: argparse.Namespace) -> int:
    result = load(args.theory)
    theory = result.theory
    ok, witness = is_xor_linear(theory)
    if not ok:
        print("xor-linear: no")
        print(f"  offending term: {print_term(witness)}")
        return EXIT_INPUT
    print("xor-linear: yes")
    try:
        c_set = compute_c_set(theory, closure_cap=args.closure_cap)
    except NotXorLinear as exc:
        print("dominating set: none found")
        print(f"  offending term: {print_term(exc.witness)}")
        return EXIT_INPUT
    dominated, bad = is_c_dominated(theory, c_set)
    elements = ", ".join(print_term(e) for e in c_set.elements)
    print(f"dominating set C: {{{elements}}}")
    print(f"closure size: {len(c_set.closure_norm())}")
    print(f"dominated: {'yes' if dominated else 'no'}")
    if not dominated:
        print(f"  offending term: {print_term(bad)}")
        return EXIT_INPUT
    print(f"clauses: {len(theory.clauses)}")
    print(f"queries: {len(result.queries)}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# reduce

def _write_report(report_dir: Path, stats: dict) -> None:
    report_dir.mkdir(parents=True, exist_ok=True)
    csv_path = report_dir / "stats.csv"
    with csv_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "value"])
        for family, count in sorted(stats["clauses_per_family"].items()):
            writer.writerow([f"clauses_family_{family}", count])
        writer.writerow(["closure_size", stats["closure_size"]])
        writer.writerow(["source_clauses", stats["source_clauses"]])
        writer.writerow(["total_clauses", stats["total_clauses"]])

    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    families = sorted(stats["clauses_per_family"])
    counts = [stats["clauses_per_family"][f] for f in families]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar([str(f) for f in families], counts, color="#4878a8")
    ax.set_xlabel("clause family")
    ax.set_ylabel("generated clauses")
    ax.set_title("xor-free companion theory: clauses per family")
    fig.tight_layout()
    fig.savefig(report_dir / "families.png", dpi=120)
    plt.close(fig)


def cmd_reduce(args: argparse.Namespace) -> int:
    result = load(args.theory)
    theory = result.theory
    try:
        c_set = compute_c_set(theory, closure_cap=args.closure_cap)
        rt = build_t_plus(theory, c_set)
    except NotXorLinear as exc:
        raise CliError("theory is not xor-linear "
                       f"(offending term: {print_term(exc.witness)})") from exc
    except NotCDominated as exc:
        raise CliError("theory is not dominated by the computed constant "
                       f"set (offending term: {print_term(exc.args[0])})"
                       ) from exc
    goals = [q.goal for q in result.queries if isinstance(q, SecrecyQuery)]
    text = emit_proverif(rt, EmitOptions(encoding=args.encoding,
                                         query_goals=goals))
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.report:
        _write_report(Path(args.report), reduce_stats(rt))
    return EXIT_OK


# ---------------------------------------------------------------------------
# solve

def _bounds(args: argparse.Namespace) -> SearchBounds:
    return SearchBounds(max_depth=args.max_depth,
                        max_term_size=args.max_size,
                        max_facts=args.max_facts,
                        timeout=args.timeout)


def _print_outcome(found: bool, definitive: bool, status: str) -> int:
    if found:
        print("verdict: violated (derivation found)")
        return EXIT_VIOLATED
    if definitive:
        print("verdict: holds within bounds (search saturated)")
        return EXIT_OK
    print(f"verdict: inconclusive (search {status})")
    return EXIT_INCONCLUSIVE


def cmd_solve(args: argparse.Namespace) -> int:
    result = load(args.theory)
    theory = result.theory
    bounds = _bounds(args)
    c_set: CSet | None = None
    if args.mode == MODE_XOR and not args.no_prune:
        try:
            c_set = compute_c_set(theory, closure_cap=args.closure_cap)
        except NotXorLinear:
            c_set = None

    def run_secrecy(goal: Atom) -> int:
        if args.mode == MODE_SYNTACTIC:
            if theory.xor_rule_implicit:
                raise CliError("syntactic mode needs an xor-free theory; "
                               "reduce first or declare 'noxor.'")
            res = derive_syntactic(theory, goal, bounds,
                                   exempt_pool=args.exempt_pool)
        else:
            res = derive_mod_xor(theory, goal, c_set, bounds,
                                 prune=not args.no_prune,
                                 exempt_pool=args.exempt_pool)
        print(f"goal: {print_atom(goal)}")
        print(f"search: {res.status} after {res.rounds} rounds, "
              f"{res.facts} facts")
        code = _print_outcome(res.found, res.definitive_negative, res.status)
        if res.found:
            print(trace_json(res.derivation) if args.json
                  else format_trace(res.derivation))
        return code

    if args.goal:
        return run_secrecy(parse_goal(args.goal))

    if not result.queries:
        raise CliError("theory has no query; pass --goal")
    codes = []
    for query in result.queries:
        if isinstance(query, SecrecyQuery):
            codes.append(run_secrecy(query.goal))
            continue
        corr = check_correspondence(theory, query.fixed_begins, query.goal,
                                    bounds, mode=args.mode, c_set=c_set,
                                    exempt_pool=args.exempt_pool)
        print(f"correspondence: {print_atom(query.end)} ~> "
              f"{print_atom(query.begin)}")
        res = corr.result
        print(f"search: {res.status} after {res.rounds} rounds, "
              f"{res.facts} facts")
        codes.append(_print_outcome(corr.verdict == VERDICT_VIOLATED,
                                    corr.verdict == VERDICT_HOLDS,
                                    res.status))
        if corr.witness is not None:
            print(trace_json(corr.witness) if args.json
                  else format_trace(corr.witness))
    return max(codes)


# ---------------------------------------------------------------------------
# corpus

def cmd_corpus(args: argparse.Namespace) -> int:
    if args.action == "list":
        for name in list_examples():
            print(f"{CORPUS_PREFIX}{name}")
        return EXIT_OK
    if not args.name:
        raise CliError(f"corpus {args.action} needs a theory name")
    if args.action == "show":
        try:
            sys.stdout.write(example_source(args.name))
        except KeyError as exc:
            raise CliError(str(exc.args[0])) from exc
        return EXIT_OK
    solve_args = build_parser().parse_args(
        ["solve", f"{CORPUS_PREFIX}{args.name}"])
    return cmd_solve(solve_args)


# ---------------------------------------------------------------------------
# entry point

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hornxor",
        description="Compile Horn theories with xor into xor-free "
                    "companions and solve bounded derivation queries.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("theory",
                       help="theory file path, or corpus:NAME for a "
                            "bundled example")
        p.add_argument("--closure-cap", type=int,
                       default=DEFAULT_CLOSURE_CAP,
                       help="maximum size of the dominating constant set")

    p_check = sub.add_parser("check", help="report linearity, domination "
                                           "and the constant set")
    add_common(p_check)
    p_check.set_defaults(func=cmd_check)

    p_reduce = sub.add_parser("reduce", help="emit the xor-free companion "
                                             "theory")
    add_common(p_reduce)
    p_reduce.add_argument("--encoding", choices=["plain", "optimized"],
                          default="plain")
    p_reduce.add_argument("-o", "--output", help="write the emitted theory "
                                                 "to this file")
    p_reduce.add_argument("--report",
                          help="directory for stats.csv and families.png")
    p_reduce.set_defaults(func=cmd_reduce)

    p_solve = sub.add_parser("solve", help="run the bounded derivation "
                                           "engine")
    add_common(p_solve)
    p_solve.add_argument("--goal", help="goal atom, e.g. 'I(m(b,a))'; "
                                        "overrides the file's queries")
    p_solve.add_argument("--mode", choices=[MODE_XOR, MODE_SYNTACTIC],
                         default=MODE_XOR)
    p_solve.add_argument("--max-depth", type=int, default=12)
    p_solve.add_argument("--max-size", type=int, default=24)
    p_solve.add_argument("--max-facts", type=int, default=50000)
    p_solve.add_argument("--timeout", type=float, default=60.0)
    p_solve.add_argument("--exempt-pool", type=int, default=2,
                         help="fresh constants per exempt variable")
    p_solve.add_argument("--no-prune", action="store_true",
                         help="disable domination-based pruning")
    p_solve.add_argument("--json", action="store_true",
                         help="print traces as JSON")
    p_solve.set_defaults(func=cmd_solve)

    p_corpus = sub.add_parser("corpus", help="list, show, or run bundled "
                                             "example theories")
    p_corpus.add_argument("action", choices=["list", "show", "run"])
    p_corpus.add_argument("name", nargs="?")
    p_corpus.set_defaults(func=cmd_corpus)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
