"""Atoms, Horn clauses, theories, queries, and the theory file format.

The input format is line-oriented UTF-8 text; statements end with ``.`` and
``#`` starts a comment.  See the package README for the grammar.  Parsing
never raises on malformed input: problems are reported as diagnostics with
line/column positions.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from typing import Optional

from .terms import App, Term, Var, Xor, ZERO, _Zero, vars_of

RESERVED_SYMBOLS = frozenset({"xor", "xx", "xtab", "zero"})

ROLE_FACT = "intruder-fact"
ROLE_INTRUDER = "intruder-rule"
ROLE_PROTOCOL = "protocol-rule"
ROLE_EVENT = "event-rule"
ROLES = (ROLE_FACT, ROLE_INTRUDER, ROLE_PROTOCOL, ROLE_EVENT)

_ANNOTATIONS = {
    "fact": ROLE_FACT,
    "intruder": ROLE_INTRUDER,
    "protocol": ROLE_PROTOCOL,
    "event": ROLE_EVENT,
}


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple[Term, ...]

    def __str__(self) -> str:
        return f"{self.predicate}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class HornClause:
    premises: tuple[Atom, ...]
    conclusion: Atom
    role: str = ROLE_PROTOCOL
    exempt_vars: frozenset[str] = frozenset()
    label: str = ""

    def atoms(self) -> tuple[Atom, ...]:
        return (self.conclusion,) + self.premises

    def terms(self) -> tuple[Term, ...]:
        return tuple(t for a in self.atoms() for t in a.args)

    def __str__(self) -> str:
        lhs = ", ".join(map(str, self.premises))
        return f"{lhs} -> {self.conclusion}" if lhs else f"-> {self.conclusion}"


@dataclass(frozen=True)
class SecrecyQuery:
    goal: Atom


@dataclass(frozen=True)
class CorrespondenceQuery:
    end: Atom
    begin: Atom
    fixed_begins: tuple[Atom, ...]
    goal: Atom


Query = SecrecyQuery | CorrespondenceQuery


@dataclass
class Theory:
    signature: dict[str, int] = field(default_factory=dict)
    predicates: dict[str, int] = field(default_factory=dict)
    clauses: list[HornClause] = field(default_factory=list)
    xor_rule_implicit: bool = True

    def clause_terms(self):
        for c in self.clauses:
            yield from c.terms()

    def with_clauses(self, clauses) -> "Theory":
        return Theory(dict(self.signature), dict(self.predicates),
                      list(clauses), self.xor_rule_implicit)

    def add_facts(self, atoms) -> "Theory":
        extra = [HornClause((), a, role=ROLE_FACT) for a in atoms]
        return self.with_clauses(self.clauses + extra)


@dataclass(frozen=True)
class Diagnostic:
    line: int
    col: int
    category: str  # syntax | unknown-symbol | arity | variable-condition
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.category}: {self.message}"


@dataclass
class ParseResult:
    theory: Theory
    queries: list[Query]
    diagnostics: list[Diagnostic]

    @property
    def ok(self) -> bool:
        return not self.diagnostics


class TheoryError(Exception):
    """Raised by load() when the input has diagnostics."""

    def __init__(self, diagnostics: list[Diagnostic]):
        super().__init__("; ".join(map(str, diagnostics)))
        self.diagnostics = diagnostics


# ---------------------------------------------------------------------------
# Tokenizer

_IDENT_START = set(string.ascii_letters + "_")
_IDENT_CONT = set(string.ascii_letters + string.digits + "_'")
_PUNCT = ("~>", "->", "(", ")", "{", "}", "[", "]", ",", ".", "+", "/")


@dataclass(frozen=True)
class _Tok:
    kind: str  # ident | punct | num | end
    text: str
    line: int
    col: int


def _tokenize(text: str, diags: list[Diagnostic]) -> list[_Tok]:
    toks: list[_Tok] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch in _IDENT_START:
            j = i
            while j < n and text[j] in _IDENT_CONT:
                j += 1
            toks.append(_Tok("ident", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(_Tok("num", text[i:j], line, col))
            col += j - i
            i = j
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                toks.append(_Tok("punct", p, line, col))
                i += len(p)
                col += len(p)
                break
        else:
            diags.append(Diagnostic(line, col, "syntax",
                                    f"unexpected character {ch!r}"))
            i += 1
            col += 1
    toks.append(_Tok("end", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# Parser

def is_variable_name(name: str) -> bool:
    return name[:1].isupper()


class _Parser:
    def __init__(self, text: str):
        self.diags: list[Diagnostic] = []
        self.toks = _tokenize(text, self.diags)
        self.pos = 0
        self.theory = Theory(predicates={"I": 1})
        self.queries: list[Query] = []
        self.pending_role: Optional[str] = None
        self.pending_exempt: set[str] = set()

    # -- token helpers ------------------------------------------------------

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def next(self) -> _Tok:
        t = self.toks[self.pos]
        if t.kind != "end":
            self.pos += 1
        return t

    def error(self, tok: _Tok, message: str, category: str = "syntax") -> None:
        self.diags.append(Diagnostic(tok.line, tok.col, category, message))

    def expect(self, text: str) -> bool:
        t = self.peek()
        if t.text == text:
            self.next()
            return True
        self.error(t, f"expected {text!r}, found {t.text or 'end of input'!r}")
        return False

    def skip_statement(self) -> None:
        while self.peek().kind != "end" and self.peek().text != ".":
            self.next()
        if self.peek().text == ".":
            self.next()

    # -- grammar ------------------------------------------------------------

    def parse(self) -> ParseResult:
        while self.peek().kind != "end":
            before = self.pos
            self.statement()
            if self.pos == before:  # defensive: always make progress
                self.next()
        self.run_checks()
        return ParseResult(self.theory, self.queries, self.diags)

    def statement(self) -> None:
        t = self.peek()
        if t.text == "fun":
            self.next()
            self.declaration(kind="fun")
        elif t.text == "const":
            self.next()
            self.declaration(kind="const")
        elif t.text == "pred":
            self.next()
            self.declaration(kind="pred")
        elif t.text == "exempt":
            self.next()
            self.exempt_statement()
        elif t.text == "query":
            self.next()
            self.query_statement()
        elif t.text == "noxor":
            self.next()
            self.theory.xor_rule_implicit = False
            self.expect(".")
        else:
            self.clause_statement()

    def declaration(self, kind: str) -> None:
        t = self.next()
        if t.kind != "ident":
            self.error(t, f"expected a name after {kind!r}")
            self.skip_statement()
            return
        name = t.text
        if kind == "const":
            arity = 0
        else:
            if not self.expect("/"):
                self.skip_statement()
                return
            num = self.next()
            if num.kind != "num":
                self.error(num, "expected an arity")
                self.skip_statement()
                return
            arity = int(num.text)
        table = self.theory.predicates if kind == "pred" else self.theory.signature
        if is_variable_name(name):
            self.error(t, f"{name!r} starts uppercase and would parse as a variable")
        elif name in table and table[name] != arity:
            self.error(t, f"{name!r} redeclared with arity {arity}, was {table[name]}",
                       category="arity")
        else:
            table[name] = arity
        self.expect(".")

    def exempt_statement(self) -> None:
        while True:
            t = self.next()
            if t.kind != "ident" or not is_variable_name(t.text):
                self.error(t, "expected a variable name in exempt list")
                self.skip_statement()
                return
            self.pending_exempt.add(t.text)
            if self.peek().text == ",":
                self.next()
                continue
            break
        self.expect(".")

    def term(self) -> Term:
        left = self.primary_term()
        while self.peek().text == "+":
            self.next()
            left = Xor(left, self.primary_term())
        return left

    def primary_term(self) -> Term:
        t = self.next()
        if t.text == "0":
            return ZERO
        if t.text == "(":
            inner = self.term()
            self.expect(")")
            return inner
        if t.kind != "ident":
            self.error(t, f"expected a term, found {t.text or 'end of input'!r}")
            return ZERO
        if is_variable_name(t.text):
            return Var(t.text)
        args: list[Term] = []
        if self.peek().text == "(":
            self.next()
            if self.peek().text != ")":
                args.append(self.term())
                while self.peek().text == ",":
                    self.next()
                    args.append(self.term())
            self.expect(")")
        if t.text not in self.theory.signature:
            self.error(t, f"unknown symbol {t.text!r}", category="unknown-symbol")
            self.theory.signature[t.text] = len(args)  # avoid cascades
        elif self.theory.signature[t.text] != len(args):
            self.error(t, f"{t.text!r} used with {len(args)} argument(s), "
                          f"declared arity {self.theory.signature[t.text]}",
                       category="arity")
        return App(t.text, tuple(args))

    def atom(self) -> Optional[Atom]:
        t = self.next()
        if t.kind != "ident":
            self.error(t, f"expected a predicate, found {t.text or 'end of input'!r}")
            return None
        pred = t.text
        args: list[Term] = []
        if self.expect("("):
            args.append(self.term())
            while self.peek().text == ",":
                self.next()
                args.append(self.term())
            self.expect(")")
        known = self.theory.predicates.get(pred)
        if known is None:
            self.theory.predicates[pred] = len(args)
        elif known != len(args):
            self.error(t, f"predicate {pred!r} used with {len(args)} argument(s), "
                          f"expected {known}", category="arity")
        return Atom(pred, tuple(args))

    def clause_statement(self) -> None:
        role = None
        if self.peek().text == "[":
            self.next()
            t = self.next()
            if t.text in _ANNOTATIONS:
                role = _ANNOTATIONS[t.text]
            else:
                self.error(t, f"unknown role annotation {t.text!r}")
            self.expect("]")
            if self.peek().text == "exempt":
                self.next()
                self.exempt_statement()
        premises: list[Atom] = []
        if self.peek().text != "->":
            a = self.atom()
            if a is None:
                self.skip_statement()
                return
            premises.append(a)
            while self.peek().text == ",":
                self.next()
                a = self.atom()
                if a is None:
                    self.skip_statement()
                    return
                premises.append(a)
        if not self.expect("->"):
            self.skip_statement()
            return
        conclusion = self.atom()
        self.expect(".")
        if conclusion is None:
            return
        if role is None:
            role = ROLE_FACT if not premises else ROLE_PROTOCOL
        clause = HornClause(tuple(premises), conclusion, role=role,
                            exempt_vars=frozenset(self.pending_exempt))
        self.pending_exempt.clear()
        self.theory.clauses.append(clause)

    def query_statement(self) -> None:
        t = self.next()
        if t.text == "secret":
            goal = self.term()
            self.expect(".")
            self.queries.append(SecrecyQuery(Atom("I", (goal,))))
        elif t.text == "corresp":
            end = self.atom()
            self.expect("~>")
            begin = self.atom()
            begins: list[Atom] = []
            if self.peek().text == "given":
                self.next()
                self.expect("{")
                if self.peek().text != "}":
                    a = self.atom()
                    if a:
                        begins.append(a)
                    while self.peek().text == ",":
                        self.next()
                        a = self.atom()
                        if a:
                            begins.append(a)
                self.expect("}")
            goal = None
            if self.peek().text == "goal":
                self.next()
                goal = self.atom()
            self.expect(".")
            if end and begin and goal:
                self.queries.append(
                    CorrespondenceQuery(end, begin, tuple(begins), goal))
            else:
                self.error(t, "incomplete correspondence query")
        else:
            self.error(t, f"expected 'secret' or 'corresp', found {t.text!r}")
            self.skip_statement()

    def run_checks(self) -> None:
        self.diags.extend(validate(self.theory))
        for name in self.theory.signature:
            if name in RESERVED_SYMBOLS:
                self.diags.append(Diagnostic(
                    0, 0, "unknown-symbol",
                    f"symbol {name!r} collides with a reserved emitter name"))


def parse_theory(text: str) -> ParseResult:
    """Parse theory text; never raises, collects diagnostics instead."""
    return _Parser(text).parse()


def load_theory(text: str) -> tuple[Theory, list[Query]]:
    """Parse and raise :class:`TheoryError` on any diagnostic."""
    result = parse_theory(text)
    if result.diagnostics:
        raise TheoryError(result.diagnostics)
    return result.theory, result.queries


def validate(theory: Theory) -> list[Diagnostic]:
    """Clause-level invariants: RHS variables must occur on the left unless
    exempted."""
    diags: list[Diagnostic] = []
    for i, c in enumerate(theory.clauses):
        left: frozenset[str] = frozenset()
        for p in c.premises:
            for t in p.args:
                left |= vars_of(t)
        for t in c.conclusion.args:
            for v in sorted(vars_of(t) - left - c.exempt_vars):
                diags.append(Diagnostic(
                    0, 0, "variable-condition",
                    f"clause {i}: variable {v!r} occurs only in the conclusion "
                    f"and is not exempt"))
    return diags


# ---------------------------------------------------------------------------
# Canonical printing (parse . print == identity on printed theories)

def print_term(t: Term) -> str:
    if isinstance(t, _Zero):
        return "0"
    if isinstance(t, Var):
        return t.name
    if isinstance(t, App):
        if not t.args:
            return t.symbol
        return f"{t.symbol}({', '.join(print_term(a) for a in t.args)})"
    # keep the structural bracketing: nested sums stay parenthesized
    left = print_term(t.left)
    if isinstance(t.left, Xor):
        left = f"({left})"
    right = print_term(t.right)
    if isinstance(t.right, Xor):
        right = f"({right})"
    return f"{left} + {right}"


def print_atom(a: Atom) -> str:
    return f"{a.predicate}({', '.join(print_term(t) for t in a.args)})"


_ROLE_TO_ANNOTATION = {v: k for k, v in _ANNOTATIONS.items()}


def print_theory(theory: Theory, queries: list[Query] | None = None) -> str:
    lines: list[str] = []
    for name, arity in sorted(theory.signature.items()):
        lines.append(f"const {name}." if arity == 0 else f"fun {name}/{arity}.")
    for name, arity in sorted(theory.predicates.items()):
        if name != "I":
            lines.append(f"pred {name}/{arity}.")
    if not theory.xor_rule_implicit:
        lines.append("noxor.")
    for c in theory.clauses:
        prefix = f"[{_ROLE_TO_ANNOTATION[c.role]}] "
        if c.exempt_vars:
            prefix += f"exempt {', '.join(sorted(c.exempt_vars))}. "
        lhs = ", ".join(print_atom(p) for p in c.premises)
        lhs = lhs + " " if lhs else ""
        lines.append(f"{prefix}{lhs}-> {print_atom(c.conclusion)}.")
    for q in queries or []:
        if isinstance(q, SecrecyQuery):
            lines.append(f"query secret {print_term(q.goal.args[0])}.")
        else:
            given = ", ".join(print_atom(a) for a in q.fixed_begins)
            lines.append(
                f"query corresp {print_atom(q.end)} ~> {print_atom(q.begin)} "
                f"given {{ {given} }} goal {print_atom(q.goal)}.")
    return "\n".join(lines) + "\n"
