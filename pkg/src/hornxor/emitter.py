"""ProVerif-compatible clause emission.

Two encodings of a reduced theory are supported.  The plain encoding
prints every clause literally, with the xor operator as the binary symbol
``xor`` and the empty sum as ``zero``.  The optimized encoding additionally
freezes ground closure sums into nested ``xx(.,.)`` applications (so the
solver treats them as constants) and collapses the three two-premise
closure-instance families into one schema clause each over an auxiliary
``xtab`` predicate plus a table of ``xtab`` facts.

The exact dialect is recorded in the output header.  A decoding parser for
the same dialect is provided so that optimized output can be mechanically
expanded back and cross-checked against the plain encoding.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

from .domination import CSet, in_xor_closure
from .engine import match_syntactic
from .reduction import (
    FAMILY_CONST,
    FAMILY_VARIANT,
    FAMILY_CANCEL,
    ReducedTheory,
    XorOrigin,
    reduce_stats,
)
from .terms import App, Term, Var, Xor, ZERO, _Zero, is_ground, term_key
from .theory import (
    Atom,
    HornClause,
    RESERVED_SYMBOLS,
    ROLE_INTRUDER,
    Theory,
    is_variable_name,
)

DIALECT = "proverif-horn-untyped-v1"


@dataclass
class EmitOptions:
    encoding: str = "plain"  # plain | optimized
    proverif_header_options: list[str] = field(default_factory=list)
    query_goals: list[Atom] = field(default_factory=list)


class EmitError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Term representation

def _frozen_repr(t: Term) -> str:
    """A ground closure sum in normal form as nested xx applications."""
    if isinstance(t, _Zero):
        return "zero"
    if isinstance(t, Xor):
        return f"xx({_plain_app(t.left)},{_frozen_repr(t.right)})"
    return _plain_app(t)


def _plain_app(t: Term) -> str:
    if isinstance(t, _Zero):
        return "zero"
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Xor):
        raise EmitError(f"unexpected sum inside a frozen element: {t}")
    if not t.args:
        return t.symbol
    return f"{t.symbol}({','.join(_plain_app(a) for a in t.args)})"


@lru_cache(maxsize=None)
def term_repr(t: Term, encoding: str, c_set: Optional[CSet]) -> str:
    if isinstance(t, _Zero):
        return "zero"
    if isinstance(t, Var):
        return t.name
    if isinstance(t, App):
        if not t.args:
            return t.symbol
        inner = ",".join(term_repr(a, encoding, c_set) for a in t.args)
        return f"{t.symbol}({inner})"
    if encoding == "optimized" and c_set is not None:
        if is_ground(t) and in_xor_closure(t, c_set):
            return _frozen_repr(t)
        # normal-form sums are chain-xor-residual; freeze the chain side
        if is_ground(t.left) and in_xor_closure(t.left, c_set):
            return (f"xor({_frozen_repr(t.left)},"
                    f"{term_repr(t.right, encoding, c_set)})")
    return (f"xor({term_repr(t.left, encoding, c_set)},"
            f"{term_repr(t.right, encoding, c_set)})")


@lru_cache(maxsize=None)
def atom_repr(a: Atom, encoding: str, c_set: Optional[CSet]) -> str:
    inner = ",".join(term_repr(t, encoding, c_set) for t in a.args)
    return f"{a.predicate}({inner})"


def clause_repr(c: HornClause, encoding: str, c_set: Optional[CSet]) -> str:
    rhs = atom_repr(c.conclusion, encoding, c_set)
    if not c.premises:
        return rhs
    lhs = " & ".join(atom_repr(p, encoding, c_set) for p in c.premises)
    return f"{lhs} -> {rhs}"


# ---------------------------------------------------------------------------
# Emission

_SCHEMA_CLAUSES = [
    # one schema per two-premise closure family; xtab(x,y,z) carries
    # z = normal form of x xor y
    "xtab(Xc,Yc,Zc) & I(Xc) & I(Yc) -> I(Zc)",
    "xtab(Xc,Yc,Zc) & I(Yc) & I(xor(Xc,Tc)) -> I(xor(Zc,Tc))",
    "xtab(Xc,Yc,Zc) & I(xor(Xc,Tc)) & I(xor(Yc,Tc)) -> I(Zc)",
]


def _schema_covered(origin: XorOrigin) -> bool:
    """Instances the xtab schema reproduces: distinct nonzero pair, in the
    families the schema covers.  Zero-involving and repeated-element
    instances are emitted literally so no emitted term reads xor(zero, t)."""
    if origin.family not in (FAMILY_CONST, FAMILY_VARIANT, FAMILY_CANCEL):
        return False
    return (origin.c != ZERO and origin.c_prime != ZERO
            and origin.c != origin.c_prime)


def emit_proverif(rt: ReducedTheory, opts: EmitOptions) -> str:
    encoding = opts.encoding
    if encoding not in ("plain", "optimized"):
        raise EmitError(f"unknown encoding {encoding!r}")
    c_set = rt.c_set
    stats = reduce_stats(rt)
    lines: list[str] = []
    lines.append(f"(* generated by hornxor; dialect {DIALECT} *)")
    lines.append(f"(* encoding: {encoding} *)")
    lines.append("(* uppercase-initial identifiers are variables *)")
    elems = ", ".join(_plain_app(e) for e in c_set.elements)
    lines.append(f"(* C = [{elems}]; closure size = {stats['closure_size']} *)")
    per = stats["clauses_per_family"]
    lines.append("(* clauses per family: "
                 + ", ".join(f"{k}={per[k]}" for k in sorted(per)) + " *)")
    for opt in opts.proverif_header_options:
        lines.append(opt)

    for name, arity in sorted(rt.theory.signature.items()):
        lines.append(f"fun {name}/{arity}.")
    lines.append("fun zero/0.")
    lines.append("fun xor/2.")
    if encoding == "optimized" and len(c_set) > 0:
        lines.append("fun xx/2.")
    for name, arity in sorted(rt.theory.predicates.items()):
        lines.append(f"pred {name}/{arity}.")
    if encoding == "optimized" and len(c_set) > 0:
        lines.append("pred xtab/3.")
    for goal in opts.query_goals:
        lines.append(f"query {atom_repr(goal, encoding, c_set)}.")

    body: list[str] = []
    if encoding == "optimized" and len(c_set) > 0:
        closure = sorted(c_set.closure_norm(), key=term_key)
        for c in closure:
            for cp in closure:
                if c == ZERO or cp == ZERO or c == cp:
                    continue
                z = _frozen_repr(_closure_sum(c, cp, c_set))
                body.append(f"xtab({_frozen_repr(c)},{_frozen_repr(cp)},{z})")
        body.extend(_SCHEMA_CLAUSES)
    for clause, family, origin in zip(rt.clauses, rt.families, rt.origins):
        if encoding == "optimized" and isinstance(origin, XorOrigin) \
                and _schema_covered(origin):
            continue
        body.append(clause_repr(clause, encoding, c_set))

    lines.append("reduc")
    lines.append(";\n".join(body) + ".")
    return "\n".join(lines) + "\n"


def _closure_sum(c: Term, cp: Term, c_set: CSet) -> Term:
    from .normalization import normal_form
    return normal_form(Xor(c, cp), c_set)


# ---------------------------------------------------------------------------
# Decoding the emitted dialect back into a theory

_TOKEN = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_']*|\d+|->|[()&;,./])")


class _DecodeError(ValueError):
    pass


class _Decoder:
    def __init__(self, text: str):
        text = re.sub(r"\(\*.*?\*\)", " ", text, flags=re.S)
        self.tokens: list[str] = []
        pos = 0
        for m in _TOKEN.finditer(text):
            if m.start() != pos and text[pos:m.start()].strip():
                raise _DecodeError(
                    f"unexpected character {text[pos]!r}")
            self.tokens.append(m.group(1))
            pos = m.end()
        if text[pos:].strip():
            raise _DecodeError(f"unexpected character {text[pos]!r}")
        self.pos = 0
        self.signature: dict[str, int] = {}
        self.predicates: dict[str, int] = {}
        self.queries: list[Atom] = []
        self.clauses: list[HornClause] = []

    def peek(self) -> str:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else ""

    def next(self) -> str:
        t = self.peek()
        if t:
            self.pos += 1
        return t

    def expect(self, t: str) -> None:
        got = self.next()
        if got != t:
            raise _DecodeError(f"expected {t!r}, found {got!r}")

    def term(self) -> Term:
        tokens = self.tokens
        n = len(tokens)
        name = tokens[self.pos] if self.pos < n else ""
        if name:
            self.pos += 1
        if not name or not (name[0].isalpha() or name[0] == "_"):
            raise _DecodeError(f"expected a term, found {name!r}")
        args: list[Term] = []
        if self.pos < n and tokens[self.pos] == "(":
            self.pos += 1
            args.append(self.term())
            while self.pos < n and tokens[self.pos] == ",":
                self.pos += 1
                args.append(self.term())
            self.expect(")")
        if name == "zero":
            if args:
                raise _DecodeError("zero takes no arguments")
            return ZERO
        if name in ("xor", "xx"):
            if len(args) != 2:
                raise _DecodeError(f"{name} takes two arguments")
            return Xor(args[0], args[1])
        if is_variable_name(name):
            if args:
                raise _DecodeError(f"variable {name} cannot take arguments")
            return Var(name)
        declared = self.signature.get(name)
        if declared is not None and declared != len(args):
            raise _DecodeError(f"{name} used with arity {len(args)}, "
                               f"declared {declared}")
        return App(name, tuple(args))

    def _arity_ok(self, name: str, arity: int) -> None:
        if name == "zero":
            if arity:
                raise _DecodeError("zero takes no arguments")
            return
        if name in ("xor", "xx"):
            if arity != 2:
                raise _DecodeError(f"{name} takes two arguments")
            return
        if is_variable_name(name):
            if arity:
                raise _DecodeError(f"variable {name} cannot take arguments")
            return
        declared = self.signature.get(name)
        if declared is not None and declared != arity:
            raise _DecodeError(f"{name} used with arity {arity}, "
                               f"declared {declared}")

    def term_check(self) -> None:
        """Validate one term without constructing it (iterative)."""
        tokens = self.tokens
        n = len(tokens)
        stack: list[list] = []  # [symbol, arg count] per open application
        while True:
            name = tokens[self.pos] if self.pos < n else ""
            if not name or not (name[0].isalpha() or name[0] == "_"):
                raise _DecodeError(f"expected a term, found {name!r}")
            self.pos += 1
            if self.pos < n and tokens[self.pos] == "(":
                self.pos += 1
                stack.append([name, 1])
                continue
            self._arity_ok(name, 0)
            while True:
                if not stack:
                    return
                nxt = tokens[self.pos] if self.pos < n else ""
                if nxt == ",":
                    self.pos += 1
                    stack[-1][1] += 1
                    break
                if nxt == ")":
                    self.pos += 1
                    sym, count = stack.pop()
                    self._arity_ok(sym, count)
                    continue
                raise _DecodeError(f"expected ',' or ')', found {nxt!r}")

    def atom_check(self) -> None:
        name = self.next()
        self.expect("(")
        count = 1
        self.term_check()
        while self.peek() == ",":
            self.next()
            count += 1
            self.term_check()
        self.expect(")")
        declared = self.predicates.get(name)
        if declared is not None and declared != count:
            raise _DecodeError(f"predicate {name} used with arity "
                               f"{count}, declared {declared}")

    def clause_check(self) -> None:
        count = 1
        self.atom_check()
        while self.peek() == "&":
            self.next()
            count += 1
            self.atom_check()
        if self.peek() == "->":
            self.next()
            self.atom_check()
        elif count != 1:
            raise _DecodeError("premises without a conclusion")

    def atom(self) -> Atom:
        name = self.next()
        self.expect("(")
        args = [self.term()]
        while self.peek() == ",":
            self.next()
            args.append(self.term())
        self.expect(")")
        declared = self.predicates.get(name)
        if declared is not None and declared != len(args):
            raise _DecodeError(f"predicate {name} used with arity "
                               f"{len(args)}, declared {declared}")
        return Atom(name, tuple(args))

    def clause(self) -> HornClause:
        atoms = [self.atom()]
        while self.peek() == "&":
            self.next()
            atoms.append(self.atom())
        if self.peek() == "->":
            self.next()
            conclusion = self.atom()
            return HornClause(tuple(atoms), conclusion)
        if len(atoms) != 1:
            raise _DecodeError("premises without a conclusion")
        return HornClause((), atoms[0])

    def parse(self, check_only: bool = False) -> None:
        while self.peek():
            t = self.next()
            if t in ("fun", "pred"):
                name = self.next()
                self.expect("/")
                arity = self.next()
                if not arity.isdigit():
                    raise _DecodeError(f"bad arity {arity!r}")
                table = self.signature if t == "fun" else self.predicates
                table[name] = int(arity)
                self.expect(".")
            elif t == "query":
                if check_only:
                    self.atom_check()
                else:
                    self.queries.append(self.atom())
                self.expect(".")
            elif t == "reduc":
                if check_only:
                    self.clause_check()
                    while self.peek() == ";":
                        self.next()
                        self.clause_check()
                else:
                    self.clauses.append(self.clause())
                    while self.peek() == ";":
                        self.next()
                        self.clauses.append(self.clause())
                self.expect(".")
            else:
                raise _DecodeError(f"unexpected token {t!r}")


def check_emitted(text: str) -> list[str]:
    """Grammar check for the emitted dialect; empty list means well formed."""
    try:
        d = _Decoder(text)
        d.parse(check_only=True)
    except _DecodeError as exc:
        return [str(exc)]
    errors = []
    for name in d.signature:
        if name in RESERVED_SYMBOLS and name not in ("xor", "xx", "zero"):
            errors.append(f"symbol {name} is reserved")
    return errors


def decode_proverif(text: str) -> tuple[Theory, list[Atom]]:
    """Parse emitted text back into a theory, expanding the xtab schema.

    Schema clauses (those with an xtab premise) are instantiated against
    every xtab fact; xtab facts themselves are removed.  The result is an
    xor-free theory equivalent to the plain encoding.
    """
    d = _Decoder(text)
    d.parse()
    table: list[tuple[Term, ...]] = []
    schema: list[HornClause] = []
    plain: list[HornClause] = []
    for clause in d.clauses:
        if not clause.premises and clause.conclusion.predicate == "xtab":
            table.append(clause.conclusion.args)
        elif any(p.predicate == "xtab" for p in clause.premises):
            schema.append(clause)
        else:
            plain.append(clause)
    out = list(plain)
    for clause in schema:
        xtab_premises = [p for p in clause.premises if p.predicate == "xtab"]
        rest = tuple(p for p in clause.premises if p.predicate != "xtab")
        if len(xtab_premises) != 1:
            raise _DecodeError("schema clauses must have one xtab premise")
        pattern = xtab_premises[0]
        for triple in table:
            sub: Optional[dict[str, Term]] = {}
            for pa, ta in zip(pattern.args, triple):
                sub = match_syntactic(pa, ta, sub) if sub is not None else None
            if sub is None:
                continue
            premises = tuple(
                Atom(p.predicate, tuple(_subst(a, sub) for a in p.args))
                for p in rest)
            conclusion = Atom(
                clause.conclusion.predicate,
                tuple(_subst(a, sub) for a in clause.conclusion.args))
            if conclusion in premises:
                continue
            expanded = HornClause(premises, conclusion, role=ROLE_INTRUDER)
            if expanded not in out:
                out.append(expanded)
    predicates = dict(d.predicates)
    predicates.pop("xtab", None)
    signature = {k: v for k, v in d.signature.items()
                 if k not in ("xor", "xx", "zero")}
    theory = Theory(signature=signature, predicates=predicates,
                    clauses=out, xor_rule_implicit=False)
    return theory, d.queries


def _subst(t: Term, sub: dict[str, Term]) -> Term:
    from .terms import apply_subst
    return apply_subst(t, sub)
