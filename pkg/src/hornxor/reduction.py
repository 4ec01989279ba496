"""Compilation of a C-dominated theory into an equivalent xor-free one.

Family 1 instantiates each source clause with its finite substitution
family and normalizes; families 2-5 simulate the implicit xor intruder
rule on dominated facts, instantiated over the normalized closure of C.
The origin map remembers where each generated clause came from so that a
syntactic derivation in the output can be replayed as a derivation modulo
xor in the input.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .domination import CSet, is_c_dominated
from itertools import product

from .normalization import NotCDominated, fsub_options, normal_form
from .terms import (App, Term, Var, Xor, ZERO, apply_subst, term_key,
                    vars_of)
from .theory import Atom, HornClause, ROLE_INTRUDER, Theory

FAMILY_CLAUSE = 1      # instantiated source clauses
FAMILY_CONST = 2       # I(c), I(c') -> I(c+c')
FAMILY_POP = 3         # I(c), I(x) -> I(c+x)
FAMILY_VARIANT = 4     # I(c), I(c'+x) -> I(c+c'+x)
FAMILY_CANCEL = 5      # I(c+x), I(c'+x) -> I(c+c')

TUPLE_SYMBOL = "@clause"
EXEMPT_PREFIX = "@exempt:"


@dataclass(frozen=True)
class ClauseOrigin:
    """Family-1 provenance: which source clause and which family member."""
    source_index: int
    sigma: tuple[tuple[str, Term], ...]


@dataclass(frozen=True)
class XorOrigin:
    """Family 2-5 provenance: the closure pair the instance was built from."""
    family: int
    c: Term
    c_prime: Term


Origin = Union[ClauseOrigin, XorOrigin]


@dataclass
class ReducedTheory:
    theory: Theory
    c_set: CSet
    source: Theory
    families: list[int] = field(default_factory=list)
    origins: list[Origin] = field(default_factory=list)

    @property
    def clauses(self) -> list[HornClause]:
        return self.theory.clauses


def _with_convention(c: Term, x: Term) -> Term:
    """c + x with I(0+x) read as I(x)."""
    return x if c == ZERO else Xor(c, x)


def _atom_nf(atom: Atom, c_set: CSet) -> Atom:
    return Atom(atom.predicate,
                tuple(normal_form(a, c_set) for a in atom.args))


def subst_atom(atom: Atom, sigma) -> Atom:
    return Atom(atom.predicate,
                tuple(apply_subst(a, sigma) for a in atom.args))


def _mask_exempt(t: Term, exempt: frozenset[str]) -> Term:
    if isinstance(t, Var):
        return App(EXEMPT_PREFIX + t.name) if t.name in exempt else t
    if isinstance(t, Xor):
        return Xor(_mask_exempt(t.left, exempt), _mask_exempt(t.right, exempt))
    if isinstance(t, App) and t.args:
        return App(t.symbol, tuple(_mask_exempt(a, exempt) for a in t.args))
    return t


def clause_tuple(clause: HornClause) -> Term:
    """Conclusion-first tuple of all argument terms, exempt variables
    frozen as opaque constants so the substitution family skips them."""
    args: list[Term] = list(clause.conclusion.args)
    for p in clause.premises:
        args.extend(p.args)
    masked = tuple(_mask_exempt(a, clause.exempt_vars) for a in args)
    return App(TUPLE_SYMBOL, masked)


def _clause_key(clause: HornClause) -> tuple:
    # every pushed clause is in normal form, where syntactic equality
    # coincides with equality modulo xor
    return (clause.premises, clause.conclusion)


def build_t_plus(source: Theory, c_set: CSet) -> ReducedTheory:
    """The xor-free companion theory.

    Degenerate closure instances whose conclusion repeats a premise, or
    that a kept instance subsumes, are dropped; the single cancellation
    instance I(x), I(x) -> I(0) is kept because nothing else produces the
    empty sum syntactically.
    """
    ok, witness = is_c_dominated(source, c_set)
    if not ok:
        raise NotCDominated(witness)  # type: ignore[arg-type]

    clauses: list[HornClause] = []
    families: list[int] = []
    origins: list[Origin] = []
    seen: set[tuple] = set()

    def push(clause: HornClause, family: int, origin: Origin) -> None:
        key = _clause_key(clause)
        if key in seen:
            return
        seen.add(key)
        clauses.append(clause)
        families.append(family)
        origins.append(origin)

    for idx, clause in enumerate(source.clauses):
        domain, options = fsub_options(clause_tuple(clause), c_set)
        # drop ~-duplicate options so the cross product is duplicate-free
        option_lists: list[list[Term]] = []
        for x in domain:
            uniq: list[Term] = []
            keys: set[tuple] = set()
            for v in options[x]:
                k = term_key(v)
                if k not in keys:
                    keys.add(k)
                    uniq.append(v)
            option_lists.append(uniq)
        var_pos = {x: i for i, x in enumerate(domain)}
        src_atoms = (clause.conclusion,) + clause.premises
        # each atom only depends on the family variables it mentions, so
        # its normalized instance is cached per choice of those options
        atom_deps: list[tuple[str, ...]] = []
        for a in src_atoms:
            av: set[str] = set()
            for t in a.args:
                av |= vars_of(t)
            atom_deps.append(tuple(x for x in domain if x in av))
        atom_cache: list[dict[tuple[int, ...], Atom]] = [{} for _ in src_atoms]
        for combo in product(*(range(len(o)) for o in option_lists)):
            sigma = {x: option_lists[i][combo[i]]
                     for i, x in enumerate(domain)}
            inst: list[Atom] = []
            for ai, a in enumerate(src_atoms):
                key = tuple(combo[var_pos[x]] for x in atom_deps[ai])
                got = atom_cache[ai].get(key)
                if got is None:
                    got = _atom_nf(subst_atom(a, sigma), c_set)
                    atom_cache[ai][key] = got
                inst.append(got)
            conclusion, premises = inst[0], tuple(inst[1:])
            if conclusion in premises:
                continue
            push(HornClause(premises, conclusion, role=clause.role,
                            exempt_vars=clause.exempt_vars,
                            label=clause.label),
                 FAMILY_CLAUSE,
                 ClauseOrigin(idx, tuple((x, sigma[x]) for x in domain)))

    closure = sorted(c_set.closure_norm(), key=term_key)
    x = Var("X")

    def i_atom(t: Term) -> Atom:
        return Atom("I", (t,))

    def push_xor(premises: tuple[Atom, ...], conclusion: Atom,
                 family: int, c: Term, cp: Term) -> None:
        if conclusion in premises:
            return
        push(HornClause(premises, conclusion, role=ROLE_INTRUDER),
             family, XorOrigin(family, c, cp))

    # cancellation of a fact with itself: the only producer of I(0)
    push_xor((i_atom(x), i_atom(x)), i_atom(ZERO), FAMILY_CANCEL, ZERO, ZERO)

    for c in closure:
        for cp in closure:
            combined = normal_form(Xor(c, cp), c_set)
            if c != cp:
                push_xor((i_atom(c), i_atom(cp)), i_atom(combined),
                         FAMILY_CONST, c, cp)
            push_xor((i_atom(c), i_atom(_with_convention(cp, x))),
                     i_atom(_with_convention(combined, x)),
                     FAMILY_VARIANT if cp != ZERO else FAMILY_POP, c, cp)
            if c != cp:
                push_xor((i_atom(_with_convention(c, x)),
                          i_atom(_with_convention(cp, x))),
                         i_atom(combined), FAMILY_CANCEL, c, cp)

    reduced = Theory(signature=dict(source.signature),
                     predicates=dict(source.predicates),
                     clauses=clauses,
                     xor_rule_implicit=False)
    return ReducedTheory(theory=reduced, c_set=c_set, source=source,
                         families=families, origins=origins)


def reduce_stats(rt: ReducedTheory) -> dict:
    per_family = {f: 0 for f in range(1, 6)}
    for f in rt.families:
        per_family[f] += 1
    fanout: dict[int, int] = {}
    for origin in rt.origins:
        if isinstance(origin, ClauseOrigin):
            fanout[origin.source_index] = fanout.get(origin.source_index, 0) + 1
    return {
        "clauses_per_family": per_family,
        "closure_size": len(rt.c_set.closure_norm()),
        "source_clause_fanout": fanout,
        "total_clauses": len(rt.clauses),
        "source_clauses": len(rt.source.clauses),
    }
