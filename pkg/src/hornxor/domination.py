"""Dominating sets for xor-linear theories.

A theory whose xor subterms each have a ground side can always be dominated
by a finite set C of standard, xor-reduced ground terms: every xor subterm
then has one side whose reduced summands all come from C.  Everything in the
reduction pipeline is parameterized by such a set and by its (exponential)
xor closure.
"""

from __future__ import annotations

import threading
from typing import Iterable, Optional, Union

from .terms import (
    App,
    Term,
    Var,
    Xor,
    ZERO,
    _Zero,
    equiv_mod_xor,
    is_ground,
    is_standard,
    reduced_summands,
    subterms,
    term_key,
    term_size,
    xor_reduce,
    xor_summands,
)
from .theory import HornClause, Theory

DEFAULT_CLOSURE_CAP = 12


class ClosureCapExceeded(Exception):
    def __init__(self, size: int, cap: int):
        super().__init__(f"|C| = {size} exceeds the closure cap {cap} "
                         f"(2^{size} elements); raise the cap explicitly")


class NotXorLinear(ValueError):
    def __init__(self, witness: Term):
        super().__init__(f"theory is not xor-linear, witness: {witness}")
        self.witness = witness


class CSet:
    """An ordered dominating set.

    Elements are stored xor-reduced; the list position defines the linear
    order used by the normal form.  The normalized closure is enumerated
    lazily and memoized (thread-safe; concurrent readers see one result).
    """

    def __init__(self, elements: Iterable[Term], closure_cap: int = DEFAULT_CLOSURE_CAP):
        reduced: list[Term] = []
        for e in elements:
            r = xor_reduce(e)
            if not is_standard(r):
                raise ValueError(f"C element {e} is not standard modulo xor")
            if not is_ground(r):
                raise ValueError(f"C element {e} is not ground")
            if r not in reduced:
                reduced.append(r)
        self.elements: tuple[Term, ...] = tuple(reduced)
        self.closure_cap = closure_cap
        self._canon = frozenset(self.elements)
        self._rank = {e: i for i, e in enumerate(self.elements)}
        self._closure_lock = threading.Lock()
        self._closure_norm: Optional[frozenset[Term]] = None

    def __len__(self) -> int:
        return len(self.elements)

    def __repr__(self) -> str:
        return f"CSet({{{', '.join(map(str, self.elements))}}})"

    def __contains__(self, t: Term) -> bool:
        """Membership in C~, i.e. ~-equality with some element."""
        return xor_reduce(t) in self._canon

    def rank(self, element: Term) -> int:
        return self._rank[xor_reduce(element)]

    def sort_by_order(self, elements: Iterable[Term]) -> list[Term]:
        return sorted((xor_reduce(e) for e in elements), key=self.rank)

    def closure_norm(self) -> frozenset[Term]:
        """Normal forms of all xor combinations of C (2^|C| terms)."""
        with self._closure_lock:
            if self._closure_norm is None:
                self._closure_norm = frozenset(enumerate_cc_norm(self))
            return self._closure_norm


Subject = Union[Term, HornClause, Theory]


def _clause_terms(subject: Subject) -> list[tuple[Term, bool]]:
    """(term, exempt-from-check) pairs for a term, clause, or theory.

    Only the implicit xor rule is ever exempt, and it is never stored, so
    nothing here is actually skipped; the helper just flattens the subject.
    """
    if isinstance(subject, Theory):
        return [(t, False) for c in subject.clauses for t in c.terms()]
    if isinstance(subject, HornClause):
        return [(t, False) for t in subject.terms()]
    return [(subject, False)]


def is_xor_linear(subject: Subject) -> tuple[bool, Optional[Term]]:
    """Every xor subterm must have a ground side.

    Checked on the flattened view: a maximal sum with two or more non-ground
    structural summands violates linearity regardless of bracketing.
    """
    for term, _ in _clause_terms(subject):
        for s in subterms(term):
            if isinstance(s, Xor):
                nonground = [u for u in xor_summands(s) if not is_ground(u)]
                if len(nonground) > 1:
                    return False, s
    return True, None


def in_xor_closure(t: Term, c_set: CSet) -> bool:
    """True iff t reduces to a (possibly empty) sum of C elements."""
    if not is_ground(t):
        return False
    r = xor_reduce(t)
    if r is ZERO:
        return True
    return all(s in c_set._canon for s in xor_summands(r))


def split_by_c(t: Term, c_set: CSet) -> tuple[list[Term], list[Term]]:
    """Reduced summands of t partitioned into (in C~, outside C~)."""
    inside: list[Term] = []
    outside: list[Term] = []
    for s in reduced_summands(t):
        (inside if s in c_set._canon else outside).append(s)
    return inside, outside


def is_bad(t: Term, c_set: CSet) -> bool:
    """Non-standard t is bad when, after splitting off its C part, more than
    one pairwise distinct standard summand outside C~ remains.  Variables
    count as standard summands outside C~."""
    _, outside = split_by_c(t, c_set)
    return len(outside) > 1


def is_c_dominated(subject: Subject, c_set: CSet) -> tuple[bool, Optional[Term]]:
    """Each xor subterm (as written) needs one side inside the closure."""
    for term, _ in _clause_terms(subject):
        for s in subterms(term):
            if isinstance(s, Xor):
                if not (in_xor_closure(s.left, c_set)
                        or in_xor_closure(s.right, c_set)):
                    return False, s
    return True, None


def enumerate_cc_norm(c_set: CSet) -> set[Term]:
    """Normal forms of all subset sums of C; exactly 2^|C| terms.

    Implemented directly on the canonical representation: a subset of C in
    order position is already its own normal form chain.
    """
    if len(c_set) > c_set.closure_cap:
        raise ClosureCapExceeded(len(c_set), c_set.closure_cap)
    # local import: normalization depends on CSet for its ordering
    from .normalization import closure_chain

    out: set[Term] = set()
    n = len(c_set)
    for mask in range(1 << n):
        members = [c_set.elements[i] for i in range(n) if mask >> i & 1]
        out.add(closure_chain(members, c_set))
    return out


def _candidate_elements(theory: Theory) -> list[Term]:
    seen: list[Term] = []

    def add(t: Term) -> None:
        r = xor_reduce(t)
        if is_standard(r) and is_ground(r) and r not in seen:
            seen.append(r)

    for term, _ in _clause_terms(theory):
        for s in subterms(term):
            if not isinstance(s, Xor):
                continue
            summands = reduced_summands(s)
            ground = [u for u in summands if is_ground(u)]
            if len(ground) < len(summands):
                # a non-ground summand is present: every ground summand
                # may be needed to dominate it
                for u in ground:
                    add(u)
            else:
                # fully ground sum: covering all but the heaviest summand
                # dominates every bracketing of it
                if summands:
                    heaviest = max(summands, key=lambda u: (term_size(u), term_key(u)))
                    rest = [u for u in summands if u != heaviest]
                    for u in rest or summands[:1]:
                        add(u)
    return seen


def compute_c_set(theory: Theory, closure_cap: int = DEFAULT_CLOSURE_CAP) -> CSet:
    """Heuristic dominating set: collect ground summands adjacent to
    variables plus light sides of ground sums, then greedily drop elements
    while domination still holds.  Best effort, not minimum cardinality."""
    linear, witness = is_xor_linear(theory)
    if not linear:
        raise NotXorLinear(witness)  # type: ignore[arg-type]

    candidates = sorted(_candidate_elements(theory), key=term_key)
    c_set = CSet(candidates, closure_cap=closure_cap)
    ok, _ = is_c_dominated(theory, c_set)
    if not ok:
        # fall back to every ground standard summand of every xor subterm
        extra = list(candidates)
        for term, _ in _clause_terms(theory):
            for s in subterms(term):
                if isinstance(s, Xor):
                    for u in reduced_summands(s):
                        if is_ground(u) and u not in extra:
                            extra.append(u)
        c_set = CSet(sorted(extra, key=term_key), closure_cap=closure_cap)
        ok, w = is_c_dominated(theory, c_set)
        if not ok:
            raise ValueError(f"failed to dominate theory; stuck at {w}")

    elements = list(c_set.elements)
    for e in list(elements):
        trial = CSet([u for u in elements if u != e], closure_cap=closure_cap)
        if is_c_dominated(theory, trial)[0]:
            elements.remove(e)
    return CSet(elements, closure_cap=closure_cap)
