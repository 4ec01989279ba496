"""Bounded forward-chaining derivation search.

Two modes share one saturation loop: syntactic mode (plain first-order
matching, intended for xor-free theories) and xor mode (matching and fact
identity taken modulo the xor identities, with the implicit intruder rule
I(x), I(y) -> I(x+y) applied pairwise).  Search depth counts saturation
rounds.  A negative verdict is definitive only when a round adds nothing
and no candidate conclusion was suppressed by the term-size bound.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Union

from .domination import CSet, in_xor_closure, is_c_dominated
from .normalization import NotCDominated, match_bounded, match_mod_xor
from .terms import (
    App,
    Term,
    Var,
    Xor,
    _Zero,
    apply_subst,
    compose_subst,
    equiv_mod_xor,
    is_ground,
    term_size,
    vars_of,
    xor_reduce,
)
from .theory import Atom, HornClause, Theory, print_atom, print_term

MODE_SYNTACTIC = "syntactic"
MODE_XOR = "xor"

STATUS_FOUND = "found"
STATUS_SATURATED = "saturated"
STATUS_EXHAUSTED = "exhausted"
STATUS_TIMEOUT = "timeout"

DEFAULT_MATCHER_CAP = 64


@dataclass(frozen=True)
class SearchBounds:
    max_depth: int = 12
    max_term_size: int = 24
    max_facts: int = 50000
    timeout: float = 60.0

    def __post_init__(self) -> None:
        if min(self.max_depth, self.max_term_size, self.max_facts) <= 0 \
                or self.timeout <= 0:
            raise ValueError("all search bounds must be positive")


@dataclass(frozen=True)
class InitialFact:
    clause: int


@dataclass(frozen=True)
class ClauseInstance:
    clause: int
    bindings: tuple[tuple[str, Term], ...]
    premise_steps: tuple[int, ...] = ()


@dataclass(frozen=True)
class XorRule:
    left: int
    right: int


Justification = Union[InitialFact, ClauseInstance, XorRule]


@dataclass(frozen=True)
class Step:
    atom: Atom
    just: Justification


@dataclass
class Derivation:
    steps: list[Step]

    def __len__(self) -> int:
        return len(self.steps)

    def goal(self) -> Atom:
        return self.steps[-1].atom


@dataclass
class SearchResult:
    status: str
    derivation: Optional[Derivation] = None
    rounds: int = 0
    facts: int = 0
    note: str = ""

    @property
    def found(self) -> bool:
        return self.status == STATUS_FOUND

    @property
    def definitive_negative(self) -> bool:
        return self.status == STATUS_SATURATED


# ---------------------------------------------------------------------------
# Matching helpers

def match_syntactic(pattern: Term, target: Term,
                    acc: dict[str, Term]) -> Optional[dict[str, Term]]:
    """Plain structural matching; xor nodes match only xor nodes in place."""
    if isinstance(pattern, Var):
        bound = acc.get(pattern.name)
        if bound is None:
            out = dict(acc)
            out[pattern.name] = target
            return out
        return acc if bound == target else None
    if isinstance(pattern, _Zero):
        return acc if isinstance(target, _Zero) else None
    if isinstance(pattern, App):
        if not (isinstance(target, App) and target.symbol == pattern.symbol
                and len(target.args) == len(pattern.args)):
            return None
        for pa, ta in zip(pattern.args, target.args):
            nxt = match_syntactic(pa, ta, acc)
            if nxt is None:
                return None
            acc = nxt
        return acc
    if not isinstance(target, Xor):
        return None
    acc2 = match_syntactic(pattern.left, target.left, acc)
    if acc2 is None:
        return None
    return match_syntactic(pattern.right, target.right, acc2)


def _merge_mod_xor(acc: dict[str, Term],
                   new: dict[str, Term]) -> Optional[dict[str, Term]]:
    out = dict(acc)
    for x, v in new.items():
        canon = xor_reduce(v)
        if x in out and out[x] != canon:
            return None
        out[x] = canon
    return out


def match_term_xor(pattern: Term, target: Term, c_set: Optional[CSet],
                   cap: int) -> tuple[list[dict[str, Term]], bool]:
    """Matchers of pattern against a ground target modulo xor.

    Uses the deterministic C-dominated matcher when possible, the bounded
    enumerating matcher otherwise.  The flag reports whether the bounded
    matcher hit its enumeration cap (so absence of matchers is not proof).
    """
    if is_ground(pattern):
        return ([{}] if equiv_mod_xor(pattern, target) else []), False
    if c_set is not None:
        try:
            theta = match_mod_xor(pattern, target, c_set)
        except NotCDominated:
            theta = None
        else:
            if theta is None:
                return [], False
            return [{x: xor_reduce(v) for x, v in theta.items()}], False
    found = match_bounded(pattern, target, limit=cap)
    return found, len(found) >= cap


def match_atom(pattern: Atom, fact: Atom, mode: str, c_set: Optional[CSet],
               acc: dict[str, Term],
               cap: int = DEFAULT_MATCHER_CAP
               ) -> tuple[list[dict[str, Term]], bool]:
    """Extensions of acc matching pattern against a ground fact atom."""
    if pattern.predicate != fact.predicate \
            or len(pattern.args) != len(fact.args):
        return [], False
    if mode == MODE_SYNTACTIC:
        out = dict(acc)
        for pa, ta in zip(pattern.args, fact.args):
            got = match_syntactic(pa, ta, out)
            if got is None:
                return [], False
            out = got
        return [out], False
    capped = False
    states = [dict(acc)]
    for pa, ta in zip(pattern.args, fact.args):
        nxt: list[dict[str, Term]] = []
        for st in states:
            subs, hit = match_term_xor(apply_subst(pa, st), ta, c_set, cap)
            capped = capped or hit
            for sub in subs:
                merged = _merge_mod_xor(st, sub)
                if merged is not None:
                    nxt.append(merged)
        states = nxt
        if not states:
            break
    return states, capped


# ---------------------------------------------------------------------------
# Exempt-variable instantiation

def _fresh_pool(theory: Theory, size: int) -> list[App]:
    base = "sid"
    while any(f"{base}{i + 1}" in theory.signature for i in range(size)):
        base = "_" + base
    return [App(f"{base}{i + 1}") for i in range(size)]


def instantiate_exempt(theory: Theory, pool_size: int = 2
                       ) -> tuple[list[HornClause], list[int],
                                  list[dict[str, Term]], list[App]]:
    """Replace exempt variables by constants from a small fresh pool.

    Returns (clauses, source index per clause, exempt binding per clause,
    pool).  Clauses without exempt variables pass through unchanged.
    """
    pool = _fresh_pool(theory, pool_size)
    out: list[HornClause] = []
    sources: list[int] = []
    bindings: list[dict[str, Term]] = []

    def combos(names: list[str]) -> Iterable[dict[str, Term]]:
        if not names:
            yield {}
            return
        for rest in combos(names[1:]):
            for c in pool:
                yield {names[0]: c, **rest}

    for idx, clause in enumerate(theory.clauses):
        clause_vars: frozenset[str] = frozenset()
        for t in clause.terms():
            clause_vars |= vars_of(t)
        used = sorted(clause.exempt_vars & clause_vars)
        if not used:
            out.append(clause)
            sources.append(idx)
            bindings.append({})
            continue
        for sub in combos(used):
            inst = HornClause(
                tuple(Atom(p.predicate,
                           tuple(apply_subst(a, sub) for a in p.args))
                      for p in clause.premises),
                Atom(clause.conclusion.predicate,
                     tuple(apply_subst(a, sub)
                           for a in clause.conclusion.args)),
                role=clause.role, label=clause.label)
            out.append(inst)
            sources.append(idx)
            bindings.append(sub)
    return out, sources, bindings, pool


# ---------------------------------------------------------------------------
# The saturation loop

def _arg_shape(t: Term) -> str:
    if isinstance(t, App):
        return t.symbol
    if isinstance(t, _Zero):
        return "@zero"
    return "@xor"


class _Search:
    def __init__(self, theory: Theory, goal: Atom, mode: str,
                 c_set: Optional[CSet], bounds: SearchBounds,
                 prune: bool, exempt_pool: int,
                 matcher_cap: int = DEFAULT_MATCHER_CAP):
        self.theory = theory
        self.goal = goal
        self.mode = mode
        self.c_set = c_set
        self.bounds = bounds
        # pruning by domination is only sound when both the theory and the
        # goal live inside the dominated fragment for this constant set
        self.prune = (prune and c_set is not None
                      and is_c_dominated(theory, c_set)[0]
                      and all(is_c_dominated(t, c_set)[0]
                              for t in goal.args))
        self.matcher_cap = matcher_cap
        self.clauses, self.sources, self.exempt_bindings, self.pool = \
            instantiate_exempt(theory, exempt_pool)
        self.steps: list[Step] = []
        self.index: dict[tuple, int] = {}
        self.by_pred: dict[str, list[int]] = {}
        self.by_shape: dict[tuple[str, str], list[int]] = {}
        # xor-rule classification of I-facts: "c" in the closure,
        # "s" standard outside it, "x" xor-rooted or zero
        self.i_class: dict[int, str] = {}
        self.suppressed = False
        self.capped = False
        self.goal_is_pattern = any(vars_of(a) for a in goal.args)
        self.deadline = time.monotonic() + bounds.timeout

    def canon(self, atom: Atom) -> Atom:
        if self.mode == MODE_XOR:
            return Atom(atom.predicate,
                        tuple(xor_reduce(a) for a in atom.args))
        return atom

    def key(self, atom: Atom) -> tuple:
        return (atom.predicate, atom.args)

    def add(self, atom: Atom, just: Justification) -> Optional[int]:
        atom = self.canon(atom)
        if any(term_size(a) > self.bounds.max_term_size for a in atom.args):
            self.suppressed = True
            return None
        k = self.key(atom)
        if k in self.index:
            return None
        if len(self.steps) >= self.bounds.max_facts:
            self.suppressed = True
            return None
        self.steps.append(Step(atom, just))
        idx = len(self.steps) - 1
        self.index[k] = idx
        self.by_pred.setdefault(atom.predicate, []).append(idx)
        shape = _arg_shape(atom.args[0]) if atom.args else "@none"
        self.by_shape.setdefault((atom.predicate, shape), []).append(idx)
        if atom.predicate == "I":
            t = atom.args[0]
            if isinstance(t, (Xor, _Zero)):
                self.i_class[idx] = "x"
            elif self.c_set is not None and in_xor_closure(t, self.c_set):
                self.i_class[idx] = "c"
            else:
                self.i_class[idx] = "s"
        return idx

    def _candidates(self, premise: Atom) -> list[int]:
        """Facts that could match the premise, narrowed by the top symbol
        of its first argument when that is discriminating.  Both matchers
        require equal standard top symbols, and facts are kept reduced, so
        the narrowing loses nothing in either mode."""
        if premise.args:
            a0 = premise.args[0]
            if isinstance(a0, App):
                return self.by_shape.get((premise.predicate, a0.symbol), [])
            if isinstance(a0, _Zero):
                return self.by_shape.get((premise.predicate, "@zero"), [])
        return self.by_pred.get(premise.predicate, [])

    def is_goal(self, atom: Atom) -> bool:
        if self.goal_is_pattern:
            matches, _ = match_atom(self.goal, self.canon(atom), self.mode,
                                    self.c_set, {}, self.matcher_cap)
            return bool(matches)
        return self.canon(atom) == self.canon(self.goal)

    def _match_clause(self, cid: int, clause: HornClause,
                      new_start: int) -> Iterable[tuple[dict[str, Term],
                                                        tuple[int, ...]]]:
        premises = clause.premises
        # freeze the fact horizon so a clause never matches against facts
        # it produced itself during this pass
        horizon = len(self.steps)

        def go(i: int, theta: dict[str, Term], used: tuple[int, ...],
               has_new: bool) -> Iterable[tuple[dict[str, Term],
                                                tuple[int, ...]]]:
            if i == len(premises):
                if has_new or new_start == 0:
                    yield theta, used
                return
            must_be_new = (not has_new and new_start > 0
                           and i == len(premises) - 1)
            candidates = self._candidates(premises[i])
            for fi in candidates:
                if fi >= horizon:
                    break
                if must_be_new and fi < new_start:
                    continue
                exts, hit = match_atom(premises[i], self.steps[fi].atom,
                                       self.mode, self.c_set, theta,
                                       self.matcher_cap)
                self.capped = self.capped or hit
                for ext in exts:
                    yield from go(i + 1, ext, used + (fi,),
                                  has_new or fi >= new_start)

        yield from go(0, {}, (), False)

    def _apply_xor_rule(self, new_start: int) -> list[int]:
        added: list[int] = []
        facts = self.by_pred.get("I", [])
        new_facts = [i for i in facts if i >= new_start]
        if not new_facts:
            return added
        # under pruning two distinct standard non-closure facts can never
        # combine into a dominated fact, so standard facts only ever pair
        # with closure or xor-rooted partners (or themselves, giving 0)
        if self.prune:
            nonstd = [j for j in facts if self.i_class.get(j) != "s"]
        for i in new_facts:
            if self.prune and self.i_class.get(i) == "s":
                partners: Iterable[int] = nonstd + [i]
            else:
                partners = facts
            for j in partners:
                if j > i:
                    continue
                if time.monotonic() > self.deadline:
                    return added
                t = self.steps[i].atom.args[0]
                s = self.steps[j].atom.args[0]
                combined = xor_reduce(Xor(t, s))
                if term_size(combined) > self.bounds.max_term_size:
                    self.suppressed = True
                    continue
                if self.prune and self.c_set is not None \
                        and not is_c_dominated(combined, self.c_set)[0]:
                    continue
                idx = self.add(Atom("I", (combined,)), XorRule(i, j))
                if idx is not None:
                    added.append(idx)
                    if self.is_goal(self.steps[idx].atom):
                        return added
        return added

    def run(self) -> SearchResult:
        rounds = 0
        new_start = 0
        # seed: premise-free clauses without variables go in as initial facts
        for cid, clause in enumerate(self.clauses):
            if clause.premises:
                continue
            if vars_of_clause(clause):
                continue
            just: Justification
            if self.exempt_bindings[cid]:
                just = ClauseInstance(
                    self.sources[cid],
                    tuple(sorted(self.exempt_bindings[cid].items())))
            else:
                just = InitialFact(self.sources[cid])
            idx = self.add(clause.conclusion, just)
            if idx is not None and self.is_goal(clause.conclusion):
                return self._finish_found(idx, rounds)
        while rounds < self.bounds.max_depth:
            if time.monotonic() > self.deadline:
                return SearchResult(STATUS_TIMEOUT, rounds=rounds,
                                    facts=len(self.steps))
            round_base = len(self.steps)
            progressed = False
            for cid, clause in enumerate(self.clauses):
                if not clause.premises:
                    continue
                for theta, used in self._match_clause(cid, clause, new_start):
                    if time.monotonic() > self.deadline:
                        return SearchResult(STATUS_TIMEOUT, rounds=rounds,
                                            facts=len(self.steps))
                    conclusion = Atom(
                        clause.conclusion.predicate,
                        tuple(apply_subst(a, theta)
                              for a in clause.conclusion.args))
                    if not all(is_ground(a) for a in conclusion.args):
                        continue
                    bindings = dict(self.exempt_bindings[cid])
                    bindings.update(theta)
                    idx = self.add(conclusion,
                                   ClauseInstance(
                                       self.sources[cid],
                                       tuple(sorted(bindings.items())),
                                       used))
                    if idx is not None:
                        progressed = True
                        if self.is_goal(conclusion):
                            return self._finish_found(idx, rounds + 1)
            if self.mode == MODE_XOR and self.theory.xor_rule_implicit:
                added = self._apply_xor_rule(new_start)
                if added:
                    progressed = True
                    last = added[-1]
                    if self.is_goal(self.steps[last].atom):
                        return self._finish_found(last, rounds + 1)
            rounds += 1
            new_start = round_base
            if not progressed:
                if self.suppressed or self.capped:
                    note = ("term-size bound suppressed candidate facts"
                            if self.suppressed else
                            "matcher enumeration cap was hit")
                    return SearchResult(STATUS_EXHAUSTED, rounds=rounds,
                                        facts=len(self.steps), note=note)
                return SearchResult(STATUS_SATURATED, rounds=rounds,
                                    facts=len(self.steps))
        return SearchResult(STATUS_EXHAUSTED, rounds=rounds,
                            facts=len(self.steps),
                            note="depth bound reached")

    def _finish_found(self, goal_index: int, rounds: int) -> SearchResult:
        needed: set[int] = set()
        stack = [goal_index]
        while stack:
            i = stack.pop()
            if i in needed:
                continue
            needed.add(i)
            just = self.steps[i].just
            if isinstance(just, ClauseInstance):
                stack.extend(just.premise_steps)
            elif isinstance(just, XorRule):
                stack.extend((just.left, just.right))
        order = sorted(needed)
        renumber = {old: new for new, old in enumerate(order)}
        trimmed: list[Step] = []
        for old in order:
            step = self.steps[old]
            just = step.just
            if isinstance(just, ClauseInstance):
                just = replace(just, premise_steps=tuple(
                    renumber[p] for p in just.premise_steps))
            elif isinstance(just, XorRule):
                just = XorRule(renumber[just.left], renumber[just.right])
            trimmed.append(Step(step.atom, just))
        return SearchResult(STATUS_FOUND, Derivation(trimmed),
                            rounds=rounds, facts=len(self.steps))


def vars_of_clause(clause: HornClause) -> frozenset[str]:
    out: frozenset[str] = frozenset()
    for t in clause.terms():
        out |= vars_of(t)
    return out


def derive_syntactic(theory: Theory, goal: Atom,
                     bounds: SearchBounds = SearchBounds(),
                     exempt_pool: int = 2) -> SearchResult:
    if theory.xor_rule_implicit:
        raise ValueError("theory carries the implicit xor rule; "
                         "syntactic search does not apply it "
                         "(reduce the theory first or add 'noxor.')")
    return _Search(theory, goal, MODE_SYNTACTIC, None, bounds,
                   prune=False, exempt_pool=exempt_pool).run()


def derive_mod_xor(theory: Theory, goal: Atom,
                   c_set: Optional[CSet] = None,
                   bounds: SearchBounds = SearchBounds(),
                   prune: bool = True,
                   exempt_pool: int = 2) -> SearchResult:
    return _Search(theory, goal, MODE_XOR, c_set, bounds,
                   prune=prune, exempt_pool=exempt_pool).run()


# ---------------------------------------------------------------------------
# Verification and correspondence

def _atoms_equal(a: Atom, b: Atom, mode: str) -> bool:
    if a.predicate != b.predicate or len(a.args) != len(b.args):
        return False
    if mode == MODE_SYNTACTIC:
        return a.args == b.args
    return all(equiv_mod_xor(x, y) for x, y in zip(a.args, b.args))


def verify_derivation(theory: Theory, derivation: Derivation,
                      mode: str) -> bool:
    """Replay every step under its recorded justification."""
    for k, step in enumerate(derivation.steps):
        just = step.just
        if isinstance(just, XorRule):
            if mode == MODE_SYNTACTIC or not theory.xor_rule_implicit:
                return False
            if just.left >= k or just.right >= k:
                return False
            left = derivation.steps[just.left].atom
            right = derivation.steps[just.right].atom
            if not (left.predicate == right.predicate == "I"
                    == step.atom.predicate):
                return False
            if not equiv_mod_xor(step.atom.args[0],
                                 Xor(left.args[0], right.args[0])):
                return False
            continue
        if isinstance(just, InitialFact):
            if not 0 <= just.clause < len(theory.clauses):
                return False
            clause = theory.clauses[just.clause]
            if clause.premises:
                return False
            if not _atoms_equal(clause.conclusion, step.atom, mode):
                return False
            continue
        if not 0 <= just.clause < len(theory.clauses):
            return False
        clause = theory.clauses[just.clause]
        theta = dict(just.bindings)
        conclusion = Atom(clause.conclusion.predicate,
                          tuple(apply_subst(a, theta)
                                for a in clause.conclusion.args))
        if not _atoms_equal(conclusion, step.atom, mode):
            return False
        prior = derivation.steps[:k]
        for premise in clause.premises:
            inst = Atom(premise.predicate,
                        tuple(apply_subst(a, theta) for a in premise.args))
            if not any(_atoms_equal(inst, p.atom, mode) for p in prior):
                return False
    return True


VERDICT_HOLDS = "holds-within-bounds"
VERDICT_VIOLATED = "violated"
VERDICT_INCONCLUSIVE = "inconclusive"


@dataclass
class CorrespondenceResult:
    verdict: str
    witness: Optional[Derivation] = None
    result: Optional[SearchResult] = None


def check_correspondence(theory: Theory, fixed_begins: Iterable[Atom],
                         goal: Atom,
                         bounds: SearchBounds = SearchBounds(),
                         mode: str = MODE_XOR,
                         c_set: Optional[CSet] = None,
                         exempt_pool: int = 2) -> CorrespondenceResult:
    begins = list(fixed_begins)
    goal_ground = all(is_ground(a) for a in goal.args)
    for b in begins:
        if goal_ground and len(b.args) == len(goal.args) \
                and all(equiv_mod_xor(x, y)
                        for x, y in zip(b.args, goal.args)):
            raise ValueError("the goal end-event's parameters are among the "
                             "granted begin facts; the query is vacuous")
    augmented = theory.add_facts(begins)
    if mode == MODE_SYNTACTIC:
        result = derive_syntactic(augmented, goal, bounds,
                                  exempt_pool=exempt_pool)
    else:
        result = derive_mod_xor(augmented, goal, c_set, bounds,
                                exempt_pool=exempt_pool)
    if result.found:
        return CorrespondenceResult(VERDICT_VIOLATED, result.derivation,
                                    result)
    if result.definitive_negative:
        return CorrespondenceResult(VERDICT_HOLDS, None, result)
    return CorrespondenceResult(VERDICT_INCONCLUSIVE, None, result)


# ---------------------------------------------------------------------------
# Trace serialization

def format_trace(derivation: Derivation) -> str:
    lines = []
    for k, step in enumerate(derivation.steps):
        atom = print_atom(step.atom)
        just = step.just
        if isinstance(just, InitialFact):
            lines.append(f"step {k}: {atom}  by initial fact (clause {just.clause})")
        elif isinstance(just, XorRule):
            lines.append(f"step {k}: {atom}  by xor({just.left},{just.right})")
        else:
            bindings = ", ".join(f"{x} = {print_term(v)}"
                                 for x, v in just.bindings)
            lines.append(f"step {k}: {atom}  by clause {just.clause} "
                         f"with {{{bindings}}}")
    return "\n".join(lines)


def trace_json(derivation: Derivation) -> str:
    out = []
    for k, step in enumerate(derivation.steps):
        entry: dict = {"step": k, "atom": print_atom(step.atom)}
        just = step.just
        if isinstance(just, InitialFact):
            entry["just"] = "initial-fact"
            entry["clause"] = just.clause
        elif isinstance(just, XorRule):
            entry["just"] = "xor-rule"
            entry["left"] = just.left
            entry["right"] = just.right
        else:
            entry["just"] = "clause-instance"
            entry["clause"] = just.clause
            entry["bindings"] = {x: print_term(v) for x, v in just.bindings}
        out.append(entry)
    return json.dumps(out, indent=2)


# ---------------------------------------------------------------------------
# Replay of a reduced-theory derivation in the source theory

def replay_to_xor(rt, derivation: Derivation) -> Derivation:
    """Convert a syntactic derivation in a reduced theory into a derivation
    modulo xor in its source theory, using the recorded clause origins."""
    from .reduction import ClauseOrigin

    steps: list[Step] = []
    for step in derivation.steps:
        just = step.just
        if isinstance(just, (InitialFact, ClauseInstance)):
            cid = just.clause
            origin = rt.origins[cid]
            if isinstance(origin, ClauseOrigin):
                sigma = dict(origin.sigma)
                theta = dict(just.bindings) \
                    if isinstance(just, ClauseInstance) else {}
                combined = compose_subst(sigma, theta)
                premise_steps = just.premise_steps \
                    if isinstance(just, ClauseInstance) else ()
                source_clause = rt.source.clauses[origin.source_index]
                if not source_clause.premises and not combined:
                    new_just: Justification = InitialFact(origin.source_index)
                else:
                    new_just = ClauseInstance(
                        origin.source_index,
                        tuple(sorted(combined.items())),
                        premise_steps)
            else:
                prem = just.premise_steps if isinstance(just, ClauseInstance) else ()
                if len(prem) != 2:
                    raise ValueError("xor-family step without two premises")
                new_just = XorRule(prem[0], prem[1])
            steps.append(Step(step.atom, new_just))
        else:
            raise ValueError("reduced-theory derivations cannot contain "
                             "xor-rule steps")
    return Derivation(steps)
