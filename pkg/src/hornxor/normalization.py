"""Normal forms, matching modulo xor, and the finite substitution family.

The normal form operator picks one syntactic representative per ~-class of
C-dominated terms, ordering closure chains by the C order.  On top of it sit
a deterministic matcher for C-dominated patterns against ground targets, a
bounded enumerating matcher for everything else, the fragile-subterm family
``fsub`` and the witness construction ``sigma_of`` that ties a concrete
ground instance back to a member of that family.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product
from typing import Iterable, Optional

from .domination import CSet, in_xor_closure, split_by_c
from .terms import (
    App,
    Substitution,
    Term,
    Var,
    Xor,
    ZERO,
    _Zero,
    apply_subst,
    is_ground,
    is_standard,
    reduced_summands,
    subterms,
    term_key,
    vars_of,
    xor_reduce,
)


class NotCDominated(ValueError):
    def __init__(self, witness: Term):
        super().__init__(f"term is not C-dominated at {witness}")
        self.witness = witness


def _right_chain(parts: list[Term]) -> Term:
    if not parts:
        return ZERO
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Xor(p, out)
    return out


def closure_chain(members: Iterable[Term], c_set: CSet) -> Term:
    """Normal form of a sum of pairwise distinct C elements: their normal
    forms in C order, right-associated; empty sum is 0."""
    ordered = c_set.sort_by_order(members)
    return _right_chain([normal_form(c, c_set) for c in ordered])


def normal_form(t: Term, c_set: CSet, extended: bool = False) -> Term:
    """The canonical representative of t's ~-class.

    Variables map to themselves; standard terms normalize argument-wise;
    a sum of C elements becomes an ordered chain; a sum with one residual
    standard summand becomes chain-xor-residual.  With ``extended`` the
    operator also accepts sums with several residual summands (they are
    ordered by the global term order); otherwise such input raises
    :class:`NotCDominated`.

    Results are memoized per (term, C, mode); C sets hash by identity.
    """
    return _normal_form(t, c_set, extended)


@lru_cache(maxsize=None)
def _normal_form(t: Term, c_set: CSet, extended: bool) -> Term:
    if isinstance(t, Var):
        return t
    if isinstance(t, App):
        if not t.args:
            return t
        return App(t.symbol, tuple(normal_form(a, c_set, extended) for a in t.args))
    if isinstance(t, _Zero):
        return ZERO
    inside, outside = split_by_c(t, c_set)
    if not outside:
        return closure_chain(inside, c_set)
    rest = sorted((normal_form(u, c_set, extended) for u in outside),
                  key=term_key)
    if len(rest) > 1 and not extended:
        raise NotCDominated(t)
    residual = _right_chain(rest)
    if not inside:
        return residual
    return Xor(closure_chain(inside, c_set), residual)


def is_normal_form(t: Term, c_set: CSet) -> bool:
    return normal_form(t, c_set, extended=True) == t


def match_mod_xor(pattern: Term, target: Term,
                  c_set: CSet) -> Optional[dict[str, Term]]:
    """The unique-modulo-xor matcher of a C-dominated pattern against a
    ground target, in normal form; None when no matcher exists."""
    if not is_ground(target):
        raise ValueError("matching target must be ground")
    s = normal_form(pattern, c_set, extended=True)
    t = normal_form(target, c_set, extended=True)
    return _match_nf(s, t, c_set)


def _match_nf(s: Term, t: Term, c_set: CSet) -> Optional[dict[str, Term]]:
    if isinstance(s, Var):
        return {s.name: t}
    if is_ground(s):
        return {} if s == t else None
    if isinstance(s, Xor):
        ground = [u for u in reduced_summands(s) if is_ground(u)]
        nonground = [u for u in reduced_summands(s) if not is_ground(u)]
        if len(nonground) != 1:
            raise NotCDominated(s)
        shifted = normal_form(_right_chain(ground + [t]), c_set, extended=True)
        return _match_nf(normal_form(nonground[0], c_set, extended=True),
                         shifted, c_set)
    # s is a non-ground application
    if not (isinstance(t, App) and t.symbol == s.symbol
            and len(t.args) == len(s.args)):
        return None
    merged: dict[str, Term] = {}
    for sa, ta in zip(s.args, t.args):
        sub = _match_nf(sa, ta, c_set)
        if sub is None:
            return None
        for x, v in sub.items():
            if x in merged and merged[x] != v:
                return None
            merged[x] = v
    return merged


def match_bounded(pattern: Term, target: Term,
                  limit: int = 64) -> list[dict[str, Term]]:
    """Enumerating matcher for arbitrary patterns against ground targets.

    Matches modulo the xor identities by distributing the target's reduced
    summands over the pattern's non-ground summands; the search is bounded
    by ``limit`` results and does not invent summands beyond the target's
    (so it can miss matchers that rely on spontaneous cancellation).
    Bindings are returned xor-reduced.
    """
    if not is_ground(target):
        raise ValueError("matching target must be ground")
    results: list[dict[str, Term]] = []
    seen: set[tuple] = set()

    def emit(sub: dict[str, Term]) -> None:
        key = tuple(sorted((x, term_key(v)) for x, v in sub.items()))
        if key not in seen:
            seen.add(key)
            results.append(dict(sub))

    def merge(a: dict[str, Term], b: dict[str, Term]) -> Optional[dict[str, Term]]:
        out = dict(a)
        for x, v in b.items():
            if x in out and out[x] != v:
                return None
            out[x] = v
        return out

    def go(s: Term, t: Term, acc: dict[str, Term]) -> Iterable[dict[str, Term]]:
        if len(results) >= limit:
            return
        s = apply_subst(s, acc)
        if isinstance(s, Var):
            got = merge(acc, {s.name: xor_reduce(t)})
            if got is not None:
                yield got
            return
        if is_ground(s):
            if xor_reduce(s) == xor_reduce(t):
                yield acc
            return
        if isinstance(s, App):
            tr = xor_reduce(t)
            if not (isinstance(tr, App) and tr.symbol == s.symbol
                    and len(tr.args) == len(s.args)):
                return
            states = [acc]
            for sa, ta in zip(s.args, tr.args):
                states = [nxt for st in states for nxt in go(sa, ta, st)]
                if not states:
                    return
            yield from states
            return
        # xor pattern: partition the target's summands over the pattern's
        # non-ground summands, folding the ground remainder into the last one
        summands = reduced_summands(apply_subst(s, acc))
        ground = [u for u in summands if is_ground(u)]
        open_parts = [u for u in summands if not is_ground(u)]
        if not open_parts:
            yield from go(_right_chain(summands) if summands else ZERO, t, acc)
            return
        t_parts = reduced_summands(t)

        def assign(parts: list[Term], pool: list[Term],
                   st: dict[str, Term]) -> Iterable[dict[str, Term]]:
            if len(results) >= limit:
                return
            if len(parts) == 1:
                remainder = xor_reduce(_right_chain(pool + ground)
                                       if pool + ground else ZERO)
                yield from go(parts[0], remainder, st)
                return
            n = len(pool)
            for mask in range(1 << n):
                chosen = [pool[i] for i in range(n) if mask >> i & 1]
                rest = [pool[i] for i in range(n) if not mask >> i & 1]
                piece = xor_reduce(_right_chain(chosen) if chosen else ZERO)
                for nxt in go(parts[0], piece, st):
                    yield from assign(parts[1:], rest, nxt)

        yield from assign(open_parts, t_parts, acc)

    for sub in go(pattern, target, {}):
        emit(sub)
        if len(results) >= limit:
            break
    return results


def fragile_subterms(t: Term) -> set[Term]:
    """Non-ground standard terms sitting directly under an xor node."""
    out: set[Term] = set()
    for s in subterms(t):
        if isinstance(s, Xor):
            for child in (s.left, s.right):
                if is_standard(child) and not is_ground(child):
                    out.add(child)
    return out


def fsub_options(t: Term, c_set: CSet) -> tuple[list[str], dict[str, list[Term]]]:
    """Per-variable option lists underlying :func:`fsub`.

    Returns the sorted domain (the variables of the fragile subterms of t)
    and, per variable, the candidate bindings: the variable itself, a
    nonzero closure element xored onto it when the bare variable is itself
    fragile, and any binding obtained by matching a fragile host against a
    closure element.
    """
    frag = fragile_subterms(t)
    domain = sorted({x for s in frag for x in vars_of(s)})
    if not domain:
        return [], {}
    closure = sorted(c_set.closure_norm(), key=term_key)
    options: dict[str, list[Term]] = {x: [Var(x)] for x in domain}

    def add(x: str, value: Term) -> None:
        if value not in options[x]:
            options[x].append(value)

    for x in domain:
        if Var(x) in frag:
            for c in closure:
                if c is not ZERO:
                    add(x, Xor(c, Var(x)))
    for s in frag:
        for c in closure:
            theta = match_mod_xor(s, c, c_set)
            if theta:
                for x, v in theta.items():
                    add(x, v)
    return domain, options


def fsub(t: Term, c_set: CSet) -> list[dict[str, Term]]:
    """The finite substitution family of t.

    Each member binds exactly the variables of the fragile subterms; the
    full cross product of the per-variable options from
    :func:`fsub_options` is returned, deduplicated.
    """
    domain, options = fsub_options(t, c_set)
    if not domain:
        return [{}]
    out: list[dict[str, Term]] = []
    seen: set[tuple] = set()
    for combo in product(*(options[x] for x in domain)):
        sub = dict(zip(domain, combo))
        key = tuple(term_key(v) for v in combo)
        if key not in seen:
            seen.add(key)
            out.append(sub)
    return out


def sigma_of(t: Term, theta: Substitution,
             c_set: CSet) -> tuple[dict[str, Term], dict[str, Term]]:
    """Split a ground normal-form instance into a family member and residue.

    Returns (sigma, theta_prime) with theta = sigma followed by theta_prime
    and, for every subterm u of t, the syntactic identity
    normal_form(u theta) == apply(normal_form(u sigma), theta_prime).
    """
    for x in vars_of(t):
        if x not in theta:
            raise ValueError(f"binding for {x} missing from theta")
        v = theta[x]
        if not is_ground(v):
            raise ValueError(f"theta({x}) = {v} is not ground")
        if not is_normal_form(v, c_set):
            raise ValueError(f"theta({x}) = {v} is not in normal form")
    frag = fragile_subterms(t)
    domain = sorted({x for s in frag for x in vars_of(s)})
    sigma: dict[str, Term] = {}
    theta_prime: dict[str, Term] = {}
    for x in domain:
        tx = theta[x]
        hosts = [s for s in frag if x in vars_of(s)]
        if any(in_xor_closure(apply_subst(s, theta), c_set) for s in hosts):
            sigma[x] = tx
            continue
        if Var(x) in frag and isinstance(tx, Xor):
            inside, outside = split_by_c(tx, c_set)
            if inside and len(outside) == 1:
                # tx in normal form is chain-xor-residual; reuse its parts
                sigma[x] = Xor(tx.left, Var(x))
                theta_prime[x] = tx.right
                continue
        sigma[x] = Var(x)
        theta_prime[x] = tx
    for x in theta:
        if x not in sigma:
            theta_prime.setdefault(x, theta[x])
    return sigma, theta_prime
