"""Terms over a free signature extended with an ACUN xor operator.

Terms are immutable values; every operation here is a pure function, so
terms can be shared freely (including across threads).  Equality modulo
the xor identities (commutativity, associativity, x+x=0, x+0=x) is decided
by comparing canonical representatives produced by :func:`xor_reduce`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Mapping, Union


@dataclass(frozen=True)
class Var:
    name: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "_hash", hash(("V", self.name)))

    def __hash__(self) -> int:
        return self._hash  # type: ignore[attr-defined]

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class _Zero:
    def __str__(self) -> str:
        return "0"


ZERO = _Zero()


@dataclass(frozen=True)
class Xor:
    left: "Term"
    right: "Term"

    def __post_init__(self) -> None:
        object.__setattr__(self, "_hash",
                           hash(("X", self.left, self.right)))

    def __hash__(self) -> int:
        return self._hash  # type: ignore[attr-defined]

    def __str__(self) -> str:
        return f"{_paren(self.left)} + {_paren(self.right)}"


@dataclass(frozen=True)
class App:
    symbol: str
    args: tuple["Term", ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "_hash", hash(("A", self.symbol, self.args)))

    def __hash__(self) -> int:
        return self._hash  # type: ignore[attr-defined]

    def __str__(self) -> str:
        if not self.args:
            return self.symbol
        return f"{self.symbol}({', '.join(map(str, self.args))})"


Term = Union[Var, _Zero, Xor, App]

Substitution = Mapping[str, Term]


def _paren(t: Term) -> str:
    return f"({t})" if isinstance(t, Xor) else str(t)


def const(name: str) -> App:
    return App(name, ())


def xor(*terms: Term) -> Term:
    """Left-associated xor of one or more terms."""
    if not terms:
        return ZERO
    out = terms[0]
    for t in terms[1:]:
        out = Xor(out, t)
    return out


def is_standard(t: Term) -> bool:
    """True iff the top symbol is not xor.

    The constant 0 is classified as non-standard: it only ever arises from
    full cancellation of a sum.
    """
    return not isinstance(t, (Xor, _Zero))


def subterms(t: Term) -> Iterator[Term]:
    """All subterm occurrences of t, t itself first (positions collapsed)."""
    yield t
    if isinstance(t, Xor):
        yield from subterms(t.left)
        yield from subterms(t.right)
    elif isinstance(t, App):
        for a in t.args:
            yield from subterms(a)


def term_size(t: Term) -> int:
    if isinstance(t, Xor):
        return 1 + term_size(t.left) + term_size(t.right)
    if isinstance(t, App):
        return 1 + sum(term_size(a) for a in t.args)
    return 1


def vars_of(t: Term) -> frozenset[str]:
    if isinstance(t, Var):
        return frozenset((t.name,))
    if isinstance(t, Xor):
        return vars_of(t.left) | vars_of(t.right)
    if isinstance(t, App):
        out: frozenset[str] = frozenset()
        for a in t.args:
            out |= vars_of(a)
        return out
    return frozenset()


def is_ground(t: Term) -> bool:
    if isinstance(t, Var):
        return False
    if isinstance(t, Xor):
        return is_ground(t.left) and is_ground(t.right)
    if isinstance(t, App):
        return all(is_ground(a) for a in t.args)
    return True


def apply_subst(t: Term, sigma: Substitution) -> Term:
    """Simultaneous, capture-free application of a variable binding map."""
    if isinstance(t, Var):
        return sigma.get(t.name, t)
    if isinstance(t, Xor):
        return Xor(apply_subst(t.left, sigma), apply_subst(t.right, sigma))
    if isinstance(t, App) and t.args:
        return App(t.symbol, tuple(apply_subst(a, sigma) for a in t.args))
    return t


def compose_subst(outer: Substitution, inner: Substitution) -> dict[str, Term]:
    """Composition o such that apply(t, o) == apply(apply(t, outer), inner)."""
    out = {x: apply_subst(v, inner) for x, v in outer.items()}
    for x, v in inner.items():
        out.setdefault(x, v)
    return out


# A fixed total order on terms; used to pick a deterministic canonical
# bracketing/ordering inside reduced sums.  Kind ranks keep the comparison
# well defined across the four node shapes.

@lru_cache(maxsize=None)
def term_key(t: Term):
    if isinstance(t, _Zero):
        return (0,)
    if isinstance(t, Var):
        return (1, t.name)
    if isinstance(t, App):
        return (2, t.symbol, len(t.args), tuple(term_key(a) for a in t.args))
    return (3, term_key(t.left), term_key(t.right))


def xor_summands(t: Term) -> list[Term]:
    """Flatten the maximal xor spine of t into its structural summands.

    Summands are returned as written (not reduced); Zero leaves flatten away.
    """
    if isinstance(t, _Zero):
        return []
    if not isinstance(t, Xor):
        return [t]
    return xor_summands(t.left) + xor_summands(t.right)


def reduced_summands(t: Term) -> list[Term]:
    """Summands of the xor-reduced form of t (each standard and reduced)."""
    return list(_reduced_summands(t))


@lru_cache(maxsize=None)
def _reduced_summands(t: Term) -> tuple[Term, ...]:
    acc: dict[Term, int] = {}
    for s in xor_summands(t):
        r = xor_reduce(s)
        for u in xor_summands(r):  # a reduced subterm may itself be a sum
            acc[u] = acc.get(u, 0) + 1
    return tuple(sorted((u for u, n in acc.items() if n % 2 == 1),
                        key=term_key))


def _rebuild_sum(summands: list[Term]) -> Term:
    if not summands:
        return ZERO
    out = summands[-1]
    for s in reversed(summands[:-1]):
        out = Xor(s, out)
    return out


@lru_cache(maxsize=None)
def xor_reduce(t: Term) -> Term:
    """Canonical representative of the ~-class of t.

    Sums are flattened, duplicate summands cancelled pairwise, zero summands
    dropped, and the survivors ordered by the global term order with
    right-associated bracketing.  Reduction recurses into standard subterms,
    so two terms are ~-equivalent exactly when their reduced forms are equal.
    """
    if isinstance(t, (Var, _Zero)):
        return t
    if isinstance(t, App):
        if not t.args:
            return t
        return App(t.symbol, tuple(xor_reduce(a) for a in t.args))
    return _rebuild_sum(reduced_summands(t))


def equiv_mod_xor(t: Term, s: Term) -> bool:
    return xor_reduce(t) == xor_reduce(s)


def complete_nonstandard_subterms(t: Term) -> set[Term]:
    """Maximal xor-rooted subterms: t itself if non-standard, plus every
    non-standard direct child of a standard node."""
    out: set[Term] = set()

    def walk(u: Term, complete: bool) -> None:
        if isinstance(u, (Xor, _Zero)):
            if complete:
                out.add(u)
            if isinstance(u, Xor):
                walk(u.left, False)
                walk(u.right, False)
        elif isinstance(u, App):
            for a in u.args:
                walk(a, True)

    walk(t, True)
    return out
