"""Shared test helpers: an independent GF(2) evaluator used as an oracle
for everything xor-related, plus small-term enumerators and random
generators for the property harnesses.

The GF(2) evaluator interprets a term as a set of monomials (symmetric
difference for xor), which is the free Boolean-ring semantics of the
operator.  It is written directly against the algebra, independent of the
library's canonicalization code, so agreement between the two is a real
check and not a tautology.
"""

from __future__ import annotations

import itertools
import random

import pytest

from hornxor.terms import App, Term, Var, Xor, ZERO, _Zero


# ---------------------------------------------------------------------------
# GF(2) oracle

def gf2(t: Term) -> frozenset:
    """Evaluate t in the free GF(2) module over standard-term generators.

    A variable or application is a single generator (applications evaluate
    their arguments first, so xor inside arguments is handled); a sum is
    the symmetric difference of its sides; 0 is the empty set.  Two terms
    are equal modulo the xor identities exactly when their images agree.
    """
    if isinstance(t, _Zero):
        return frozenset()
    if isinstance(t, Var):
        return frozenset([("v", t.name)])
    if isinstance(t, App):
        return frozenset([("a", t.symbol, tuple(gf2(a) for a in t.args))])
    return gf2(t.left) ^ gf2(t.right)


def gf2_equal(t: Term, s: Term) -> bool:
    return gf2(t) == gf2(s)


# ---------------------------------------------------------------------------
# Exhaustive term enumeration

def enumerate_terms(size: int, consts: tuple[str, ...],
                    unary: tuple[str, ...] = (),
                    variables: tuple[str, ...] = (),
                    with_zero: bool = True) -> list[Term]:
    """All terms with at most `size` nodes over the given signature.

    Node counts: constants, variables and 0 are 1 node; f(t) is 1 + |t|;
    a sum is 1 + |left| + |right|.
    """
    by_size: dict[int, list[Term]] = {0: []}
    leaves: list[Term] = [App(c) for c in consts]
    leaves += [Var(v) for v in variables]
    if with_zero:
        leaves.append(ZERO)
    by_size[1] = leaves
    for n in range(2, size + 1):
        layer: list[Term] = []
        for f in unary:
            layer.extend(App(f, (t,)) for t in by_size.get(n - 1, []))
        for k in range(1, n - 1):
            for left in by_size.get(k, []):
                for right in by_size.get(n - 1 - k, []):
                    layer.append(Xor(left, right))
        by_size[n] = layer
    return [t for n in range(1, size + 1) for t in by_size[n]]


# ---------------------------------------------------------------------------
# Random term / theory generation

CONSTS = ("a", "b")
UNARY = ("f",)
VARS = ("X", "Y")


def random_term(rng: random.Random, depth: int,
                consts: tuple[str, ...] = CONSTS,
                unary: tuple[str, ...] = UNARY,
                variables: tuple[str, ...] = VARS,
                ground: bool = False) -> Term:
    choices = ["const", "zero"]
    if not ground:
        choices.append("var")
    if depth > 0:
        choices += ["app", "xor", "xor"]
    kind = rng.choice(choices)
    if kind == "const":
        return App(rng.choice(consts))
    if kind == "zero":
        return ZERO
    if kind == "var":
        return Var(rng.choice(variables))
    if kind == "app":
        return App(rng.choice(unary),
                   (random_term(rng, depth - 1, consts, unary, variables,
                                ground),))
    # keep sums linear: at most one non-ground side
    left = random_term(rng, depth - 1, consts, unary, variables, ground)
    right = random_term(rng, depth - 1, consts, unary, variables,
                        ground=True)
    if rng.random() < 0.5:
        left, right = right, left
    return Xor(left, right)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20260823)


# ---------------------------------------------------------------------------
# Misc helpers

def pairs(items):
    return itertools.combinations(items, 2)
