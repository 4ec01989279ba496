"""Linearity, dominating sets, and the xor closure."""

from __future__ import annotations

import itertools

import pytest

from hornxor.domination import (
    CSet,
    ClosureCapExceeded,
    NotXorLinear,
    compute_c_set,
    enumerate_cc_norm,
    in_xor_closure,
    is_bad,
    is_c_dominated,
    is_xor_linear,
    split_by_c,
)
from hornxor.terms import App, Var, Xor, ZERO, const, xor, xor_reduce
from hornxor.theory import parse_theory

from conftest import enumerate_terms, gf2

a, b = const("a"), const("b")
x, y, z = Var("X"), Var("Y"), Var("Z")


def pair(s, t):
    return App("pair", (s, t))


# ---------------------------------------------------------------------------
# linearity

def test_linear_and_nonlinear_examples():
    t1 = pair(a, Xor(a, pair(x, y)))
    t2 = pair(a, Xor(Xor(a, pair(x, y)), z))
    assert is_xor_linear(t1) == (True, None)
    ok, witness = is_xor_linear(t2)
    assert not ok and witness is not None


def test_linearity_ignores_bracketing():
    # the same flat sum with two non-ground summands under any bracketing
    t_left = Xor(Xor(x, a), y)
    t_right = Xor(x, Xor(a, y))
    assert not is_xor_linear(t_left)[0]
    assert not is_xor_linear(t_right)[0]


def test_linearity_of_theory_reports_witness():
    result = parse_theory("const a.\nI(X + Y) -> I(a).\n")
    ok, witness = is_xor_linear(result.theory)
    assert not ok
    assert witness == Xor(x, y)


# ---------------------------------------------------------------------------
# CSet basics

def test_cset_rejects_nonstandard_and_nonground():
    with pytest.raises(ValueError):
        CSet([Xor(a, b)])
    with pytest.raises(ValueError):
        CSet([x])


def test_cset_reduces_and_dedups_elements():
    c = CSet([a, xor(a, b, b), b])
    assert c.elements == (a, b)
    assert len(c) == 2


def test_cset_membership_is_mod_xor():
    c = CSet([a, b])
    assert a in c
    assert xor(a, b, b) in c
    assert Xor(a, b) not in c  # membership is in C~, not the closure


def test_sort_by_order_uses_list_position():
    c = CSet([b, a])
    assert c.sort_by_order([a, b]) == [b, a]


# ---------------------------------------------------------------------------
# closure

def test_closure_has_power_set_size():
    c = CSet([a, b])
    closure = c.closure_norm()
    assert len(closure) == 4
    values = {gf2(t) for t in closure}
    assert values == {frozenset(), gf2(a), gf2(b), gf2(Xor(a, b))}


def test_closure_members_are_normal_forms():
    from hornxor.normalization import is_normal_form
    c = CSet([a, b, const("c")])
    assert len(c.closure_norm()) == 8
    for t in c.closure_norm():
        assert is_normal_form(t, c)


def test_closure_cap():
    elems = [const(f"c{i}") for i in range(5)]
    c = CSet(elems, closure_cap=4)
    with pytest.raises(ClosureCapExceeded):
        enumerate_cc_norm(c)


def test_in_xor_closure_subset_sum_oracle():
    c = CSet([a, b])
    universe = enumerate_terms(5, consts=("a", "b", "d"), unary=("f",),
                               variables=())
    closure_values = set()
    for picks in itertools.chain.from_iterable(
            itertools.combinations((a, b), k) for k in range(3)):
        closure_values.add(frozenset().union(*[gf2(p) for p in picks])
                           if picks else frozenset())
    # oracle: t is in the closure iff its GF(2) value is a subset sum of C
    for t in universe:
        expected = gf2(t) in closure_values
        assert in_xor_closure(t, c) == expected, t


def test_in_xor_closure_nonground():
    assert not in_xor_closure(Xor(a, x), CSet([a]))


# ---------------------------------------------------------------------------
# badness and domination

def test_split_by_c():
    c = CSet([a])
    inside, outside = split_by_c(xor(a, b, x), c)
    assert inside == [a]
    assert set(outside) == {b, x}


def test_is_bad_examples():
    c = CSet([a])
    assert not is_bad(Xor(a, b), c)
    assert is_bad(xor(b, x), c)  # two summands outside the closure
    assert not is_bad(xor(a, x), c)  # single residual summand
    assert is_bad(xor(b, pair(x, y)), c)
    assert is_bad(xor(a, b, x), c)


def test_domination_examples():
    t1 = pair(a, Xor(a, pair(x, y)))
    assert is_c_dominated(t1, CSet([a]))[0]
    assert not is_c_dominated(t1, CSet([b]))[0]
    t2 = pair(a, Xor(Xor(a, pair(x, y)), z))
    assert not is_c_dominated(t2, CSet([a]))[0]


def test_domination_monotone_in_c():
    small = CSet([a])
    large = CSet([a, b])
    universe = enumerate_terms(5, consts=("a", "b"), unary=("f",),
                               variables=("X",))
    for t in universe:
        if is_c_dominated(t, small)[0]:
            assert is_c_dominated(t, large)[0], t


# ---------------------------------------------------------------------------
# compute_c_set

def test_compute_c_set_on_simple_theory():
    result = parse_theory(
        "const a.\nconst b.\nfun pair/2.\n"
        "I(pair(X, a)) -> I(X + b).\n-> I(a).\n")
    c = compute_c_set(result.theory)
    assert is_c_dominated(result.theory, c)[0]
    assert b in c


def test_compute_c_set_rejects_nonlinear():
    result = parse_theory("const a.\nI(X + Y) -> I(a).\n")
    with pytest.raises(NotXorLinear):
        compute_c_set(result.theory)


def test_compute_c_set_is_pruned():
    # a never appears next to a variable; the greedy pruning drops it
    result = parse_theory(
        "const a.\nconst b.\nI(X + b) -> I(X).\n-> I(a).\n")
    c = compute_c_set(result.theory)
    assert c.elements == (b,)


def test_compute_c_set_handles_ground_sums():
    result = parse_theory("const a.\nconst b.\n-> I(a + b).\n")
    c = compute_c_set(result.theory)
    assert is_c_dominated(result.theory, c)[0]
    assert len(c) == 1  # one side suffices to dominate a binary ground sum


def test_xor_reduce_fixture_of_elements():
    c = CSet([xor(a, b, b)])
    assert c.elements == (xor_reduce(a),)
