"""Theory file format: parsing, diagnostics, and print round-trips."""

from __future__ import annotations

import random
import string

from hornxor.terms import App, Var, Xor, ZERO
from hornxor.theory import (
    Atom,
    CorrespondenceQuery,
    Diagnostic,
    HornClause,
    ROLE_EVENT,
    ROLE_FACT,
    ROLE_INTRUDER,
    ROLE_PROTOCOL,
    SecrecyQuery,
    TheoryError,
    load_theory,
    parse_theory,
    print_term,
    print_theory,
    validate,
)

GOOD = """
const a.
const b.
fun pair/2.
pred ev/1.

[intruder] I(X), I(Y) -> I(pair(X, Y)).
I(pair(X, a + b)) -> I(X + a).
-> I(a).
query secret pair(a, b).
"""


def test_parse_good_theory():
    result = parse_theory(GOOD)
    assert result.ok, result.diagnostics
    t = result.theory
    assert t.signature == {"a": 0, "b": 0, "pair": 2}
    assert t.predicates == {"I": 1, "ev": 1}
    assert len(t.clauses) == 3
    assert t.clauses[0].role == ROLE_INTRUDER
    assert t.clauses[1].role == ROLE_PROTOCOL
    assert t.clauses[2].role == ROLE_FACT
    assert t.clauses[2].conclusion == Atom("I", (App("a"),))
    assert result.queries == [SecrecyQuery(Atom("I", (App("pair",
                                                         (App("a"),
                                                          App("b"))),)))]


def test_xor_parses_left_associated():
    result = parse_theory("const a.\nconst b.\nconst c.\n-> I(a + b + c).\n")
    assert result.ok
    arg = result.theory.clauses[0].conclusion.args[0]
    assert arg == Xor(Xor(App("a"), App("b")), App("c"))


def test_zero_literal():
    result = parse_theory("-> I(0).\n")
    assert result.ok
    assert result.theory.clauses[0].conclusion.args[0] == ZERO


def test_comments_and_whitespace():
    result = parse_theory("# leading comment\nconst a. # trailing\n\n-> I(a).\n")
    assert result.ok
    assert len(result.theory.clauses) == 1


def test_unknown_symbol_diagnostic():
    result = parse_theory("-> I(mystery(X)).\n")
    assert any(d.category == "unknown-symbol" for d in result.diagnostics)


def test_arity_diagnostic():
    result = parse_theory("fun f/2.\n-> I(f(f(X, X))).\n")
    assert any(d.category == "arity" for d in result.diagnostics)


def test_variable_condition_diagnostic():
    result = parse_theory("const a.\nI(a) -> I(X).\n")
    assert any(d.category == "variable-condition" for d in result.diagnostics)


def test_exempt_lifts_variable_condition():
    result = parse_theory("const a.\nexempt X.\nI(a) -> I(X).\n")
    assert result.ok, result.diagnostics
    assert result.theory.clauses[0].exempt_vars == frozenset({"X"})


def test_exempt_applies_to_next_clause_only():
    text = "const a.\nexempt X.\nI(a) -> I(X).\nI(a) -> I(Y).\n"
    result = parse_theory(text)
    assert any(d.category == "variable-condition" and "'Y'" in d.message
               for d in result.diagnostics)


def test_reserved_symbol_collision():
    result = parse_theory("const xor.\n-> I(xor).\n")
    assert any("reserved" in d.message for d in result.diagnostics)


def test_uppercase_declaration_rejected():
    result = parse_theory("const Alpha.\n")
    assert result.diagnostics


def test_redeclared_arity():
    result = parse_theory("fun f/1.\nfun f/2.\n")
    assert any(d.category == "arity" for d in result.diagnostics)


def test_noxor_statement():
    result = parse_theory("noxor.\nconst a.\n-> I(a).\n")
    assert result.ok
    assert result.theory.xor_rule_implicit is False


def test_correspondence_query():
    text = ("const a.\npred ebegin/1.\npred eend/1.\n"
            "-> I(a).\n"
            "query corresp eend(N) ~> ebegin(N) given { ebegin(a) } "
            "goal eend(a).\n")
    result = parse_theory(text)
    assert result.ok, result.diagnostics
    (q,) = result.queries
    assert isinstance(q, CorrespondenceQuery)
    assert q.fixed_begins == (Atom("ebegin", (App("a"),)),)
    assert q.goal == Atom("eend", (App("a"),))


def test_load_theory_raises_on_diagnostics():
    try:
        load_theory("-> I(oops(X)).\n")
    except TheoryError as exc:
        assert exc.diagnostics
    else:
        raise AssertionError("expected TheoryError")


def test_diagnostics_carry_positions():
    result = parse_theory("const a.\n-> I(a +).\n")
    assert result.diagnostics
    d = result.diagnostics[0]
    assert d.line == 2 and d.col > 0


def test_parse_never_raises_on_fuzz():
    rng = random.Random(7)
    alphabet = string.ascii_letters + string.digits + "()+,.->#~{}[]/ \n'"
    for _ in range(300):
        text = "".join(rng.choice(alphabet)
                       for _ in range(rng.randrange(0, 120)))
        parse_theory(text)  # must not raise, diagnostics are fine


def test_print_parse_round_trip():
    result = parse_theory(GOOD)
    printed = print_theory(result.theory, result.queries)
    again = parse_theory(printed)
    assert again.ok, again.diagnostics
    assert again.theory.clauses == result.theory.clauses
    assert again.theory.signature == result.theory.signature
    assert again.queries == result.queries
    # printing is a fixpoint
    assert print_theory(again.theory, again.queries) == printed


def test_print_term_preserves_structure():
    t = Xor(Xor(App("a"), App("b")), Var("X"))
    assert print_term(t) == "(a + b) + X"
    assert print_term(Xor(App("a"), Xor(App("b"), Var("X")))) == \
        "a + (b + X)"


def test_validate_direct():
    clause = HornClause((), Atom("I", (Var("X"),)))
    theory = parse_theory("").theory
    theory.clauses.append(clause)
    diags = validate(theory)
    assert diags and all(isinstance(d, Diagnostic) for d in diags)


def test_add_facts_and_with_clauses():
    result = parse_theory(GOOD)
    extra = Atom("ev", (App("a"),))
    augmented = result.theory.add_facts([extra])
    assert augmented.clauses[-1].conclusion == extra
    assert augmented.clauses[-1].role == ROLE_FACT
    assert len(result.theory.clauses) == len(augmented.clauses) - 1


def test_event_role_annotation():
    result = parse_theory("pred ev/1.\nconst a.\n[event] I(a) -> ev(a).\n")
    assert result.ok
    assert result.theory.clauses[0].role == ROLE_EVENT
