import random

import pytest

from barmu.barstring import parse_barstring as pb
from barmu.logic import (
    BOT, EPS, NEPS, TOP, And, Box, Dia, FormulaSyntaxError, GuardednessError, Mu, Or, PreconditionError, Var,
    alpha_eq_formula, annotate, bn, check_wellformed, closure, degree, evaluate, fn, format_formula, is_guarded,
    models, negate, parse_formula as pf, random_formula, swap, unfold,
)
from barmu.barstring import Letter
from oracles import closed_classes

WORDS = closed_classes(4)


def test_parse_universal_formula():
    phi = pf("mu X . eps || <#a> X")
    assert phi == Mu("X", Or(EPS, Dia(Letter(True, 0), Var("X"))))


def test_parse_errors_carry_positions():
    with pytest.raises(FormulaSyntaxError) as e:
        pf("eps &&\n  @")
    assert (e.value.line, e.value.col) == (2, 3)
    assert e.value.code == "E_SYNTAX"


def test_unguarded_rejected():
    with pytest.raises(GuardednessError):
        pf("mu X . X")
    with pytest.raises(GuardednessError):
        pf("mu X . eps || X")
    assert is_guarded(pf("mu X . <a> X", check=False))


def test_print_parse_roundtrip():
    rng = random.Random(11)
    for _ in range(300):
        phi = random_formula(rng, 12, (0, 1, 2), 3)
        assert pf(format_formula(phi)) == phi


def test_names_and_degree():
    phi = pf("<#a> <#b> (<a> eps && [c] eps)", check=False)
    assert fn(phi) == {2}
    assert bn(phi) == {0, 1}
    assert degree(phi) == 3


def test_annotation_is_binder_free_names():
    phi = pf("mu X . <a> <#b> X", check=False)
    assert phi.body.body.body == Var("X", frozenset({0}))
    assert check_wellformed(pf("mu X . <#a> X")) == []


def test_negation_is_involutive_and_flips():
    for s in ["top", "<#a> [a] eps", "mu X . (eps || <#a> X)"]:
        phi = pf(s)
        assert negate(negate(phi)) == phi
        for w in WORDS:
            assert models(w, phi) != models(w, negate(phi))


def test_top_and_bot():
    for w in WORDS:
        assert models(w, TOP) and not models(w, BOT)


def test_first_repeat_example():
    phi = pf("<#a> [a] eps")
    for s in ["#a", "#a a", "#a #b a b"]:
        assert models(pb(s), phi)
    assert not models(pb("#a a a"), phi)
    assert not models(pb("eps"), phi)


def test_actual_semantics_regressions():
    assert models(pb("#b #a b"), pf("<#b> <#b> top"))
    assert models(pb("#b #a b"), pf("<#b> <#a> top"))
    phi = pf("mu X . ((~eps && [#a] bot) || <#a> X)")
    assert models(pb("#a #b a b"), phi)
    assert not models(pb("#a #b"), phi)


def test_contains_plain_name_meaning():
    phi = pf("mu X . ((~eps && [#a] bot) || <#a> X)")
    for w in WORDS:
        assert models(w, phi) == any(not l.bar for l in w)


def test_some_repeat_meaning():
    phi = pf("mu X . <#a> (X || mu Y . (<#b> Y || <a> top))")
    # prefix of bars, then a plain name bound by one of them
    for w in WORDS:
        k = 0
        while k < len(w) and w[k].bar:
            k += 1
        expect = 0 < k < len(w)
        assert models(w, phi) == expect, w


def test_evaluate_preconditions():
    with pytest.raises(PreconditionError):
        evaluate(set(), pb("a"), EPS)
    with pytest.raises(PreconditionError):
        evaluate(set(), (), pf("<a> eps", check=False))
    assert evaluate({0}, pb("a"), pf("<a> eps", check=False))


def test_context_does_not_change_verdict():
    phi = pf("<#a> <a> eps")
    for w in WORDS:
        assert evaluate(set(), w, phi) == evaluate({0, 1, 2}, w, phi)


def test_alpha_invariance_of_semantics():
    phi = pf("<#a> <#b> (mu X . (<#b> X || <a> <b> top))")
    psi = swap(0, 5, phi)
    assert alpha_eq_formula(phi, psi)
    for w in WORDS:
        assert models(w, phi) == models(w, psi)


def test_unfold_and_closure():
    phi = pf("mu X . <a> eps || <#a> X", check=False)
    assert format_formula(unfold(phi)) == "<a> eps || <#a> (mu X . <a> eps || <#a> X)"
    assert len(closure(pf("mu X . <a> X", check=False))) == 2


def test_random_formulas_meet_limits():
    rng = random.Random(0)
    for _ in range(200):
        phi = random_formula(rng)
        assert not fn(phi) and is_guarded(phi) and degree(phi) <= 2
        assert check_wellformed(phi) == []
