"""The ten acceptance criteria, each reported as one pass/fail line."""

from __future__ import annotations

import random
import time
from itertools import product

import pytest

from acceptance_log import record
from oracles import alpha_member, closed_classes, literal_language
from barmu import automata as au
from barmu.barstring import (
    D_image, N_image, all_strings, canonical_form, free_names, is_closed, parse_barstring as pb,
)
from barmu.cli import corpus_dir
from barmu.logic import (
    evaluate, fn, free_vars, models, negate, parse_formula, random_formula, subformulas,
)
from barmu.translate import (
    automaton_to_formula, formula_to_automaton, guess_free_applies, restrict, slack_bound, translate,
)

EX46 = [
    "top",
    "<#a> [a] eps",
    "mu X . <#a> (X || mu Y . (<#b> Y || <a> top))",
    "mu X . (<#a> X || <#a> mu Y . (<#b> Y || <a> eps))",
    "<#a> <#b> mu X . (<#b> X || <a> <b> top)",
]
WORDS = closed_classes(4, (0, 1, 2))


def formula_suite(n: int = 200, seed: int = 2024):
    rng = random.Random(seed)
    return [parse_formula(s) for s in EX46] + [random_formula(rng, 8, (0, 1), 2) for _ in range(n)]


def corpus_formulas():
    return {p.name: parse_formula((p).read_text()) for p in sorted(corpus_dir().iterdir()) if p.name.endswith(".mu")}


def corpus_automata():
    return {p.name: au.parse_automaton(p.read_text()) for p in sorted(corpus_dir().iterdir()) if p.name.endswith(".aut")}


def test_c1_oracle_equivalence():
    t0 = time.perf_counter()
    suite = formula_suite()
    bad = []
    for phi in suite:
        nd = au.name_drop(formula_to_automaton(phi))
        for w in WORDS:
            if au.nd_accepts(nd, w) != models(w, phi):
                bad.append((phi, w))
    dt = time.perf_counter() - t0
    ok = not bad and dt < 300
    record(1, ok, f"{len(suite)} formulas x {len(WORDS)} classes, {len(bad)} disagreements, {dt:.1f}s")
    assert ok, bad[:3]


def test_c2_negation_duality():
    t0 = time.perf_counter()
    suite = formula_suite()
    bad = [(phi, w) for phi in suite for w in WORDS if models(w, phi) == models(w, negate(phi))]
    dt = time.perf_counter() - t0
    ok = not bad and dt < 120
    record(2, ok, f"{len(suite)} formulas x {len(WORDS)} classes, {len(bad)} violations, {dt:.1f}s")
    assert ok, bad[:3]


def test_c3_complement_closure():
    suite = formula_suite()
    bad = []
    for phi in suite:
        p = au.name_drop(formula_to_automaton(phi))
        n = au.name_drop(formula_to_automaton(negate(phi)))
        bad += [(phi, w) for w in WORDS if au.nd_accepts(p, w) == au.nd_accepts(n, w)]
    record(3, not bad, f"{len(suite)} formula pairs, {len(bad)} violations")
    assert not bad, bad[:3]


def test_c4_name_dropping():
    autos = corpus_automata()
    literal = [w for w in all_strings(4, (0, 1, 2)) if is_closed(w)]
    bad = []
    for name, A in autos.items():
        nd = au.name_drop(A)
        for w in WORDS:
            if au.nd_accepts(nd, w) != alpha_member(A, w):
                bad.append((name, "language", w))
        # the literal language of nd is closed under alpha-equivalence
        by_class: dict = {}
        for w in literal:
            by_class.setdefault(canonical_form(w), set()).add(au.nd_accepts(nd, w))
        bad += [(name, "alpha", c) for c, vals in by_class.items() if len(vals) > 1]
    blocking = au.nd_accepts(au.name_drop(autos["blocking.aut"]), pb("#b #b b"))
    ok = not bad and blocking
    record(4, ok, f"{len(autos)} automata, {len(literal)} literal words, blocking example accepted: {blocking}")
    assert ok, bad[:3]


def _inclusion_pairs():
    autos = corpus_automata()
    forms = corpus_formulas()
    left = {k: au.epsilon_eliminate(A) for k, A in autos.items() if not au.epsilon_eliminate(A).has_top}
    pairs = []
    for k, A in left.items():
        pairs.append((f"{k} <= {k}", A, au.epsilon_eliminate(A), ("aut", A)))
        pairs.append((f"{k} <= top", A, au.epsilon_eliminate(formula_to_automaton(forms["ex1_top.mu"])),
                      ("phi", forms["ex1_top.mu"])))
        for k2, B in autos.items():
            if k2 != k:
                pairs.append((f"{k} <= {k2}", A, au.epsilon_eliminate(B), ("aut", B)))
        for f, phi in forms.items():
            pairs.append((f"{k} <= {f}", A, au.epsilon_eliminate(formula_to_automaton(phi)), ("phi", phi)))
    return pairs


def test_c5_inclusion():
    t0 = time.perf_counter()
    pairs = _inclusion_pairs()
    bad = []
    fails = 0
    for name, A1, A2, (kind, ref) in pairs:
        r = au.inclusion(A1, A2)
        member = (lambda w: models(w, ref)) if kind == "phi" else (lambda w: alpha_member(ref, w))
        bound = max(r.configs, 6)
        if r.holds:
            # ground truth: every word of A1 up to the pumping bound is in A2
            if any(not member(w) for w in literal_language(A1, bound)):
                bad.append(name)
        else:
            fails += 1
            w = r.counterexample
            ok_l = alpha_member(A1, w) and au.accepts_alpha(A1, w)
            ok_r = not member(w) and not au.accepts_alpha(A2, w)
            if not (ok_l and ok_r):
                bad.append(name)
    dt = time.perf_counter() - t0
    ok = not bad and len(pairs) >= 50 and dt < 120
    record(5, ok, f"{len(pairs)} pairs, {fails} fails verdicts re-verified, {len(bad)} disagreements, {dt:.1f}s")
    assert ok, bad[:5]


def test_c6_roundtrip():
    autos = corpus_automata()
    bad = []
    for name, A in autos.items():
        phi = automaton_to_formula(A)
        nd = au.name_drop(formula_to_automaton(phi))
        for w in WORDS:
            a = alpha_member(A, w)
            if a != models(w, phi) or a != au.nd_accepts(nd, w):
                bad.append((name, w))
    record(6, not bad, f"{len(autos)} automata, {len(bad)} disagreements")
    assert not bad, bad[:3]


def test_c7_restriction_lemma():
    rng = random.Random(7)
    pool = (0, 1, 2)
    words = list(all_strings(3, pool))
    count = 0
    bad = []
    while count < 600:
        phi = random_formula(rng, 8, (0, 1), 2)
        psi = rng.choice([s for s in subformulas(phi) if not free_vars(s)])
        names = sorted(fn(psi) | {2})
        C = frozenset(x for x in names if rng.random() < 0.6)
        B = frozenset(x for x in C if rng.random() < 0.5)
        a = rng.choice([None] + [x for x in pool if x not in B])
        n = rng.randint(1, 4)
        v = rng.choice([w for w in words if len(w) < n])
        if not guess_free_applies(psi, B, C, a, v):
            continue
        r = restrict(psi, B, C, a, n)
        S = fn(psi) | free_names(v) | B | fn(r) | ({a} if a is not None else set())
        count += 1
        if evaluate(S, v, psi) != evaluate(S, v, r):
            bad.append((psi, B, C, a, n, v))
    record(7, not bad, f"{count} sampled instances, {len(bad)} disagreements")
    assert not bad, bad[:3]


def test_c8_N_and_D():
    pool = (0, 1, 2)
    n_aba = N_image([pb("#a #b a")], 3, pool)
    want_aba = {(c, d, c) for c, d in product(pool, pool) if c != d}
    d_ab = D_image([pb("#a #b")], 2, pool)
    want_ab = set(product(pool, pool))
    # N preserves intersection on a sample of closed classes
    rng = random.Random(3)
    classes = closed_classes(3, pool)
    inter_ok = True
    for _ in range(40):
        L = set(rng.sample(classes, 6))
        K = set(rng.sample(classes, 6)) | set(rng.sample(sorted(L), 2))
        if N_image(L & K, 3, pool) != N_image(L, 3, pool) & N_image(K, 3, pool):
            inter_ok = False
    # D fails intersection: [#a a] and [#a #a] are disjoint, their D-images are not
    d_inter = D_image([pb("#a a")], 2, pool) & D_image([pb("#a #a")], 2, pool)
    d_fail = d_inter == {(c, c) for c in pool}
    # D fails complement: the complement of [#a #b] contains [#a a], yet D(#a #b) has every length-2 word
    comp = [w for w in classes if len(w) == 2 and canonical_form(w) != canonical_form(pb("#a #b"))]
    d_comp_fail = D_image(comp, 2, pool) & d_ab != set()
    ok = n_aba == want_aba and d_ab == want_ab and inter_ok and d_fail and d_comp_fail
    record(8, ok, f"N(#a#b a)={len(n_aba)} words, D(#a#b)={len(d_ab)} words, "
                  f"N-intersection {inter_ok}, D counterexamples {d_fail and d_comp_fail}")
    assert ok


def test_c9_regressions():
    a = evaluate(set(), pb("#b #a b"), parse_formula("<#b> <#b> top"))
    b = evaluate(set(), pb("#a #b a b"), parse_formula("mu X . ((~eps && [#a] bot) || <#a> X)"))
    record(9, a and b, f"renaming case {a}, plain-name case {b}")
    assert a and b


def test_c10_size_sanity():
    forms = corpus_formulas()
    rows = []
    ok = True
    for name, phi in forms.items():
        try:
            T = translate(phi)
        except au.ResourceError:
            ok = False
            rows.append(f"{name}: budget exceeded")
            continue
        bound = slack_bound(phi)
        ok &= T.stats.degree <= bound
        rows.append(f"{name}: states={T.stats.states} degree={T.stats.degree} bound={bound}")
    for r in rows:
        print(r)
    record(10, ok, f"{len(forms)} corpus formulas within budget and degree bound")
    assert ok


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q", "-s"]))
