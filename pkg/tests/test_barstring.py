from itertools import product

import pytest

from barmu.barstring import (
    D_image, Letter, N_image, all_strings, alpha_eq, canonical_form, compact_form, enumerate_closed,
    format_barstring, free_names, in_context, is_clean, is_closed, parse_barstring as pb, representatives, ub,
)
from barmu.nominal import transposition
from barmu.barstring import act


def test_parse_and_format():
    w = pb("#a b #c c")
    assert w == (Letter(True, 0), Letter(False, 1), Letter(True, 2), Letter(False, 2))
    assert format_barstring(w) == "#a b #c c"
    assert pb("eps") == () and format_barstring(()) == "eps"
    with pytest.raises(ValueError):
        pb("a eps")


def test_free_names_and_closedness():
    assert free_names(pb("a #a a b")) == {0, 1}
    assert is_closed(pb("#a a #b a b"))
    assert not is_closed(pb("#a b"))
    assert in_context(pb("#a b"), {1})


def test_clean():
    assert is_clean(pb("#a #b a b"))
    assert not is_clean(pb("#a #a a"))
    assert not is_clean(pb("a #a"))


def test_alpha_eq_examples():
    assert alpha_eq(pb("#a a"), pb("#b b"))
    assert alpha_eq(pb("#a #b a"), pb("#b #a b"))
    assert not alpha_eq(pb("#a #b a"), pb("#a #b b"))
    # free names block renaming
    assert not alpha_eq(pb("#a b"), pb("#b b"))
    assert alpha_eq(pb("#a #b b"), pb("#a #a a"))


def test_canonical_form_decides_alpha():
    words = list(all_strings(3, (0, 1, 2)))
    for w, v in product(words[::7], words[::5]):
        assert (canonical_form(w) == canonical_form(v)) == alpha_eq(w, v)


def test_canonical_is_clean_and_equivalent():
    for w in all_strings(3, (0, 1)):
        c = canonical_form(w)
        assert alpha_eq(c, w) and is_clean(c)


def test_compact_form_reuses_names():
    assert compact_form(pb("#a #b b")) == pb("#a #a a")
    assert compact_form(pb("#c #d c d")) == pb("#a #b a b")
    for w in all_strings(3, (0, 1, 2)):
        assert alpha_eq(compact_form(w), w)


def test_equivariance_of_alpha():
    pi = transposition(0, 2)
    for w in all_strings(3, (0, 1)):
        assert alpha_eq(act(pi, w), act(pi, canonical_form(w)))


def test_representatives():
    reps = set(representatives(pb("#a a"), (0, 1)))
    assert reps == {pb("#a a"), pb("#b b")}
    assert all(alpha_eq(r, pb("#a #b a")) for r in representatives(pb("#a #b a"), (0, 1, 2)))


def test_N_and_D_from_the_text():
    pool = (0, 1, 2)
    aba = {(c, d, c) for c, d in product(pool, pool) if c != d}
    assert N_image([pb("#a #b a")], 3, pool) == aba
    assert D_image([pb("#a #b a")], 3, pool) == aba
    assert N_image([pb("#a #b")], 2, pool) == {(c, d) for c, d in product(pool, pool) if c != d}
    assert D_image([pb("#a #b")], 2, pool) == set(product(pool, pool))


def test_ub():
    assert ub(pb("#a b a")) == (0, 1, 0)


def test_enumerate_closed_counts():
    # classes of closed strings by length: 1, 1, 2, 5, 15
    by_len = {}
    for w in enumerate_closed(4, (0, 1, 2, 3)):
        assert is_closed(w)
        by_len[len(w)] = by_len.get(len(w), 0) + 1
    assert [by_len[k] for k in range(5)] == [1, 1, 2, 5, 15]


def test_enumerate_closed_is_shortest_first_and_distinct():
    ws = list(enumerate_closed(4, (0, 1, 2)))
    assert [len(w) for w in ws] == sorted(len(w) for w in ws)
    assert len({canonical_form(w) for w in ws}) == len(ws)
