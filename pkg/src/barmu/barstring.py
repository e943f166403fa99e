"""Bar strings: words over plain names and bar names (#a)."""

from __future__ import annotations

from itertools import product
from typing import Iterable, Iterator, NamedTuple, Sequence

from .nominal import CANON_BASE, Name, Permutation, fresh, name_str, parse_name, transposition


class Letter(NamedTuple):
    bar: bool
    name: Name

    def __str__(self) -> str:
        return ("#" if self.bar else "") + name_str(self.name)

    def act(self, pi: Permutation) -> "Letter":
        return Letter(self.bar, pi(self.name))


BarLetter = Letter
BarString = tuple  # tuple[Letter, ...]
EPS_TEXT = "eps"


def plain(n: Name) -> Letter:
    return Letter(False, n)


def bar(n: Name) -> Letter:
    return Letter(True, n)


def parse_letter(tok: str) -> Letter:
    if tok.startswith("#"):
        return Letter(True, parse_name(tok[1:]))
    return Letter(False, parse_name(tok))


def parse_barstring(text: str) -> tuple[Letter, ...]:
    toks = text.split()
    if toks == [EPS_TEXT]:
        return ()
    if EPS_TEXT in toks:
        raise ValueError("'eps' must stand alone")
    return tuple(parse_letter(t) for t in toks)


def format_barstring(w: Sequence[Letter]) -> str:
    if not w:
        return EPS_TEXT
    return " ".join(str(l) for l in w)


def act(pi: Permutation, w: Sequence[Letter]) -> tuple[Letter, ...]:
    return tuple(Letter(l.bar, pi(l.name)) for l in w)


def names(w: Sequence[Letter]) -> frozenset[Name]:
    return frozenset(l.name for l in w)


def free_names(w: Sequence[Letter]) -> frozenset[Name]:
    bound: set[Name] = set()
    out: set[Name] = set()
    for l in w:
        if l.bar:
            bound.add(l.name)
        elif l.name not in bound:
            out.add(l.name)
    return frozenset(out)


def is_closed(w: Sequence[Letter]) -> bool:
    return not free_names(w)


def is_clean(w: Sequence[Letter]) -> bool:
    binders = [l.name for l in w if l.bar]
    if len(set(binders)) != len(binders):
        return False
    return not (set(binders) & free_names(w))


def in_context(w: Sequence[Letter], S: Iterable[Name]) -> bool:
    """The predicate w in <S>, i.e. FN(w) is a subset of S."""
    return free_names(w) <= set(S)


def alpha_eq(w: Sequence[Letter], v: Sequence[Letter]) -> bool:
    """Reference alpha-equivalence, recursing on the leftmost binder."""
    w, v = tuple(w), tuple(v)
    if len(w) != len(v):
        return False
    for i, (x, y) in enumerate(zip(w, v)):
        if x.bar != y.bar:
            return False
        if not x.bar:
            if x.name != y.name:
                return False
            continue
        rw, rv = w[i + 1:], v[i + 1:]
        c = fresh({x.name, y.name, *names(rw), *names(rv)})
        return alpha_eq(act(transposition(x.name, c), rw), act(transposition(y.name, c), rv))
    return True


def canonical_form(w: Sequence[Letter]) -> tuple[Letter, ...]:
    """Clean representative of [w]: the i-th binder gets the i-th canonical name.

    Canonical names come from a reserved high block; any of them that
    already occur free in w are skipped.
    """
    fn = free_names(w)
    env: dict[Name, Name] = {}
    nxt = CANON_BASE
    out = []
    for l in w:
        if l.bar:
            while nxt in fn:
                nxt += 1
            env[l.name] = nxt
            out.append(Letter(True, nxt))
            nxt += 1
        else:
            out.append(Letter(False, env.get(l.name, l.name)))
    return tuple(out)


def compact_form(w: Sequence[Letter], start: Name = 0) -> tuple[Letter, ...]:
    """Alpha-equivalent representative that reuses names greedily.

    Each binder gets the least name (from ``start`` upwards) that is not
    free in w and not needed by a binder still referenced later.  This is
    the representative printed by the CLI.
    """
    w = tuple(w)
    fn = free_names(w)
    # for each position, the binder position that binds it (or None)
    last_use: dict[int, int] = {}
    binder_of: list[int | None] = []
    scope: dict[Name, int] = {}
    for i, l in enumerate(w):
        if l.bar:
            scope[l.name] = i
            binder_of.append(None)
        else:
            j = scope.get(l.name)
            binder_of.append(j)
            if j is not None:
                last_use[j] = i
    assigned: dict[int, Name] = {}
    out = []
    for i, l in enumerate(w):
        if l.bar:
            busy = {assigned[j] for j in assigned if last_use.get(j, -1) > i}
            busy |= fn
            n = fresh(busy, start)
            assigned[i] = n
            out.append(Letter(True, n))
        else:
            j = binder_of[i]
            out.append(Letter(False, l.name if j is None else assigned[j]))
    return tuple(out)


def ub(w: Sequence[Letter]) -> tuple[Name, ...]:
    return tuple(l.name for l in w)


def representatives(w: Sequence[Letter], pool: Sequence[Name]) -> Iterator[tuple[Letter, ...]]:
    """All strings alpha-equivalent to w whose binders are drawn from pool."""
    w = tuple(w)
    pos = [i for i, l in enumerate(w) if l.bar]
    binder_of: list[int | None] = []
    scope: dict[Name, int] = {}
    for i, l in enumerate(w):
        if l.bar:
            scope[l.name] = i
            binder_of.append(None)
        else:
            binder_of.append(scope.get(l.name))
    for choice in product(pool, repeat=len(pos)):
        ren = dict(zip(pos, choice))
        cand = tuple(
            Letter(True, ren[i]) if l.bar else Letter(False, l.name if binder_of[i] is None else ren[binder_of[i]])
            for i, l in enumerate(w)
        )
        if alpha_eq(cand, w):
            yield cand


def _dedup_classes(L: Iterable[Sequence[Letter]], maxlen: int) -> list[tuple[Letter, ...]]:
    seen = {}
    for w in L:
        w = tuple(w)
        if len(w) <= maxlen:
            seen.setdefault(canonical_form(w), w)
    return list(seen.values())


def N_image(L: Iterable[Sequence[Letter]], maxlen: int, pool: Sequence[Name]) -> set[tuple[Name, ...]]:
    """Global-freshness data words: ub of clean representatives over pool."""
    out = set()
    for w in _dedup_classes(L, maxlen):
        for r in representatives(w, pool):
            if is_clean(r):
                out.add(ub(r))
    return out


def D_image(L: Iterable[Sequence[Letter]], maxlen: int, pool: Sequence[Name]) -> set[tuple[Name, ...]]:
    """Local-freshness data words: ub of all representatives over pool."""
    out = set()
    for w in _dedup_classes(L, maxlen):
        for r in representatives(w, pool):
            out.add(ub(r))
    return out


def all_strings(maxlen: int, pool: Sequence[Name]) -> Iterator[tuple[Letter, ...]]:
    letters = [Letter(b, n) for n in pool for b in (True, False)]
    for k in range(maxlen + 1):
        yield from product(letters, repeat=k)


def enumerate_closed(maxlen: int, binder_pool: Sequence[Name]) -> Iterator[tuple[Letter, ...]]:
    """One canonical representative per alpha-class of closed strings.

    Classes are those of length <= maxlen with a representative over the
    binder pool, shortest first.
    """
    if not binder_pool:
        raise ValueError("binder pool must be nonempty")
    pool = sorted(binder_pool)
    letters = [Letter(b, n) for n in pool for b in (True, False)]
    for k in range(maxlen + 1):
        seen: set[tuple[Letter, ...]] = set()
        layer = []
        for w in _closed_words(k, letters):
            c = canonical_form(w)
            if c not in seen:
                seen.add(c)
                layer.append(c)
        yield from layer


def _closed_words(k: int, letters: list[Letter]) -> Iterator[tuple[Letter, ...]]:
    # depth-first with the bound set, so only closed words are produced
    def go(prefix: list[Letter], bound: frozenset[Name]) -> Iterator[tuple[Letter, ...]]:
        if len(prefix) == k:
            yield tuple(prefix)
            return
        for l in letters:
            if l.bar:
                prefix.append(l)
                yield from go(prefix, bound | {l.name})
                prefix.pop()
            elif l.name in bound:
                prefix.append(l)
                yield from go(prefix, bound)
                prefix.pop()

    yield from go([], frozenset())
