"""Names, finite permutations and abstraction equality.

Names are plain non-negative ints.  The order on ints is the order on
names, so "fresh" always means "least int not in some finite set".
"""

from __future__ import annotations

import re
from typing import Callable, Iterable, Mapping, TypeVar

T = TypeVar("T")

Name = int

# Reserved segments of the name space.  User-facing names live low;
# canonical forms and internal constructions use these high blocks.
CANON_BASE: Name = 26 * 1000
STALE_BASE: Name = 26 * 2000
_INTERN_BASE: Name = 1 << 40

_NAME_RE = re.compile(r"[a-z][a-z0-9]*\Z")
_STD_RE = re.compile(r"([a-z])([1-9][0-9]*)?\Z")

# identifiers that are not of the form letter+index get interned
_interned: dict[str, Name] = {}
_interned_rev: dict[Name, str] = {}


def name_str(n: Name) -> str:
    """Print a name: 0 -> a, 25 -> z, 26 -> a1, 27 -> b1, ..."""
    if n in _interned_rev:
        return _interned_rev[n]
    if n < 0:
        raise ValueError(f"negative name index {n}")
    q, r = divmod(n, 26)
    return chr(97 + r) + (str(q) if q else "")


def parse_name(s: str) -> Name:
    if not _NAME_RE.match(s):
        raise ValueError(f"not a name: {s!r}")
    m = _STD_RE.match(s)
    if m:
        idx = ord(m.group(1)) - 97
        if m.group(2):
            idx += 26 * int(m.group(2))
        return idx
    if s not in _interned:
        n = _INTERN_BASE + len(_interned)
        _interned[s] = n
        _interned_rev[n] = s
    return _interned[s]


def fresh(excluded: Iterable[Name], start: Name = 0) -> Name:
    ex = set(excluded)
    n = start
    while n in ex:
        n += 1
    return n


class FreshSupply:
    """Hands out the least name not yet excluded, then excludes it."""

    def __init__(self, excluded: Iterable[Name] = (), start: Name = 0):
        self.excluded = set(excluded)
        self.start = start

    def next(self) -> Name:
        n = fresh(self.excluded, self.start)
        self.excluded.add(n)
        return n


class Permutation:
    """Finite permutation of names, stored as a map without fixpoints."""

    __slots__ = ("_map", "_key")

    def __init__(self, mapping: Mapping[Name, Name] | None = None):
        m = {a: b for a, b in (mapping or {}).items() if a != b}
        if set(m) != set(m.values()):
            raise ValueError("mapping is not a permutation of its support")
        self._map = m
        self._key = frozenset(m.items())

    @classmethod
    def identity(cls) -> "Permutation":
        return cls()

    @classmethod
    def from_injection(cls, inj: Mapping[Name, Name]) -> "Permutation":
        """Extend an injective partial map to a permutation.

        Image points that are not in the domain get sent back along the
        chains so the result is a bijection with finite support.
        """
        inj = dict(inj)
        if len(set(inj.values())) != len(inj):
            raise ValueError("map is not injective")
        m = dict(inj)
        inv = {v: k for k, v in inj.items()}
        for v in inj.values():
            if v in m:
                continue
            # walk back from v until we leave the image
            k = v
            while k in inv:
                k = inv[k]
            m[v] = k
        return cls(m)

    def __call__(self, a: Name) -> Name:
        return self._map.get(a, a)

    apply = __call__

    def compose(self, other: "Permutation") -> "Permutation":
        """self after other."""
        dom = set(self._map) | set(other._map)
        return Permutation({a: self(other(a)) for a in dom})

    def inverse(self) -> "Permutation":
        return Permutation({b: a for a, b in self._map.items()})

    def support(self) -> frozenset[Name]:
        return frozenset(self._map)

    def as_dict(self) -> dict[Name, Name]:
        return dict(self._map)

    def is_identity(self) -> bool:
        return not self._map

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Permutation) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        if not self._map:
            return "id"
        parts = ", ".join(f"{name_str(a)}->{name_str(b)}" for a, b in sorted(self._map.items()))
        return f"Permutation({parts})"


def transposition(a: Name, b: Name) -> Permutation:
    if a == b:
        return Permutation()
    return Permutation({a: b, b: a})


def apply(pi: Permutation, a: Name) -> Name:
    return pi(a)


def compose(p1: Permutation, p2: Permutation) -> Permutation:
    return p1.compose(p2)


def abstraction_eq(
    a: Name,
    x: T,
    b: Name,
    y: T,
    act: Callable[[Permutation, T], T],
    supp: Callable[[T], Iterable[Name]],
    eq: Callable[[T, T], bool] | None = None,
    c: Name | None = None,
) -> bool:
    """Decide <a>x = <b>y.

    Picks the least c fresh for (a, x, b, y) unless one is supplied, and
    compares (a c).x with (b c).y.  ``eq`` defaults to ``==``.
    """
    if c is None:
        c = fresh({a, b, *supp(x), *supp(y)})
    lhs = act(transposition(a, c), x)
    rhs = act(transposition(b, c), y)
    return eq(lhs, rhs) if eq else lhs == rhs
