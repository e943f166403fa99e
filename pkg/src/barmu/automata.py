"""Extended bar NFAs: acceptance, free names, name dropping, emptiness, inclusion.

Acceptance values are 0, 1 and TOP.  A TOP state is an accepting
deadlock: once reached, every continuation is accepted.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Iterator, Mapping, Sequence

from .barstring import Letter, format_barstring
from .logic import PreconditionError
from .nominal import Name, name_str, parse_name

TOP = "top"
State = str
Label = Letter | None  # None is an epsilon move


class AutomatonError(ValueError):
    code = "E_AUTOMATON"

    def __init__(self, msg: str, line: int = 0, col: int = 0, code: str | None = None):
        where = f"{line}:{col}: " if line else ""
        super().__init__(f"{where}{msg}")
        self.line, self.col = line, col
        if code:
            self.code = code


class ResourceError(RuntimeError):
    """A configured exploration cap was exceeded."""

    code = "E_BUDGET"


@dataclass(frozen=True)
class ExtBarNFA:
    states: tuple[State, ...]
    initial: State
    trans: frozenset  # of (src, label, dst)
    accept: Mapping[State, object] = field(hash=False, compare=False)

    def __post_init__(self):
        sset = set(self.states)
        if self.initial not in sset:
            raise AutomatonError(f"unknown initial state {self.initial!r}", code="E_UNKNOWN_STATE")
        for s, _, t in self.trans:
            if s not in sset or t not in sset:
                raise AutomatonError(f"transition mentions unknown state {s!r} or {t!r}", code="E_UNKNOWN_STATE")
        for q, v in self.accept.items():
            if q not in sset:
                raise AutomatonError(f"acceptance for unknown state {q!r}", code="E_UNKNOWN_STATE")
            if v not in (0, 1, TOP):
                raise AutomatonError(f"bad acceptance value {v!r}")
        for s, _, _ in self.trans:
            if self.f(s) == TOP:
                raise AutomatonError(f"top state {s!r} has an outgoing transition", code="E_TOP_DEADLOCK")
        out: dict[State, list] = {q: [] for q in self.states}
        for s, l, t in sorted(self.trans, key=_trans_key):
            out[s].append((l, t))
        object.__setattr__(self, "_out", out)

    def f(self, q: State) -> object:
        return self.accept.get(q, 0)

    def out(self, q: State) -> list[tuple[Label, State]]:
        return self._out[q]

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, ExtBarNFA)
            and self.states == other.states
            and self.initial == other.initial
            and self.trans == other.trans
            and {q: self.f(q) for q in self.states} == {q: other.f(q) for q in other.states}
        )

    def __hash__(self) -> int:
        return hash((self.states, self.initial, self.trans))

    @property
    def has_eps(self) -> bool:
        return any(l is None for _, l, _ in self.trans)

    @property
    def has_top(self) -> bool:
        return any(self.f(q) == TOP for q in self.states)

    def names(self) -> frozenset[Name]:
        return frozenset(l.name for _, l, _ in self.trans if l is not None)


def _trans_key(t):
    s, l, d = t
    return (s, (-1, 0) if l is None else (int(l.bar), l.name), d)


def make(states: Iterable[State], initial: State, trans: Iterable[tuple], accept: Mapping[State, object],
         check_closed: bool = True) -> ExtBarNFA:
    A = ExtBarNFA(tuple(states), initial, frozenset(trans), dict(accept))
    if check_closed and state_free_names(A)[A.initial]:
        raise AutomatonError("initial language is not closed: some name is read before it is bound",
                             code="E_NOT_CLOSED")
    return A


# ---------------------------------------------------------------- text format

def format_automaton(A: ExtBarNFA) -> str:
    lines = ["states: " + " ".join(A.states), f"initial: {A.initial}"]
    acc = [f"{q}={'top' if A.f(q) == TOP else A.f(q)}" for q in A.states if A.f(q) != 0]
    lines.append("accept:" + ("" if not acc else " " + " ".join(acc)))
    for s, l, t in sorted(A.trans, key=lambda x: (A.states.index(x[0]), _trans_key(x)[1], A.states.index(x[2]))):
        lab = "eps" if l is None else str(l)
        lines.append(f"trans: {s} {lab} {t}")
    return "\n".join(lines) + "\n"


_STATE_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")


def parse_automaton(text: str, check_closed: bool = True) -> ExtBarNFA:
    states: list[State] | None = None
    initial = None
    accept: dict[State, object] = {}
    trans = []
    where: dict[State, tuple[int, int]] = {}
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("//"):
            continue
        key, sep, rest = line.partition(":")
        if not sep:
            raise AutomatonError("expected 'key: value'", ln, 1, code="E_SYNTAX")
        col = raw.index(":") + 2
        toks = rest.split()
        key = key.strip()
        if key == "states":
            if states is not None:
                raise AutomatonError("duplicate states line", ln, 1, code="E_SYNTAX")
            for t in toks:
                if not _STATE_RE.match(t):
                    raise AutomatonError(f"bad state name {t!r}", ln, col, code="E_SYNTAX")
            states = toks
        elif key == "initial":
            if len(toks) != 1:
                raise AutomatonError("initial takes exactly one state", ln, col, code="E_SYNTAX")
            initial = toks[0]
            where.setdefault(initial, (ln, col))
        elif key == "accept":
            for t in toks:
                q, eq, v = t.partition("=")
                if not eq or v not in ("0", "1", "top"):
                    raise AutomatonError(f"bad acceptance entry {t!r}", ln, col, code="E_SYNTAX")
                accept[q] = TOP if v == "top" else int(v)
                where.setdefault(q, (ln, col))
        elif key == "trans":
            if len(toks) != 3:
                raise AutomatonError("trans takes: SRC LABEL DST", ln, col, code="E_SYNTAX")
            s, lab, t = toks
            try:
                label = None if lab == "eps" else (Letter(True, parse_name(lab[1:])) if lab.startswith("#") else Letter(False, parse_name(lab)))
            except ValueError as e:
                raise AutomatonError(str(e), ln, col, code="E_SYNTAX") from None
            trans.append((s, label, t))
            where.setdefault(s, (ln, col))
            where.setdefault(t, (ln, col))
        else:
            raise AutomatonError(f"unknown key {key!r}", ln, 1, code="E_SYNTAX")
    if states is None or initial is None:
        raise AutomatonError("missing 'states:' or 'initial:' line", code="E_SYNTAX")
    known = set(states)
    for q, (ln, col) in where.items():
        if q not in known:
            raise AutomatonError(f"unknown state {q!r}", ln, col, code="E_UNKNOWN_STATE")
    for s, _, _ in trans:
        if accept.get(s) == TOP:
            ln, col = where[s]
            raise AutomatonError(f"top state {s!r} has an outgoing transition", ln, col, code="E_TOP_DEADLOCK")
    return make(states, initial, trans, accept, check_closed=check_closed)


# ---------------------------------------------------------------- literal runs

def eps_closure(A: ExtBarNFA, qs: Iterable[State]) -> frozenset[State]:
    seen = set(qs)
    todo = list(seen)
    while todo:
        q = todo.pop()
        for l, t in A.out(q):
            if l is None and t not in seen:
                seen.add(t)
                todo.append(t)
    return frozenset(seen)


def literal_accepts(A: ExtBarNFA, w: Sequence[Letter]) -> bool:
    """w in L0(A), including the rule that a TOP state accepts any suffix."""
    cur = eps_closure(A, [A.initial])
    for x in w:
        if any(A.f(q) == TOP for q in cur):
            return True
        cur = eps_closure(A, [t for q in cur for l, t in A.out(q) if l == x])
        if not cur:
            return False
    return any(A.f(q) in (1, TOP) for q in cur)


def productive_states(A: ExtBarNFA) -> frozenset[State]:
    good = {q for q in A.states if A.f(q) in (1, TOP)}
    changed = True
    while changed:
        changed = False
        for s, _, t in A.trans:
            if t in good and s not in good:
                good.add(s)
                changed = True
    return frozenset(good)


def state_free_names(A: ExtBarNFA) -> dict[State, frozenset[Name]]:
    """FN(A, q): least solution of the usual inclusions over productive states."""
    prod = productive_states(A)
    fnm: dict[State, set[Name]] = {q: set() for q in A.states}
    changed = True
    while changed:
        changed = False
        for s, l, t in A.trans:
            if t not in prod:
                continue
            if l is None:
                new = fnm[t]
            elif l.bar:
                new = fnm[t] - {l.name}
            else:
                new = fnm[t] | {l.name}
            if not new <= fnm[s]:
                fnm[s] |= new
                changed = True
    return {q: frozenset(v) for q, v in fnm.items()}


def degree(A: ExtBarNFA) -> int:
    fnm = state_free_names(A)
    return max((len(v) for v in fnm.values()), default=0)


def epsilon_eliminate(A: ExtBarNFA) -> ExtBarNFA:
    """Remove epsilon moves.

    A state whose closure contains a TOP state becomes a TOP deadlock;
    that is sound because the TOP state already accepts every suffix.
    """
    if not A.has_eps:
        return A
    clo = {q: eps_closure(A, [q]) for q in A.states}
    acc: dict[State, object] = {}
    trans = set()
    for q in A.states:
        fs = {A.f(p) for p in clo[q]}
        if TOP in fs:
            acc[q] = TOP
            continue
        if 1 in fs:
            acc[q] = 1
        for p in clo[q]:
            for l, t in A.out(p):
                if l is not None:
                    trans.add((q, l, t))
    # keep only reachable states
    reach = {A.initial}
    todo = [A.initial]
    out: dict[State, list] = {}
    for s, l, t in trans:
        out.setdefault(s, []).append(t)
    while todo:
        q = todo.pop()
        for t in out.get(q, ()):
            if t not in reach:
                reach.add(t)
                todo.append(t)
    states = tuple(q for q in A.states if q in reach)
    return ExtBarNFA(states, A.initial, frozenset(t for t in trans if t[0] in reach),
                     {q: v for q, v in acc.items() if q in reach})


def trim(A: ExtBarNFA) -> ExtBarNFA:
    """Drop states that are unreachable or cannot reach acceptance."""
    prod = productive_states(A)
    reach = {A.initial}
    todo = [A.initial]
    while todo:
        q = todo.pop()
        for _, t in A.out(q):
            if t in prod and t not in reach:
                reach.add(t)
                todo.append(t)
    keep = [q for q in A.states if q in reach]
    trans = frozenset((s, l, t) for s, l, t in A.trans if s in reach and t in reach)
    return ExtBarNFA(tuple(keep), A.initial, trans, {q: A.f(q) for q in keep if A.f(q) != 0})


# ---------------------------------------------------------------- name dropping

@dataclass(frozen=True, order=True)
class NdState:
    """A state of nd(A): base state plus an injective partial register map.

    ``reg`` is a sorted tuple of (automaton name, live name) pairs; the
    domain is a subset of FN(A, base).
    """

    base: State
    reg: tuple = ()

    def regmap(self) -> dict[Name, Name]:
        return dict(self.reg)

    def __str__(self) -> str:
        r = ", ".join(f"{name_str(d)}:{name_str(x)}" for d, x in self.reg)
        return f"{self.base}[{r}]"


class NameDrop:
    """Lazily generated name-dropping automaton nd(A) for an epsilon-free A.

    With ``full=False`` (the default) each transition keeps every register
    it is allowed to keep.  Keeping more registers never blocks a run, so
    this generates the same accepted words with far fewer states.
    """

    def __init__(self, A: ExtBarNFA, full: bool = False, cap: int = 1_000_000):
        if A.has_eps:
            raise PreconditionError("name dropping needs an epsilon-free automaton")
        self.A = A
        self.full = full
        self.cap = cap
        self.fn = state_free_names(A)
        self._memo: dict[tuple[NdState, Letter], frozenset[NdState]] = {}

    @property
    def initial(self) -> NdState:
        return NdState(self.A.initial, ())

    def f(self, s: NdState) -> object:
        return self.A.f(s.base)

    def _subsets(self, keep: dict[Name, Name]) -> Iterator[dict[Name, Name]]:
        items = sorted(keep.items())
        if not self.full:
            yield dict(items)
            return
        for k in range(len(items) + 1):
            for c in combinations(items, k):
                yield dict(c)

    def step(self, s: NdState, x: Letter) -> frozenset[NdState]:
        key = (s, x)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        if len(self._memo) > self.cap:
            raise ResourceError("name-dropping expansion exceeded its cap")
        reg = s.regmap()
        out = set()
        for l, t in self.A.out(s.base):
            if l is None or l.bar != x.bar:
                continue
            fnt = self.fn[t]
            if not x.bar:
                if reg.get(l.name) != x.name:
                    continue
                keep = {d: v for d, v in reg.items() if d in fnt}
            else:
                b = l.name
                keep = {d: v for d, v in reg.items() if d != b and d in fnt and v != x.name}
                if b in fnt:
                    keep[b] = x.name
            for sub in self._subsets(keep):
                out.add(NdState(t, tuple(sorted(sub.items()))))
        res = frozenset(out)
        self._memo[key] = res
        return res


def name_drop(A: ExtBarNFA, full: bool = False) -> NameDrop:
    return NameDrop(epsilon_eliminate(A), full=full)


def nd_accepts(nd: NameDrop, w: Sequence[Letter]) -> bool:
    cur = {nd.initial}
    for x in w:
        if any(nd.f(s) == TOP for s in cur):
            return True
        cur = {t for s in cur for t in nd.step(s, x)}
        if not cur:
            return False
    return any(nd.f(s) in (1, TOP) for s in cur)


def accepts_alpha(A: ExtBarNFA | NameDrop, w: Sequence[Letter]) -> bool:
    """[w] in L_alpha(A) for a closed bar string w."""
    nd = A if isinstance(A, NameDrop) else name_drop(A)
    return nd_accepts(nd, w)


# ---------------------------------------------------------------- emptiness

def is_empty(A: ExtBarNFA) -> tuple[bool, tuple[Letter, ...] | None]:
    """(True, None) if L_alpha(A) is empty, else (False, shortest closed witness)."""
    A = epsilon_eliminate(A)
    start = (A.initial, frozenset())
    parent: dict = {start: None}
    todo = deque([start])
    while todo:
        cfg = todo.popleft()
        q, S = cfg
        if A.f(q) in (1, TOP):
            w = []
            while parent[cfg] is not None:
                cfg, l = parent[cfg]
                w.append(l)
            return False, tuple(reversed(w))
        for l, t in A.out(q):
            if l.bar:
                nxt = (t, S | {l.name})
            elif l.name in S:
                nxt = (t, S)
            else:
                continue
            if nxt not in parent:
                parent[nxt] = (cfg, l)
                todo.append(nxt)
    return True, None


# ---------------------------------------------------------------- inclusion

@dataclass(frozen=True)
class InclusionConfig:
    q: State
    S: frozenset
    gamma: frozenset


@dataclass
class InclusionResult:
    holds: bool
    counterexample: tuple[Letter, ...] | None
    configs: int

    def __bool__(self) -> bool:
        return self.holds


def inclusion(A1: ExtBarNFA, A2: ExtBarNFA, budget: int = 1_000_000) -> InclusionResult:
    """Decide L_alpha(A1) <= L_alpha(A2) by breadth-first search over configurations.

    A1 must be a bar NFA (epsilon-free, no TOP states); A2 must be
    epsilon-free.  A failing run yields a shortest counterexample.
    """
    if A1.has_eps or A1.has_top:
        raise PreconditionError("left automaton must be epsilon-free without top states")
    if A2.has_eps:
        raise PreconditionError("right automaton must be epsilon-free")
    nd = NameDrop(A2, cap=budget)
    start = InclusionConfig(A1.initial, frozenset(), frozenset({nd.initial}))
    parent: dict[InclusionConfig, object] = {start: None}
    todo = deque([start])
    while todo:
        cfg = todo.popleft()
        if A1.f(cfg.q) == 1 and not any(nd.f(s) in (1, TOP) for s in cfg.gamma):
            w = []
            c = cfg
            while parent[c] is not None:
                c, l = parent[c]
                w.append(l)
            return InclusionResult(False, tuple(reversed(w)), len(parent))
        for l, t in A1.out(cfg.q):
            if not l.bar and l.name not in cfg.S:
                continue  # would read an unbound name
            g1 = {u for s in cfg.gamma for u in nd.step(s, l)}
            S2 = cfg.S | {l.name} if l.bar else cfg.S
            if l.bar or l.name in S2:
                g1 |= {s for s in cfg.gamma if nd.f(s) == TOP}
            nxt = InclusionConfig(t, S2, frozenset(g1))
            if nxt not in parent:
                if len(parent) >= budget:
                    raise ResourceError("inclusion search exceeded its budget")
                parent[nxt] = (cfg, l)
                todo.append(nxt)
    return InclusionResult(True, None, len(parent))


# ---------------------------------------------------------------- built-ins

def universal_bar_nfa() -> ExtBarNFA:
    """The (#a)* automaton: one accepting state with a #a self-loop."""
    return make(["u"], "u", [("u", Letter(True, 0), "u")], {"u": 1})


def single_top() -> ExtBarNFA:
    return make(["t"], "t", [], {"t": TOP})


def word_automaton(w: Sequence[Letter]) -> ExtBarNFA:
    """Bar NFA whose literal language is exactly {w}."""
    states = [f"s{i}" for i in range(len(w) + 1)]
    trans = [(states[i], x, states[i + 1]) for i, x in enumerate(w)]
    return make(states, states[0], trans, {states[-1]: 1})


def union_automaton(words: Iterable[Sequence[Letter]]) -> ExtBarNFA:
    """Bar NFA accepting exactly the given literal words (a trie)."""
    states = ["r"]
    trans = []
    acc: dict[State, object] = {}
    node: dict[tuple, State] = {(): "r"}
    for w in words:
        w = tuple(w)
        for i in range(len(w)):
            p = w[:i + 1]
            if p not in node:
                node[p] = f"n{len(states)}"
                states.append(node[p])
                trans.append((node[w[:i]], w[i], node[p]))
        acc[node[w]] = 1
    return make(states, "r", trans, acc)


def describe(A: ExtBarNFA) -> str:
    return f"{len(A.states)} states, {len(A.trans)} transitions, degree {degree(A)}"


def witness_text(w: Sequence[Letter] | None) -> str | None:
    return None if w is None else format_barstring(w)
