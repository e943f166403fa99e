"""Formula to automaton and automaton to formula.

The formula side offers the annotation calculus (``restrict``,
``restrict_guess``, ``rest``) and a tableau that builds an extended bar
NFA.  The tableau tracks concrete formulas together with a set of live
names; see ``formula_to_automaton`` for the invariants it relies on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Iterator

from . import automata as au
from .barstring import Letter
from .logic import (
    BOT, EPS, NEPS, TOP, And, Box, Dia, Eps, Formula, Mu, NEps, Or, PreconditionError, Var,
    act, annotate, closure, conj, degree, disj, fn, free_vars, is_guarded, node_count, support, swap, unfold,
)
from .nominal import STALE_BASE, Name, Permutation, fresh

STAR = None  # the "no distinguishing letter" marker


# ---------------------------------------------------------------- restriction

def _bar_top() -> Formula:
    return Dia(Letter(True, 0), TOP)


def _guard_disj(B: Iterable[Name]) -> Formula:
    parts = [EPS, _bar_top()] + [Dia(Letter(False, d), TOP) for d in sorted(B)]
    return disj(parts)


def restrict(phi: Formula, B: Iterable[Name], C: Iterable[Name], a: Name | None, n: int) -> Formula:
    """phi restricted to support C, early names B and distinguishing letter a, for words shorter than n."""
    B, C = frozenset(B), frozenset(C)
    if not B <= C:
        raise PreconditionError("restrict needs B to be a subset of C")
    if a is not None and a in B:
        raise PreconditionError("the distinguishing letter must lie outside B")
    if free_vars(phi):
        raise PreconditionError("restrict needs a formula without free variables")
    return _restrict(phi, B, C, a, n)


def _restrict(phi: Formula, B: frozenset, C: frozenset, a: Name | None, n: int) -> Formula:
    if n <= 0:
        return TOP
    match phi:
        case Eps() | NEps():
            return phi
        case And(l, r):
            return And(_restrict(l, B, C, a, n), _restrict(r, B, C, a, n))
        case Or(l, r):
            return Or(_restrict(l, B, C, a, n), _restrict(r, B, C, a, n))
        case Mu():
            return _restrict(unfold(phi), B, C, a, n)
        case Dia(x, body) | Box(x, body) if x.bar:
            b = x.name
            if b in B or b in C or b == a:
                c = fresh(support(phi) | B | C | ({a} if a is not None else set()))
                body = swap(b, c, body)
                b = c
            inner = _restrict(body, B | {b}, C | {b}, a, n - 1)
            return type(phi)(Letter(True, b), inner)
        case Dia(x, body):
            b = x.name
            if b not in C:
                return BOT
            if b in B:
                return Dia(x, _restrict(body, B, C, a, n - 1))
            return Dia(x, _restrict(body, frozenset(), fn(body), STAR, n - 1))
        case Box(x, body):
            b = x.name
            if b not in C:
                if a is not None:
                    return _guard_disj(B | {a})
                return Box(x, _restrict(body, frozenset(), fn(body), STAR, n - 1))
            if b in B:
                return Box(x, _restrict(body, B, C, a, n - 1))
            # the chi(b) table
            if a is None:
                return Box(x, _restrict(body, frozenset(), fn(body), STAR, n - 1))
            if a == b:
                return Or(_guard_disj(B), Dia(x, _restrict(body, frozenset(), fn(body), STAR, n - 1)))
            return _guard_disj(B | {a})
        case Var():
            raise PreconditionError("free fixpoint variable reached during restriction")
    raise TypeError(phi)


def restrict_guess(phi: Formula, B, C, a: Name | None, n: int, D: Iterable[Name]) -> Formula:
    if a is not None and a in frozenset(D):
        return BOT
    return restrict(phi, B, C, a, n)


def free_letters_in_order(v) -> list[Name]:
    """Names with a free occurrence in v, by first free occurrence."""
    bound: set[Name] = set()
    out: list[Name] = []
    for l in v:
        if l.bar:
            bound.add(l.name)
        elif l.name not in bound and l.name not in out:
            out.append(l.name)
    return out


def guess_free_applies(phi: Formula, B, C, a: Name | None, v) -> bool:
    """Do (phi, B, C, a, v) meet the hypotheses of the restriction lemma?"""
    B, C = frozenset(B), frozenset(C)
    if not B <= C or (a is not None and a in B):
        return False
    free = free_letters_in_order(v)
    if a is not None:
        before = free[:free.index(a)] if a in free else free
        if not set(before) <= B:
            return False
    outside = [d for d in free if d not in B]
    if outside and outside[0] in fn(phi) and outside[0] not in C:
        return False
    return True


# ---------------------------------------------------------------- annotated formulas

@dataclass(frozen=True)
class AnnotatedFormula:
    """pi . (body^B_C(a)) with B, C and a given in body coordinates."""

    perm: Permutation
    body: Formula
    B: frozenset
    C: frozenset
    a: Name | None = STAR

    @property
    def A(self) -> frozenset:
        return fn(self.body) & self.C

    def key(self) -> tuple:
        return (self.body, self.B, self.C, self.a)

    def concrete(self) -> tuple[Formula, frozenset, frozenset, Name | None]:
        p = self.perm
        return (act(p, self.body), frozenset(map(p, self.B)), frozenset(map(p, self.C)),
                None if self.a is None else p(self.a))

    def expand(self, n: int) -> Formula:
        phi, B, C, a = self.concrete()
        return restrict(phi, B, C, a, n)

    def concrete_key(self) -> tuple:
        return self.concrete()


def plain_annotation(perm: Permutation, body: Formula) -> AnnotatedFormula:
    return AnnotatedFormula(perm, body, frozenset(), fn(body), STAR)


def _find_instances(delta: frozenset) -> tuple[AnnotatedFormula, AnnotatedFormula] | None:
    items = sorted(delta, key=lambda f: repr(f.concrete_key()))
    for i, f in enumerate(items):
        for g in items[i + 1:]:
            if f.key() == g.key():
                A = f.A
                if frozenset(map(f.perm, A)) != frozenset(map(g.perm, A)):
                    return f, g
    return None


def restriction_step(delta: frozenset) -> list[frozenset] | None:
    """One name-restriction step, or None if delta has no two instances.

    Candidates are listed by actual distinguishing letter in name order,
    with the no-letter case last.  The partner copy is annotated with the
    same actual letter, expressed in its own coordinates.
    """
    hit = _find_instances(delta)
    if hit is None:
        return None
    f, g = hit
    pi, pj = f.perm, g.perm
    A = f.A
    piA = frozenset(map(pi, A))
    pjA = frozenset(map(pj, A))
    D = piA & pjA
    E = frozenset(map(pi.inverse(), D))
    E2 = frozenset(map(pj.inverse(), D))
    base = delta - {f, g}
    out = []
    for e in sorted(piA - pjA):
        out.append(base | {
            AnnotatedFormula(pi, f.body, f.B & E, A, pi.inverse()(e)),
            AnnotatedFormula(pj, f.body, frozenset(), E2, pj.inverse()(e)),
        })
    for e in sorted(pjA - piA):
        out.append(base | {
            AnnotatedFormula(pj, f.body, f.B & E2, A, pj.inverse()(e)),
            AnnotatedFormula(pi, f.body, frozenset(), E, pi.inverse()(e)),
        })
    out.append(base | {
        AnnotatedFormula(pi, f.body, f.B & E, A, STAR),
        AnnotatedFormula(pj, f.body, frozenset(), E2, STAR),
    })
    return out


def rest(Phi: Iterable[Iterable[AnnotatedFormula]]) -> set[frozenset]:
    """Apply restriction steps until no member contains two instances."""
    todo = [frozenset(d) for d in Phi]
    done: set[frozenset] = set()
    while todo:
        d = todo.pop()
        nxt = restriction_step(d)
        if nxt is None:
            done.add(d)
        else:
            todo.extend(nxt)
    return done


def annotated_measure(delta: Iterable[AnnotatedFormula]) -> int:
    return sum(len(f.B) + len(f.C) for f in delta)


# ---------------------------------------------------------------- tableau

class BudgetExceeded(au.ResourceError):
    code = "E_BUDGET"


@dataclass(frozen=True, order=True)
class TableauState:
    """A set of concrete formulas plus the live names the run may still read."""

    gamma: frozenset
    live: frozenset

    def is_modal(self) -> bool:
        return all(_is_modal(f) for f in self.gamma)


def _is_modal(f: Formula) -> bool:
    return isinstance(f, (Eps, NEps, Dia, Box))


@lru_cache(maxsize=None)
def _fkey(f: Formula) -> str:
    return repr(f)


def _sorted(gamma: Iterable[Formula]) -> list[Formula]:
    return sorted(gamma, key=_fkey)


def _names_in_order(f: Formula) -> list[Name]:
    out: list[Name] = []
    seen: set[Name] = set()

    def go(p: Formula) -> None:
        match p:
            case And(l, r) | Or(l, r):
                go(l)
                go(r)
            case Dia(x, b) | Box(x, b):
                if x.name not in seen:
                    seen.add(x.name)
                    out.append(x.name)
                go(b)
            case Var(_, ann):
                for n in sorted(ann):
                    if n not in seen:
                        seen.add(n)
                        out.append(n)
            case Mu(_, b):
                go(b)

    go(f)
    return out


@lru_cache(maxsize=None)
def _stale(f: Formula, live: frozenset) -> Formula:
    # names outside the live set will never be read again; give them
    # canonical stale spellings so equal obligations collapse
    inj = {}
    for n in _names_in_order(f):
        if n not in live:
            inj[n] = STALE_BASE + len(inj)
    if all(k == v for k, v in inj.items()):
        return f
    return act(Permutation.from_injection(inj), f)


def _clash(gamma: Iterable[Formula], live: frozenset) -> bool:
    """True if a modal set can never be satisfied by a run over live names."""
    has_eps = False
    has_neps = False
    dia: set[Letter] = set()
    for f in gamma:
        match f:
            case Eps():
                has_eps = True
            case NEps():
                has_neps = True
            case Dia(x, _):
                if not x.bar and x.name not in live:
                    return True
                dia.add(Letter(x.bar, 0) if x.bar else x)
    if has_eps and (has_neps or dia):
        return True
    return len(dia) > 1


@lru_cache(maxsize=None)
def _expand(gamma: frozenset, live: frozenset) -> tuple[frozenset, ...]:
    """All modal sets reachable from gamma by propositional rules."""
    out: set[frozenset] = set()
    todo = [gamma]
    seen = {gamma}
    while todo:
        g = todo.pop()
        nm = next((f for f in _sorted(g) if not _is_modal(f)), None)
        if nm is None:
            if not _clash(g, live):
                out.add(g)
            continue
        rest_g = g - {nm}
        match nm:
            case And(l, r):
                succ = [rest_g | {l, r}]
            case Or(l, r):
                succ = [rest_g | {l}, rest_g | {r}]
            case Mu():
                succ = [rest_g | {unfold(nm)}]
            case _:
                raise PreconditionError("free fixpoint variable in tableau")
        for s in succ:
            if s not in seen:
                seen.add(s)
                todo.append(s)
    return tuple(sorted(out, key=lambda s: [_fkey(f) for f in _sorted(s)]))


def _step(gamma: frozenset, x: Letter) -> frozenset | None:
    out = set()
    for f in gamma:
        match f:
            case Eps():
                return None
            case NEps():
                continue
            case Dia(y, b) | Box(y, b):
                is_dia = isinstance(f, Dia)
                if y.bar != x.bar or (not x.bar and y.name != x.name):
                    if is_dia:
                        return None
                    continue
                out.add(swap(y.name, x.name, b) if x.bar else b)
    return frozenset(out)


def _accept_value(gamma: frozenset) -> object:
    if not gamma:
        return au.TOP
    if all(isinstance(f, (Eps, Box)) for f in gamma):
        return 1
    return 0


@dataclass
class TranslationStats:
    states: int = 0
    modal_states: int = 0
    transitions: int = 0
    eps_transitions: int = 0
    live_cap: int = 0
    name_pool: int = 0
    degree: int = 0
    formula_degree: int = 0
    formula_size: int = 0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class Translation:
    automaton: au.ExtBarNFA
    stats: TranslationStats
    labels: dict = field(default_factory=dict)


def free_degree(phi: Formula) -> int:
    """Largest number of free names of any closure element."""
    return max((len(fn(p)) for p in closure(phi)), default=0)


def formula_to_automaton(phi: Formula, budget: int = 100_000) -> au.ExtBarNFA:
    return translate(phi, budget).automaton


def translate(phi: Formula, budget: int = 100_000) -> Translation:
    """Tableau construction of an extended bar NFA for a closed guarded formula.

    States are (gamma, live).  A run only reads plain names from ``live``
    and binds each new name to the least name of a fixed pool outside
    ``live``.  After every letter the run may forget live names; names
    that leave the live set are renamed into a stale block inside each
    formula, which keeps the state space finite.  At most one name not
    mentioned by any formula is worth keeping, since reading it turns
    the state into an accepting deadlock or kills it, and the tracked
    names a run still needs fit inside one formula's free names.  This
    bounds the live set by the largest free-name count in the closure
    plus one.
    """
    if free_vars(phi) or fn(phi):
        raise PreconditionError("translation needs a closed formula")
    if not is_guarded(phi):
        raise PreconditionError("translation needs a guarded formula")
    k = free_degree(phi)
    cap = k + 1
    pool = tuple(range(k + 2))
    stats = TranslationStats(live_cap=cap, name_pool=len(pool), formula_degree=degree(phi),
                             formula_size=node_count(phi))

    ids: dict[TableauState, str] = {}
    trans: list[tuple] = []
    acc: dict[str, object] = {}
    order: list[TableauState] = []

    def sid(s: TableauState) -> str:
        if s not in ids:
            if len(ids) >= budget:
                raise BudgetExceeded(f"tableau exceeded its budget of {budget} states")
            ids[s] = f"q{len(ids)}"
            order.append(s)
        return ids[s]

    def norm(gamma: Iterable[Formula], live: frozenset) -> TableauState:
        g = frozenset(_stale(f, live) for f in gamma)
        if not g:
            live = frozenset()
        return TableauState(g, live)

    def live_choices(gamma: frozenset, avail: frozenset) -> Iterator[frozenset]:
        tracked = sorted(avail & frozenset().union(*[fn(f) for f in gamma]))
        untracked = sorted(avail - set(tracked))
        for r in range(min(len(tracked), cap) + 1):
            for T in combinations(tracked, r):
                T = frozenset(T)
                yield T
                if len(T) < cap:
                    for u in untracked:
                        yield T | {u}

    start = norm([phi], frozenset())
    sid(start)
    i = 0
    while i < len(order):
        s = order[i]
        i += 1
        q = ids[s]
        if not s.is_modal():
            for g in _expand(s.gamma, s.live):
                t = TableauState(g, s.live if g else frozenset())
                trans.append((q, None, sid(t)))
            continue
        stats.modal_states += 1
        acc[q] = _accept_value(s.gamma)
        if acc[q] == au.TOP:
            continue
        letters = [Letter(False, y) for y in sorted(s.live)]
        letters.append(Letter(True, min(n for n in pool if n not in s.live)))
        for x in letters:
            g2 = _step(s.gamma, x)
            if g2 is None:
                continue
            avail = s.live | {x.name} if x.bar else s.live
            for L2 in live_choices(g2, avail):
                t = norm(g2, L2)
                trans.append((q, x, sid(t)))

    A = au.make(ids.values(), ids[start], trans, {k2: v for k2, v in acc.items() if v != 0})
    stats.states = len(ids)
    stats.transitions = sum(1 for t in trans if t[1] is not None)
    stats.eps_transitions = len(trans) - stats.transitions
    stats.degree = au.degree(A)
    labels = {v: k2 for k2, v in ids.items()}
    return Translation(A, stats, labels)


def slack_bound(phi: Formula) -> int:
    """2^(2k) * 5 m^2 * (k+1) + 1 with k the degree and m the size."""
    k = degree(phi)
    m = node_count(phi)
    return 2 ** (2 * k) * 5 * m * m * (k + 1) + 1


# ---------------------------------------------------------------- automaton to formula

def automaton_to_formula(A: au.ExtBarNFA) -> Formula:
    """A closed formula whose bar language is L_alpha(A).

    One fixpoint variable per state.  An accepting state contributes eps
    as an extra disjunct so its outgoing transitions are kept.
    """
    A = au.epsilon_eliminate(A)
    var = {q: f"Q{i}" for i, q in enumerate(A.states)}

    def form(q: str, seen: frozenset) -> Formula:
        if q in seen:
            return Var(var[q])
        f = A.f(q)
        if f == au.TOP:
            return TOP
        parts: list[Formula] = [EPS] if f == 1 else []
        for l, t in A.out(q):
            parts.append(Dia(l, form(t, seen | {q})))
        body = disj(parts) if parts else BOT
        if not any(var[q] == v for v in free_vars(body)):
            return body
        return Mu(var[q], body)

    return annotate(form(A.initial, frozenset()))
