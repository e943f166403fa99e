"""Bar-muTL formulas in negation normal form.

The AST is made of small frozen dataclasses.  Fixpoint variables carry
the free names of their binder as an annotation; the permutation action
renames those annotations along with modal letters.
"""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Union

from .barstring import Letter, free_names as word_free_names, names as word_names
from .nominal import Name, Permutation, fresh, name_str, parse_name, transposition


class FormulaError(ValueError):
    code = "E_FORMULA"


class FormulaSyntaxError(FormulaError):
    code = "E_SYNTAX"

    def __init__(self, msg: str, line: int = 1, col: int = 1):
        super().__init__(f"{line}:{col}: {msg}")
        self.line, self.col = line, col


class GuardednessError(FormulaError):
    code = "E_GUARD"


class PreconditionError(ValueError):
    """Raised when an operation is called outside its precondition."""

    code = "E_PRECONDITION"


@dataclass(frozen=True, slots=True)
class Eps:
    pass


@dataclass(frozen=True, slots=True)
class NEps:
    pass


@dataclass(frozen=True, slots=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Dia:
    letter: Letter
    body: "Formula"


@dataclass(frozen=True, slots=True)
class Box:
    letter: Letter
    body: "Formula"


@dataclass(frozen=True, slots=True)
class Var:
    name: str
    ann: frozenset = frozenset()


@dataclass(frozen=True, slots=True)
class Mu:
    var: str
    body: "Formula"


Formula = Union[Eps, NEps, And, Or, Dia, Box, Var, Mu]
Modal = (Dia, Box)

EPS = Eps()
NEPS = NEps()
TOP = Or(EPS, NEPS)
BOT = And(EPS, NEPS)


# ---------------------------------------------------------------- names

@lru_cache(maxsize=None)
def fn(phi: Formula) -> frozenset[Name]:
    """Free names.  A variable leaf contributes its annotation."""
    match phi:
        case Eps() | NEps():
            return frozenset()
        case And(l, r) | Or(l, r):
            return fn(l) | fn(r)
        case Dia(x, b) | Box(x, b):
            if x.bar:
                return fn(b) - {x.name}
            return fn(b) | {x.name}
        case Var(_, ann):
            return ann
        case Mu(_, b):
            return fn(b)
    raise TypeError(phi)


@lru_cache(maxsize=None)
def bn(phi: Formula) -> frozenset[Name]:
    match phi:
        case Eps() | NEps() | Var():
            return frozenset()
        case And(l, r) | Or(l, r):
            return bn(l) | bn(r)
        case Dia(x, b) | Box(x, b):
            return bn(b) | {x.name} if x.bar else bn(b)
        case Mu(_, b):
            return bn(b)
    raise TypeError(phi)


def all_names(phi: Formula) -> frozenset[Name]:
    """N(phi) = FN(phi) | BN(phi)."""
    return fn(phi) | bn(phi)


@lru_cache(maxsize=None)
def support(phi: Formula) -> frozenset[Name]:
    """Every name mentioned, annotations included."""
    match phi:
        case Eps() | NEps():
            return frozenset()
        case And(l, r) | Or(l, r):
            return support(l) | support(r)
        case Dia(x, b) | Box(x, b):
            return support(b) | {x.name}
        case Var(_, ann):
            return ann
        case Mu(_, b):
            return support(b)
    raise TypeError(phi)


def degree(phi: Formula) -> int:
    return len(all_names(phi))


def fn_bn_deg(phi: Formula) -> tuple[frozenset[Name], frozenset[Name], int]:
    return fn(phi), bn(phi), degree(phi)


@lru_cache(maxsize=None)
def free_vars(phi: Formula) -> frozenset[str]:
    match phi:
        case Eps() | NEps():
            return frozenset()
        case And(l, r) | Or(l, r):
            return free_vars(l) | free_vars(r)
        case Dia(_, b) | Box(_, b):
            return free_vars(b)
        case Var(x, _):
            return frozenset({x})
        case Mu(x, b):
            return free_vars(b) - {x}
    raise TypeError(phi)


def is_closed(phi: Formula) -> bool:
    return not free_vars(phi)


def node_count(phi: Formula) -> int:
    match phi:
        case Eps() | NEps() | Var():
            return 1
        case And(l, r) | Or(l, r):
            return 1 + node_count(l) + node_count(r)
        case Dia(_, b) | Box(_, b) | Mu(_, b):
            return 1 + node_count(b)
    raise TypeError(phi)


# ---------------------------------------------------------------- action

def act(pi: Permutation | dict, phi: Formula) -> Formula:
    """pi . phi, renaming letters and variable annotations."""
    m = pi.as_dict() if isinstance(pi, Permutation) else pi
    if not m or not (support(phi) & m.keys()):
        return phi
    return _act(m, phi)


def _act(m: dict, phi: Formula) -> Formula:
    if not (support(phi) & m.keys()):
        return phi
    match phi:
        case And(l, r):
            return And(_act(m, l), _act(m, r))
        case Or(l, r):
            return Or(_act(m, l), _act(m, r))
        case Dia(x, b):
            return Dia(Letter(x.bar, m.get(x.name, x.name)), _act(m, b))
        case Box(x, b):
            return Box(Letter(x.bar, m.get(x.name, x.name)), _act(m, b))
        case Var(x, ann):
            return Var(x, frozenset(m.get(a, a) for a in ann))
        case Mu(x, b):
            return Mu(x, _act(m, b))
    return phi


def swap(a: Name, b: Name, phi: Formula) -> Formula:
    if a == b:
        return phi
    return act({a: b, b: a}, phi)


# ----------------------------------------------------- annotation, vars

def annotate(phi: Formula, env: dict[str, frozenset] | None = None) -> Formula:
    """Recompute every variable annotation as FN of its binder.

    Free variables keep whatever annotation ``env`` (or the leaf) gives.
    """
    env = dict(env or {})
    return _annotate(phi, env)


def _annotate(phi: Formula, env: dict[str, frozenset]) -> Formula:
    match phi:
        case Eps() | NEps():
            return phi
        case And(l, r):
            return And(_annotate(l, env), _annotate(r, env))
        case Or(l, r):
            return Or(_annotate(l, env), _annotate(r, env))
        case Dia(x, b):
            return Dia(x, _annotate(b, env))
        case Box(x, b):
            return Box(x, _annotate(b, env))
        case Var(x, ann):
            return Var(x, env.get(x, ann))
        case Mu(x, b):
            # least fixpoint of A = FN(mu X. b) with X annotated by A
            A: frozenset = frozenset()
            while True:
                inner = _annotate(b, {**env, x: A})
                A2 = fn(inner)
                if A2 == A:
                    return Mu(x, inner)
                A = A2
    raise TypeError(phi)


def subst_var(phi: Formula, x: str, repl: Formula) -> Formula:
    """Replace free occurrences of variable x.  Names are not protected."""
    match phi:
        case Eps() | NEps():
            return phi
        case And(l, r):
            return And(subst_var(l, x, repl), subst_var(r, x, repl))
        case Or(l, r):
            return Or(subst_var(l, x, repl), subst_var(r, x, repl))
        case Dia(s, b):
            return Dia(s, subst_var(b, x, repl))
        case Box(s, b):
            return Box(s, subst_var(b, x, repl))
        case Var(y, _):
            return repl if y == x else phi
        case Mu(y, b):
            if y == x:
                return phi
            return Mu(y, subst_var(b, x, repl))
    raise TypeError(phi)


def _rename_var(phi: Formula, x: str, y: str) -> Formula:
    match phi:
        case Eps() | NEps():
            return phi
        case And(l, r):
            return And(_rename_var(l, x, y), _rename_var(r, x, y))
        case Or(l, r):
            return Or(_rename_var(l, x, y), _rename_var(r, x, y))
        case Dia(s, b):
            return Dia(s, _rename_var(b, x, y))
        case Box(s, b):
            return Box(s, _rename_var(b, x, y))
        case Var(z, ann):
            return Var(y, ann) if z == x else phi
        case Mu(z, b):
            if z == x:
                return phi
            return Mu(z, _rename_var(b, x, y))
    raise TypeError(phi)


def _var_base(x: str) -> str:
    return re.sub(r"[0-9]+\Z", "", x) or x


def bound_vars(phi: Formula) -> list[str]:
    match phi:
        case Eps() | NEps() | Var():
            return []
        case And(l, r) | Or(l, r):
            return bound_vars(l) + bound_vars(r)
        case Dia(_, b) | Box(_, b):
            return bound_vars(b)
        case Mu(x, b):
            return [x] + bound_vars(b)
    raise TypeError(phi)


def reclean(phi: Formula) -> Formula:
    """Rename binders that shadow an enclosing binder of the same variable.

    The new name is the variable's base plus the least numeric suffix not
    in scope, so repeated unfolding only ever produces finitely many
    spellings.
    """
    return _reclean(phi, frozenset(free_vars(phi)))


def _reclean(phi: Formula, scope: frozenset[str]) -> Formula:
    match phi:
        case Eps() | NEps() | Var():
            return phi
        case And(l, r):
            return And(_reclean(l, scope), _reclean(r, scope))
        case Or(l, r):
            return Or(_reclean(l, scope), _reclean(r, scope))
        case Dia(s, b):
            return Dia(s, _reclean(b, scope))
        case Box(s, b):
            return Box(s, _reclean(b, scope))
        case Mu(x, b):
            if x in scope:
                base = _var_base(x)
                k = 1
                while f"{base}{k}" in scope:
                    k += 1
                y = f"{base}{k}"
                b = _rename_var(b, x, y)
                x = y
            return Mu(x, _reclean(b, scope | {x}))
    raise TypeError(phi)


@lru_cache(maxsize=None)
def unfold(phi: Formula) -> Formula:
    """phi[mu X.phi / X] with literal substitution (names may be captured)."""
    if not isinstance(phi, Mu):
        raise PreconditionError("unfold expects a fixpoint formula")
    return reclean(subst_var(phi.body, phi.var, phi))


def is_guarded(phi: Formula) -> bool:
    return not _unguarded_mus(phi)


check_guarded = is_guarded


def _unguarded_mus(phi: Formula) -> list[str]:
    bad = []

    def free_unguarded(psi: Formula, x: str) -> bool:
        # does x occur free outside every modality of psi?
        match psi:
            case Eps() | NEps():
                return False
            case And(l, r) | Or(l, r):
                return free_unguarded(l, x) or free_unguarded(r, x)
            case Dia() | Box():
                return False
            case Var(y, _):
                return y == x
            case Mu(y, b):
                return y != x and free_unguarded(b, x)
        raise TypeError(psi)

    def walk(psi: Formula) -> None:
        match psi:
            case And(l, r) | Or(l, r):
                walk(l)
                walk(r)
            case Dia(_, b) | Box(_, b):
                walk(b)
            case Mu(x, b):
                if free_unguarded(b, x):
                    bad.append(x)
                walk(b)

    walk(phi)
    return bad


def is_clean_vars(phi: Formula) -> bool:
    bv = bound_vars(phi)
    return len(bv) == len(set(bv)) and not (set(bv) & free_vars(phi))


def check_wellformed(phi: Formula) -> list[str]:
    """Diagnostics; empty when phi is closed, guarded, clean and annotated."""
    out = []
    for x in _unguarded_mus(phi):
        out.append(f"E_GUARD: fixpoint {x} is not guarded")
    if free_vars(phi):
        out.append("E_FREEVAR: free variables " + ", ".join(sorted(free_vars(phi))))
    if not is_clean_vars(phi):
        out.append("E_UNCLEAN: bound variables are not pairwise distinct")
    if is_closed(phi) and annotate(phi) != phi:
        out.append("E_ANNOT: variable annotations differ from binder free names")
    return out


# ---------------------------------------------------------------- negation

def negate(phi: Formula) -> Formula:
    """Negation normal form of the complement; variables map to themselves."""
    match phi:
        case Eps():
            return NEPS
        case NEps():
            return EPS
        case And(l, r):
            return Or(negate(l), negate(r))
        case Or(l, r):
            return And(negate(l), negate(r))
        case Dia(x, b):
            return Box(x, negate(b))
        case Box(x, b):
            return Dia(x, negate(b))
        case Var():
            return phi
        case Mu(x, b):
            return Mu(x, negate(b))
    raise TypeError(phi)


# ---------------------------------------------------------------- closure

def closure(phi: Formula) -> frozenset[Formula]:
    """Closure with every free fixpoint variable replaced by its binder."""
    out: set[Formula] = set()
    _cl(phi, {}, out)
    return frozenset(out)


def _close(psi: Formula, theta: dict[str, Formula]) -> Formula:
    for x in free_vars(psi):
        if x in theta:
            psi = subst_var(psi, x, theta[x])
    return psi


def _cl(phi: Formula, theta: dict[str, Formula], out: set) -> None:
    match phi:
        case Var():
            return
        case Eps() | NEps():
            out.add(phi)
        case And(l, r) | Or(l, r):
            out.add(_close(phi, theta))
            _cl(l, theta, out)
            _cl(r, theta, out)
        case Dia(_, b) | Box(_, b):
            out.add(_close(phi, theta))
            _cl(b, theta, out)
        case Mu(x, b):
            closed = _close(phi, theta)
            out.add(closed)
            _cl(b, {**theta, x: closed}, out)


# ---------------------------------------------------------------- alpha

def alpha_eq_formula(phi: Formula, psi: Formula) -> bool:
    if type(phi) is not type(psi):
        return False
    match phi:
        case Eps() | NEps():
            return True
        case And(l, r) | Or(l, r):
            return alpha_eq_formula(l, psi.left) and alpha_eq_formula(r, psi.right)
        case Dia(x, b) | Box(x, b):
            y = psi.letter
            if x.bar != y.bar:
                return False
            if not x.bar:
                return x.name == y.name and alpha_eq_formula(b, psi.body)
            c = fresh(support(b) | support(psi.body) | {x.name, y.name})
            return alpha_eq_formula(swap(x.name, c, b), swap(y.name, c, psi.body))
        case Var(x, ann):
            return x == psi.name and ann == psi.ann
        case Mu(x, b):
            return x == psi.var and alpha_eq_formula(b, psi.body)
    raise TypeError(phi)


# ---------------------------------------------------------------- semantics

def evaluate(S: Iterable[Name], w: Iterable[Letter], phi: Formula) -> bool:
    """S, w |= phi.

    Bar modalities pick one name c fresh for S, phi and w, rename the
    word's leading binder and the modality's binder to c, and continue.
    """
    S = frozenset(S)
    w = tuple(w)
    if free_vars(phi):
        raise PreconditionError("formula has free fixpoint variables")
    if not fn(phi) <= S:
        raise PreconditionError("FN(phi) is not contained in the context")
    if not word_free_names(w) <= S:
        raise PreconditionError("FN(w) is not contained in the context")
    if len(w) > 200:
        sys.setrecursionlimit(max(sys.getrecursionlimit(), 20 * len(w) + 1000))
    return _sat(w, phi)


@lru_cache(maxsize=1 << 18)
def _sat(w: tuple, phi: Formula) -> bool:
    # the context only constrains inputs, it never changes the verdict,
    # so it is not threaded through the recursion
    match phi:
        case Eps():
            return not w
        case NEps():
            return bool(w)
        case And(l, r):
            return _sat(w, l) and _sat(w, r)
        case Or(l, r):
            return _sat(w, l) or _sat(w, r)
        case Mu():
            return _sat(w, unfold(phi))
        case Dia(x, b) | Box(x, b):
            is_dia = isinstance(phi, Dia)
            if not w:
                return not is_dia
            head = w[0]
            if head.bar != x.bar:
                return not is_dia
            if not x.bar:
                if head.name != x.name:
                    return not is_dia
                return _sat(w[1:], b)
            c = fresh(support(phi) | word_names(w))
            d = head.name
            v = tuple(Letter(l.bar, c) if l.name == d else l for l in w[1:])
            return _sat(v, swap(x.name, c, b))
        case Var():
            raise PreconditionError("free fixpoint variable reached during evaluation")
    raise TypeError(phi)


def models(w: Iterable[Letter], phi: Formula) -> bool:
    """Top-level satisfaction with empty context."""
    return evaluate(frozenset(), w, phi)


# ---------------------------------------------------------------- syntax

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<op>&&|\|\||~eps|[<>\[\]().#])|(?P<lname>[a-z][a-z0-9]*)|(?P<uname>[A-Z][A-Za-z0-9_]*)|(?P<bad>\S))"
)
_KEYWORDS = {"eps", "top", "bot", "mu"}


def _tokenize(text: str) -> list[tuple[str, str, int, int]]:
    toks = []
    pos = 0

    def where(i: int) -> tuple[int, int]:
        line = text.count("\n", 0, i) + 1
        return line, i - (text.rfind("\n", 0, i) + 1) + 1

    while True:
        m = _TOKEN_RE.match(text, pos)
        if not m:
            break
        kind = m.lastgroup
        val = m.group(kind)
        line, col = where(m.start(kind))
        if kind == "bad":
            raise FormulaSyntaxError(f"unexpected character {val!r}", line, col)
        toks.append((kind, val, line, col))
        pos = m.end()
    toks.append(("end", "", *where(len(text))))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int, int]:
        return self.toks[self.i]

    def take(self) -> tuple[str, str, int, int]:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, val: str) -> None:
        t = self.take()
        if t[1] != val:
            raise FormulaSyntaxError(f"expected {val!r}, found {t[1] or 'end of input'!r}", t[2], t[3])

    def error(self, msg: str) -> FormulaSyntaxError:
        t = self.peek()
        return FormulaSyntaxError(msg, t[2], t[3])

    def parse(self) -> Formula:
        phi = self.or_expr()
        if self.peek()[0] != "end":
            raise self.error(f"unexpected token {self.peek()[1]!r}")
        return phi

    def or_expr(self) -> Formula:
        phi = self.and_expr()
        while self.peek()[1] == "||":
            self.take()
            phi = Or(phi, self.and_expr())
        return phi

    def and_expr(self) -> Formula:
        phi = self.unary()
        while self.peek()[1] == "&&":
            self.take()
            phi = And(phi, self.unary())
        return phi

    def letter(self, close: str) -> Letter:
        isbar = False
        if self.peek()[1] == "#":
            self.take()
            isbar = True
        t = self.take()
        if t[0] != "lname" or t[1] in _KEYWORDS:
            raise FormulaSyntaxError("expected a name", t[2], t[3])
        self.expect(close)
        return Letter(isbar, parse_name(t[1]))

    def unary(self) -> Formula:
        kind, val, line, col = self.peek()
        if val == "<":
            self.take()
            x = self.letter(">")
            return Dia(x, self.unary())
        if val == "[":
            self.take()
            x = self.letter("]")
            return Box(x, self.unary())
        if kind == "lname" and val == "mu":
            self.take()
            t = self.take()
            if t[0] != "uname":
                raise FormulaSyntaxError("expected a fixpoint variable", t[2], t[3])
            self.expect(".")
            return Mu(t[1], self.or_expr())
        return self.atom()

    def atom(self) -> Formula:
        kind, val, line, col = self.take()
        if val == "(":
            phi = self.or_expr()
            self.expect(")")
            return phi
        if val == "~eps":
            return NEPS
        if kind == "lname":
            if val == "eps":
                return EPS
            if val == "top":
                return TOP
            if val == "bot":
                return BOT
        if kind == "uname":
            return Var(val)
        raise FormulaSyntaxError(f"unexpected token {val or 'end of input'!r}", line, col)


def parse_formula(text: str, *, check: bool = True) -> Formula:
    """Parse, annotate and (by default) check guardedness and cleanliness."""
    raw = _Parser(text).parse()
    bad = _unguarded_mus(raw)
    if bad:
        raise GuardednessError(f"E_GUARD: fixpoint {bad[0]} is not guarded")
    if check:
        bv = bound_vars(raw)
        if len(bv) != len(set(bv)):
            raise FormulaError("E_UNCLEAN: a fixpoint variable is bound twice")
        if set(bv) & free_vars(raw):
            raise FormulaError("E_UNCLEAN: a variable occurs both bound and free")
    return annotate(raw)


def _fmt_letter(x: Letter) -> str:
    return ("#" if x.bar else "") + name_str(x.name)


def format_formula(phi: Formula) -> str:
    return _fmt(phi, 0)


# precedence levels: 0 or, 1 and, 2 unary
def _fmt(phi: Formula, ctx: int) -> str:
    match phi:
        case Or(Eps(), NEps()):
            return "top"
        case And(Eps(), NEps()):
            return "bot"
        case Eps():
            return "eps"
        case NEps():
            return "~eps"
        case Var(x, _):
            return x
        case Or(l, r):
            s = f"{_fmt(l, 0)} || {_fmt(r, 1)}"
            return s if ctx == 0 else f"({s})"
        case And(l, r):
            s = f"{_fmt(l, 1)} && {_fmt(r, 2)}"
            return s if ctx <= 1 else f"({s})"
        case Dia(x, b):
            return f"<{_fmt_letter(x)}> {_fmt(b, 2)}"
        case Box(x, b):
            return f"[{_fmt_letter(x)}] {_fmt(b, 2)}"
        case Mu(x, b):
            s = f"mu {x} . {_fmt(b, 0)}"
            return s if ctx == -1 else f"({s})"
    raise TypeError(phi)


def _fmt_top(phi: Formula) -> str:
    # a fixpoint at the very top needs no parentheses
    if isinstance(phi, Mu):
        return _fmt(phi, -1)
    return _fmt(phi, 0)


format_formula = _fmt_top  # noqa: F811


def conj(parts: Iterable[Formula]) -> Formula:
    parts = list(parts)
    if not parts:
        return TOP
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disj(parts: Iterable[Formula]) -> Formula:
    parts = list(parts)
    if not parts:
        return BOT
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def subformulas(phi: Formula) -> Iterator[Formula]:
    yield phi
    match phi:
        case And(l, r) | Or(l, r):
            yield from subformulas(l)
            yield from subformulas(r)
        case Dia(_, b) | Box(_, b) | Mu(_, b):
            yield from subformulas(b)


# ---------------------------------------------------------------- random formulas

def random_formula(rng, max_size: int = 8, names: tuple[Name, ...] = (0, 1), max_degree: int = 2,
                   tries: int = 1000) -> Formula:
    """A random closed, guarded, annotated formula with at most max_size nodes.

    ``rng`` is a ``random.Random``.  Plain letters only use names bound by
    an enclosing bar modality, so the result has no free names.
    """
    for _ in range(tries):
        size = rng.randint(1, max_size)
        phi = _gen(rng, size, names, (), (), (), [0])
        if node_count(phi) <= max_size and is_guarded(phi) and not fn(phi) and degree(phi) <= max_degree:
            return annotate(phi)
    raise RuntimeError("could not generate a formula within the limits")


def _gen(rng, size: int, names, bound: tuple, guarded: tuple, unguarded: tuple, ctr: list) -> Formula:
    if size <= 1:
        opts = [EPS, NEPS] + [Var(x) for x in guarded]
        return rng.choice(opts)
    kinds = ["and", "or", "dia", "box", "dia", "box"]
    if size >= 3:
        kinds.append("mu")
    k = rng.choice(kinds)
    if k in ("and", "or"):
        if size < 3:
            k = "dia"
        else:
            ls = rng.randint(1, size - 2)
            l = _gen(rng, ls, names, bound, guarded, unguarded, ctr)
            r = _gen(rng, size - 1 - ls, names, bound, guarded, unguarded, ctr)
            return And(l, r) if k == "and" else Or(l, r)
    if k in ("dia", "box"):
        plain_ok = bool(bound)
        if plain_ok and rng.random() < 0.5:
            x = Letter(False, rng.choice(bound))
            nb = bound
        else:
            n = rng.choice(names)
            x = Letter(True, n)
            nb = tuple(sorted(set(bound) | {n}))
        body = _gen(rng, size - 1, names, nb, guarded + unguarded, (), ctr)
        return Dia(x, body) if k == "dia" else Box(x, body)
    # one counter per formula keeps sibling fixpoints apart
    var = f"X{ctr[0]}"
    ctr[0] += 1
    body = _gen(rng, size - 1, names, bound, guarded, unguarded + (var,), ctr)
    return Mu(var, body)
