"""Satisfiability, validity, refinement and model checking."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

from . import automata as au
from .barstring import Letter, compact_form, enumerate_closed, format_barstring, is_closed, representatives, ub
from .logic import And, Formula, PreconditionError, degree, fn, free_vars, is_guarded, models, negate
from .nominal import Name, name_str
from .translate import BudgetExceeded, translate

HOLDS = "holds"
FAILS = "fails"
UNKNOWN = "unknown-bounded"

DEFAULT_BUDGET = 100_000


@dataclass
class Verdict:
    result: str
    witness: tuple | None = None
    stats: dict = field(default_factory=dict)
    # "bar" for bar strings, "data" for data words
    witness_kind: str = "bar"

    @property
    def holds(self) -> bool:
        return self.result == HOLDS

    def witness_text(self) -> str | None:
        if self.witness is None:
            return None
        if self.witness_kind == "data":
            return " ".join(name_str(n) for n in self.witness) if self.witness else "eps"
        return format_barstring(compact_form(self.witness))

    def as_dict(self) -> dict:
        return {"result": self.result, "witness": self.witness_text(), "stats": self.stats}


class WitnessError(AssertionError):
    """A witness failed independent re-verification; this is a bug."""


def _check_formula(phi: Formula) -> None:
    if free_vars(phi) or fn(phi):
        raise PreconditionError("formula must be closed")
    if not is_guarded(phi):
        raise PreconditionError("formula must be guarded")


def _timed(stats: dict, t0: float) -> dict:
    stats["seconds"] = round(time.perf_counter() - t0, 4)
    return stats


def _translate(phi: Formula, budget: int, stats: dict, prefix: str = ""):
    T = translate(phi, budget)
    stats[prefix + "states"] = T.stats.states
    stats[prefix + "degree"] = T.stats.degree
    return T.automaton


def satisfiable(phi: Formula, budget: int = DEFAULT_BUDGET) -> Verdict:
    """holds iff some closed bar string satisfies phi; the witness is a shortest one."""
    _check_formula(phi)
    t0 = time.perf_counter()
    stats: dict = {}
    try:
        A = _translate(phi, budget, stats)
    except BudgetExceeded as e:
        stats["error"] = str(e)
        return Verdict(UNKNOWN, None, _timed(stats, t0))
    empty, w = au.is_empty(A)
    if empty:
        return Verdict(FAILS, None, _timed(stats, t0))
    if not models(w, phi):
        raise WitnessError(f"satisfiability witness {format_barstring(w)} does not satisfy the formula")
    return Verdict(HOLDS, w, _timed(stats, t0))


def _flip(v: Verdict) -> Verdict:
    r = {HOLDS: FAILS, FAILS: HOLDS}.get(v.result, v.result)
    return Verdict(r, v.witness if r == FAILS else None, v.stats)


def valid_global(phi: Formula, budget: int = DEFAULT_BUDGET) -> Verdict:
    """holds iff every closed bar string satisfies phi; the witness refutes it."""
    v = _flip(satisfiable(negate(phi), budget))
    if v.result == FAILS and models(v.witness, phi):
        raise WitnessError("validity counterexample satisfies the formula")
    return v


def refines_global(psi: Formula, phi: Formula, budget: int = DEFAULT_BUDGET) -> Verdict:
    """holds iff [[psi]] is contained in [[phi]]."""
    _check_formula(psi)
    _check_formula(phi)
    v = _flip(satisfiable(And(psi, negate(phi)), budget))
    if v.result == FAILS and not (models(v.witness, psi) and not models(v.witness, phi)):
        raise WitnessError("refinement counterexample does not separate the formulas")
    return v


def _left_automaton(A: au.ExtBarNFA) -> au.ExtBarNFA:
    A = au.epsilon_eliminate(A)
    if A.has_top:
        raise PreconditionError("model checking needs a bar NFA without top states")
    return A


def model_check_global(A: au.ExtBarNFA, phi: Formula, budget: int = DEFAULT_BUDGET) -> Verdict:
    """holds iff L_alpha(A) is contained in [[phi]]."""
    _check_formula(phi)
    A = _left_automaton(A)
    t0 = time.perf_counter()
    stats: dict = {}
    try:
        B = au.epsilon_eliminate(_translate(phi, budget, stats, "formula_"))
        r = au.inclusion(A, B, budget=budget)
    except (BudgetExceeded, au.ResourceError) as e:
        stats["error"] = str(e)
        return Verdict(UNKNOWN, None, _timed(stats, t0))
    stats["configs"] = r.configs
    if r.holds:
        return Verdict(HOLDS, None, _timed(stats, t0))
    w = r.counterexample
    if not (au.accepts_alpha(A, w) and not models(w, phi)):
        raise WitnessError(f"model checking counterexample {format_barstring(w)} does not re-verify")
    return Verdict(FAILS, w, _timed(stats, t0))


def valid_local(phi: Formula, budget: int = DEFAULT_BUDGET) -> Verdict:
    """Local-freshness validity, as model checking of the (#a)* automaton."""
    return model_check_global(au.universal_bar_nfa(), phi, budget)


def data_image(w: Sequence[Letter], pool: Sequence[Name]) -> set[tuple[Name, ...]]:
    """Local-freshness data words of one bar string over a name pool."""
    return {ub(r) for r in representatives(w, pool)}


def data_word_in_D(d: Sequence[Name], phi: Formula) -> tuple[Letter, ...] | None:
    """A closed bar string over d that satisfies phi, or None.

    Every bar decoration of d is a representative of some class whose
    data image contains d, so this decides d in D([[phi]]).
    """
    for bars in product((True, False), repeat=len(d)):
        w = tuple(Letter(b, n) for b, n in zip(bars, d))
        if is_closed(w) and models(w, phi):
            return w
    return None


def model_check_local_bounded(A: au.ExtBarNFA, phi: Formula, maxlen: int,
                              pool_size: int | None = None) -> Verdict:
    """Bounded check of D(L_alpha(A)) <= D([[phi]]) on data words up to maxlen.

    Never answers holds: either a data-word counterexample or
    unknown-bounded.
    """
    _check_formula(phi)
    A = _left_automaton(A)
    t0 = time.perf_counter()
    if pool_size is None:
        pool_size = au.degree(A) + degree(phi) + 1
    pool = list(range(pool_size))
    nd = au.name_drop(A)
    seen: set[tuple[Name, ...]] = set()
    checked = 0
    for w in enumerate_closed(maxlen, list(range(max(maxlen, 1)))):
        if not au.nd_accepts(nd, w):
            continue
        for d in sorted(data_image(w, pool)):
            if d in seen:
                continue
            seen.add(d)
            checked += 1
            if data_word_in_D(d, phi) is None:
                stats = {"data_words": checked, "pool_size": pool_size, "maxlen": maxlen}
                return Verdict(FAILS, d, _timed(stats, t0), witness_kind="data")
    stats = {"data_words": checked, "pool_size": pool_size, "maxlen": maxlen}
    return Verdict(UNKNOWN, None, _timed(stats, t0))


def member(obj: au.ExtBarNFA | Formula, w: Sequence[Letter]) -> Verdict:
    """Membership of the class of a closed bar string."""
    w = tuple(w)
    if not is_closed(w):
        raise PreconditionError("membership needs a closed bar string")
    if isinstance(obj, au.ExtBarNFA):
        ok = au.accepts_alpha(obj, w)
    else:
        _check_formula(obj)
        ok = models(w, obj)
    return Verdict(HOLDS if ok else FAILS, None if ok else w)
