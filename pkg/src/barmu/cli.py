"""Command-line front end: ``barmu VERB ...``.

Exit codes: 0 holds/sat, 1 fails/unsat, 2 unknown-bounded, 3 error.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from dataclasses import dataclass
from importlib import resources
from typing import Sequence

from . import automata as au
from . import decide
from .barstring import compact_form, enumerate_closed, format_barstring, parse_barstring
from .logic import FormulaError, PreconditionError, format_formula, models, negate, parse_formula, random_formula
from .translate import translate

EXIT = {decide.HOLDS: 0, decide.FAILS: 1, decide.UNKNOWN: 2}
EXIT_ERROR = 3


class CliError(Exception):
    def __init__(self, code: str, msg: str):
        super().__init__(msg)
        self.code = code


# ---------------------------------------------------------------- file I/O

def read_source(arg: str) -> str:
    """File contents; ``-`` reads stdin, and a non-path is taken as inline text."""
    if arg == "-":
        return sys.stdin.read()
    if os.path.exists(arg):
        with open(arg, encoding="utf-8") as fh:
            return fh.read()
    if os.sep in arg or arg.endswith((".mu", ".aut")):
        raise CliError("E_IO", f"no such file: {arg}")
    return arg


def _strip_comments(text: str) -> str:
    # blank out comment lines so diagnostics keep their line numbers
    return "\n".join("" if l.lstrip().startswith("//") else l for l in text.splitlines())


def looks_like_automaton(text: str) -> bool:
    return any(l.strip().startswith("states:") for l in text.splitlines())


def load_formula(arg: str):
    return parse_formula(_strip_comments(read_source(arg)))


def load_automaton(arg: str) -> au.ExtBarNFA:
    return au.parse_automaton(read_source(arg))


def load_either(arg: str):
    text = read_source(arg)
    if looks_like_automaton(text):
        return au.parse_automaton(text)
    return parse_formula(_strip_comments(text))


def render(v: decide.Verdict, as_json: bool) -> str:
    if as_json:
        return json.dumps(v.as_dict(), sort_keys=True)
    out = v.result
    w = v.witness_text()
    if w is not None:
        out += f"\nwitness: {w}"
    return out


# ---------------------------------------------------------------- verbs

@dataclass
class Outcome:
    code: int
    text: str


def _verdict(v: decide.Verdict, args) -> Outcome:
    return Outcome(EXIT[v.result], render(v, args.json))


def cmd_sat(args) -> Outcome:
    return _verdict(decide.satisfiable(load_formula(args.formula), args.budget), args)


def cmd_valid(args) -> Outcome:
    phi = load_formula(args.formula)
    v = decide.valid_local(phi, args.budget) if args.local else decide.valid_global(phi, args.budget)
    return _verdict(v, args)


def cmd_refine(args) -> Outcome:
    return _verdict(decide.refines_global(load_formula(args.phi), load_formula(args.psi), args.budget), args)


def cmd_mc(args) -> Outcome:
    A = load_automaton(args.automaton)
    phi = load_formula(args.formula)
    if args.local:
        v = decide.model_check_local_bounded(A, phi, args.maxlen, args.pool_size)
    else:
        v = decide.model_check_global(A, phi, args.budget)
    return _verdict(v, args)


def cmd_member(args) -> Outcome:
    try:
        w = parse_barstring(args.barstring)
    except ValueError as e:
        raise CliError("E_SYNTAX", str(e)) from None
    return _verdict(decide.member(load_either(args.source), w), args)


def cmd_translate(args) -> Outcome:
    T = translate(load_formula(args.formula), args.budget)
    text = au.format_automaton(T.automaton)
    stats = T.stats.as_dict()
    stats["nd_orbits"] = nd_orbits(T.automaton)
    if args.json:
        return Outcome(0, json.dumps({"result": "ok", "automaton": text, "stats": stats}, sort_keys=True))
    if args.stats:
        text += "".join(f"// {k}: {v}\n" for k, v in stats.items())
    return Outcome(0, text.rstrip("\n"))


def nd_orbits(A: au.ExtBarNFA) -> int:
    """Orbit count of the name-dropping automaton: one per state and register subset."""
    B = au.epsilon_eliminate(A)
    fnm = au.state_free_names(B)
    return sum(2 ** len(fnm[q]) for q in B.states)


def cmd_negate(args) -> Outcome:
    text = format_formula(negate(load_formula(args.formula)))
    if args.json:
        text = json.dumps({"result": "ok", "formula": text})
    return Outcome(0, text)


def cmd_enumerate(args) -> Outcome:
    phi = load_formula(args.formula)
    pool = list(range(args.pool_size or max(args.maxlen, 1)))
    found = [format_barstring(compact_form(w)) for w in enumerate_closed(args.maxlen, pool) if models(w, phi)]
    if args.json:
        return Outcome(0, json.dumps({"result": "ok", "words": found, "stats": {"count": len(found)}}))
    return Outcome(0, "\n".join(found))


def cmd_random(args) -> Outcome:
    rng = random.Random(args.seed)
    out = [format_formula(random_formula(rng, args.size)) for _ in range(args.count)]
    if args.json:
        return Outcome(0, json.dumps({"result": "ok", "formulas": out}))
    return Outcome(0, "\n".join(out))


def cmd_corpus(args) -> Outcome:
    results = run_corpus(args.manifest, budget=args.budget)
    failed = [r for r in results if not r["ok"]]
    if args.json:
        text = json.dumps({"result": "ok" if not failed else "fails", "entries": results}, sort_keys=True)
    else:
        lines = [f"{'PASS' if r['ok'] else 'FAIL'} {r['name']}: expected {r['expect']}, got {r['got']}"
                 for r in results]
        lines.append(f"{len(results) - len(failed)}/{len(results)} entries reproduce")
        text = "\n".join(lines)
    return Outcome(0 if not failed else 1, text)


# ---------------------------------------------------------------- corpus

def corpus_dir():
    return resources.files("barmu") / "corpus"


def load_manifest(path: str | None = None) -> tuple[list[dict], str]:
    if path is None:
        base = corpus_dir()
        data = json.loads((base / "manifest.json").read_text(encoding="utf-8"))
        return data["entries"], str(base)
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return data["entries"], os.path.dirname(os.path.abspath(path))


def run_corpus(manifest: str | None = None, budget: int = decide.DEFAULT_BUDGET) -> list[dict]:
    entries, base = load_manifest(manifest)
    out = []
    for e in entries:
        argv = [_resolve(a, base) for a in e["argv"]]
        code, text = run(argv + ["--json", "--budget", str(budget)])
        try:
            got = json.loads(text)
        except json.JSONDecodeError:
            got = {"result": "error", "message": text}
        ok = got.get("result") == e["expect"]
        if ok and "witness" in e:
            ok = got.get("witness") == e["witness"]
        out.append({"name": e["name"], "expect": e["expect"], "got": got.get("result"),
                    "witness": got.get("witness"), "ok": ok, "exit": code})
    return out


def _resolve(a: str, base: str) -> str:
    if a.endswith((".mu", ".aut")) and not os.path.isabs(a):
        return os.path.join(base, a)
    return a


# ---------------------------------------------------------------- parser

def _globals(suppress: bool) -> argparse.ArgumentParser:
    def d(v):
        return argparse.SUPPRESS if suppress else v

    g = argparse.ArgumentParser(add_help=False)
    g.add_argument("--json", action="store_true", default=d(False), help="machine-readable output")
    g.add_argument("--pool-size", type=int, default=d(None), help="name pool for bounded checks")
    g.add_argument("--budget", type=int, default=d(decide.DEFAULT_BUDGET), help="state budget")
    g.add_argument("--seed", type=int, default=d(0), help="seed for random generation")
    return g


def build_parser() -> argparse.ArgumentParser:
    top = _globals(False)
    # the verb-level copies must not reset flags given before the verb
    common = _globals(True)

    p = argparse.ArgumentParser(prog="barmu", parents=[top],
                                description="Decision procedures for a linear-time fixpoint logic over bar strings.")
    sub = p.add_subparsers(dest="verb", required=True)

    s = sub.add_parser("sat", parents=[common], help="satisfiability")
    s.add_argument("formula")
    s.set_defaults(func=cmd_sat)

    s = sub.add_parser("valid", parents=[common], help="validity")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--global", dest="local", action="store_false", help="global freshness (default)")
    g.add_argument("--local", dest="local", action="store_true", help="local freshness")
    s.add_argument("formula")
    s.set_defaults(func=cmd_valid, local=False)

    s = sub.add_parser("refine", parents=[common], help="does PHI refine PSI ([[PHI]] within [[PSI]])")
    s.add_argument("phi")
    s.add_argument("psi")
    s.set_defaults(func=cmd_refine)

    s = sub.add_parser("mc", parents=[common], help="model checking")
    s.add_argument("automaton")
    s.add_argument("formula")
    s.add_argument("--local", action="store_true", help="bounded local-freshness check")
    s.add_argument("--maxlen", type=int, default=4)
    s.set_defaults(func=cmd_mc)

    s = sub.add_parser("member", parents=[common], help="membership of a closed bar string")
    s.add_argument("source", help="automaton or formula")
    s.add_argument("barstring")
    s.set_defaults(func=cmd_member)

    s = sub.add_parser("translate", parents=[common], help="formula to automaton")
    s.add_argument("formula")
    s.add_argument("--stats", action="store_true")
    s.set_defaults(func=cmd_translate)

    s = sub.add_parser("negate", parents=[common], help="negation normal form of the complement")
    s.add_argument("formula")
    s.set_defaults(func=cmd_negate)

    s = sub.add_parser("enumerate", parents=[common], help="list satisfying closed bar strings")
    s.add_argument("formula")
    s.add_argument("--maxlen", type=int, required=True)
    s.set_defaults(func=cmd_enumerate)

    s = sub.add_parser("random", parents=[common], help="random closed guarded formulas")
    s.add_argument("--count", type=int, default=10)
    s.add_argument("--size", type=int, default=8)
    s.set_defaults(func=cmd_random)

    s = sub.add_parser("corpus", parents=[common], help="run the shipped corpus or a manifest")
    s.add_argument("manifest", nargs="?")
    s.set_defaults(func=cmd_corpus)
    return p


def run(argv: Sequence[str]) -> tuple[int, str]:
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as e:
        return (0 if e.code == 0 else EXIT_ERROR), ""
    try:
        out = args.func(args)
        return out.code, out.text
    except (FormulaError, au.AutomatonError, CliError, PreconditionError, au.ResourceError) as e:
        code = getattr(e, "code", "E_ERROR")
        if isinstance(e, PreconditionError):
            code = "E_PRECONDITION"
        if args.json:
            return EXIT_ERROR, json.dumps({"result": "error", "code": code, "message": str(e)})
        return EXIT_ERROR, f"error: {code}: {e}"


def main(argv: Sequence[str] | None = None) -> int:
    code, text = run(sys.argv[1:] if argv is None else argv)
    if text:
        stream = sys.stderr if code == EXIT_ERROR and not text.startswith("{") else sys.stdout
        print(text, file=stream)
    return code


if __name__ == "__main__":
    sys.exit(main())
