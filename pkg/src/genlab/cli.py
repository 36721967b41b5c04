"""genlab command line.

Exit codes: 0 definite yes/pass, 1 definite no/fail, 2 unknown (including a
marked distance known only as an upper bound), 64 usage error, 65 malformed
input, 66 missing input file.
"""

from __future__ import annotations

import argparse
import contextlib
import io
import json
import os
import sys
from fractions import Fraction

from genlab.verdict import Outcome, UnknownResult, Verdict

EXIT_YES, EXIT_NO, EXIT_UNKNOWN = 0, 1, 2
EXIT_USAGE, EXIT_DATA, EXIT_NOINPUT = 64, 65, 66


class UsageError(Exception):
    pass


class InputError(Exception):
    def __init__(self, message, code=EXIT_DATA):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


# --- JSON helpers -----------------------------------------------------------

def jsonable(obj):
    if hasattr(obj, "to_json"):
        return jsonable(obj.to_json())
    if isinstance(obj, Verdict):
        return verdict_json(obj)
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (frozenset, set)):
        return sorted((jsonable(v) for v in obj), key=lambda v: json.dumps(v))
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, Outcome):
        return obj.value
    return obj


def verdict_json(v: Verdict) -> dict:
    return {"outcome": v.outcome.value, "bound": v.bound, "certificate": jsonable(v.certificate)}


def _emit(obj, as_json: bool, human: str | None = None):
    if as_json or human is None:
        print(json.dumps(jsonable(obj), indent=2))
    else:
        print(human)


def _code(v: Verdict) -> int:
    return {Outcome.YES: EXIT_YES, Outcome.NO: EXIT_NO, Outcome.UNKNOWN: EXIT_UNKNOWN}[v.outcome]


# --- input loading -----------------------------------------------------------

def load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise InputError(f"{path}: no such file", EXIT_NOINPUT) from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def load_group(spec: str, bound: int | None = None):
    from genlab.fp import fp_oracle
    from genlab.groups import FiniteGroup, MalformedTable, builtin
    from genlab.presentations import Presentation
    from genlab.words import WordSyntaxError

    spec = spec.strip()
    try:
        if spec.startswith("finite:"):
            path = spec[len("finite:"):]
            return FiniteGroup.from_json(load_json(path))
        if spec.startswith("fp:"):
            path = spec[len("fp:"):]
            return fp_oracle(Presentation.from_json(load_json(path)), bound)
        return builtin(spec)
    except MalformedTable as exc:
        raise InputError(f"{spec}: {exc}") from None
    except WordSyntaxError as exc:
        raise InputError(f"{spec}: {exc}") from None
    except (KeyError, TypeError) as exc:
        raise InputError(f"{spec}: malformed group file ({exc})") from None
    except ValueError as exc:
        raise InputError(str(exc)) from None


def parse_words(text: str) -> list:
    from genlab.words import WordSyntaxError, parse_word
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            out.append(parse_word(part))
        except WordSyntaxError as exc:
            raise InputError(f"word {part!r}: {exc}") from None
    return out


def elements_from(oracle, text: str, marking=None) -> list:
    """Evaluate comma-separated words in x_i = i-th marking element."""
    from genlab.groups import evaluate, marking_env
    marking = tuple(oracle.generators) if marking is None else marking
    env = marking_env(marking)
    out = []
    for w in parse_words(text):
        if w.constants():
            raise InputError(f"{w.render()}: element words use x_i only")
        if w.arity > len(marking):
            raise InputError(f"{w.render()}: the marking has only {len(marking)} elements")
        out.append(evaluate(oracle, w, env))
    return out


def _marking(oracle, text):
    if text is None:
        return tuple(oracle.generators)
    return tuple(elements_from(oracle, text))


def _fraction(text: str) -> Fraction:
    try:
        f = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"not a rational number: {text!r}") from None
    if f <= 0:
        raise InputError("eps must be positive")
    return f


# --- commands ------------------------------------------------------------------

def cmd_ball(a) -> int:
    from genlab.marked import MarkedGroup, ball, ball_to_system
    o = load_group(a.group, a.bound)
    m = MarkedGroup(o, _marking(o, a.mark))
    v = ball(m, a.radius)
    if v.is_yes and a.system:
        _emit(ball_to_system(v.certificate), True)
    else:
        _emit(verdict_json(v), True)
    return _code(v)


def cmd_marked_dist(a) -> int:
    from genlab.marked import MarkedGroup, marked_distance
    marks = a.mark or []
    if len(marks) not in (0, 2):
        raise UsageError("give --mark twice (for --a and --b) or not at all")
    ga, gb = load_group(a.a, a.bound), load_group(a.b, a.bound)
    ma = MarkedGroup(ga, _marking(ga, marks[0] if marks else None))
    mb = MarkedGroup(gb, _marking(gb, marks[1] if marks else None))
    if ma.rank != mb.rank:
        raise InputError("markings must have the same length")
    d = marked_distance(ma, mb, a.max_radius)
    _emit(d, a.json, f"{d.kind} e^-{d.exponent} = {d.value:.6g}")
    return EXIT_YES if d.kind == "exact" else EXIT_UNKNOWN


def cmd_order(a) -> int:
    from genlab import orderability as ob
    o = load_group(a.group, a.bound if a.kind != "sigma" else None)
    cap = a.cap
    try:
        if a.kind == "sigma":
            if a.n is None or a.bound is None:
                raise UsageError("order sigma needs --bound and --n")
            v = ob.sigma_mn_check(o, a.bound, a.n)
        elif a.kind == "upp":
            if a.set is None or a.set_y is None:
                raise UsageError("order upp needs --set and --set-y")
            v = ob.upp_test(o, elements_from(o, a.set), elements_from(o, a.set_y), a.strict)
        else:
            if a.set is None:
                raise UsageError(f"order {a.kind} needs --set")
            F = elements_from(o, a.set)
            if a.kind == "left":
                if a.bound is None:
                    raise UsageError("order left needs --bound")
                v = ob.left_order_test(o, F, a.bound, cap=cap)
            else:
                depth = a.depth if a.depth is not None else a.bound
                if depth is None:
                    raise UsageError(f"order {a.kind} needs --depth")
                test = ob.locally_indicable_test if a.kind == "li" else ob.biorderable_test
                v = test(o, F, depth, cap=cap)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    human = f"{a.kind}: {v.outcome.value}" + (f" (bound {v.bound})" if v.bound else "")
    _emit(verdict_json(v), a.json, human)
    return _code(v)


def cmd_folner(a) -> int:
    from genlab.approximation import Balls, Subsets, folner_check, folner_search
    o = load_group(a.group, a.bound)
    F = elements_from(o, a.set)
    eps = _fraction(a.eps)
    try:
        if a.action == "check":
            if a.K is None:
                raise UsageError("folner check needs --K")
            rep = folner_check(o, F, elements_from(o, a.K), eps)
        else:
            if a.subsets:
                r, size = (int(t) for t in a.subsets.split(","))
                strategy = Subsets(r, size)
            else:
                strategy = Balls(a.balls)
            rep = folner_search(o, F, eps, strategy)
    except UnknownResult as exc:
        _emit({"outcome": "unknown", "bound": exc.bound}, True)
        return EXIT_UNKNOWN
    if rep is None:
        _emit({"found": None}, a.json, "no witness found among the candidates")
        return EXIT_NO
    _emit(rep.to_json(o), True)
    return EXIT_YES if rep.passed else EXIT_NO


def cmd_sofic(a) -> int:
    from genlab.approximation import LabeledGraph, sofic_check, sofic_from_quotient
    from genlab.marked import MarkedGroup
    if a.action == "quotient":
        try:
            g = sofic_from_quotient(len(a.moduli), a.moduli)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        _emit(g, True)
        return EXIT_YES
    if a.graph is None or a.group is None or a.n is None:
        raise UsageError("sofic check needs --graph, --group and --n")
    try:
        g = LabeledGraph.from_json(load_json(a.graph))
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"{a.graph}: {exc}") from None
    o = load_group(a.group)
    m = MarkedGroup(o, _marking(o, a.mark))
    try:
        rep = sofic_check(g, m, a.n)
    except UnknownResult as exc:
        _emit({"outcome": "unknown", "bound": exc.bound}, True)
        return EXIT_UNKNOWN
    except ValueError as exc:
        raise InputError(str(exc)) from None
    _emit(rep, a.json, f"{len(rep.good)}/{rep.vertices} good; pass={rep.passed}")
    return EXIT_YES if rep.passed else EXIT_NO


def cmd_fp_eq(a) -> int:
    from genlab.fp import fp_oracle
    from genlab.presentations import Presentation
    from genlab.words import WordSyntaxError
    try:
        p = Presentation.from_json(load_json(a.presentation))
    except (KeyError, TypeError, ValueError, WordSyntaxError) as exc:
        raise InputError(f"{a.presentation}: {exc}") from None
    o = fp_oracle(p, a.bound)
    (u,) = parse_words(a.u)
    w = parse_words(a.w)[0] if a.w else None
    ue = o.element(u)
    we = o.element(w) if w is not None else o.identity
    v = o.eq(ue, we)
    _emit(verdict_json(v), a.json, v.outcome.value)
    return _code(v)


def cmd_system(a) -> int:
    from genlab.forcing import consistency_check
    from genlab.words import System, WordSyntaxError
    try:
        s = System.from_json(load_json(a.file))
    except (KeyError, TypeError, ValueError, WordSyntaxError) as exc:
        raise InputError(f"{a.file}: {exc}") from None
    bound = a.bound if a.bound is not None else _default_bound()
    try:
        v = consistency_check(s, a.cls, bound)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    _emit(verdict_json(v), a.json, v.outcome.value)
    return _code(v)


def cmd_ec(a) -> int:
    from genlab.ec import is_ec_in
    G, H = load_group(a.g), load_group(a.h)
    emb = None
    if a.embedding:
        raw = load_json(a.embedding)
        try:
            emb = {int(k): int(v) for k, v in raw.items()}
        except (AttributeError, ValueError) as exc:
            raise InputError(f"{a.embedding}: {exc}") from None
    try:
        v = is_ec_in(G, H, emb, a.max_vars, a.max_len)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    _emit(verdict_json(v), a.json, v.outcome.value)
    return _code(v)


def _game_summary(st) -> dict:
    from genlab.partial import Contradiction, check_laws
    from genlab.forcing import compile as compile_game
    try:
        table = compile_game(st)
    except Contradiction as exc:
        return {"compiled": False, "contradiction": str(exc)}
    return {"compiled": True, "moves": len(st.log), "clauses": len(st.clauses),
            "constants": len(st.constants), "products": len(table.products),
            "identity": table.identity, "law_violations": len(check_laws(table))}


def cmd_game(a) -> int:
    from genlab import forcing as fg
    from genlab.words import System
    if a.action == "replay":
        log = load_json(a.file)
        if not isinstance(log, list):
            raise InputError(f"{a.file}: a game log is a JSON list")
        try:
            st = fg.replay(log, bound=a.bound or fg.GAME_BOUND)
        except fg.IllegalMove as exc:
            _emit({"legal": False, "reason": str(exc)}, True)
            return EXIT_NO
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{a.file}: {exc}") from None
        summary = _game_summary(st)
        _emit(summary, True)
        return EXIT_YES if summary["compiled"] and not summary["law_violations"] else EXIT_NO
    if a.strategy == "centralizer":
        strategy = fg.strategy_centralizer()
    elif a.strategy.startswith("open-dense:"):
        strategy = fg.strategy_open_dense(System.from_json(load_json(a.strategy[11:])))
    else:
        raise UsageError(f"unknown strategy {a.strategy!r}")
    opponent = None
    if a.opponent:
        if not a.opponent.startswith("random:"):
            raise UsageError("opponent must be random:<seed>")
        opponent = fg.RandomPlayer(int(a.opponent[7:]))
    try:
        st = fg.auto_game(a.rounds, strategy, opponent, bound=a.bound or fg.GAME_BOUND)
    except fg.IllegalMove as exc:
        _emit({"legal": False, "reason": str(exc)}, True)
        return EXIT_NO
    if a.log:
        with open(a.log, "w") as fh:
            fh.write(st.dumps_log())
    summary = _game_summary(st)
    _emit(summary, True)
    return EXIT_YES if summary["compiled"] and not summary["law_violations"] else EXIT_NO


def cmd_corpus(a) -> int:
    data = load_json(a.file)
    entries = data.get("commands", []) if isinstance(data, dict) else data
    if not isinstance(entries, list):
        raise InputError(f"{a.file}: expected a list of commands")
    base = os.path.dirname(os.path.abspath(a.file))
    failures = []
    results = []
    for i, entry in enumerate(entries):
        try:
            argv, expect = list(entry["argv"]), int(entry["expect"])
        except (KeyError, TypeError, ValueError):
            raise InputError(f"{a.file}: entry {i} needs argv and expect") from None
        out, err = io.StringIO(), io.StringIO()
        cwd = os.getcwd()
        try:
            os.chdir(base)
            with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
                got = run(argv)
        finally:
            os.chdir(cwd)
        ok = got == expect
        results.append({"argv": argv, "expect": expect, "got": got, "pass": ok})
        if not ok:
            failures.append(i)
    summary = {"total": len(entries), "passed": len(entries) - len(failures),
               "failed": len(failures), "failures": [results[i] for i in failures]}
    _emit(summary, a.json, f"{summary['passed']}/{summary['total']} passed")
    return EXIT_YES if not failures else EXIT_NO


def _default_bound() -> int:
    from genlab.fp import default_bound
    return default_bound()


# --- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="genlab", description="Bounded computations on groups.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser, required=True)

    def common(sp, group=True):
        if group:
            sp.add_argument("--group", required=True, help="built-in name, finite:<file> or fp:<file>")
        sp.add_argument("--bound", type=int, default=None)
        sp.add_argument("--json", action="store_true")

    b = sub.add_parser("ball", help="Cayley ball of a marked group")
    common(b)
    b.add_argument("--mark")
    b.add_argument("--radius", type=int, required=True)
    b.add_argument("--system", action="store_true", help="print the ball as a system")
    b.set_defaults(func=cmd_ball)

    m = sub.add_parser("marked")
    msub = m.add_subparsers(dest="action", parser_class=_Parser, required=True)
    d = msub.add_parser("dist")
    d.add_argument("--a", required=True)
    d.add_argument("--b", required=True)
    d.add_argument("--mark", action="append")
    d.add_argument("--max-radius", type=int, required=True)
    d.add_argument("--bound", type=int, default=None)
    d.add_argument("--json", action="store_true")
    d.set_defaults(func=cmd_marked_dist)

    o = sub.add_parser("order")
    o.add_argument("kind", choices=["left", "li", "bi", "upp", "sigma"])
    common(o)
    o.add_argument("--set")
    o.add_argument("--set-y")
    o.add_argument("--depth", type=int)
    o.add_argument("--n", type=int)
    o.add_argument("--strict", action="store_true")
    o.add_argument("--cap", type=int, default=100_000)
    o.set_defaults(func=cmd_order)

    f = sub.add_parser("folner")
    f.add_argument("action", choices=["check", "search"])
    common(f)
    f.add_argument("--set", required=True)
    f.add_argument("--K")
    f.add_argument("--eps", required=True)
    f.add_argument("--balls", type=int, default=6)
    f.add_argument("--subsets", help="radius,max_size")
    f.set_defaults(func=cmd_folner)

    s = sub.add_parser("sofic")
    s.add_argument("action", choices=["check", "quotient"])
    s.add_argument("--graph")
    s.add_argument("--group")
    s.add_argument("--mark")
    s.add_argument("--n", type=int)
    s.add_argument("--moduli", type=int, nargs="+", default=[])
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_sofic)

    fp = sub.add_parser("fp")
    fsub = fp.add_subparsers(dest="action", parser_class=_Parser, required=True)
    e = fsub.add_parser("eq")
    e.add_argument("--presentation", required=True)
    e.add_argument("u")
    e.add_argument("w", nargs="?")
    e.add_argument("--bound", type=int, default=None)
    e.add_argument("--json", action="store_true")
    e.set_defaults(func=cmd_fp_eq)

    sy = sub.add_parser("system")
    ssub = sy.add_subparsers(dest="action", parser_class=_Parser, required=True)
    c = ssub.add_parser("check")
    c.add_argument("file")
    c.add_argument("--class", dest="cls", choices=["all", "torsion-free"], default="all")
    c.add_argument("--bound", type=int, default=None)
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_system)

    ec = sub.add_parser("ec")
    ec.add_argument("--g", required=True)
    ec.add_argument("--h", required=True)
    ec.add_argument("--embedding")
    ec.add_argument("--max-vars", type=int, default=2)
    ec.add_argument("--max-len", type=int, default=4)
    ec.add_argument("--json", action="store_true")
    ec.set_defaults(func=cmd_ec)

    g = sub.add_parser("game")
    g.add_argument("action", choices=["replay", "auto"])
    g.add_argument("file", nargs="?")
    g.add_argument("--rounds", type=int, default=10)
    g.add_argument("--strategy", default="centralizer")
    g.add_argument("--opponent")
    g.add_argument("--log")
    g.add_argument("--bound", type=int, default=None)
    g.set_defaults(func=cmd_game)

    cp = sub.add_parser("corpus")
    cp.add_argument("file")
    cp.add_argument("--json", action="store_true")
    cp.set_defaults(func=cmd_corpus)
    return p


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "command", None) == "game" and args.action == "replay" and not args.file:
            raise UsageError("game replay needs a log file")
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"genlab: {exc}", file=sys.stderr)
        return exc.code


def main(argv=None) -> int:
    return run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
