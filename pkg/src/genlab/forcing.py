"""Systems over constants, their consistency, and a finite-stage forcing game.

Constants c_i stand for the natural numbers of an enumerated group, so two
distinct constants always name distinct elements. Consistency of a system
is checked against the group presented by its equations: an inequation that
derives to the identity refutes it, one that survives in a finite
permutation quotient is settled, anything else stays open at the bound.

A game alternates player I and player II, each extending the clause set. A
scheduler interleaves its own moves so that every pair of constants
eventually gets a product fact.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

from genlab.fp import (DEFAULT_DEGREE, DEFAULT_QUOTIENT_BUDGET, QUICK_BOUND, FPGroup,
                       RelatorIndex, derive_trivial, fp_oracle, inverse_int, reduce_int, separate)
from genlab.partial import Closure, Contradiction, PartialEnumeratedGroup, clause_fact, \
    compile_system
from genlab.presentations import Presentation
from genlab.verdict import Verdict
from genlab.words import CONST, VAR, Equation, Letter, System, Word

ALL = "all"
TORSION_FREE = "torsion-free"
CLASSES = (ALL, TORSION_FREE)

GAME_BOUND = 10
GAME_DEGREE = 0


def constant_word(w: Word) -> tuple:
    if any(l.kind != CONST for l in w.letters):
        raise ValueError(f"{w.render()} uses variables; systems here take constants only")
    return tuple(l.index * l.sign for l in w.letters)


def const_word(letters) -> Word:
    return Word(tuple(Letter(CONST, abs(g), 1 if g > 0 else -1) for g in reduce_int(letters)))


def _root(w: tuple):
    """(u, k) with w = u^k and k maximal."""
    n = len(w)
    for p in range(1, n // 2 + 1):
        if n % p == 0 and w == w[:p] * (n // p):
            return w[:p], n // p
    return w, 1


def _cyclic_forms(w: tuple) -> set:
    forms = set()
    for base in (w, inverse_int(w)):
        for i in range(len(base)):
            forms.add(base[i:] + base[:i])
    return forms


def _check_inequation(w, index, relators, bound, degree, budget):
    """('equal', derivation) | ('separated', separation) | ('open', None)"""
    der = derive_trivial(w, index, min(bound, QUICK_BOUND))
    if der is not None:
        return "equal", der
    if degree >= 2:
        sep = separate(w, relators, degree, budget)
        if sep is not None:
            return "separated", sep
    if bound > QUICK_BOUND:
        der = derive_trivial(w, index, bound)
        if der is not None:
            return "equal", der
    return "open", None


def _torsion_witness(relators, inequations, index, bound, degree, budget):
    """A proven element of finite order that is also asserted or proven
    nontrivial, or None."""
    asserted = set()
    for w in inequations:
        asserted |= _cyclic_forms(reduce_int(w))
    candidates = []
    for r in relators:
        u, k = _root(r)
        if k >= 2:
            candidates.append((u, k, None))
    for w in inequations:
        for k in (2, 3):
            der = derive_trivial(tuple(w) * k, index, bound)
            if der is not None:
                candidates.append((tuple(w), k, der))
                break
    for u, k, der in candidates:
        if u in asserted:
            return {"element": const_word(u).render(), "power": k, "nontrivial": "asserted"}
        if degree >= 2:
            sep = separate(u, relators, degree, budget)
            if sep is not None:
                return {"element": const_word(u).render(), "power": k,
                        "nontrivial": sep.to_json(CONST)}
    return None


def consistency_check(s: System, cls: str = ALL, bound: int = 2000,
                      degree: int = DEFAULT_DEGREE,
                      budget: int = DEFAULT_QUOTIENT_BUDGET) -> Verdict:
    """Three-valued consistency of a constant system.

    No: an inequation is derivable as the identity (certificate: the clause
    and its derivation), or, for the torsion-free class, a proven torsion
    element. Yes: every inequation survives in a finite quotient. Unknown
    otherwise.
    """
    if cls not in CLASSES:
        raise ValueError(f"unknown class {cls!r}")
    relators = [constant_word(cl.word) for cl in s.clauses if cl.equal]
    relators = [r for r in relators if r]
    inequations = [(cl, constant_word(cl.word)) for cl in s.clauses if not cl.equal]
    index = RelatorIndex(relators)
    separations = []
    open_clauses = []
    for cl, w in inequations:
        status, cert = _check_inequation(w, index, relators, bound, degree, budget)
        if status == "equal":
            return Verdict.no({"clause": cl.render(), "derivation": cert.to_json(CONST)}, bound)
        if status == "separated":
            separations.append({"clause": cl.render(), "quotient": cert.to_json(CONST)})
        else:
            open_clauses.append(cl.render())
    if cls == TORSION_FREE:
        tw = _torsion_witness(relators, [w for _, w in inequations], index, bound, degree,
                              budget)
        if tw is not None:
            return Verdict.no({"torsion": tw}, bound)
    if open_clauses:
        return Verdict.unknown(bound, {"open": open_clauses})
    return Verdict.yes({"separations": separations}, bound)


# --- game ---------------------------------------------------------------------

class IllegalMove(ValueError):
    def __init__(self, message: str, certificate=None):
        super().__init__(message)
        self.certificate = certificate


def diagonal_pairs():
    """(1,1), (1,2), (2,1), (1,3), (2,2), (3,1), ..."""
    s = 2
    while True:
        for m in range(1, s):
            yield m, s - m
        s += 1


def pairs_needed(M: int) -> int:
    """Scheduler steps after which every pair with m, n <= M was handled;
    the last of them is (M, M)."""
    return M * M + (M - 1) * (M - 1)


@dataclass
class Move:
    player: str
    added: tuple

    def to_json(self) -> dict:
        return {"player": self.player, "added_clauses": [cl.to_json() for cl in self.added]}

    @classmethod
    def from_json(cls, obj) -> "Move":
        return cls(obj["player"], tuple(Equation.from_json(c) for c in obj["added_clauses"]))


@dataclass
class GameState:
    """Accumulated play. Mutated in place by ``play_move``."""

    cls: str = ALL
    bound: int = GAME_BOUND
    degree: int = GAME_DEGREE
    turn: str = "I"
    clauses: list = field(default_factory=list)
    clause_set: set = field(default_factory=set)
    log: list = field(default_factory=list)
    cursor: int = 0
    constants: set = field(default_factory=set)
    closure: Closure = field(default_factory=Closure)
    index: RelatorIndex = field(default_factory=RelatorIndex)
    open_inequations: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def system(self) -> System:
        return System(self.clauses)

    def fresh(self, count: int = 1) -> list:
        """The ``count`` least unused constants."""
        out = []
        k = 1
        while len(out) < count:
            if k not in self.constants:
                out.append(k)
            k += 1
        return out

    def log_json(self) -> list:
        return [m.to_json() for m in self.log]

    def dumps_log(self) -> str:
        return json.dumps(self.log_json(), indent=1)


def _constants_of(cl: Equation) -> set:
    return {l.index for l in cl.word.letters}


def _is_commutator_with(w: tuple, y: int):
    """The partner a if w is a rotation of [y^±1, a^±1], else None."""
    if len(w) != 4:
        return None
    for i in range(4):
        r = w[i:] + w[:i]
        p, q, s, t = r
        if p == -s and q == -t and abs(p) != abs(q):
            if abs(p) == y:
                return abs(q)
            if abs(q) == y:
                return abs(p)
    return None


def _table_knows(t: PartialEnumeratedGroup, fact) -> bool:
    if fact is None:
        return False
    kind = fact[0]
    if kind == "product":
        return t.products.get((fact[1], fact[2])) == fact[3]
    if kind == "inverse":
        return t.inverses.get(fact[1]) == fact[2]
    if kind == "identity":
        return t.identity == fact[1]
    if kind == "commute":
        return frozenset(fact[1:]) in t.commuting
    return False


def _conservative(st: GameState, new_eqs: list) -> str | None:
    """Name the reason why adding these equations cannot identify old
    elements, or None."""
    if not new_eqs:
        return "no equations"
    if all(_table_knows(st.closure.table, clause_fact(cl)) for cl in new_eqs):
        return "table consequence"
    words = [constant_word(cl.word) for cl in new_eqs]
    used = set()
    for w in words:
        used |= {abs(g) for g in w}
    old = st.constants
    if not (used & old):
        return "fresh constants only"
    # definitional: each equation introduces its own new constant once
    seen_new: set = set()
    ok = True
    for w in words:
        new_here = [abs(g) for g in w if abs(g) not in old and abs(g) not in seen_new]
        counts = {g: sum(1 for h in w if abs(h) == g) for g in new_here}
        defining = [g for g, n in counts.items() if n == 1]
        if not defining:
            ok = False
            break
        seen_new |= set(new_here)
    if ok:
        return "definitional"
    # central batch: one fresh y commuting with old constants
    fresh = used - old
    if len(fresh) == 1:
        (y,) = fresh
        if all(_is_commutator_with(w, y) in old for w in words):
            return "centralizing"
    return None


def _nontrivial_by_construction(w: tuple, st: GameState, reason, eq_consts) -> bool:
    """A fresh constant asserted != e is safe when it only occurs as a free
    generator or as the new central letter of a centralizing batch."""
    if len(w) != 1 or abs(w[0]) in st.constants:
        return False
    return reason == "centralizing" or abs(w[0]) not in eq_consts


def play_move(st: GameState, extension, player: str | None = None) -> GameState:
    """Extend the play. ``extension`` is the full new clause set (a System
    or iterable of clauses) and must contain every current clause. Raises
    IllegalMove if the move drops a clause, contradicts the table, or makes
    an inequation derivable."""
    ext = list(extension)
    ext_set = set(ext)
    if not ext_set >= st.clause_set:
        raise IllegalMove("a move must keep every clause already played")
    added = [cl for cl in dict.fromkeys(ext) if cl not in st.clause_set]
    return play_added(st, added, player)


def play_added(st: GameState, added, player: str | None = None) -> GameState:
    added = [cl for cl in dict.fromkeys(added) if cl not in st.clause_set]
    for cl in added:
        constant_word(cl.word)
    player = player or st.turn
    new_eqs = [cl for cl in added if cl.equal]
    new_neqs = [cl for cl in added if not cl.equal]

    reason = _conservative(st, new_eqs)
    st.closure.checkpoint()
    try:
        for cl in added:
            st.closure.add_clause(cl)
    except Contradiction as exc:
        st.closure.rollback()
        raise IllegalMove(f"table contradiction: {exc}", exc.trace) from None

    n_before = len(st.index)
    for cl in new_eqs:
        w = constant_word(cl.word)
        if w:
            st.index.add(w)
    to_check = [constant_word(cl.word) for cl in new_neqs]
    recheck_old = reason is None
    if recheck_old:
        to_check = [constant_word(cl.word) for cl in st.open_inequations] + to_check
    relators = st.index.relators
    still_open = []
    eq_consts = set()
    for cl in new_eqs:
        eq_consts |= _constants_of(cl)
    for cl, w in zip((st.open_inequations if recheck_old else []) + new_neqs, to_check):
        if _nontrivial_by_construction(w, st, reason, eq_consts):
            continue
        status, cert = _check_inequation(w, st.index, relators, st.bound, st.degree,
                                         DEFAULT_QUOTIENT_BUDGET)
        if status == "equal":
            st.closure.rollback()
            st.index.truncate(n_before)
            raise IllegalMove(f"{cl.render()} is refuted", cert.to_json(CONST))
        if status == "open":
            still_open.append(cl)
    if st.cls == TORSION_FREE:
        rels = list(relators)
        neqs = [constant_word(cl.word) for cl in st.clauses + added if not cl.equal]
        tw = _torsion_witness(rels, neqs, st.index, st.bound, st.degree,
                              DEFAULT_QUOTIENT_BUDGET)
        if tw is not None:
            st.closure.rollback()
            st.index.truncate(n_before)
            raise IllegalMove("proven torsion", tw)
    st.closure.commit()

    if recheck_old:
        st.open_inequations = still_open
    else:
        st.open_inequations = st.open_inequations + still_open
    for cl in added:
        st.clauses.append(cl)
        st.clause_set.add(cl)
        st.constants |= _constants_of(cl)
    st.log.append(Move(player, tuple(added)))
    st.notes.append(reason)
    if player in ("I", "II"):
        st.turn = "II" if player == "I" else "I"
    return st


def product_clause(m: int, n: int, k: int) -> Equation:
    """c_m * c_n = c_k as a reduced clause. When n = k the linear word
    cancels, so the conjugate rotation c_k^-1 c_m c_k is used; it still reads
    back as the same product fact. m = n = k says c_m = e."""
    if m == n == k:
        return Equation(const_word((m,)), True)
    w = (m, n, -k) if n != k else (-k, m, k)
    return Equation(const_word(w), True)


def commutator_clause(y: int, a: int) -> Equation:
    return Equation(const_word((y, a, -y, -a)), True)


def forced_product(st: GameState, m: int, n: int) -> int | None:
    """The value the table already forces for c_m * c_n, if any. Mentioning
    a constant can force facts (identity laws), so this is a trial run."""
    cl = st.closure
    known = cl.table.products.get((m, n))
    if known is not None or (m in cl.known and n in cl.known):
        return known
    cl.checkpoint()
    try:
        cl._mention(m)
        cl._mention(n)
        cl.run()
        return cl.table.products.get((m, n))
    finally:
        cl.rollback()


def schedule_step(st: GameState) -> GameState:
    """Handle the next pair in diagonal order."""
    pairs = diagonal_pairs()
    for _ in range(st.cursor):
        next(pairs)
    m, n = next(pairs)
    st.cursor += 1
    known = forced_product(st, m, n)
    if known is not None:
        # make a closure-derived fact explicit (a no-op if already played)
        return play_added(st, [product_clause(m, n, known)], "scheduler")
    mentioned = st.constants | {m, n}
    k = 1
    while k in mentioned:
        k += 1
    return play_added(st, [product_clause(m, n, k)], "scheduler")


def definitive_schedule(st: GameState, rounds: int) -> GameState:
    for _ in range(rounds):
        schedule_step(st)
    return st


def compile(st: GameState) -> PartialEnumeratedGroup:
    """Re-extract the table facts from the clauses and close them."""
    return compile_system(st.system)


def induced_oracle(s: System, bound: int | None = None,
                   degree: int = DEFAULT_DEGREE) -> FPGroup:
    """The group presented by the equations of a constant system; generator
    x_i stands for c_i."""
    n = max(s.constants(), default=1)
    relators = tuple(Word(tuple(Letter(VAR, l.index, l.sign) for l in cl.word.letters))
                     for cl in s.clauses if cl.equal and not cl.word.is_empty)
    return fp_oracle(Presentation(n, relators), bound, degree)


# --- strategies -----------------------------------------------------------

class Strategy:
    name = "strategy"

    def respond(self, st: GameState) -> list:
        raise NotImplementedError


class OpenDense(Strategy):
    """Instantiate ``target`` (a system in variables) on fresh constants."""

    name = "open-dense"

    def __init__(self, target: System):
        self.target = target
        self.placements: list = []

    def respond(self, st: GameState) -> list:
        if not len(self.target):
            return []
        fresh = st.fresh(self.target.arity)
        self.placements.append(fresh)
        return instantiate(self.target, fresh)


def instantiate(target: System, constants) -> list:
    """Replace x_i by the constant ``constants[i-1]``."""
    out = []
    for cl in target.clauses:
        letters = tuple(l if l.kind == CONST else Letter(CONST, constants[l.index - 1], l.sign)
                        for l in cl.word.letters)
        out.append(Equation(Word(letters), cl.equal))
    return out


class Centralizer(Strategy):
    """A fresh y commuting with every constant mentioned so far, y != e."""

    name = "centralizer"

    def __init__(self):
        self.batches: list = []

    def respond(self, st: GameState) -> list:
        (y,) = st.fresh(1)
        batch = sorted(st.constants)
        self.batches.append((y, batch))
        out = [commutator_clause(y, a) for a in batch]
        out.append(Equation(const_word((y,)), False))
        return out


def strategy_open_dense(target: System) -> OpenDense:
    return OpenDense(target)


def strategy_centralizer() -> Centralizer:
    return Centralizer()


class RandomPlayer:
    """Seeded opponent making small legal moves."""

    def __init__(self, seed: int, retries: int = 5):
        self.rng = random.Random(seed)
        self.retries = retries

    def candidates(self, st: GameState) -> list:
        rng = self.rng
        consts = sorted(st.constants)
        kind = rng.choice(["identity", "nontrivial", "define", "define", "distinct"])
        (k,) = st.fresh(1)
        if kind == "identity" and st.closure.table.identity is None:
            return [Equation(const_word((k,)), True)]
        if kind == "define" and consts:
            i, j = rng.choice(consts), rng.choice(consts)
            if (i, j) not in st.closure.table.products:
                return [product_clause(i, j, k)]
        if kind == "distinct" and len(consts) >= 2:
            i, j = rng.sample(consts, 2)
            return [Equation(const_word((i, -j)), False)]
        return [Equation(const_word((k,)), False)]

    def move(self, st: GameState) -> GameState:
        for _ in range(self.retries):
            cand = self.candidates(st)
            try:
                return play_added(st, cand, "I")
            except IllegalMove:
                continue
        (k,) = st.fresh(1)
        return play_added(st, [Equation(const_word((k,)), False)], "I")


def auto_game(rounds: int, strategy: Strategy, opponent: RandomPlayer | None = None,
              schedule: bool = True, cls: str = ALL, bound: int = GAME_BOUND,
              degree: int = GAME_DEGREE) -> GameState:
    """Each round: player I moves (or passes without an opponent), player II
    answers with the strategy, then the scheduler handles one pair."""
    st = GameState(cls=cls, bound=bound, degree=degree)
    for _ in range(rounds):
        if opponent is not None:
            opponent.move(st)
        else:
            st.turn = "II"
        reply = strategy.respond(st)
        play_added(st, reply, "II")
        if schedule:
            schedule_step(st)
    return st


def replay(log: list, cls: str = ALL, bound: int = GAME_BOUND,
           degree: int = GAME_DEGREE) -> GameState:
    """Re-run a logged game through the same legality checks."""
    st = GameState(cls=cls, bound=bound, degree=degree)
    for entry in log:
        mv = entry if isinstance(entry, Move) else Move.from_json(entry)
        if mv.player == "scheduler":
            st.cursor += 1
        elif mv.player not in ("I", "II"):
            raise ValueError(f"unknown player {mv.player!r}")
        play_added(st, list(mv.added), mv.player)
    return st


def first_inconsistent_move(log: list, bound: int, cls: str = ALL,
                            degree: int = DEFAULT_DEGREE) -> int | None:
    """Index of the earliest logged move after which the accumulated system
    is refuted at ``bound``, or None."""
    clauses: list = []
    for i, entry in enumerate(log):
        mv = entry if isinstance(entry, Move) else Move.from_json(entry)
        clauses.extend(mv.added)
        if consistency_check(System(clauses), cls, bound, degree).is_no:
            return i
    return None
