"""Bounded orderability tests.

Each test runs over all sign vectors E in {-1, +1}^n (ordered -1 < +1,
lexicographically) and grows a set from the signed seeds F^E: plain products
for left orders, products plus g1^-1 g2 g1^2 for local indicability, products
plus both conjugates for bi-orders. If every E reaches the identity the
answer is No with one trace per E. Otherwise it is Unknown at the bound;
these tests never answer Yes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from genlab.groups import GroupOracle
from genlab.verdict import UnknownResult, Verdict

DEFAULT_CAP = 100_000

# closure operations: name -> (g1, g2) -> element
def _op_mul(o, a, b):
    return o.mul(a, b)


def _op_li(o, a, b):
    return o.mul(o.mul(o.inv(a), b), o.mul(a, a))


def _op_conj(o, a, b):
    return o.mul(o.mul(a, b), o.inv(a))


def _op_conj_inv(o, a, b):
    return o.mul(o.mul(o.inv(a), b), a)


OPERATIONS = {"mul": _op_mul, "li": _op_li, "conj": _op_conj, "conj_inv": _op_conj_inv}
CLOSURES = {
    "left": ("mul",),
    "li": ("mul", "li"),
    "bi": ("mul", "conj", "conj_inv"),
}


def sign_vectors(n: int):
    return itertools.product((-1, 1), repeat=n)


class _Store:
    """Elements seen so far, deduplicated by canonical form or by pairwise eq."""

    def __init__(self, oracle: GroupOracle):
        self.o = oracle
        self.items: list = []
        self.index: dict = {}

    def find(self, g):
        if self.o.exact:
            return self.index.get(g)
        for i, h in enumerate(self.items):
            v = self.o.eq(g, h)
            if v.is_yes:
                return i
            if v.is_unknown:
                raise UnknownResult("duplicate test undecided", v.bound)
        return None

    def add(self, g) -> int:
        self.items.append(g)
        if self.o.exact:
            self.index[g] = len(self.items) - 1
        return len(self.items) - 1

    def __len__(self):
        return len(self.items)


def _is_identity(o: GroupOracle, g) -> bool:
    v = o.is_identity(g)
    if v.is_unknown:
        raise UnknownResult("identity test undecided", v.bound)
    return v.is_yes


def _check_seeds(o: GroupOracle, F) -> None:
    if not F:
        raise ValueError("the element set must be nonempty")
    for g in F:
        if _is_identity(o, g):
            raise ValueError(f"{o.render(g)} is the identity")


@dataclass
class Trace:
    """How one sign vector reaches the identity. Nodes 0..n-1 are the signed
    seeds; step j creates node n+j by applying ``op`` to two earlier nodes."""

    signs: tuple
    steps: list = field(default_factory=list)   # (op, i, j)

    def to_json(self) -> dict:
        return {"signs": list(self.signs),
                "steps": [{"op": op, "args": [i, j]} for op, i, j in self.steps]}

    @classmethod
    def from_json(cls, obj) -> "Trace":
        return cls(tuple(obj["signs"]), [(s["op"], *s["args"]) for s in obj["steps"]])


def replay(o: GroupOracle, F, trace: Trace) -> list:
    """Evaluate every node of a trace in the oracle."""
    nodes = [g if s > 0 else o.inv(g) for g, s in zip(F, trace.signs)]
    for op, i, j in trace.steps:
        if not (0 <= i < len(nodes) and 0 <= j < len(nodes)):
            raise ValueError("trace refers to a node not yet built")
        nodes.append(OPERATIONS[op](o, nodes[i], nodes[j]))
    return nodes


def verify_trace(o: GroupOracle, F, trace: Trace, kind: str) -> bool:
    """True iff the trace only uses ``kind``'s operations and ends at e."""
    allowed = CLOSURES[kind]
    if len(trace.signs) != len(F) or any(op not in allowed for op, _, _ in trace.steps):
        return False
    nodes = replay(o, F, trace)
    return o.is_identity(nodes[-1]).is_yes


def _prune(signs, parents: dict, n: int, target: int) -> Trace:
    """Keep only the steps the target node depends on, renumbered."""
    needed = set()
    stack = [target]
    while stack:
        v = stack.pop()
        if v < n or v in needed:
            continue
        needed.add(v)
        _, i, j = parents[v]
        stack.extend((i, j))
    order = sorted(needed)
    renum = {i: i for i in range(n)}
    steps = []
    for k, v in enumerate(order):
        renum[v] = n + k
        op, i, j = parents[v]
        steps.append((op, renum[i], renum[j]))
    if target < n:
        # a seed is itself trivial: should have been rejected up front
        raise ValueError("seed is the identity")
    return Trace(tuple(signs), steps)


class _Exhausted(Exception):
    pass


def _close(o: GroupOracle, F, signs, kind: str, rounds: int, cap: int, work: int):
    """Return a Trace reaching e, or None if the closure avoided e."""
    ops = CLOSURES[kind]
    n = len(F)
    store = _Store(o)
    parents: dict = {}
    node_of: list = []   # store index -> node id (seeds and steps share ids)
    for g, s in zip(F, signs):
        h = g if s > 0 else o.inv(g)
        if store.find(h) is None:
            store.add(h)
            node_of.append(len(node_of))
        else:
            node_of.append(None)
    # node ids: seeds keep their positions, so duplicates just waste an id
    ids = [i for i, v in enumerate(node_of) if v is not None]
    elems = list(store.items)
    next_id = n
    budget = [work]

    def emit(op, a, b):
        nonlocal next_id
        budget[0] -= 1
        if budget[0] < 0:
            raise _Exhausted
        g = OPERATIONS[op](o, elems[a], elems[b])
        if store.find(g) is not None:
            return None
        store.add(g)
        elems.append(g)
        parents[next_id] = (op, ids[a], ids[b])
        ids.append(next_id)
        next_id += 1
        if _is_identity(o, g):
            return _prune(signs, parents, n, ids[-1])
        if len(store) >= cap:
            raise _Exhausted
        return None

    if kind == "left":
        # breadth-first over product length: frontier * seed
        seeds = list(range(len(elems)))
        frontier = list(seeds)
        for _ in range(rounds - 1):
            nxt = []
            for a in frontier:
                for b in seeds:
                    before = len(elems)
                    t = emit("mul", a, b)
                    if t is not None:
                        return t
                    if len(elems) > before:
                        nxt.append(len(elems) - 1)
            frontier = nxt
            if not frontier:
                break
        return None

    done = 0   # elements below this index have met each other already
    for _ in range(rounds):
        size = len(elems)
        if size == done:
            break
        for a in range(size):
            for b in range(done if a < done else 0, size):
                for op in ops:
                    t = emit(op, a, b)
                    if t is not None:
                        return t
        done = size
    return None


def _run(o, F, bound, kind, cap, work) -> Verdict:
    F = list(F)
    try:
        _check_seeds(o, F)
    except UnknownResult as exc:
        return Verdict.unknown(exc.bound)
    if bound < 1:
        raise ValueError("bound must be >= 1")
    work = 50 * cap if work is None else work
    traces = []
    for signs in sign_vectors(len(F)):
        try:
            t = _close(o, F, signs, kind, bound, cap, work)
        except _Exhausted:
            return Verdict.unknown(bound, {"signs": list(signs), "reason": "cap"})
        except UnknownResult as exc:
            return Verdict.unknown(exc.bound if exc.bound is not None else bound,
                                   {"signs": list(signs), "reason": "undecided"})
        if t is None:
            return Verdict.unknown(bound, {"signs": list(signs), "reason": "survived"})
        traces.append(t)
    return Verdict.no(traces, bound)


def left_order_test(oracle: GroupOracle, F, m: int, cap: int = DEFAULT_CAP,
                    work: int | None = None) -> Verdict:
    """Products of F^E of length <= m. Unknown means the bounded sentence
    holds for this tuple; No carries one product trace per sign vector."""
    return _run(oracle, F, m, "left", cap, work)


def locally_indicable_test(oracle: GroupOracle, F, depth: int, cap: int = DEFAULT_CAP,
                           work: int | None = None) -> Verdict:
    return _run(oracle, F, depth, "li", cap, work)


def biorderable_test(oracle: GroupOracle, F, depth: int, cap: int = DEFAULT_CAP,
                     work: int | None = None) -> Verdict:
    return _run(oracle, F, depth, "bi", cap, work)


def trace_factors(trace: Trace, n: int) -> list:
    """Flatten a product-only trace to its seed sequence."""
    expand = {i: [i] for i in range(n)}
    for k, (op, i, j) in enumerate(trace.steps):
        if op != "mul":
            raise ValueError("only product traces flatten")
        expand[n + k] = expand[i] + expand[j]
    return expand[n + len(trace.steps) - 1] if trace.steps else []


def product_trace(signs, factors: list, n: int) -> Trace:
    """A left-nested product trace for the given seed sequence."""
    if len(factors) < 2:
        raise ValueError("need at least two factors")
    steps = [("mul", factors[0], factors[1])]
    for f in factors[2:]:
        steps.append(("mul", n + len(steps) - 1, f))
    return Trace(tuple(signs), steps)


def upp_test(oracle: GroupOracle, X, Y, strict: bool = False) -> Verdict:
    """Look for a product x*y with a unique factorization over X x Y.

    With ``strict`` a factorization (x, y) only has to beat pairs where both
    factors differ. The witness is the last qualifying product in the
    enumeration order of X x Y, which for sorted subsets of an ordered group
    is the maximum. No carries the full multiplicity table.
    """
    X, Y = list(X), list(Y)
    if not X or not Y:
        raise ValueError("X and Y must be nonempty")
    store = _Store(oracle)
    pairs: dict = {}
    order = []
    try:
        for x in X:
            for y in Y:
                g = oracle.mul(x, y)
                i = store.find(g)
                if i is None:
                    i = store.add(g)
                    pairs[i] = []
                pairs[i].append((x, y))
                order.append((i, x, y))
    except UnknownResult as exc:
        return Verdict.unknown(exc.bound)
    witness = None
    for i, x, y in order:
        facts = pairs[i]
        if strict:
            ok = all(x2 == x or y2 == y for x2, y2 in facts)
        else:
            ok = len(facts) == 1
        if ok:
            witness = (store.items[i], x, y)
    if witness is not None:
        return Verdict.yes(tuple(oracle.render(v) for v in witness))
    table = [{"element": oracle.render(store.items[i]),
              "factorizations": [[oracle.render(a), oracle.render(b)] for a, b in fs]}
             for i, fs in pairs.items()]
    return Verdict.no(table)


def sigma_mn_check(oracle: GroupOracle, m: int, n: int) -> Verdict:
    """Exhaustive bounded left-orderability sentence on a finite group: every
    n-tuple of non-identity elements has a sign vector whose products of
    length <= m avoid e. No carries the first violating tuple."""
    if oracle.order is None or not oracle.exact:
        raise ValueError("sigma check needs a finite exact group")
    nontrivial = [g for g in oracle.elements() if g != oracle.identity]
    for tup in itertools.product(nontrivial, repeat=n):
        v = left_order_test(oracle, tup, m)
        if v.is_no:
            return Verdict.no({"tuple": [oracle.render(g) for g in tup],
                               "traces": [t.to_json() for t in v.certificate]})
    return Verdict.yes()
