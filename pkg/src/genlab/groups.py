"""Group oracles: a uniform interface over countable groups.

An oracle supplies canonical forms, ``mul``, ``inv``, ``identity`` and a
three-valued ``eq``. The built-ins here all have exact equality; the
finitely presented oracle in :mod:`genlab.fp` does not.
"""

from __future__ import annotations

import itertools
import json
from collections import deque
from fractions import Fraction
from typing import Any, Iterator, Mapping, Sequence

from genlab.verdict import Verdict, UnknownResult
from genlab.words import VAR, Equation, Letter, System, Word, free_reduce, x as xl


class GroupOracle:
    """Base class. Subclasses implement mul, inv and set ``identity``."""

    name = "group"
    exact = True
    identity: Any = None
    generators: tuple = ()
    order: int | None = None  # None for infinite groups

    def mul(self, a, b):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def eq(self, a, b) -> Verdict:
        if a == b:
            return Verdict.yes()
        return Verdict.no((self.render(a), self.render(b)))

    def is_identity(self, a) -> Verdict:
        return self.eq(a, self.identity)

    def power(self, a, n: int):
        base = a if n >= 0 else self.inv(a)
        out = self.identity
        for _ in range(abs(n)):
            out = self.mul(out, base)
        return out

    def render(self, a):
        """JSON-friendly rendering of a canonical form."""
        return a

    def elements(self) -> list:
        if self.order is None:
            raise ValueError(f"{self.name} is infinite")
        return list(self.enumerate(self.order))

    def enumerate(self, limit: int) -> Iterator:
        """First ``limit`` distinct elements in breadth-first order over the
        generators and their inverses (identity first)."""
        if not self.exact:
            raise UnknownResult(f"{self.name}: enumeration needs exact equality")
        seen = {self.identity}
        queue = deque([self.identity])
        count = 0
        steps = []
        for g in self.generators:
            steps.append(g)
            steps.append(self.inv(g))
        while queue and count < limit:
            u = queue.popleft()
            yield u
            count += 1
            for s in steps:
                v = self.mul(u, s)
                if v not in seen:
                    seen.add(v)
                    queue.append(v)

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class MalformedTable(ValueError):
    """A multiplication table that does not define a group."""

    def __init__(self, axiom: str, detail: str):
        super().__init__(f"table violates {axiom}: {detail}")
        self.axiom = axiom


class FiniteGroup(GroupOracle):
    """Finite group given by a multiplication table on 0..n-1."""

    def __init__(self, table: Sequence[Sequence[int]], name: str = "finite",
                 generators: Sequence[int] | None = None):
        n = len(table)
        if n == 0:
            raise MalformedTable("closure", "empty table")
        for i, row in enumerate(table):
            if len(row) != n:
                raise MalformedTable("closure", f"row {i} has length {len(row)}, expected {n}")
            for j, v in enumerate(row):
                if not (isinstance(v, int) and 0 <= v < n):
                    raise MalformedTable("closure", f"entry ({i},{j}) = {v!r} out of range")
        self.table = tuple(tuple(row) for row in table)
        idents = [e for e in range(n)
                  if all(self.table[e][a] == a and self.table[a][e] == a for a in range(n))]
        if not idents:
            raise MalformedTable("identity", "no two-sided identity")
        self.identity = idents[0]
        e = self.identity
        inverses = []
        for a in range(n):
            cands = [b for b in range(n) if self.table[a][b] == e and self.table[b][a] == e]
            if not cands:
                raise MalformedTable("inverse", f"element {a} has no inverse")
            inverses.append(cands[0])
        self._inv = tuple(inverses)
        t = self.table
        for a in range(n):
            for b in range(n):
                ab = t[a][b]
                for c in range(n):
                    if t[ab][c] != t[a][t[b][c]]:
                        raise MalformedTable("associativity", f"({a}*{b})*{c} != {a}*({b}*{c})")
        self.order = n
        self.name = name
        if generators is None:
            generators = [a for a in range(n) if a != e]
        self.generators = tuple(generators)

    def mul(self, a, b):
        return self.table[a][b]

    def inv(self, a):
        return self._inv[a]

    def elements(self):
        return list(range(self.order))

    def enumerate(self, limit):
        return iter(range(min(limit, self.order)))

    def to_json(self) -> dict:
        return {"name": self.name, "table": [list(r) for r in self.table],
                "generators": list(self.generators)}

    @classmethod
    def from_json(cls, obj) -> "FiniteGroup":
        return cls(obj["table"], name=obj.get("name", "finite"),
                   generators=obj.get("generators"))


def table_from_closure(gens, mul, identity, name, key=lambda g: g) -> FiniteGroup:
    """Tabulate the finite group generated by ``gens`` under ``mul``."""
    elems = [identity]
    index = {key(identity): 0}
    queue = deque([identity])
    while queue:
        u = queue.popleft()
        for g in gens:
            v = mul(u, g)
            if key(v) not in index:
                index[key(v)] = len(elems)
                elems.append(v)
                queue.append(v)
    table = [[index[key(mul(a, b))] for b in elems] for a in elems]
    gen_idx = [index[key(g)] for g in gens]
    return FiniteGroup(table, name=name, generators=gen_idx)


def cyclic(n: int) -> FiniteGroup:
    if n < 1:
        raise ValueError("cyclic group order must be >= 1")
    table = [[(a + b) % n for b in range(n)] for a in range(n)]
    return FiniteGroup(table, name=f"Z/{n}", generators=[1] if n > 1 else [])


def trivial() -> FiniteGroup:
    return FiniteGroup([[0]], name="trivial", generators=[])


def _perm_mul(p, q):
    # apply p first, then q
    return tuple(q[p[i]] for i in range(len(p)))


def symmetric3() -> FiniteGroup:
    return table_from_closure([(1, 0, 2), (1, 2, 0)], _perm_mul, (0, 1, 2), "S3")


def dihedral(n: int) -> FiniteGroup:
    rot = tuple((i + 1) % n for i in range(n))
    ref = tuple((-i) % n for i in range(n))
    return table_from_closure([rot, ref], _perm_mul, tuple(range(n)), f"D{n}")


def _quat_mul(p, q):
    a1, b1, c1, d1 = p
    a2, b2, c2, d2 = q
    return (a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2)


def quaternion() -> FiniteGroup:
    return table_from_closure([(0, 1, 0, 0), (0, 0, 1, 0)], _quat_mul, (1, 0, 0, 0), "Q8")


def abelian(*orders: int) -> FiniteGroup:
    """Z/n1 x ... x Z/nk as a table."""
    elems = list(itertools.product(*(range(n) for n in orders)))
    index = {e: i for i, e in enumerate(elems)}
    table = [[index[tuple((x + y) % n for x, y, n in zip(a, b, orders))] for b in elems]
             for a in elems]
    gens = []
    for i in range(len(orders)):
        unit = tuple(1 if j == i else 0 for j in range(len(orders)))
        if orders[i] > 1:
            gens.append(index[unit])
    return FiniteGroup(table, name="x".join(f"Z/{n}" for n in orders), generators=gens)


def small_finite_groups(max_order: int = 8) -> list[FiniteGroup]:
    """The named finite built-ins of order <= max_order."""
    out = [trivial()]
    out += [cyclic(n) for n in range(2, max_order + 1)]
    extra = [abelian(2, 2), symmetric3(), dihedral(4), quaternion(), abelian(2, 4),
             abelian(2, 2, 2)]
    out += [g for g in extra if g.order <= max_order]
    return out


class Integers(GroupOracle):
    name = "Z"
    identity = 0
    generators = (1,)

    def mul(self, a, b):
        return a + b

    def inv(self, a):
        return -a


class FreeAbelian(GroupOracle):
    """Z^d as integer vectors."""

    def __init__(self, d: int):
        if d < 1:
            raise ValueError("Z^d needs d >= 1")
        self.d = d
        self.name = f"Z^{d}"
        self.identity = (0,) * d
        self.generators = tuple(tuple(1 if j == i else 0 for j in range(d)) for i in range(d))

    def mul(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def inv(self, a):
        return tuple(-x for x in a)

    def render(self, a):
        return list(a)


def _free_mul(a, b):
    out = list(a)
    for g in b:
        if out and out[-1] == -g:
            out.pop()
        else:
            out.append(g)
    return tuple(out)


def _intword_to_word(w) -> Word:
    return Word(tuple(Letter(VAR, abs(g), 1 if g > 0 else -1) for g in w))


class FreeGroup(GroupOracle):
    """F_k; elements are reduced tuples of nonzero ints (+-i for x_i^{+-1})."""

    def __init__(self, k: int):
        if k < 0:
            raise ValueError("rank must be >= 0")
        self.k = k
        self.name = f"F{k}"
        self.identity = ()
        self.generators = tuple((i,) for i in range(1, k + 1))
        self.order = 1 if k == 0 else None

    def mul(self, a, b):
        return _free_mul(a, b)

    def inv(self, a):
        return tuple(-g for g in reversed(a))

    def render(self, a):
        return _intword_to_word(a).render()


class BaumslagSolitar(GroupOracle):
    """BS(1,n) = <a, t | t a t^-1 = a^n> as affine maps x -> n^k x + r.

    Elements are pairs (k, r) with k an integer and r in Z[1/n]. For
    n = -1 this is the Klein bottle group: t a t^-1 = a^-1.
    """

    def __init__(self, n: int):
        if n == 0:
            raise ValueError("BS(1,0) is not supported")
        self.n = n
        self.name = f"BS(1,{n})"
        self.identity = (0, Fraction(0))
        self.generators = ((0, Fraction(1)), (1, Fraction(0)))

    def _scale(self, k):
        return Fraction(self.n) ** k

    def mul(self, a, b):
        k1, r1 = a
        k2, r2 = b
        return (k1 + k2, self._scale(k1) * r2 + r1)

    def inv(self, a):
        k, r = a
        return (-k, -self._scale(-k) * r)

    def render(self, a):
        k, r = a
        return [k, str(r)]


class Lamplighter(GroupOracle):
    """Z/2 wr Z: (finite set of lit lamps, cursor shift)."""

    name = "lamplighter"
    identity = (frozenset(), 0)
    generators = ((frozenset({0}), 0), (frozenset(), 1))

    def mul(self, a, b):
        f, s = a
        g, u = b
        return (f.symmetric_difference(p + s for p in g), s + u)

    def inv(self, a):
        f, s = a
        return (frozenset(p - s for p in f), -s)

    def render(self, a):
        f, s = a
        return {"lamps": sorted(f), "shift": s}


class DirectSum(GroupOracle):
    """Componentwise product of finitely many oracles."""

    def __init__(self, factors: Sequence[GroupOracle]):
        if not factors:
            raise ValueError("direct sum needs at least one factor")
        self.factors = tuple(factors)
        self.name = " + ".join(f.name for f in self.factors)
        self.exact = all(f.exact for f in self.factors)
        self.identity = tuple(f.identity for f in self.factors)
        gens = []
        for i, f in enumerate(self.factors):
            for g in f.generators:
                gens.append(tuple(g if j == i else h.identity for j, h in enumerate(self.factors)))
        self.generators = tuple(gens)
        orders = [f.order for f in self.factors]
        self.order = None if None in orders else _prod(orders)

    def mul(self, a, b):
        return tuple(f.mul(x, y) for f, x, y in zip(self.factors, a, b))

    def inv(self, a):
        return tuple(f.inv(x) for f, x in zip(self.factors, a))

    def eq(self, a, b) -> Verdict:
        unknown = None
        for i, (f, x, y) in enumerate(zip(self.factors, a, b)):
            v = f.eq(x, y)
            if v.is_no:
                return Verdict.no({"factor": i, "certificate": v.certificate}, v.bound)
            if v.is_unknown and unknown is None:
                unknown = v
        if unknown is not None:
            return Verdict.unknown(unknown.bound)
        return Verdict.yes()

    def render(self, a):
        return [f.render(x) for f, x in zip(self.factors, a)]

    def elements(self):
        return [tuple(p) for p in itertools.product(*(f.elements() for f in self.factors))]


def _prod(xs):
    out = 1
    for v in xs:
        out *= v
    return out


def direct_sum(oracles: Sequence[GroupOracle]) -> DirectSum:
    return DirectSum(oracles)


# --- evaluation ------------------------------------------------------------

def _lookup(env: Mapping, letter):
    key = (letter.kind, letter.index)
    if key in env:
        return env[key]
    if letter.kind == VAR and letter.index in env:
        return env[letter.index]
    raise KeyError(f"unmapped letter {letter.kind}{letter.index}")


def evaluate(oracle: GroupOracle, w: Word, env: Mapping):
    """Multiply out ``w`` with letters interpreted through ``env``.

    ``env`` keys are ``(kind, index)`` pairs, e.g. ``("x", 1)`` or
    ``("c", 4)``; bare ints are accepted for variables.
    """
    out = oracle.identity
    for letter in w.letters:
        g = _lookup(env, letter)
        if letter.sign < 0:
            g = oracle.inv(g)
        out = oracle.mul(out, g)
    return out


def marking_env(values: Sequence) -> dict:
    return {(VAR, i + 1): v for i, v in enumerate(values)}


def satisfies(oracle: GroupOracle, s: System, env: Mapping) -> Verdict:
    """Does the tuple in ``env`` solve every clause of ``s``?"""
    unknown_bound = None
    saw_unknown = False
    for clause in s.clauses:
        value = evaluate(oracle, clause.word, env)
        v = oracle.is_identity(value)
        if v.is_unknown:
            saw_unknown = True
            unknown_bound = v.bound
            continue
        if v.is_yes != clause.equal:
            return Verdict.no({"clause": clause.render(), "evidence": v.certificate}, v.bound)
    if saw_unknown:
        return Verdict.unknown(unknown_bound)
    return Verdict.yes()


# --- built-in registry -----------------------------------------------------

_NAMED_FINITE = {
    "trivial": trivial,
    "S3": symmetric3,
    "D4": lambda: dihedral(4),
    "Q8": quaternion,
    "V4": lambda: abelian(2, 2),
    "Z/2xZ/2": lambda: abelian(2, 2),
    "Z/2xZ/4": lambda: abelian(2, 4),
    "Z/2xZ/2xZ/2": lambda: abelian(2, 2, 2),
}


def builtin(name: str, *params) -> GroupOracle:
    """Construct a built-in oracle from its name.

    Names: ``trivial``, ``Z``, ``Z^d``, ``Fk``, ``BS(1,n)``, ``lamplighter``,
    ``Z/n`` (optionally ``Z/n-table``), ``S3``, ``D4``, ``Q8``, ``V4``,
    ``finite:<table.json>``, ``fp:<presentation.json>``. ``finite-table``
    takes the table as a parameter.
    """
    name = name.strip()
    if name == "finite-table":
        (table,) = params
        return FiniteGroup(table)
    if name in _NAMED_FINITE:
        return _NAMED_FINITE[name]()
    if name == "Z":
        return Integers()
    if name.startswith("Z^"):
        d = int(name[2:])
        return Integers() if d == 1 else FreeAbelian(d)
    if name.startswith("Z/"):
        body = name[2:]
        if body.endswith("-table"):
            body = body[: -len("-table")]
        return cyclic(int(body))
    if name.startswith("F") and name[1:].isdigit():
        return FreeGroup(int(name[1:]))
    if name.startswith("BS(1,") and name.endswith(")"):
        return BaumslagSolitar(int(name[5:-1]))
    if name == "lamplighter":
        return Lamplighter()
    if name.startswith("finite:"):
        with open(name[len("finite:"):]) as fh:
            return FiniteGroup.from_json(json.load(fh))
    if name.startswith("fp:"):
        from genlab.fp import fp_oracle
        from genlab.presentations import Presentation
        with open(name[len("fp:"):]) as fh:
            pres = Presentation.from_json(json.load(fh))
        bound = params[0] if params else None
        return fp_oracle(pres, bound)
    raise ValueError(f"unknown group {name!r}")


# --- embedding via systems ---------------------------------------------------

def multiplication_system(G: GroupOracle, size: int):
    """System in x_1..x_size describing the products among G's first
    ``size`` enumerated elements, plus pairwise distinctness."""
    elems = list(G.enumerate(size))
    if len(elems) < size:
        raise ValueError(f"{G.name} has only {len(elems)} elements")
    index = {e: i for i, e in enumerate(elems)}
    clauses = []
    for i, a in enumerate(elems):
        for j, b in enumerate(elems):
            k = index.get(G.mul(a, b))
            if k is not None:
                w = free_reduce([xl(i + 1), xl(j + 1), xl(k + 1, -1)])
                if not w.is_empty:
                    clauses.append(Equation(w.canonical_inverse_rep(), True))
    for i in range(size):
        for j in range(i + 1, size):
            w = free_reduce([xl(i + 1), xl(j + 1, -1)])
            clauses.append(Equation(w.canonical_inverse_rep(), False))
    return elems, System(clauses, arity=size)


def embeds_via_systems(G: GroupOracle, H: GroupOracle, size: int, bound: int) -> Verdict:
    """Search H for a solution of G's multiplication-table system.

    Candidates for each variable are the elements of H of word length
    <= ``bound`` (all of H when finite). Yes carries the solving tuple;
    No only when H is finite and the search was exhaustive.
    """
    elems, system = multiplication_system(G, size)
    if H.order is not None:
        candidates = H.elements()
        exhaustive = True
    else:
        candidates = _ball_elements(H, bound)
        exhaustive = False
    n = size
    # clauses grouped by the largest variable they mention
    by_last: dict = {i: [] for i in range(1, n + 1)}
    for cl in system.clauses:
        by_last[max(cl.word.variables())].append(cl)
    assignment: list = []
    env: dict = {}

    def consistent(i):
        for cl in by_last[i]:
            v = H.is_identity(evaluate(H, cl.word, env))
            if v.is_unknown:
                raise UnknownResult("equality undecided during embedding search", v.bound)
            if v.is_yes != cl.equal:
                return False
        return True

    def search(i):
        if i > n:
            return True
        for h in candidates:
            env[(VAR, i)] = h
            assignment.append(h)
            if consistent(i) and search(i + 1):
                return True
            assignment.pop()
            del env[(VAR, i)]
        return False

    try:
        found = search(1)
    except UnknownResult as exc:
        return Verdict.unknown(exc.bound if exc.bound is not None else bound)
    if found:
        return Verdict.yes({"tuple": [H.render(h) for h in assignment],
                            "system": system.to_json()}, bound)
    if exhaustive:
        return Verdict.no({"exhausted": len(candidates), "system": system.to_json()}, bound)
    return Verdict.unknown(bound)


def _ball_elements(H: GroupOracle, radius: int) -> list:
    if not H.exact:
        raise UnknownResult(f"{H.name}: ball enumeration needs exact equality")
    seen = {H.identity}
    out = [H.identity]
    frontier = [H.identity]
    steps = [g for gen in H.generators for g in (gen, H.inv(gen))]
    for _ in range(radius):
        nxt = []
        for u in frontier:
            for s in steps:
                v = H.mul(u, s)
                if v not in seen:
                    seen.add(v)
                    out.append(v)
                    nxt.append(v)
        frontier = nxt
    return out
