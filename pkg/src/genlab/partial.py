"""Finite fragments of enumerated groups.

A partial enumerated group records some values of the multiplication
``mu(i, j) = k``, the inversion ``iota(i) = j`` and the identity, on natural
numbers. Distinct numbers name distinct elements. ``close`` saturates the
facts under associativity, the identity and inverse laws and recorded
commutations, raising :class:`Contradiction` if two distinct numbers are
forced to coincide.
"""

from __future__ import annotations

import copy
from collections import deque
from dataclasses import dataclass, field

from genlab.words import CONST, Equation, System


class Contradiction(Exception):
    def __init__(self, message: str, trace: list):
        super().__init__(message)
        self.trace = trace


@dataclass
class PartialEnumeratedGroup:
    identity: int | None = None
    products: dict = field(default_factory=dict)      # (i, j) -> k
    inverses: dict = field(default_factory=dict)      # i -> j
    inequalities: set = field(default_factory=set)    # frozenset({i, j}); {i} for i != e
    commuting: set = field(default_factory=set)       # frozenset({i, j})

    def constants(self) -> set:
        out = set()
        for (a, b), d in self.products.items():
            out.update((a, b, d))
        for a, b in self.inverses.items():
            out.update((a, b))
        for pair in self.inequalities:
            out.update(pair)
        for pair in self.commuting:
            out.update(pair)
        if self.identity is not None:
            out.add(self.identity)
        return out

    def has_product(self, a: int, b: int) -> bool:
        return (a, b) in self.products

    def to_json(self) -> dict:
        return {
            "identity": self.identity,
            "products": [[a, b, d] for (a, b), d in sorted(self.products.items())],
            "inverses": [[a, b] for a, b in sorted(self.inverses.items())],
            "inequalities": sorted(sorted(p) for p in self.inequalities),
            "commuting": sorted(sorted(p) for p in self.commuting),
        }

    @classmethod
    def from_oracle(cls, oracle, elements) -> "PartialEnumeratedGroup":
        """Name ``elements[i]`` by the constant i+1 and record every product,
        inverse and the identity that stays inside the list."""
        index = {g: i + 1 for i, g in enumerate(elements)}
        t = cls()
        t.identity = index.get(oracle.identity)
        for g, i in index.items():
            inv = index.get(oracle.inv(g))
            if inv is not None:
                t.inverses[i] = inv
            for h, j in index.items():
                k = index.get(oracle.mul(g, h))
                if k is not None:
                    t.products[(i, j)] = k
        return t

    def close(self) -> "PartialEnumeratedGroup":
        """Return the saturation; raises Contradiction."""
        closer = Closure()
        closer.absorb(self)
        return closer.table


def check_laws(t: PartialEnumeratedGroup) -> list:
    """Violations of the finite-stage group laws, by direct inspection."""
    bad = []
    mu = t.products
    e = t.identity
    row: dict = {}
    for (a, b), d in mu.items():
        row.setdefault(a, {})[b] = d
    for (a, b), d in mu.items():
        for c, g in row.get(b, {}).items():
            left = mu.get((d, c))
            right = mu.get((a, g))
            if left is not None and right is not None and left != right:
                bad.append(("associativity", a, b, c))
    if e is not None:
        for (a, b), d in mu.items():
            if a == e and d != b:
                bad.append(("identity", a, b))
            if b == e and d != a:
                bad.append(("identity", a, b))
        for a, b in t.inverses.items():
            for pair in ((a, b), (b, a)):
                if pair in mu and mu[pair] != e:
                    bad.append(("inverse", a, b))
        for pair in t.inequalities:
            if pair == frozenset({e}):
                bad.append(("inequality", e))
    for a, r in row.items():
        seen: dict = {}
        for b, d in r.items():
            if d in seen and seen[d] != b:
                bad.append(("cancellation", a, b, seen[d]))
            seen[d] = b
    col: dict = {}
    for (a, b), d in mu.items():
        if (b, d) in col and col[(b, d)] != a:
            bad.append(("cancellation", a, b, col[(b, d)]))
        col[(b, d)] = a
    for pair in t.commuting:
        if len(pair) == 2:
            a, b = sorted(pair)
            if (a, b) in mu and (b, a) in mu and mu[(a, b)] != mu[(b, a)]:
                bad.append(("commuting", a, b))
    return bad


class Closure:
    """Incremental saturation of a partial table.

    Associativity is applied in every premise position, so after each call
    to ``run`` the table is closed: whenever three of the four products in
    (ab)c = a(bc) are defined, the fourth is too.
    """

    def __init__(self):
        self.table = PartialEnumeratedGroup()
        self.row: dict = {}    # a -> {b: d}
        self.col: dict = {}    # b -> {a: d}
        self.res: dict = {}    # d -> set of (a, b)
        self.why: dict = {}    # (a, b) -> justification
        self.known: set = set()
        self.queue: deque = deque()
        self.journal: list | None = None

    def copy(self) -> "Closure":
        return copy.deepcopy(self)

    # -- trial additions ----------------------------------------------------
    def checkpoint(self):
        """Start recording changes so that ``rollback`` can undo them."""
        self.journal = []

    def commit(self):
        self.journal = None

    def rollback(self):
        t = self.table
        for entry in reversed(self.journal or []):
            kind = entry[0]
            if kind == "identity":
                t.identity = entry[1]
            elif kind == "ineq":
                t.inequalities.discard(entry[1])
            elif kind == "comm":
                t.commuting.discard(entry[1])
            elif kind == "inv":
                del t.inverses[entry[1]]
            elif kind == "known":
                self.known.discard(entry[1])
            elif kind == "prod":
                _, a, b, d = entry
                del t.products[(a, b)]
                del self.why[(a, b)]
                del self.row[a][b]
                del self.col[b][a]
                self.res[d].discard((a, b))
        self.queue.clear()
        self.journal = None

    def _log(self, *entry):
        if self.journal is not None:
            self.journal.append(entry)

    # -- fact entry -------------------------------------------------------
    def set_identity(self, e: int, why="clause"):
        t = self.table
        if t.identity is not None and t.identity != e:
            raise Contradiction(f"two identities c{t.identity} and c{e}",
                                [("identity", t.identity), ("identity", e, why)])
        if t.identity == e:
            return
        if frozenset({e}) in t.inequalities:
            raise Contradiction(f"c{e} declared != e and = e", [("identity", e, why)])
        self._log("identity", t.identity)
        t.identity = e
        self._mention(e)
        for m in sorted(self.known):
            self.add_product(m, e, m, ("identity",))
            self.add_product(e, m, m, ("identity",))
        for a, b in list(t.inverses.items()):
            self.add_product(a, b, e, ("inverse", a, b))
        for a, b in sorted(self.res.get(e, ())):
            self.add_inverse(a, b, ("product-to-identity", a, b))
        self.add_inverse(e, e, ("identity",))
        self.run()

    def add_inequality(self, a: int, b: int | None):
        t = self.table
        if b is None:
            if t.identity == a:
                raise Contradiction(f"c{a} is the identity but declared != e", [("neq", a)])
            self._add_ineq(frozenset({a}))
            self._mention(a)
            return
        if a == b:
            raise Contradiction(f"c{a} != c{a}", [("neq", a, b)])
        self._add_ineq(frozenset({a, b}))
        self._mention(a)
        self._mention(b)

    def _add_ineq(self, pair):
        if pair not in self.table.inequalities:
            self.table.inequalities.add(pair)
            self._log("ineq", pair)

    def add_commuting(self, a: int, b: int):
        if a == b:
            return
        pair = frozenset({a, b})
        if pair in self.table.commuting:
            return
        self.table.commuting.add(pair)
        self._log("comm", pair)
        self._mention(a)
        self._mention(b)
        if (a, b) in self.table.products:
            self.add_product(b, a, self.table.products[(a, b)], ("commute", a, b))
        if (b, a) in self.table.products:
            self.add_product(a, b, self.table.products[(b, a)], ("commute", b, a))

    def add_inverse(self, a: int, b: int, why=("clause",)):
        inv = self.table.inverses
        for x, y in ((a, b), (b, a)):
            if x in inv and inv[x] != y:
                raise Contradiction(f"c{x} has inverses c{inv[x]} and c{y}",
                                    [("inverse", x, inv[x]), ("inverse", x, y, why)])
        for x, y in ((a, b), (b, a)):
            if x not in inv:
                inv[x] = y
                self._log("inv", x)
        self._mention(a)
        self._mention(b)
        e = self.table.identity
        if e is None:
            for x, y in ((a, b), (b, a)):
                if (x, y) in self.table.products:
                    self.set_identity(self.table.products[(x, y)], ("inverse-product", x, y))
                    return
            return
        self.add_product(a, b, e, ("inverse", a, b))
        self.add_product(b, a, e, ("inverse", a, b))

    def add_product(self, a: int, b: int, d: int, why=("clause",)):
        mu = self.table.products
        cur = mu.get((a, b))
        if cur is not None:
            if cur != d:
                raise Contradiction(
                    f"c{a}*c{b} is both c{cur} and c{d}",
                    [("product", a, b, cur, self.why.get((a, b))), ("product", a, b, d, why)])
            return
        other = self.row.get(a, {})
        for b2, d2 in other.items():
            if d2 == d and b2 != b:
                raise Contradiction(
                    f"left cancellation: c{a}*c{b} = c{a}*c{b2} = c{d}",
                    [("product", a, b2, d, self.why.get((a, b2))), ("product", a, b, d, why)])
        for a2, d2 in self.col.get(b, {}).items():
            if d2 == d and a2 != a:
                raise Contradiction(
                    f"right cancellation: c{a}*c{b} = c{a2}*c{b} = c{d}",
                    [("product", a2, b, d, self.why.get((a2, b))), ("product", a, b, d, why)])
        mu[(a, b)] = d
        self.why[(a, b)] = why
        self.row.setdefault(a, {})[b] = d
        self.col.setdefault(b, {})[a] = d
        self.res.setdefault(d, set()).add((a, b))
        self._log("prod", a, b, d)
        for m in (a, b, d):
            self._mention(m)
        self.queue.append((a, b, d))

    def _mention(self, m: int):
        if m in self.known:
            return
        self.known.add(m)
        self._log("known", m)
        e = self.table.identity
        if e is not None:
            self.add_product(m, e, m, ("identity",))
            self.add_product(e, m, m, ("identity",))

    # -- saturation ---------------------------------------------------------
    def run(self):
        mu = self.table.products
        while self.queue:
            a, b, d = self.queue.popleft()
            e = self.table.identity
            if e is not None and d == e:
                self.add_inverse(a, b, ("product-to-identity", a, b))
            if e is None and self.table.inverses.get(a) == b:
                self.set_identity(d, ("inverse-product", a, b))
                e = d
            if frozenset({a, b}) in self.table.commuting:
                self.add_product(b, a, d, ("commute", a, b))
            # fact as mu(a,b)=d with mu(b,c)=g
            for c, g in list(self.row.get(b, {}).items()):
                f = mu.get((d, c))
                if f is not None:
                    self.add_product(a, g, f, ("assoc", a, b, c))
                f = mu.get((a, g))
                if f is not None:
                    self.add_product(d, c, f, ("assoc", a, b, c))
            # fact as mu(b,c)=g: here (b, c) = (a, b); need mu(x, a) = y
            for x, y in list(self.col.get(a, {}).items()):
                f = mu.get((y, b))
                if f is not None:
                    self.add_product(x, d, f, ("assoc", x, a, b))
                f = mu.get((x, d))
                if f is not None:
                    self.add_product(y, b, f, ("assoc", x, a, b))
            # fact as mu(p,c)=f with p = a: need mu(x,y)=a, mu(y,b)=g
            for x, y in list(self.res.get(a, ())):
                g = mu.get((y, b))
                if g is not None:
                    self.add_product(x, g, d, ("assoc", x, y, b))
            # fact as mu(x,g)=f with x = a, g = b: need mu(y,z)=b, mu(a,y)=p
            for y, z in list(self.res.get(b, ())):
                p = mu.get((a, y))
                if p is not None:
                    self.add_product(p, z, d, ("assoc", a, y, z))

    def absorb(self, t: PartialEnumeratedGroup):
        if t.identity is not None:
            self.set_identity(t.identity)
        for (a, b), d in sorted(t.products.items()):
            self.add_product(a, b, d)
        for a, b in sorted(t.inverses.items()):
            self.add_inverse(a, b)
        for pair in sorted(t.inequalities, key=sorted):
            p = sorted(pair)
            self.add_inequality(p[0], p[1] if len(p) > 1 else None)
        for pair in sorted(t.commuting, key=sorted):
            self.add_commuting(*sorted(pair))
        self.run()

    def add_clause(self, clause: Equation):
        fact = clause_fact(clause)
        if fact is None:
            return
        kind = fact[0]
        if kind == "identity":
            self.set_identity(fact[1])
        elif kind == "product":
            self.add_product(fact[1], fact[2], fact[3])
        elif kind == "inverse":
            self.add_inverse(fact[1], fact[2])
        elif kind == "merge":
            raise Contradiction(f"c{fact[1]} = c{fact[2]} names one element twice",
                                [("clause", clause.render())])
        elif kind == "neq":
            self.add_inequality(fact[1], fact[2])
        elif kind == "commute":
            self.add_commuting(fact[1], fact[2])
        elif kind == "false":
            raise Contradiction("clause e != e", [("clause", clause.render())])
        self.run()


def _cyclic_rotations(seq):
    return [seq[i:] + seq[:i] for i in range(len(seq))]


def clause_fact(clause: Equation):
    """Read a constant-only clause as a table fact, or None."""
    letters = clause.word.letters
    if any(l.kind != CONST for l in letters):
        return None
    w = tuple(l.index * l.sign for l in letters)
    if clause.equal:
        if len(w) == 1:
            return ("identity", abs(w[0]))
        if len(w) == 2:
            a, b = w
            if a > 0 and b > 0:
                return ("inverse", a, b)
            if a < 0 and b < 0:
                return ("inverse", -b, -a)
            return ("merge", abs(a), abs(b))
        if len(w) == 3:
            for cand in (w, tuple(-g for g in reversed(w))):
                for rot in _cyclic_rotations(cand):
                    if rot[0] > 0 and rot[1] > 0 and rot[2] < 0:
                        return ("product", rot[0], rot[1], -rot[2])
            return None
        if len(w) == 4:
            for rot in _cyclic_rotations(w):
                a, b, c, d = rot
                if a > 0 and b > 0 and c == -a and d == -b:
                    return ("commute", a, b)
        return None
    if len(w) == 0:
        return ("false",)
    if len(w) == 1:
        return ("neq", abs(w[0]), None)
    if len(w) == 2 and (w[0] > 0) != (w[1] > 0):
        return ("neq", abs(w[0]), abs(w[1]))
    return None


def compile_system(s: System) -> PartialEnumeratedGroup:
    """Extract the syntactic facts of a constant system and saturate them."""
    closer = Closure()
    for clause in s.clauses:
        closer.add_clause(clause)
    closer.run()
    return closer.table
