"""Marked groups: Cayley balls, rooted labeled comparison, the ball metric,
the ball -> system device, and truncations of the marked-group reduction."""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from genlab.groups import GroupOracle, evaluate
from genlab.partial import PartialEnumeratedGroup
from genlab.verdict import Verdict
from genlab.words import VAR, Equation, Letter, System, Word, free_reduce


@dataclass(frozen=True)
class MarkedGroup:
    oracle: GroupOracle
    marking: tuple

    def __post_init__(self):
        object.__setattr__(self, "marking", tuple(self.marking))

    @classmethod
    def standard(cls, oracle: GroupOracle) -> "MarkedGroup":
        return cls(oracle, tuple(oracle.generators))

    @property
    def rank(self) -> int:
        return len(self.marking)


@dataclass
class Ball:
    """Rooted, edge-labeled ball. Vertices are 0..n-1 in discovery order,
    root 0; ``edges[(u, i)] = v`` means u * s_i = v."""

    radius: int
    labels: int
    size: int
    edges: dict
    depth: list
    geodesics: list = field(default_factory=list)
    elements: list = field(default_factory=list)

    def out_edges(self):
        return self.edges

    def in_edges(self) -> dict:
        return {(v, i): u for (u, i), v in self.edges.items()}

    def restrict(self, r: int) -> "Ball":
        """The induced sub-ball of radius r (vertices are depth-ordered)."""
        if r > self.radius:
            raise ValueError("cannot restrict to a larger radius")
        n = sum(1 for d in self.depth if d <= r)
        edges = {(u, i): v for (u, i), v in self.edges.items() if u < n and v < n}
        return Ball(r, self.labels, n, edges, self.depth[:n], self.geodesics[:n],
                    self.elements[:n])

    def to_json(self) -> dict:
        return {"radius": self.radius, "labels": self.labels, "root": 0,
                "vertices": self.size,
                "edges": [[u, i, v] for (u, i), v in sorted(self.edges.items())]}

    @classmethod
    def from_json(cls, obj) -> "Ball":
        edges = {(u, i): v for u, i, v in obj["edges"]}
        size = obj.get("vertices")
        if size is None:
            size = 1 + max([u for u, _, _ in obj["edges"]] + [v for _, _, v in obj["edges"]],
                           default=0)
        return cls(obj["radius"], obj["labels"], size, edges, _depths(size, edges))


def _depths(size, edges) -> list:
    adj: dict = {}
    for (u, _), v in edges.items():
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    depth = [-1] * size
    depth[0] = 0
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v in adj.get(u, ()):
            if depth[v] < 0:
                depth[v] = depth[u] + 1
                queue.append(v)
    return depth


class _VertexTable:
    """Find-or-insert for canonical forms; pairwise eq for inexact oracles."""

    def __init__(self, oracle: GroupOracle):
        self.oracle = oracle
        self.items: list = []
        self.index: dict = {}
        self.unknown_bound = None
        self.undecided = False

    def find(self, g):
        if self.oracle.exact:
            return self.index.get(g)
        for i, h in enumerate(self.items):
            v = self.oracle.eq(g, h)
            if v.is_yes:
                return i
            if v.is_unknown:
                self.undecided = True
                self.unknown_bound = v.bound
        return None

    def add(self, g) -> int:
        self.items.append(g)
        if self.oracle.exact:
            self.index[g] = len(self.items) - 1
        return len(self.items) - 1


def ball(m: MarkedGroup, radius: int) -> Verdict:
    """Breadth-first Cayley ball of the marking. Yes(Ball) when every
    equality decision was definite, otherwise Unknown(bound)."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    o = m.oracle
    steps = []
    for i, s in enumerate(m.marking, start=1):
        steps.append((Letter(VAR, i, 1), s))
        steps.append((Letter(VAR, i, -1), o.inv(s)))
    table = _VertexTable(o)
    table.add(o.identity)
    depth = [0]
    geod = [Word.empty()]
    frontier = [0]
    for d in range(radius):
        nxt = []
        for u in frontier:
            for letter, s in steps:
                g = o.mul(table.items[u], s)
                if table.find(g) is None:
                    v = table.add(g)
                    depth.append(d + 1)
                    geod.append(free_reduce(geod[u].letters + (letter,)))
                    nxt.append(v)
        frontier = nxt
    edges = {}
    for u in range(len(table.items)):
        for i, s in enumerate(m.marking, start=1):
            v = table.find(o.mul(table.items[u], s))
            if v is not None:
                edges[(u, i)] = v
    if table.undecided:
        return Verdict.unknown(table.unknown_bound)
    return Verdict.yes(Ball(radius, len(m.marking), len(table.items), edges, depth, geod,
                            list(table.items)))


def exact_ball(m: MarkedGroup, radius: int) -> Ball:
    v = ball(m, radius)
    if not v.is_yes:
        from genlab.verdict import UnknownResult
        raise UnknownResult(f"ball of radius {radius} undecided", v.bound)
    return v.certificate


def ball_isomorphic(b1: Ball, b2: Ball) -> bool:
    """Rooted label-preserving isomorphism. Determinism forces the map, so a
    simultaneous traversal from the roots decides it."""
    if b1.labels != b2.labels or b1.radius != b2.radius:
        raise ValueError("balls must share radius and label alphabet")
    if b1.size != b2.size or len(b1.edges) != len(b2.edges):
        return False
    in1, in2 = b1.in_edges(), b2.in_edges()
    phi = {0: 0}
    used = {0}
    queue = deque([0])
    while queue:
        u = queue.popleft()
        w = phi[u]
        for i in range(1, b1.labels + 1):
            for e1, e2 in ((b1.edges, b2.edges), (in1, in2)):
                v1 = e1.get((u, i))
                v2 = e2.get((w, i))
                if (v1 is None) != (v2 is None):
                    return False
                if v1 is None:
                    continue
                if v1 in phi:
                    if phi[v1] != v2:
                        return False
                else:
                    if v2 in used:
                        return False
                    phi[v1] = v2
                    used.add(v2)
                    queue.append(v1)
    return len(phi) == b1.size


@dataclass(frozen=True)
class MarkedDistance:
    """``exact``: distance is e^-n. ``at_most``: balls agree up to the search
    radius n, so distance <= e^-n. ``unknown``: a ball was undecided."""

    kind: str
    exponent: int
    bound: int | None = None

    @property
    def value(self) -> float:
        return math.exp(-self.exponent)

    def to_json(self) -> dict:
        return {"kind": self.kind, "n": self.exponent, "value": self.value}


def marked_distance(m1: MarkedGroup, m2: MarkedGroup, max_radius: int) -> MarkedDistance:
    if m1.rank != m2.rank:
        raise ValueError("markings must have equal length")
    v1, v2 = ball(m1, max_radius), ball(m2, max_radius)
    if v1.is_yes and v2.is_yes:
        big1, big2 = v1.certificate, v2.certificate
        for r in range(max_radius + 1):
            if not ball_isomorphic(big1.restrict(r), big2.restrict(r)):
                return MarkedDistance("exact", max(r - 1, 0))
        return MarkedDistance("at_most", max_radius)
    # some large ball is undecided; smaller balls may still separate
    for r in range(max_radius + 1):
        b1, b2 = ball(m1, r), ball(m2, r)
        if not (b1.is_yes and b2.is_yes):
            return MarkedDistance("unknown", max(r - 1, 0), b1.bound if b1.is_unknown else b2.bound)
        if not ball_isomorphic(b1.certificate, b2.certificate):
            return MarkedDistance("exact", max(r - 1, 0))
    return MarkedDistance("at_most", max_radius)


def ball_to_system(b: Ball) -> System:
    """Equations for every edge and inequations separating all vertices,
    written with the breadth-first geodesics."""
    geo = b.geodesics
    if len(geo) != b.size:
        raise ValueError("ball has no geodesics; build it with ball()")
    clauses = []
    for (u, i), v in sorted(b.edges.items()):
        w = free_reduce(geo[u].letters + (Letter(VAR, i, 1),) + geo[v].inverse().letters)
        if not w.is_empty:
            clauses.append(Equation(w.canonical_inverse_rep(), True))
    for u, v in itertools.combinations(range(b.size), 2):
        w = free_reduce(geo[u].letters + geo[v].inverse().letters)
        clauses.append(Equation(w.canonical_inverse_rep(), False))
    return System(clauses, arity=b.labels)


def reduced_words(n: int, max_len: int):
    """Nonempty freely reduced words over x_1..x_n, shortlex order."""
    letters = [Letter(VAR, i, s) for i in range(1, n + 1) for s in (1, -1)]
    layer = [()]
    for _ in range(max_len):
        nxt = []
        for w in layer:
            for l in letters:
                if w and w[-1] == l.inverse():
                    continue
                nxt.append(w + (l,))
        for w in nxt:
            yield Word(w)
        layer = nxt


def tau_stage(t: PartialEnumeratedGroup, n: int, length_bound: int) -> Verdict:
    """Words of length <= length_bound in x_1..x_n that vanish when x_i is
    read as constant i, up to inversion. Unknown lists the missing facts."""
    missing: set = set()
    trivial: set = set()
    if t.identity is None:
        return Verdict.unknown(length_bound, {"missing": ["identity"]})
    for w in reduced_words(n, length_bound):
        value = t.identity
        ok = True
        for l in w.letters:
            if l.sign > 0:
                g = l.index
            else:
                g = t.inverses.get(l.index)
                if g is None:
                    missing.add(("inv", l.index))
                    ok = False
                    break
            nxt = t.products.get((value, g))
            if nxt is None:
                missing.add(("mul", value, g))
                ok = False
                break
            value = nxt
        if ok and value == t.identity:
            trivial.add(w.canonical_inverse_rep())
    if missing:
        return Verdict.unknown(length_bound, {"missing": sorted(missing, key=str)})
    return Verdict.yes(sorted(trivial, key=Word.sort_key), length_bound)
