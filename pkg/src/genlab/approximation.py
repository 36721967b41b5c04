"""Følner sets and sofic approximations."""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from genlab.groups import GroupOracle
from genlab.marked import Ball, MarkedGroup, ball_isomorphic, exact_ball
from genlab.verdict import UnknownResult


# --- Følner ---------------------------------------------------------------

@dataclass
class FolnerReport:
    K: list
    sizes: list          # |gK ^ K| per element of F, in order
    eps: Fraction
    passed: bool

    def to_json(self, oracle: GroupOracle | None = None) -> dict:
        render = oracle.render if oracle is not None else (lambda g: g)
        return {"K": [render(g) for g in self.K], "size": len(self.K),
                "sizes": self.sizes, "eps": str(self.eps), "pass": self.passed}


def _canonical_set(oracle: GroupOracle, items) -> list:
    """Deduplicate; pairwise eq for inexact oracles, aborting on Unknown."""
    out: list = []
    seen = set()
    for g in items:
        if oracle.exact:
            if g not in seen:
                seen.add(g)
                out.append(g)
            continue
        dup = False
        for h in out:
            v = oracle.eq(g, h)
            if v.is_unknown:
                raise UnknownResult("Følner set membership undecided", v.bound)
            if v.is_yes:
                dup = True
                break
        if not dup:
            out.append(g)
    return out


def _sym_diff_size(oracle: GroupOracle, A: list, B: list) -> int:
    if oracle.exact:
        return len(set(A) ^ set(B))
    common = 0
    for a in A:
        for b in B:
            v = oracle.eq(a, b)
            if v.is_unknown:
                raise UnknownResult("Følner set membership undecided", v.bound)
            if v.is_yes:
                common += 1
                break
    return len(A) + len(B) - 2 * common


def folner_check(oracle: GroupOracle, F, K, eps) -> FolnerReport:
    """Exact check of |gK ^ K| < eps |K| for every g in F (strict)."""
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    K = _canonical_set(oracle, K)
    if not K:
        raise ValueError("K must be nonempty")
    sizes = []
    for g in F:
        gK = [oracle.mul(g, k) for k in K]
        sizes.append(_sym_diff_size(oracle, gK, K))
    limit = eps * len(K)
    return FolnerReport(K, sizes, eps, all(s < limit for s in sizes))


@dataclass(frozen=True)
class Balls:
    max_radius: int


@dataclass(frozen=True)
class Subsets:
    """Subsets of the ball of ``radius``, by size then lexicographically in
    ball order, up to ``max_size`` elements."""
    radius: int
    max_size: int


def folner_search(oracle: GroupOracle, F, eps, strategy, marking=None) -> FolnerReport | None:
    """First passing candidate in strategy order; None means no witness was
    found among the candidates, which says nothing about amenability."""
    m = MarkedGroup(oracle, tuple(oracle.generators if marking is None else marking))
    if isinstance(strategy, Balls):
        for r in range(1, strategy.max_radius + 1):
            rep = folner_check(oracle, F, exact_ball(m, r).elements, eps)
            if rep.passed:
                return rep
        return None
    if isinstance(strategy, Subsets):
        pool = exact_ball(m, strategy.radius).elements
        for size in range(1, min(strategy.max_size, len(pool)) + 1):
            for K in itertools.combinations(pool, size):
                rep = folner_check(oracle, F, K, eps)
                if rep.passed:
                    return rep
        return None
    raise TypeError(f"unknown strategy {strategy!r}")


# --- sofic ----------------------------------------------------------------

@dataclass
class LabeledGraph:
    vertices: int
    labels: int
    edges: dict = field(default_factory=dict)   # (u, i) -> v

    def __post_init__(self):
        incoming = {}
        for (u, i), v in self.edges.items():
            if not (0 <= u < self.vertices and 0 <= v < self.vertices):
                raise ValueError(f"edge ({u},{i},{v}) leaves the vertex range")
            if not 1 <= i <= self.labels:
                raise ValueError(f"label {i} outside 1..{self.labels}")
            if (v, i) in incoming:
                raise ValueError(f"vertex {v} has two incoming edges labeled {i}")
            incoming[(v, i)] = u

    @classmethod
    def from_edges(cls, vertices: int, labels: int, triples) -> "LabeledGraph":
        edges = {}
        for u, i, v in triples:
            if (u, i) in edges:
                raise ValueError(f"vertex {u} has two outgoing edges labeled {i}")
            edges[(u, i)] = v
        return cls(vertices, labels, edges)

    def to_json(self) -> dict:
        return {"vertices": self.vertices, "labels": self.labels,
                "edges": [[u, i, v] for (u, i), v in sorted(self.edges.items())]}

    @classmethod
    def from_json(cls, obj) -> "LabeledGraph":
        return cls.from_edges(int(obj["vertices"]), int(obj["labels"]), obj["edges"])

    @classmethod
    def load(cls, path: str) -> "LabeledGraph":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def neighborhood(self, root: int, radius: int) -> Ball:
        """Induced rooted ball around ``root``, vertices in breadth-first
        order (root first), following edges both ways."""
        adj: dict = {}
        for (u, i), v in self.edges.items():
            adj.setdefault(u, []).append((i, 1, v))
            adj.setdefault(v, []).append((i, -1, u))
        for lst in adj.values():
            lst.sort(key=lambda t: (t[0], -t[1]))
        local = {root: 0}
        depth = [0]
        queue = deque([root])
        while queue:
            u = queue.popleft()
            d = depth[local[u]]
            if d == radius:
                continue
            for _, _, v in adj.get(u, ()):
                if v not in local:
                    local[v] = len(depth)
                    depth.append(d + 1)
                    queue.append(v)
        edges = {(local[u], i): local[v] for (u, i), v in self.edges.items()
                 if u in local and v in local}
        return Ball(radius, self.labels, len(depth), edges, depth)


@dataclass
class SoficReport:
    good: list
    vertices: int
    n: int
    passed: bool

    def to_json(self) -> dict:
        return {"good": self.good, "count": len(self.good), "vertices": self.vertices,
                "n": self.n, "pass": self.passed}


def sofic_check(g: LabeledGraph, m: MarkedGroup, n: int) -> SoficReport:
    """Good vertices have n-neighbourhoods isomorphic to the Cayley n-ball;
    passes iff |W| > (1 - 1/n)|V|, compared exactly."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if g.labels != m.rank:
        raise ValueError("graph labels and marking length differ")
    ref = exact_ball(m, n)
    good = [p for p in range(g.vertices) if ball_isomorphic(g.neighborhood(p, n), ref)]
    passed = len(good) * n > (n - 1) * g.vertices
    return SoficReport(good, g.vertices, n, passed)


def sofic_from_quotient(d: int, moduli) -> LabeledGraph:
    """Cayley graph of Z^d / (m_1 Z x ... x m_d Z) for the standard marking.
    Vertices are tuples in lexicographic order."""
    moduli = tuple(int(k) for k in moduli)
    if len(moduli) != d:
        raise ValueError("need one modulus per coordinate")
    if any(k <= 0 for k in moduli):
        raise ValueError("moduli must be positive")
    points = list(itertools.product(*(range(k) for k in moduli)))
    index = {p: i for i, p in enumerate(points)}
    edges = {}
    for p in points:
        for i in range(d):
            q = list(p)
            q[i] = (q[i] + 1) % moduli[i]
            edges[(index[p], i + 1)] = index[tuple(q)]
    return LabeledGraph(len(points), d, edges)
