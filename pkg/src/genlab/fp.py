"""Bounded semi-decision of the word problem for finite presentations.

Equality ``u = v`` is proven by exhibiting ``u v^-1`` as a product of
conjugates of relators; the search inserts cyclic rotations of relators
(or their inverses) into the word and freely reduces, best-first by word
length. Inequality is proven only by a homomorphism into a symmetric group
of small degree that respects every relator and separates the pair.
"""

from __future__ import annotations

import heapq
import itertools
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from genlab.groups import GroupOracle, _free_mul, _intword_to_word
from genlab.presentations import Presentation
from genlab.verdict import Verdict
from genlab.words import VAR, Letter, Word

DEFAULT_BOUND = 2000
DEFAULT_DEGREE = 5
DEFAULT_QUOTIENT_BUDGET = 20000
# a short derivation attempt runs before the quotient search; both are sound
# and mutually exclusive, so the order only affects speed
QUICK_BOUND = 50


def default_bound() -> int:
    raw = os.environ.get("GENLAB_DEFAULT_BOUND")
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise ValueError(f"GENLAB_DEFAULT_BOUND must be an integer, got {raw!r}")
        if value < 1:
            raise ValueError("GENLAB_DEFAULT_BOUND must be positive")
        return value
    return DEFAULT_BOUND


# --- integer words: +i / -i for the i-th generator ---------------------------

def reduce_int(letters: Iterable[int]) -> tuple:
    out: list = []
    for g in letters:
        if out and out[-1] == -g:
            out.pop()
        else:
            out.append(g)
    return tuple(out)


def inverse_int(w: Sequence[int]) -> tuple:
    return tuple(-g for g in reversed(w))


def word_to_int(w: Word) -> tuple:
    """Generator letters as signed ints; variables and constants alike map
    to their index."""
    return tuple(l.index * l.sign for l in w.letters)


def int_to_word(w: Sequence[int], kind: str = VAR) -> Word:
    return Word(tuple(Letter(kind, abs(g), 1 if g > 0 else -1) for g in w))


class RelatorIndex:
    """Rotations of relators and their inverses, indexed by first and last
    letter. Can be extended in place."""

    def __init__(self, relators: Iterable[Sequence[int]] = ()):
        self.relators: list = []
        self.by_first: dict = {}
        self.by_last: dict = {}
        self._seen: set = set()
        for r in relators:
            self.add(r)

    def add(self, r: Sequence[int]) -> int | None:
        r = tuple(r)
        if not r or r in self._seen:
            return None
        self._seen.add(r)
        idx = len(self.relators)
        self.relators.append(r)
        for sign, base in ((1, r), (-1, inverse_int(r))):
            seen_rot = set()
            for shift in range(len(base)):
                rot = base[shift:] + base[:shift]
                if rot in seen_rot:
                    continue
                seen_rot.add(rot)
                entry = (rot, idx, sign, shift)
                self.by_first.setdefault(rot[0], []).append(entry)
                self.by_last.setdefault(rot[-1], []).append(entry)
        return idx

    def truncate(self, n: int):
        """Forget every relator added after the first ``n``."""
        for r in self.relators[n:]:
            self._seen.discard(r)
        del self.relators[n:]
        for table in (self.by_first, self.by_last):
            for key in list(table):
                entries = table[key]
                while entries and entries[-1][1] >= n:
                    entries.pop()
                if not entries:
                    del table[key]

    def __len__(self):
        return len(self.relators)


@dataclass
class Derivation:
    """Certificate that ``word`` is trivial: ``word`` equals the product, in
    order, of ``conj * relator^sign * conj^-1`` over ``conjugates``."""

    word: tuple
    conjugates: list = field(default_factory=list)  # (conj, relator, sign)

    def __len__(self):
        return len(self.conjugates)

    def to_json(self, kind: str = VAR) -> dict:
        return {
            "word": int_to_word(self.word, kind).render(),
            "conjugates": [
                {"conjugator": int_to_word(u, kind).render(),
                 "relator": int_to_word(r, kind).render(),
                 "sign": s}
                for u, r, s in self.conjugates
            ],
        }


def verify_derivation(relators: Iterable[Sequence[int]], cert: Derivation) -> bool:
    """Multiply out the conjugates in the free group and compare."""
    rels = {tuple(r) for r in relators}
    acc: tuple = ()
    for u, r, s in cert.conjugates:
        r = tuple(r)
        if r not in rels or s not in (1, -1):
            return False
        rr = r if s > 0 else inverse_int(r)
        acc = reduce_int(acc + tuple(u) + rr + inverse_int(u))
    return acc == reduce_int(cert.word)


def _join(a: tuple, b: tuple) -> tuple:
    """Product of two reduced words: cancel only at the seam."""
    i = 0
    la, lb = len(a), len(b)
    while i < la and i < lb and a[la - 1 - i] == -b[i]:
        i += 1
    return a[:la - i] + b[i:]


def derive_trivial(word: Sequence[int], index: RelatorIndex, bound: int) -> Derivation | None:
    """Best-first search for a derivation of ``word = e``.

    Expands at most ``bound`` words. Only insertions that cancel against a
    neighbouring letter are generated. The expansion order is fixed, so a
    derivation found at one bound is found again at any larger bound.
    """
    start = reduce_int(word)
    if not start:
        return Derivation(start, [])
    parent: dict = {start: None}
    counter = itertools.count()
    heap = [(len(start), next(counter), start)]
    expansions = 0
    while heap and expansions < bound:
        _, _, w = heapq.heappop(heap)
        expansions += 1
        L = len(w)
        for pos in range(L + 1):
            cands = []
            if pos > 0:
                cands.extend(index.by_first.get(-w[pos - 1], ()))
            if pos < L:
                cands.extend(index.by_last.get(-w[pos], ()))
            done_here = set()
            for rot, ridx, sign, shift in cands:
                if rot in done_here:
                    continue
                done_here.add(rot)
                child = _join(_join(w[:pos], rot), w[pos:])
                if child in parent:
                    continue
                parent[child] = (w, pos, ridx, sign, shift)
                if not child:
                    return _build_derivation(start, child, parent, index)
                heapq.heappush(heap, (len(child), next(counter), child))
    return None


def _build_derivation(start, end, parent, index) -> Derivation:
    steps = []
    node = end
    while parent[node] is not None:
        prev, pos, ridx, sign, shift = parent[node]
        steps.append((prev, pos, ridx, sign, shift))
        node = prev
    steps.reverse()
    conjugates = []
    for prev, pos, ridx, sign, shift in steps:
        base = index.relators[ridx] if sign > 0 else inverse_int(index.relators[ridx])
        q = base[:shift]
        u = reduce_int(prev[:pos] + inverse_int(q))
        # word_j = C_j word_{j-1}; so word = prod C_j^{-1}
        conjugates.append((u, index.relators[ridx], -sign))
    return Derivation(start, conjugates)


# --- finite quotients ---------------------------------------------------------

def _pmul(p, q):
    # left-to-right composition: apply p then q
    return tuple(q[i] for i in p)


def _pinv(p):
    out = [0] * len(p)
    for i, v in enumerate(p):
        out[v] = i
    return tuple(out)


def _image(word, images, ident):
    out = ident
    for g in word:
        img = images[abs(g)]
        out = _pmul(out, img if g > 0 else _pinv(img))
    return out


@dataclass
class Separation:
    """Certificate that ``word`` is nontrivial: a homomorphism to S_degree."""

    word: tuple
    degree: int
    images: dict  # generator index -> permutation tuple

    def to_json(self, kind: str = VAR) -> dict:
        return {"word": int_to_word(self.word, kind).render(), "degree": self.degree,
                "images": {f"{kind}{g}": list(p) for g, p in sorted(self.images.items())}}


def verify_separation(relators: Sequence[Sequence[int]], cert: Separation) -> bool:
    ident = tuple(range(cert.degree))
    images = dict(cert.images)
    for r in relators:
        for g in r:
            images.setdefault(abs(g), ident)
    for g in cert.word:
        images.setdefault(abs(g), ident)
    for p in images.values():
        if sorted(p) != list(ident):
            return False
    if any(_image(r, images, ident) != ident for r in relators):
        return False
    return _image(cert.word, images, ident) != ident


def separate(word: Sequence[int], relators: Sequence[Sequence[int]], degree: int,
             budget: int = DEFAULT_QUOTIENT_BUDGET) -> Separation | None:
    """Look for a homomorphism into S_d (2 <= d <= degree) sending every
    relator to the identity and ``word`` elsewhere.

    Generators outside the relator-connected component of ``word`` are sent
    to the identity, which satisfies every relator. Assignments are tried in
    lexicographic order; relators with a single unassigned letter force it.
    """
    word = reduce_int(word)
    if not word or degree < 2:
        return None
    rels = [tuple(r) for r in relators]
    gens_of = [frozenset(abs(g) for g in r) for r in rels]
    touching: dict = {}
    for i, gs in enumerate(gens_of):
        for g in gs:
            touching.setdefault(g, []).append(i)
    # component of the word's generators
    order: list = []
    seen: set = set()
    frontier = sorted({abs(g) for g in word})
    while frontier:
        nxt = []
        for g in frontier:
            if g in seen:
                continue
            seen.add(g)
            order.append(g)
            for ri in touching.get(g, ()):
                for h in sorted(gens_of[ri]):
                    if h not in seen:
                        nxt.append(h)
        frontier = sorted(set(nxt))
    active_rels = sorted({ri for g in order for ri in touching.get(g, ())})
    nodes = [0]
    for d in range(2, degree + 1):
        ident = tuple(range(d))
        perms = list(itertools.permutations(range(d)))
        found = _hom_search(word, order, rels, active_rels, touching, perms, ident, budget, nodes)
        if found is not None:
            return Separation(word, d, found)
        if nodes[0] >= budget:
            return None
    return None


def _hom_search(word, order, rels, active_rels, touching, perms, ident, budget, nodes):
    images: dict = {}

    def solve_forced(ri):
        # relator with one unassigned generator occurring once: solve it
        r = rels[ri]
        missing = [i for i, g in enumerate(r) if abs(g) not in images]
        if len(missing) != 1:
            return None
        pos = missing[0]
        g = r[pos]
        left = _image(r[:pos], images, ident)
        right = _image(r[pos + 1:], images, ident)
        # left * x * right = id  =>  x = left^-1 right^-1
        val = _pmul(_pinv(left), _pinv(right))
        return abs(g), (val if g > 0 else _pinv(val))

    def propagate(changed):
        stack = list(changed)
        assigned = []
        while stack:
            g = stack.pop()
            for ri in touching.get(g, ()):
                r = rels[ri]
                unassigned = {abs(h) for h in r if abs(h) not in images}
                if not unassigned:
                    if _image(r, images, ident) != ident:
                        return False, assigned
                elif len(unassigned) == 1:
                    (h,) = unassigned
                    if sum(1 for x in r if abs(x) == h) == 1:
                        forced = solve_forced(ri)
                        if forced is not None:
                            images[h] = forced[1]
                            assigned.append(h)
                            stack.append(h)
        return True, assigned

    def dfs(i):
        while i < len(order) and order[i] in images:
            i += 1
        if i == len(order):
            return _image(word, images, ident) != ident
        g = order[i]
        for p in perms:
            nodes[0] += 1
            if nodes[0] > budget:
                return False
            images[g] = p
            ok, assigned = propagate([g])
            if ok and dfs(i + 1):
                return True
            for h in assigned:
                del images[h]
            del images[g]
        return False

    if dfs(0):
        return dict(images)
    return None


# --- the oracle ---------------------------------------------------------------

class FPGroup(GroupOracle):
    """Group given by a finite presentation; equality is three-valued."""

    exact = False

    def __init__(self, presentation: Presentation, bound: int | None = None,
                 degree: int = DEFAULT_DEGREE, quotient_budget: int = DEFAULT_QUOTIENT_BUDGET):
        self.presentation = presentation
        self.bound = default_bound() if bound is None else bound
        if self.bound < 1:
            raise ValueError("bound must be positive")
        self.degree = degree
        self.quotient_budget = quotient_budget
        self.name = f"fp{presentation}"
        self.identity = ()
        self.generators = tuple((i,) for i in range(1, presentation.generators + 1))
        self.relators = [word_to_int(r) for r in presentation.relators]
        self.index = RelatorIndex(self.relators)

    def mul(self, a, b):
        return _free_mul(a, b)

    def inv(self, a):
        return inverse_int(a)

    def render(self, a):
        return _intword_to_word(a).render()

    def element(self, w: Word) -> tuple:
        if w.constants():
            raise ValueError("presentation words cannot contain constants")
        return word_to_int(w)

    def eq(self, a, b) -> Verdict:
        w = reduce_int(tuple(a) + inverse_int(b))
        if not w:
            return Verdict.yes(Derivation(w, []), self.bound)
        der = derive_trivial(w, self.index, min(self.bound, QUICK_BOUND))
        if der is not None:
            return Verdict.yes(der, self.bound)
        sep = separate(w, self.relators, self.degree, self.quotient_budget)
        if sep is not None:
            return Verdict.no(sep, self.bound)
        if self.bound > QUICK_BOUND:
            der = derive_trivial(w, self.index, self.bound)
            if der is not None:
                return Verdict.yes(der, self.bound)
        return Verdict.unknown(self.bound)

    def verify(self, verdict: Verdict) -> bool:
        """Re-check the certificate carried by a definite verdict."""
        if verdict.is_yes:
            return verify_derivation(self.relators, verdict.certificate)
        if verdict.is_no:
            return verify_separation(self.relators, verdict.certificate)
        return False

    def enumerate(self, limit):
        raise NotImplementedError("finitely presented groups have no exact enumeration")


def fp_oracle(p: Presentation, bound: int | None = None, degree: int = DEFAULT_DEGREE,
              quotient_budget: int = DEFAULT_QUOTIENT_BUDGET) -> FPGroup:
    return FPGroup(p, bound, degree, quotient_budget)
