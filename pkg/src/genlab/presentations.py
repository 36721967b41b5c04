"""Finite presentations and the constructions used in density arguments:
free products, HNN extensions and amalgamated products."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

from genlab.words import VAR, Letter, Word, free_reduce, parse_word


def shift_word(w: Word, offset: int) -> Word:
    return Word(tuple(Letter(l.kind, l.index + offset, l.sign) for l in w.letters))


@dataclass(frozen=True)
class Presentation:
    """<x_1..x_k | relators>. Relators are stored cyclically reduced."""

    generators: int
    relators: tuple = ()

    def __post_init__(self):
        if self.generators < 1:
            raise ValueError("a presentation needs at least one generator")
        cleaned = []
        seen = set()
        for r in self.relators:
            if isinstance(r, str):
                r = parse_word(r)
            if r.constants():
                raise ValueError(f"relator {r} uses constants")
            if r.arity > self.generators:
                raise ValueError(f"relator {r} uses x{r.arity} but only "
                                 f"{self.generators} generators")
            r = r.cyclic_reduce()
            if r.is_empty or r in seen:
                continue
            seen.add(r)
            cleaned.append(r)
        object.__setattr__(self, "relators", tuple(cleaned))

    def with_relators(self, extra: Iterable) -> "Presentation":
        return Presentation(self.generators, self.relators + tuple(extra))

    def to_json(self) -> dict:
        return {"generators": self.generators, "relators": [r.render() for r in self.relators]}

    @classmethod
    def from_json(cls, obj) -> "Presentation":
        return cls(int(obj["generators"]), tuple(parse_word(r) for r in obj.get("relators", [])))

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    def __str__(self):
        gens = ", ".join(f"x{i}" for i in range(1, self.generators + 1))
        rels = ", ".join(r.render() for r in self.relators)
        return f"<{gens} | {rels}>"


def free_product(pA: Presentation, pB: Presentation) -> Presentation:
    """Disjoint generators; B's indices are shifted past A's."""
    k = pA.generators
    return Presentation(k + pB.generators,
                        pA.relators + tuple(shift_word(r, k) for r in pB.relators))


def _check_constant_free(w: Word, k: int, what: str):
    if w.constants():
        raise ValueError(f"{what} must not use constants")
    if w.arity > k:
        raise ValueError(f"{what} uses x{w.arity}, beyond the {k} generators")


def hnn_extension(p: Presentation, g: Word, h: Word) -> Presentation:
    """<p, t | t^-1 g t = h> with t = x_{k+1}.

    The edge groups are assumed infinite cyclic (or isomorphic via g -> h);
    that obligation is on the caller and is not checked.
    """
    k = p.generators
    _check_constant_free(g, k, "g")
    _check_constant_free(h, k, "h")
    t = Letter(VAR, k + 1, 1)
    rel = free_reduce((t.inverse(),) + g.letters + (t,) + h.inverse().letters)
    return Presentation(k + 1, p.relators + (rel,))


def amalgam(pA: Presentation, wA: Word, pB: Presentation, wB: Word) -> Presentation:
    """A *_{wA = wB} B."""
    _check_constant_free(wA, pA.generators, "wA")
    _check_constant_free(wB, pB.generators, "wB")
    fp_ = free_product(pA, pB)
    rel = wA * shift_word(wB, pA.generators).inverse()
    return fp_.with_relators([rel])


def kill_generator(p: Presentation, i: int) -> Presentation:
    """Add the relator x_i (Tietze: the quotient by x_i)."""
    return p.with_relators([Word((Letter(VAR, i, 1),))])
