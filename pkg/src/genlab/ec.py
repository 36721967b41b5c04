"""Bounded existential closedness between finite groups.

G sits in H through an embedding. G is e.c. in H at given bounds when every
system of equations and inequations, with parameters from G, at most
``max_vars`` unknowns and words of length at most ``max_len``, that has a
solution in H already has one in G.

Rather than enumerate systems one by one, each tuple h in H^v gets a
profile: which words vanish at h. A system is solvable at h exactly when it
is a subset of that profile (read as clauses), so the bounded condition
holds iff every profile of an H-tuple is also the profile of a G-tuple.
"""

from __future__ import annotations

import itertools

import numpy as np

from genlab.groups import GroupOracle
from genlab.verdict import Verdict
from genlab.words import CONST, VAR, Equation, Letter, System, Word


def check_embedding(G: GroupOracle, H: GroupOracle, embedding: dict) -> None:
    gs = G.elements()
    if set(embedding) != set(gs):
        raise ValueError("embedding must be defined on every element of G")
    image = [embedding[g] for g in gs]
    if len(set(image)) != len(image):
        raise ValueError("embedding is not injective")
    hs = set(H.elements())
    if not set(image) <= hs:
        raise ValueError("embedding leaves H")
    for a in gs:
        for b in gs:
            if embedding[G.mul(a, b)] != H.mul(embedding[a], embedding[b]):
                raise ValueError(f"embedding is not a homomorphism at "
                                 f"({G.render(a)}, {G.render(b)})")


def default_embedding(G: GroupOracle, H: GroupOracle) -> dict:
    """First injective homomorphism found by backtracking over images of
    G's generators (needs G = H or a small search)."""
    gs = G.elements()
    if G is H:
        return {g: g for g in gs}
    hs = H.elements()
    gens = list(G.generators) or []
    for images in itertools.product(hs, repeat=len(gens)):
        emb = _extend(G, H, dict(zip(gens, images)))
        if emb is not None:
            return emb
    raise ValueError("no embedding found")


def _extend(G, H, partial: dict):
    emb = {G.identity: H.identity}
    frontier = [G.identity]
    for g, h in partial.items():
        if g in emb and emb[g] != h:
            return None
    while frontier:
        nxt = []
        for u in frontier:
            for s, t in partial.items():
                v = G.mul(u, s)
                w = H.mul(emb[u], t)
                if v in emb:
                    if emb[v] != w:
                        return None
                else:
                    emb[v] = w
                    nxt.append(v)
        frontier = nxt
    try:
        check_embedding(G, H, emb)
    except ValueError:
        return None
    return emb


class _Profiles:
    """Values of every bounded word at every tuple of H^v.

    Letters are x_1..x_v with inverses and one constant per non-identity
    element of G; constant inverses and the identity add no new values.
    """

    def __init__(self, G, H, embedding, v, max_len):
        self.hs = H.elements()
        hidx = {h: i for i, h in enumerate(self.hs)}
        n = len(self.hs)
        self.mul = np.array([[hidx[H.mul(a, b)] for b in self.hs] for a in self.hs],
                            dtype=np.int32)
        self.inv = np.array([hidx[H.inv(a)] for a in self.hs], dtype=np.int32)
        self.e = hidx[H.identity]
        self.gs = G.elements()
        params = [(j + 1, g) for j, g in enumerate(self.gs) if g != G.identity]
        self.constants = {j: g for j, g in params}
        self.tuples = np.array(list(itertools.product(range(n), repeat=v)),
                               dtype=np.int32).reshape(-1, v)
        image = {hidx[embedding[g]] for g in self.gs}
        self.in_G = np.array([all(int(c) in image for c in row) for row in self.tuples])
        T = len(self.tuples)
        letters = []
        values = []
        for i in range(1, v + 1):
            col = self.tuples[:, i - 1]
            letters.append(Letter(VAR, i, 1))
            values.append(col)
            letters.append(Letter(VAR, i, -1))
            values.append(self.inv[col])
        for j, g in params:
            letters.append(Letter(CONST, j, 1))
            values.append(np.full(T, hidx[embedding[g]], dtype=np.int32))
        self.letters = letters
        letter_vals = np.stack(values) if values else np.zeros((0, T), dtype=np.int32)
        inverse_of = [letters.index(l.inverse()) if l.kind == VAR else -1 for l in letters]

        layer_words = [()]
        layer_vals = np.full((1, T), self.e, dtype=np.int32)
        layer_last = np.array([-1])
        all_words, all_vals = [], []
        for _ in range(max_len):
            nw, nv, nl = [], [], []
            for li in range(len(letters)):
                keep = layer_last != inverse_of[li] if inverse_of[li] >= 0 else \
                    np.ones(len(layer_words), dtype=bool)
                idx = np.nonzero(keep)[0]
                if not len(idx):
                    continue
                nv.append(self.mul[layer_vals[idx], letter_vals[li][None, :]])
                nw.extend(layer_words[k] + (li,) for k in idx)
                nl.append(np.full(len(idx), li))
            if not nw:
                break
            layer_words, layer_vals, layer_last = nw, np.concatenate(nv), np.concatenate(nl)
            all_words.extend(layer_words)
            all_vals.append(layer_vals)
        self.words = all_words
        self.vanish = (np.concatenate(all_vals) == self.e).T if all_vals else \
            np.zeros((T, 0), dtype=bool)   # tuples x words

    def word(self, k) -> Word:
        return Word(tuple(self.letters[i] for i in self.words[k]))


def _witness(P: _Profiles, h: int):
    """A small system true at H-tuple h and false at every G-tuple: a single
    clause if one exists (shortest first), else a greedy cover."""
    row = P.vanish[h]
    g_rows = P.vanish[P.in_G]
    differs = g_rows != row[None, :]          # G-tuples killed by each clause
    killers = np.nonzero(differs.all(axis=0))[0]
    if len(killers):
        chosen = [int(killers[0])]
    else:
        chosen = []
        alive = np.ones(len(g_rows), dtype=bool)
        while alive.any():
            gain = differs[alive].sum(axis=0)
            k = int(np.argmax(gain))
            chosen.append(k)
            alive &= ~differs[:, k]
    clauses = [Equation(P.word(k), bool(row[k])) for k in sorted(chosen)]
    return System(clauses)


def is_ec_in(G: GroupOracle, H: GroupOracle, embedding: dict | None = None,
             max_vars: int = 2, max_len: int = 4) -> Verdict:
    """Yes at the bounds, or No with a system solvable in H but not in G.

    The witness names parameters c_j for the j-th element of G (in
    ``G.elements()`` order) and unknowns x_1..x_v.
    """
    for o in (G, H):
        if o.order is None or not o.exact:
            raise ValueError(f"{o.name} must be finite and exact")
    if embedding is None:
        embedding = default_embedding(G, H)
    check_embedding(G, H, embedding)
    for v in range(1, max_vars + 1):
        P = _Profiles(G, H, embedding, v, max_len)
        g_keys = {P.vanish[i].tobytes() for i in np.nonzero(P.in_G)[0]}
        for h in range(len(P.tuples)):
            if P.vanish[h].tobytes() in g_keys:
                continue
            system = _witness(P, h)
            return Verdict.no({
                "system": system.to_json(),
                "rendered": [cl.render() for cl in system],
                "parameters": {f"c{j}": G.render(g) for j, g in P.constants.items()},
                "solution_in_H": [H.render(P.hs[int(i)]) for i in P.tuples[h]],
                "vars": v,
            }, max_len)
    return Verdict.yes({"max_vars": max_vars, "max_len": max_len}, max_len)
