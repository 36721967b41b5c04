"""One test per acceptance criterion; each prints a PASS/FAIL line."""

import itertools
import json
import math
import random
import time
from contextlib import contextmanager
from fractions import Fraction

import pytest

from genlab.approximation import Balls, LabeledGraph, folner_check, folner_search, sofic_check
from genlab.ec import is_ec_in
from genlab.forcing import Centralizer, RandomPlayer, auto_game, compile, replay
from genlab.fp import (RelatorIndex, derive_trivial, fp_oracle, inverse_int, reduce_int,
                       verify_derivation, word_to_int)
from genlab.groups import builtin, cyclic, marking_env, satisfies, small_finite_groups
from genlab.marked import MarkedGroup, ball_to_system, exact_ball, marked_distance
from genlab.orderability import (biorderable_test, left_order_test, locally_indicable_test,
                                 replay as replay_trace, upp_test, verify_trace)
from genlab.partial import check_laws
from genlab.presentations import Presentation
from genlab.words import parse_word

import oracles


@contextmanager
def criterion(number, text, capsys):
    ok = False
    try:
        yield
        ok = True
    finally:
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {text}")


def timed(fn, *args, **kwargs):
    t = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t


# --- 1 ------------------------------------------------------------------------

def test_criterion_1_orderability_refutations(capsys):
    with criterion(1, "bi-order refutation of BS(1,-1); Z/n refuted at m = n", capsys):
        bs = builtin("BS(1,-1)")
        F = list(bs.generators)
        v, dt = timed(biorderable_test, bs, F, 3)
        assert v.is_no and len(v.certificate) == 4 and dt < 1
        for t in v.certificate:
            assert len(t.steps) <= 3 and verify_trace(bs, F, t, "bi")
            assert replay_trace(bs, F, t)[-1] == bs.identity
        for n in range(2, 9):
            v, dt = timed(left_order_test, cyclic(n), [1], n)
            assert v.is_no and dt < 1
            assert all(verify_trace(cyclic(n), [1], t, "left") for t in v.certificate)
            assert not left_order_test(cyclic(n), [1], n - 1).is_no


# --- 2 ------------------------------------------------------------------------

def test_criterion_2_orderable_groups_never_refuted(capsys):
    with criterion(2, "200 random left/LI instances on Z, Z^2, F2, BS(1,-1): no refutation",
                   capsys):
        rng = random.Random(2024)
        names = ["Z", "Z^2", "F2", "BS(1,-1)"]
        groups = {n: builtin(n) for n in names}
        pools = {n: [g for g in exact_ball(MarkedGroup.standard(o), 2).elements
                     if g != o.identity] for n, o in groups.items()}
        start = time.perf_counter()
        seen = set()
        for _ in range(200):
            name = rng.choice(names)
            o = groups[name]
            F = rng.sample(pools[name], rng.randint(1, min(3, len(pools[name]))))
            m = rng.randint(1, 8)
            seen.add(name)
            assert not left_order_test(o, F, m, cap=2000).is_no, (name, F, m)
            assert not locally_indicable_test(o, F, m, cap=2000).is_no, (name, F, m)
        assert seen == set(names)
        assert time.perf_counter() - start < 60


# --- 3 ------------------------------------------------------------------------

def left_refutations():
    out = []
    for g in small_finite_groups(8):
        for a in g.elements():
            if a == g.identity:
                continue
            order = next(k for k in range(1, g.order + 1) if g.power(a, k) == g.identity)
            out.append((g, [a], order))
    rng = random.Random(7)
    for g in small_finite_groups(8)[1:]:
        nontrivial = [a for a in g.elements() if a != g.identity]
        for _ in range(3):
            F = rng.sample(nontrivial, min(2, len(nontrivial)))
            out.append((g, F, g.order))
    return out


def test_criterion_3_refutation_hierarchy(capsys):
    with criterion(3, "every left-order refutation replays in the LI and BO closures",
                   capsys):
        count = 0
        for g, F, m in left_refutations():
            v = left_order_test(g, F, m)
            if not v.is_no:
                continue
            for t in v.certificate:
                assert verify_trace(g, F, t, "left")
                assert verify_trace(g, F, t, "li")
                assert verify_trace(g, F, t, "bi")
                assert replay_trace(g, F, t)[-1] == g.identity
                count += 1
            assert locally_indicable_test(g, F, m).is_no
            assert biorderable_test(g, F, m).is_no
        assert count > 50


# --- 4 ------------------------------------------------------------------------

def test_criterion_4_marked_metric(capsys):
    with criterion(4, "marked distance Z vs Z/N matches the relation oracle; ultrametric",
                   capsys):
        start = time.perf_counter()
        z = MarkedGroup.standard(builtin("Z"))
        marked = {"Z": z}
        for N in range(2, 13):
            zn = MarkedGroup(cyclic(N), (1,))
            marked[f"Z/{N}"] = zn
            d = marked_distance(z, zn, 10)
            n = oracles.agreement_radius(oracles.integers(), oracles.cyclic(N), 10)
            assert d.kind == "exact" and d.exponent == n
            assert d.value == math.exp(-n)
            if N == 5:
                assert d.exponent == 1
        dist = {}
        for a, b in itertools.combinations(marked, 2):
            dist[(a, b)] = dist[(b, a)] = marked_distance(marked[a], marked[b], 10)
        triples = 0
        for a, b, c in itertools.permutations(marked, 3):
            ab, bc, ac = dist[(a, b)], dist[(b, c)], dist[(a, c)]
            if ab.kind == bc.kind == ac.kind == "exact":
                assert ac.value <= max(ab.value, bc.value)
                triples += 1
        assert triples > 0
        assert time.perf_counter() - start < 5


# --- 5 ------------------------------------------------------------------------

BUILTIN_MARKED = ["trivial", "Z", "Z^2", "Z^3", "F2", "BS(1,-1)", "BS(1,2)", "BS(1,3)",
                  "lamplighter", "Z/5", "Z/7-table", "S3", "D4", "Q8", "V4", "Z/2xZ/4"]


def test_criterion_5_ball_system_round_trip(capsys):
    with criterion(5, "every built-in marked ball (radius <= 3) satisfies its own system",
                   capsys):
        for name in BUILTIN_MARKED:
            o = builtin(name)
            m = MarkedGroup.standard(o)
            for r in range(4):
                s = ball_to_system(exact_ball(m, r))
                assert satisfies(o, s, marking_env(m.marking)).is_yes, (name, r)


# --- 6 ------------------------------------------------------------------------

def test_criterion_6_folner(capsys):
    with criterion(6, "Folner interval in Z, radius-10 search, F2 2-ball failure", capsys):
        start = time.perf_counter()
        z = builtin("Z")
        rep = folner_check(z, [1, -1], range(21), Fraction(1, 10))
        assert rep.passed and rep.sizes == [2, 2]
        rep = folner_search(z, [1, -1], Fraction(1, 10), Balls(25))
        assert rep is not None and sorted(rep.K) == list(range(-10, 11))
        f2 = builtin("F2")
        a, b = f2.generators
        K = exact_ball(MarkedGroup.standard(f2), 2).elements
        rep = folner_check(f2, [a, f2.inv(a), b, f2.inv(b)], K, Fraction(1, 2))
        strings = set(oracles.all_reduced("ab", 2))
        shifted = {oracles.sreduce("a" + s) for s in strings}
        assert not rep.passed and rep.sizes[0] == len(shifted ^ strings) == 18
        assert time.perf_counter() - start < 5


# --- 7 ------------------------------------------------------------------------

def test_criterion_7_sofic_cycles(capsys):
    with criterion(7, "C_N is a sofic n-approximation of Z iff N >= 2n+2", capsys):
        z = MarkedGroup.standard(builtin("Z"))
        for n in (2, 3, 4):
            ref = oracles.path_canonical(n)
            for N in range(4, 15):
                edges = oracles.cycle_edges(N)
                rep = sofic_check(LabeledGraph(N, 1, edges), z, n)
                good = [p for p in range(N)
                        if oracles.canonical_neighbourhood(N, 1, edges, p, n) == ref]
                assert rep.good == good
                assert rep.passed == (len(good) * n > (n - 1) * N) == (N >= 2 * n + 2)


# --- 8 ------------------------------------------------------------------------

def test_criterion_8_upp(capsys):
    with criterion(8, "UPP fails on Z/2, holds on 100 random subset pairs of Z", capsys):
        assert upp_test(cyclic(2), [0, 1], [0, 1]).is_no
        rng = random.Random(8)
        z = builtin("Z")
        for _ in range(100):
            X = sorted(rng.sample(range(-50, 51), rng.randint(1, 8)))
            Y = sorted(rng.sample(range(-50, 51), rng.randint(1, 8)))
            v = upp_test(z, X, Y)
            assert v.is_yes
            assert v.certificate == (max(X) + max(Y), max(X), max(Y))
            assert [(x, y) for x in X for y in Y if x + y == v.certificate[0]] == \
                [(max(X), max(Y))]


# --- 9 ------------------------------------------------------------------------

def test_criterion_9_forcing_engine(capsys):
    with criterion(9, "200-round centralizer game: lawful compile, pairs <= 10, "
                      "witnesses, byte-exact replay", capsys):
        start = time.perf_counter()
        strategy = Centralizer()
        st = auto_game(200, strategy, RandomPlayer(7))
        table = compile(st)
        assert check_laws(table) == []
        for m, n in itertools.product(range(1, 11), repeat=2):
            assert (m, n) in table.products
        for y, batch in strategy.batches:
            assert frozenset({y}) in table.inequalities
            assert all(frozenset({y, a}) in table.commuting for a in batch)
        text = st.dumps_log()
        again = replay(json.loads(text))
        assert again.dumps_log() == text
        assert compile(again) == table
        assert time.perf_counter() - start < 30


# --- 10 -----------------------------------------------------------------------

def test_criterion_10_existential_closedness(capsys):
    with criterion(10, "Z/2 not e.c. in Z/4 (witness ~ y*y = a); every small group e.c. "
                       "in itself", capsys):
        start = time.perf_counter()
        G, H = cyclic(2), cyclic(4)
        v = is_ec_in(G, H, {0: 0, 1: 2}, max_vars=2, max_len=4)
        assert v.is_no
        ours = []
        for text in v.certificate["rendered"]:
            word, equal = (text[:-5], False) if text.endswith(" != e") else (text[:-4], True)
            ours.append(([(l.kind, l.index, l.sign) for l in parse_word(word).letters], equal))
        square_is_a = [([("x", 1, 1), ("x", 1, 1), ("c", 1, -1)], True)]
        tg = [[(i + j) % 2 for j in range(2)] for i in range(2)]
        th = [[(i + j) % 4 for j in range(4)] for i in range(4)]
        assert oracles.solutions(th, 0, ours, {1: 2}, 1) == \
            oracles.solutions(th, 0, square_is_a, {1: 2}, 1) != []
        assert oracles.solutions(tg, 0, ours, {1: 1}, 1) == \
            oracles.solutions(tg, 0, square_is_a, {1: 1}, 1) == []
        for g in small_finite_groups(8) + [builtin("V4")]:
            assert is_ec_in(g, g, max_vars=2, max_len=4).is_yes, g.name
        assert time.perf_counter() - start < 60


# --- 11 -----------------------------------------------------------------------

PRESENTATIONS = {
    "Z^2": (2, ["x1*x2*x1^-1*x2^-1"]),
    "Z/2": (1, ["x1^2"]),
    "Z/3": (1, ["x1^3"]),
    "Z/5": (1, ["x1^5"]),
    "Z/6": (1, ["x1^6"]),
    "F2": (2, []),
    "BS(1,2)": (2, ["x2*x1*x2^-1*x1^-2"]),
    "BS(1,3)": (2, ["x2*x1*x2^-1*x1^-3"]),
    "Klein bottle": (2, ["x2*x1*x2^-1*x1"]),
    "S3": (2, ["x1^3", "x2^2", "x1*x2*x1*x2"]),
    "D4": (2, ["x1^4", "x2^2", "x1*x2*x1*x2"]),
    "Q8": (2, ["x1^4", "x1^2*x2^-2", "x2*x1*x2^-1*x1"]),
    "A4": (2, ["x1^2", "x2^3", "x1*x2*x1*x2*x1*x2"]),
    "V4": (2, ["x1^2", "x2^2", "x1*x2*x1^-1*x2^-1"]),
    "Z/2xZ/4": (2, ["x1^2", "x2^4", "x1*x2*x1^-1*x2^-1"]),
    "trefoil": (2, ["x1^2*x2^-3"]),
    "Z/2*Z/3": (2, ["x1^2", "x2^3"]),
    "Z^3": (3, ["x1*x2*x1^-1*x2^-1", "x1*x3*x1^-1*x3^-1", "x2*x3*x2^-1*x3^-1"]),
    "Heisenberg": (3, ["x3*x1*x3^-1*x1^-1", "x3*x2*x3^-1*x2^-1",
                       "x1*x2*x1^-1*x2^-1*x3^-1"]),
    "genus 2": (4, ["x1*x2*x1^-1*x2^-1*x3*x4*x3^-1*x4^-1"]),
}


def presentations():
    return {k: Presentation(n, tuple(parse_word(r) for r in rs))
            for k, (n, rs) in PRESENTATIONS.items()}


def random_word(rng, k, length):
    return reduce_int([rng.choice([1, -1]) * rng.randint(1, k) for _ in range(length)])


def conjugate_product(rng, k, relators, parts, conj_len):
    w = ()
    for _ in range(parts):
        r = rng.choice(relators)
        r = r if rng.random() < 0.5 else inverse_int(r)
        c = random_word(rng, k, rng.randint(0, conj_len))
        w = reduce_int(w + c + r + inverse_int(c))
    return w


def string_check(relators, cert):
    rels = {oracles.int_to_str(r) for r in relators}
    acc = ""
    for u, r, s in cert.conjugates:
        rs = oracles.int_to_str(r)
        if rs not in rels:
            return False
        us = oracles.int_to_str(u)
        acc = oracles.sreduce(acc + us + (rs if s > 0 else oracles.sinv(rs)) + oracles.sinv(us))
    return acc == oracles.sreduce(oracles.int_to_str(cert.word))


def test_criterion_11_fp_soundness(capsys):
    with criterion(11, "500 derivation certificates re-verify; eq monotone in the bound "
                       "on 20 presentations", capsys):
        rng = random.Random(11)
        pres = presentations()
        assert len(pres) == 20
        with_relators = [p for p in pres.values() if p.relators]
        verified = 0
        attempts = 0
        while verified < 500 and attempts < 5000:
            attempts += 1
            p = rng.choice(with_relators)
            rels = [word_to_int(r) for r in p.relators]
            w = conjugate_product(rng, p.generators, rels, rng.randint(1, 3), 3)
            cert = derive_trivial(w, RelatorIndex(rels), 2000)
            if cert is None:
                continue
            assert verify_derivation(rels, cert)
            assert string_check(rels, cert)
            verified += 1
        assert verified == 500

        order = {"unknown": 0, "yes": 1, "no": 1}
        transitions = set()
        for name, p in pres.items():
            rels = [word_to_int(r) for r in p.relators]
            oracles_by_bound = [fp_oracle(p, b) for b in (10, 100, 1000)]
            pairs = []
            for _ in range(6):
                pairs.append((random_word(rng, p.generators, rng.randint(0, 6)),
                              random_word(rng, p.generators, rng.randint(0, 6))))
            if rels:
                for _ in range(6):
                    w = random_word(rng, p.generators, rng.randint(0, 4))
                    extra = conjugate_product(rng, p.generators, rels, rng.randint(2, 5), 5)
                    pairs.append((reduce_int(w + extra), w))
            for u, w in pairs:
                outs = [o.eq(u, w).outcome.value for o in oracles_by_bound]
                transitions.add(tuple(outs))
                definite = [x for x in outs if x != "unknown"]
                assert len(set(definite)) <= 1, (name, u, w, outs)
                ranks = [order[x] for x in outs]
                assert ranks == sorted(ranks), (name, u, w, outs)
                for o, x in zip(oracles_by_bound, outs):
                    if x != "unknown":
                        assert o.verify(o.eq(u, w))
        assert ("yes", "yes", "yes") in transitions and ("no", "no", "no") in transitions


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
