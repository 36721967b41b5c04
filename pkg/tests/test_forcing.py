import copy
import itertools
import json

import pytest
from hypothesis import given, settings, strategies as st

from genlab.forcing import (ALL, TORSION_FREE, Centralizer, GameState, IllegalMove, Move,
                            RandomPlayer, auto_game, commutator_clause, compile,
                            consistency_check, definitive_schedule, diagonal_pairs,
                            first_inconsistent_move, induced_oracle, instantiate,
                            pairs_needed, play_move, product_clause, replay,
                            strategy_centralizer, strategy_open_dense)
from genlab.groups import builtin, marking_env, satisfies
from genlab.marked import MarkedGroup, ball_isomorphic, ball_to_system, exact_ball
from genlab.partial import check_laws
from genlab.words import Equation, System, eq, neq, parse_word

from oracles import sinv, sreduce


def as_string(text):
    return "".join(chr(96 + l.index) if l.sign > 0 else chr(64 + l.index)
                   for l in parse_word(text).letters)


# --- consistency ------------------------------------------------------------

def test_consistency_examples():
    v = consistency_check(System([eq("c1"), neq("c1")]))
    assert v.is_no and v.certificate["clause"] == "c1 != e"
    assert consistency_check(System([eq("c1*c2*c3^-1"), neq("c1")])).is_yes
    s = System([eq("c1^2"), neq("c1")])
    assert consistency_check(s).is_yes
    v = consistency_check(s, TORSION_FREE)
    assert v.is_no and v.certificate["torsion"]["power"] == 2


def test_consistency_refutation_carries_a_derivation():
    s = System([eq("c1*c2*c3^-1"), eq("c3"), neq("c1*c2")])
    v = consistency_check(s)
    assert v.is_no
    der = v.certificate["derivation"]
    relators = {as_string(cl.word.render()) for cl in s.equations()}
    acc = ""
    for part in der["conjugates"]:
        u, r = as_string(part["conjugator"]), as_string(part["relator"])
        assert r in relators
        acc = sreduce(acc + u + (r if part["sign"] > 0 else sinv(r)) + sinv(u))
    assert acc == as_string(der["word"]) == as_string("c1*c2")


def test_consistency_unknown_lists_open_clauses():
    s = System([eq("c1*c2*c1^-1*c2^-1"), neq("c1^3*c2^3*c1^-3*c2^-3")])
    v = consistency_check(s, bound=10, degree=0)
    assert v.is_unknown and v.certificate["open"] == ["c1^3*c2^3*c1^-3*c2^-3 != e"]
    assert consistency_check(s, bound=2000, degree=0).is_no


def test_consistency_rejects_variables_and_classes():
    with pytest.raises(ValueError):
        consistency_check(System([eq("x1")]))
    with pytest.raises(ValueError):
        consistency_check(System([]), "abelian")


# --- moves ------------------------------------------------------------------

def test_play_move_examples():
    st0 = GameState()
    first = [eq("c1*c2*c3^-1"), neq("c1")]
    play_move(st0, first)
    assert st0.turn == "II" and st0.clauses == first
    with pytest.raises(IllegalMove):
        play_move(st0, [first[0]])
    st1 = GameState()
    play_move(st1, [neq("c3")])
    before = copy.deepcopy((st1.clauses, st1.closure.table))
    with pytest.raises(IllegalMove):
        play_move(st1, [neq("c3"), eq("c3")])
    assert (st1.clauses, st1.closure.table) == before
    assert st1.turn == "II"


def test_refutation_by_derivation_is_rolled_back():
    st0 = GameState()
    play_move(st0, [eq("c1^3")])
    n_relators = len(st0.index)
    table = copy.deepcopy(st0.closure.table)
    with pytest.raises(IllegalMove) as info:
        play_move(st0, [eq("c1^3"), eq("c1^2"), neq("c1")])
    assert info.value.certificate is not None
    assert len(st0.index) == n_relators and st0.closure.table == table
    assert len(st0.log) == 1


def test_moves_must_use_constants():
    with pytest.raises(ValueError):
        play_move(GameState(), [eq("x1")])


def test_torsion_free_class_rejects_involutions():
    play_move(GameState(), [eq("c1^2"), neq("c1")])
    with pytest.raises(IllegalMove):
        play_move(GameState(cls=TORSION_FREE), [eq("c1^2"), neq("c1")])


def test_move_json_round_trip():
    mv = Move("I", (eq("c1*c2*c3^-1"), neq("c2")))
    assert Move.from_json(json.loads(json.dumps(mv.to_json()))) == mv


# --- scheduling ---------------------------------------------------------------

def test_diagonal_order_and_bound():
    first = list(itertools.islice(diagonal_pairs(), 6))
    assert first == [(1, 1), (1, 2), (2, 1), (1, 3), (2, 2), (3, 1)]
    for M in range(1, 9):
        prefix = list(itertools.islice(diagonal_pairs(), pairs_needed(M)))
        needed = set(itertools.product(range(1, M + 1), repeat=2))
        assert needed <= set(prefix)
        assert not needed <= set(prefix[:-1])


def test_scheduler_uses_least_unused_constant():
    st0 = definitive_schedule(GameState(), 2)
    assert st0.clauses == [product_clause(1, 1, 2), product_clause(1, 2, 3)]
    assert [m.player for m in st0.log] == ["scheduler", "scheduler"]
    assert st0.turn == "I"


def test_scheduler_respects_identity_laws():
    st0 = GameState()
    play_move(st0, [eq("c1")])
    definitive_schedule(st0, 3)
    t = compile(st0)
    assert t.products[(1, 1)] == 1 and t.products[(1, 2)] == 2 and t.products[(2, 1)] == 2
    assert 3 not in t.constants()


def test_product_clause_forms():
    assert product_clause(1, 2, 3).render() == "c1*c2*c3^-1 = e"
    assert product_clause(1, 2, 2).render() == "c2^-1*c1*c2 = e"
    assert product_clause(4, 4, 4).render() == "c4 = e"


class Silent:
    def respond(self, st):
        return []


@settings(max_examples=12, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4))
def test_every_pair_gets_a_product(seed, M):
    st0 = auto_game(pairs_needed(M), Silent(), RandomPlayer(seed))
    t = compile(st0)
    for m, n in itertools.product(range(1, M + 1), repeat=2):
        assert (m, n) in t.products
    assert check_laws(t) == []


def test_compile_examples():
    st0 = GameState()
    play_move(st0, [eq("c1"), eq("c2*c2*c1^-1"), neq("c2*c1^-1")])
    t = compile(st0)
    assert t.products == {(1, 1): 1, (1, 2): 2, (2, 1): 2, (2, 2): 1}
    assert compile(GameState()).products == {}


def test_scheduled_integer_like_play_is_associative():
    st0 = GameState()
    play_move(st0, [eq("c1"), neq("c2")])
    definitive_schedule(st0, 40)
    assert check_laws(compile(st0)) == []


# --- strategies -----------------------------------------------------------------

def test_open_dense_involution():
    target = System([eq("x1^2"), neq("x1")])
    strat = strategy_open_dense(target)
    st0 = auto_game(4, strat, RandomPlayer(3))
    t = compile(st0)
    o = induced_oracle(st0.system, bound=2000)
    for (c,) in strat.placements:
        assert t.inverses[c] == c and frozenset({c}) in t.inequalities
        assert satisfies(o, target, marking_env([o.generators[c - 1]])).is_yes


def test_open_dense_embeds_klein_ball():
    bs = builtin("BS(1,-1)")
    ball = exact_ball(MarkedGroup.standard(bs), 2)
    target = ball_to_system(ball)
    strat = strategy_open_dense(target)
    st0 = auto_game(2, strat, RandomPlayer(11))
    o = induced_oracle(st0.system, bound=2000)
    for placed in strat.placements:
        marking = tuple(o.generators[c - 1] for c in placed)
        assert satisfies(o, target, marking_env(marking)).is_yes
        again = exact_ball(MarkedGroup(o, marking), 2)
        assert ball_isomorphic(ball, again)


def test_open_dense_empty_target_echoes():
    st0 = auto_game(3, strategy_open_dense(System([])), RandomPlayer(5), schedule=False)
    for mv in st0.log:
        if mv.player == "II":
            assert mv.added == ()
    assert [m.player for m in st0.log] == ["I", "II"] * 3


def test_instantiate_renames_variables():
    out = instantiate(System([eq("x1*x2*x1^-1*x2^-1"), neq("x2")]), [7, 4])
    assert [cl.render() for cl in out] == ["c7*c4*c7^-1*c4^-1 = e", "c4 != e"]


def test_centralizer_after_two_constants():
    st0 = GameState()
    play_move(st0, [eq("c1*c1*c2^-1")])
    strat = strategy_centralizer()
    reply = strat.respond(st0)
    assert reply == [commutator_clause(3, 1), commutator_clause(3, 2),
                     Equation(neq("c3").word, False)]
    play_move(st0, st0.clauses + reply)
    assert st0.notes[-1] == "centralizing"
    t = compile(st0)
    assert {frozenset({3, 1}), frozenset({3, 2})} <= t.commuting
    assert check_laws(t) == []


def test_centralizer_iterated():
    strat = Centralizer()
    st0 = auto_game(6, strat, RandomPlayer(2))
    t = compile(st0)
    assert check_laws(t) == []
    seen = set()
    for y, batch in strat.batches:
        assert frozenset({y}) in t.inequalities
        for a in batch:
            assert frozenset({y, a}) in t.commuting
        seen |= set(batch)
    # every constant present before the last reply was centralized
    assert seen >= set(strat.batches[-1][1])


# --- replay -----------------------------------------------------------------

def test_replay_is_deterministic():
    st0 = auto_game(12, Centralizer(), RandomPlayer(9))
    text = st0.dumps_log()
    again = replay(json.loads(text))
    assert again.clauses == st0.clauses
    assert again.dumps_log() == text
    assert compile(again) == compile(st0)
    assert auto_game(12, Centralizer(), RandomPlayer(9)).dumps_log() == text


def test_replay_rejects_tampered_logs():
    log = [{"player": "I", "added_clauses": [{"word": "c1", "eq": False}]},
           {"player": "II", "added_clauses": [{"word": "c1", "eq": True}]}]
    with pytest.raises(IllegalMove):
        replay(log)
    with pytest.raises(ValueError):
        replay([{"player": "III", "added_clauses": []}])


def test_first_inconsistent_move():
    log = [Move("I", (eq("c1*c2*c1^-1*c2^-1"),)),
           Move("II", (neq("c3"),)),
           Move("I", (neq("c1^3*c2^3*c1^-3*c2^-3"),))]
    st0 = replay(log)   # legal at the game bound
    assert len(st0.clauses) == 3
    assert first_inconsistent_move(log, 10, degree=0) is None
    assert first_inconsistent_move(log, 2000) == 2
    assert first_inconsistent_move(st0.log_json(), 2000) == 2


def test_compiled_centralizer_game_satisfies_laws():
    st0 = auto_game(30, Centralizer(), RandomPlayer(4))
    t = compile(st0)
    assert check_laws(t) == []
    for pair in itertools.product(range(1, 5), repeat=2):
        assert pair in t.products
    assert ALL == st0.cls
