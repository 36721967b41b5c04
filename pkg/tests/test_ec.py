import pytest
from hypothesis import given, settings, strategies as st

from genlab.ec import check_embedding, default_embedding, is_ec_in
from genlab.groups import builtin, cyclic, direct_sum, small_finite_groups
from genlab.words import parse_word

from oracles import solutions

GROUPS = small_finite_groups(8)


def table_of(o):
    els = o.elements()
    index = {g: i for i, g in enumerate(els)}
    return [[index[o.mul(a, b)] for b in els] for a in els], index


def parsed_clauses(rendered):
    out = []
    for text in rendered:
        word, equal = (text[:-5], False) if text.endswith(" != e") else (text[:-4], True)
        letters = [(l.kind, l.index, l.sign) for l in parse_word(word).letters]
        out.append((letters, equal))
    return out


def check_witness(G, H, embedding, cert):
    """The witness system has a solution in H and none in G."""
    clauses = parsed_clauses(cert["rendered"])
    gs = G.elements()
    tg, ig = table_of(G)
    th, ih = table_of(H)
    params_g = {j: ig[gs[j - 1]] for j in range(1, len(gs) + 1)}
    params_h = {j: ih[embedding[gs[j - 1]]] for j in range(1, len(gs) + 1)}
    v = cert["vars"]
    assert solutions(th, ih[H.identity], clauses, params_h, v)
    assert not solutions(tg, ig[G.identity], clauses, params_g, v)


def test_z2_in_z4():
    G, H = cyclic(2), cyclic(4)
    emb = {0: 0, 1: 2}
    v = is_ec_in(G, H, emb)
    assert v.is_no
    assert v.certificate["rendered"] == ["x1^2 != e"]
    check_witness(G, H, emb, v.certificate)
    # the witness and "y*y = a" have the same solution sets in both groups
    tg, ig = table_of(G)
    th, ih = table_of(H)
    ours = parsed_clauses(v.certificate["rendered"])
    square_is_a = [([("x", 1, 1), ("x", 1, 1), ("c", 1, -1)], True)]
    a_g, a_h = {1: ig[1]}, {1: ih[2]}
    assert (solutions(th, ih[0], ours, {}, 1) == solutions(th, ih[0], square_is_a, a_h, 1))
    assert solutions(tg, ig[0], ours, {}, 1) == solutions(tg, ig[0], square_is_a, a_g, 1) == []


def test_z2_in_klein_four():
    G, H = cyclic(2), builtin("V4")
    emb = default_embedding(G, H)
    v = is_ec_in(G, H, emb)
    assert v.is_no
    check_witness(G, H, emb, v.certificate)


@pytest.mark.parametrize("g", GROUPS, ids=lambda g: g.name)
def test_every_group_is_ec_in_itself(g):
    v = is_ec_in(g, g, max_vars=2, max_len=4)
    assert v.is_yes and v.certificate == {"max_vars": 2, "max_len": 4}


def embeddable_pairs():
    out = []
    for G in GROUPS:
        for H in GROUPS:
            if H.order % G.order or G.order == H.order and G is not H:
                continue
            try:
                out.append((G, H, default_embedding(G, H)))
            except ValueError:
                pass
    return out


PAIRS = embeddable_pairs()


@pytest.mark.parametrize("G,H,emb", PAIRS, ids=[f"{g.name}-{h.name}" for g, h, _ in PAIRS])
def test_no_witnesses_verify(G, H, emb):
    v = is_ec_in(G, H, emb, max_vars=1, max_len=3)
    if v.is_no:
        check_witness(G, H, emb, v.certificate)
    else:
        assert v.is_yes


def test_proper_extensions_fail_at_length_two():
    """{x != e} together with {x * c_j^-1 != e} over all j is solvable in H
    exactly when H is bigger than G."""
    for G, H, emb in PAIRS:
        v = is_ec_in(G, H, emb, max_vars=1, max_len=2)
        assert v.is_no == (H.order > G.order)


def clause_letters(max_len):
    return st.lists(st.tuples(st.sampled_from(["x", "c"]), st.integers(1, 7),
                              st.sampled_from([1, -1])), min_size=1, max_size=max_len)


@settings(max_examples=80, deadline=None)
@given(st.sampled_from(PAIRS), st.integers(1, 3), st.data())
def test_yes_means_h_solutions_transfer(pair, max_len, data):
    """When the bounded check says Yes, random one-variable systems within
    the word-length bound that are solvable in H are solvable in G."""
    G, H, emb = pair
    if not is_ec_in(G, H, emb, max_vars=1, max_len=max_len).is_yes:
        assert max_len >= 2 and H.order > G.order or G.order == 1
        return
    raw = data.draw(st.lists(st.tuples(clause_letters(max_len), st.booleans()),
                             min_size=1, max_size=3))
    gs = G.elements()
    nontrivial = [j for j in range(1, len(gs) + 1) if gs[j - 1] != G.identity]
    clauses = []
    for letters, equal in raw:
        word = []
        for kind, i, s in letters:
            if kind == "c" and not nontrivial:
                continue
            word.append((kind, 1 if kind == "x" else nontrivial[i % len(nontrivial)], s))
        clauses.append((word, equal))
    tg, ig = table_of(G)
    th, ih = table_of(H)
    params_g = {j: ig[gs[j - 1]] for j in range(1, len(gs) + 1)}
    params_h = {j: ih[emb[gs[j - 1]]] for j in range(1, len(gs) + 1)}
    if solutions(th, ih[H.identity], clauses, params_h, 1):
        assert solutions(tg, ig[G.identity], clauses, params_g, 1)


def test_invalid_embeddings():
    G, H = cyclic(2), cyclic(4)
    with pytest.raises(ValueError):
        check_embedding(G, H, {0: 0})
    with pytest.raises(ValueError):
        check_embedding(G, H, {0: 0, 1: 0})
    with pytest.raises(ValueError):
        check_embedding(G, H, {0: 0, 1: 1})
    with pytest.raises(ValueError):
        check_embedding(G, H, {0: 0, 1: 9})
    with pytest.raises(ValueError):
        is_ec_in(G, H, {0: 0, 1: 1})
    with pytest.raises(ValueError):
        is_ec_in(builtin("Z"), builtin("Z"))
    with pytest.raises(ValueError):
        default_embedding(cyclic(4), builtin("V4"))


def test_products_embed():
    G = cyclic(2)
    H = direct_sum([cyclic(2), cyclic(2)])
    emb = default_embedding(G, H)
    check_embedding(G, H, emb)
    v = is_ec_in(G, H, emb)
    assert v.is_no
    check_witness(G, H, emb, v.certificate)
