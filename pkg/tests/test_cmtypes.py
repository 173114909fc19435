from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kronlimit.cmtypes import (
    CMFunction,
    CMType,
    CMTypeError,
    b_function,
    b_sum,
    central_projection,
    decompose_even,
    desk_group,
    even_minus_basis,
    exact_suite,
    four_term_combination,
    galois_action,
    induced_character_check,
    is_subgroup,
    load_desk_groups,
    rank_report,
    stabilizer,
    type_A,
    type_catalog,
    type_sum_B,
    A_from_B,
)

GROUPS = ["Z2", "C4", "V4", "Z2xZ4", "D8"]
EXPECTED_RANK = {"Z2": 1, "C4": 1, "V4": 2, "Z2xZ4": 2, "D8": 3}
FOUR_TERM_CASES = {"Z2": 0, "C4": 8, "V4": 8, "Z2xZ4": 208, "D8": 224}


def independent_dim_even(G):
    # n minus the rank of the constraints a(cg) + a(g) = 0, a(g^-1) - a(g) = 0, in floating point
    n = G.order
    rows = []
    for g in G.elements:
        r = np.zeros(n)
        r[g] += 1
        r[G.mul(G.c, g)] += 1
        rows.append(r)
        r = np.zeros(n)
        r[g] -= 1
        r[G.inv(g)] += 1
        rows.append(r)
    return n - np.linalg.matrix_rank(np.array(rows))


@pytest.fixture(params=GROUPS)
def G(request):
    return desk_group(request.param)


def test_all_groups_load():
    assert set(load_desk_groups()) == set(GROUPS)


def test_unknown_group():
    with pytest.raises(CMTypeError):
        desk_group("Q8")


def test_group_axioms(G):
    e = 0
    assert G.mul(G.c, G.c) == e and G.c != e
    assert all(G.mul(G.c, g) == G.mul(g, G.c) for g in G.elements)
    for lab, H in G.subgroups:
        assert is_subgroup(G, H), lab


def test_rank_matches_dimension(G):
    rep = rank_report(G)
    assert rep.equal and rep.rank_B == EXPECTED_RANK[G.label]
    assert rep.dim_even == independent_dim_even(G) == len(even_minus_basis(G))
    # independent float rank
    mat = np.array([[float(v) for v in B.values] for _, B in type_catalog(G)])
    assert np.linalg.matrix_rank(mat) == rep.rank_B
    assert str(rep) == f"dim_even={rep.dim_even} rank_B={rep.rank_B}"


def test_types_are_even_and_minus(G):
    for t, B in type_catalog(G):
        assert B.even and B.in_CM_minus
        assert A_from_B(t, B) == type_A(t)


def test_exact_suite(G):
    suite = exact_suite(G)
    assert suite.ok
    assert suite.four_term_checked == FOUR_TERM_CASES[G.label]
    assert all(r.failures == 0 for r in suite.relations)


def test_c4_generator():
    G = desk_group("C4")
    K = "1"
    H = G.cosets(K)
    s = H[1]
    B = type_sum_B(CMType(G, K, frozenset({H[0], s})))
    assert [int(v) for v in B.values] == [2, 0, -2, 0]


def test_b_antisymmetry_under_c(G):
    for K in G.cm_subgroups:
        for s in G.cosets(K):
            for t in G.cosets(K):
                assert b_function(G, K, s, t) == -b_function(G, K, s, G.cbar(t))


def test_invalid_type_rejected():
    G = desk_group("C4")
    H = G.cosets("1")
    with pytest.raises(CMTypeError):
        CMType(G, "1", frozenset({H[0], G.cbar(H[0])}))
    with pytest.raises(CMTypeError):
        CMType(G, "G", frozenset())


def test_four_term_needs_distinct():
    G = desk_group("V4")
    K = G.cm_subgroups[0]
    H = G.cosets(K)
    with pytest.raises(CMTypeError):
        four_term_combination(G, K, frozenset(), H[0], G.cbar(H[0]))


def test_induced_requires_cm_pair():
    G = desk_group("V4")
    with pytest.raises(CMTypeError):
        induced_character_check(G, "1", "1")


def test_central_projection_is_central(G):
    for _, B in type_catalog(G)[:6]:
        p = central_projection(B)
        assert p.central
        assert central_projection(p) == p
        assert stabilizer(p) == frozenset(G.elements)


@given(st.sampled_from(GROUPS), st.lists(st.integers(-3, 3), min_size=8, max_size=8))
def test_decomposition_round_trip(label, raw):
    G = desk_group(label)
    basis = even_minus_basis(G)
    phi = CMFunction.zero(G)
    for k, f in zip(raw, basis):
        phi = phi + f.scale(k)
    dec = decompose_even(phi)
    assert dec.evaluate(G) == phi


@given(st.sampled_from(GROUPS), st.data())
def test_odd_or_non_minus_rejected(label, data):
    G = desk_group(label)
    vals = data.draw(st.lists(st.integers(-2, 2), min_size=G.order, max_size=G.order))
    phi = CMFunction.from_values(G, vals)
    if phi.in_CM_minus and phi.even:
        assert decompose_even(phi).evaluate(G) == phi
    else:
        with pytest.raises(CMTypeError):
            decompose_even(phi)


@given(st.sampled_from(GROUPS), st.data())
def test_galois_action_is_an_action(label, data):
    G = desk_group(label)
    h1 = data.draw(st.sampled_from(list(G.elements)))
    h2 = data.draw(st.sampled_from(list(G.elements)))
    t, B = data.draw(st.sampled_from(type_catalog(G)))
    assert galois_action(G.mul(h1, h2), B) == galois_action(h1, galois_action(h2, B))
    assert is_subgroup(G, stabilizer(B))


def test_b_sum_multiset():
    G = desk_group("Z2xZ4")
    K = G.cm_subgroups[0]
    H = G.cosets(K)
    assert b_sum(G, K, H[0], [H[1], H[1]]) == b_function(G, K, H[0], H[1]).scale(2)


def test_from_values_length():
    with pytest.raises(CMTypeError):
        CMFunction.from_values(desk_group("C4"), [1, 2])
