from itertools import combinations, product

import pytest

from sheaf_forcer.cohomology import zn_structure
from sheaf_forcer.fixtures import exact_instances, sierpinski_counterexample
from sheaf_forcer.model import FinGroup, GAction, check_g_structure, classify_morphism
from sheaf_forcer.sheaf import (
    Presheaf, PresheafError, SectionTuple, check_exactness, constant_presheaf,
    graph_presheaf, restrict_section, sequence_sheaf, stalk_at, stalk_matches_min_open,
    validate_presheaf,
)
from sheaf_forcer.space import build_topology, discrete

from conftest import unary_structure


def gluing_oracle(P):
    """(exact, coherent) by trying every cover of every open, nested ones included."""
    T = P.topology
    exact = coherent = True
    for U in T.nonempty_opens:
        subs = [V for V in T.nonempty_opens if V <= U]
        for k in range(1, len(subs) + 1):
            for cover in combinations(subs, k):
                if frozenset().union(*cover) != U:
                    continue
                for fam in product(*(P.fibers[V].universe for V in cover)):
                    ok = all(P.rho(V & W, V)[s] == P.rho(V & W, W)[t]
                             for (V, s), (W, t) in combinations(zip(cover, fam), 2) if V & W)
                    if not ok:
                        continue
                    glue = [s for s in P.fibers[U].universe
                            if all(P.rho(V, U)[s] == t for V, t in zip(cover, fam))]
                    exact &= bool(glue)
                    coherent &= len(glue) <= 1
    return exact, coherent


def z12_sequences(points=(0, 1, 2), steps=None):
    Z = zn_structure(12)
    act = None
    if steps:
        G = FinGroup.cyclic(12).subgroup(steps)
        act = GAction(G, range(12), lambda g, x: (x + g) % 12)
    return sequence_sheaf(Z, points, act)


def test_constant_presheaf_is_valid():
    M = unary_structure([0, 1], {0: 1, 1: 0}, {0})
    assert validate_presheaf(constant_presheaf(discrete("ab"), M)) == []


def test_broken_functoriality_is_named():
    T = discrete([0, 1])
    M = unary_structure([0, 1], {0: 0, 1: 1}, set())
    X, L, R = T.whole, frozenset([0]), frozenset([1])
    fibers = {X: M, L: M, R: M}
    rho = {(L, X): {0: 0, 1: 1}, (R, X): {0: 0, 1: 1}}
    P = Presheaf(T, fibers, rho)
    assert validate_presheaf(P) == []
    P._rho[L, L] = {0: 1, 1: 0}
    report = validate_presheaf(P)
    assert any("{0} <= {0} <= {0,1}" in r for r in report)


def test_missing_fiber_or_restriction():
    T = discrete([0, 1])
    M = unary_structure([0], {0: 0}, set())
    with pytest.raises(PresheafError):
        Presheaf(T, {T.whole: M}, {})
    with pytest.raises(PresheafError):
        Presheaf(T, {U: M for U in T.nonempty_opens}, {})


def test_sequence_sheaf_fixture():
    P = z12_sequences((0, 1))
    assert len(P.fibers[frozenset({0, 1})].universe) == 144
    assert validate_presheaf(P) == []
    for V in (frozenset({0}), frozenset({1})):
        assert classify_morphism(P.restriction_morphism(V, frozenset({0, 1}))).is_submersion


def test_sequence_sheaf_with_strong_action():
    P = z12_sequences((0, 1), steps=[0, 6])
    assert validate_presheaf(P) == []
    for U, M in P.fibers.items():
        assert check_g_structure(M, P.actions[U], strong=True) == []


def test_restrict_section_examples():
    P = z12_sequences()
    X = frozenset({0, 1, 2})
    a = SectionTuple(X, ((5, 7, 9),))
    assert restrict_section(P, a, X) == a
    assert restrict_section(P, a, {1}).elements == ((7,),)
    with pytest.raises(PresheafError):
        restrict_section(P, SectionTuple(frozenset({1}), ((7,),)), {0})
    with pytest.raises(PresheafError):
        restrict_section(P, a, set())


def test_graph_restriction_keeps_edges_inside():
    G = graph_presheaf(3)
    X = frozenset({0, 1, 2})
    tri = frozenset(frozenset(e) for e in [(0, 1), (1, 2), (0, 2)])
    (g,) = restrict_section(G, SectionTuple(X, (tri,)), {0, 1}).elements
    assert g == {frozenset({0, 1})}


def test_restriction_is_functorial():
    P = z12_sequences()
    T = P.topology
    for U in T.nonempty_opens:
        for V in T.opens_within(U):
            for W in T.opens_within(V):
                for s in list(P.sections(U))[:50]:
                    assert restrict_section(P, restrict_section(P, s, V), W) == \
                        restrict_section(P, s, W)


def test_stalk_examples():
    P = z12_sequences((0, 1))
    st = stalk_at(P, 0)
    assert len(st.stalk.universe) == 12
    assert classify_morphism(st.colimit.germ_maps[frozenset({0})]).is_iso
    Q = sierpinski_counterexample()
    assert stalk_matches_min_open(Q, "b")
    assert len(stalk_at(Q, "b").stalk.universe) == len(Q.fibers[Q.topology.whole].universe)


def test_germs_are_restriction_invariant():
    for inst in exact_instances(max_points=3, per_topology=1):
        P, T = inst.presheaf, inst.presheaf.topology
        for x in T.points:
            st = stalk_at(P, x)
            assert stalk_matches_min_open(P, x)
            for U in T.neighbourhoods(x):
                for V in T.neighbourhoods(x, within=U):
                    for a in P.sections(U):
                        assert st.germ_of(a) == st.germ_of(restrict_section(P, a, V))


def test_graph_presheaf_exact_not_coherent():
    G = graph_presheaf(3)
    rep = check_exactness(G)
    assert (rep.exact, rep.coherent) == (True, False)
    assert any("not unique" in w for w in rep.witnesses)
    assert gluing_oracle(G) == (True, False)


def test_graph_presheaf_sizes():
    G = graph_presheaf(2)
    assert len(G.fibers[frozenset({0, 1})].universe) == 2
    assert len(G.fibers[frozenset({0})].universe) == 1
    with pytest.raises(PresheafError):
        graph_presheaf(7)


def test_constant_presheaf_glues_uniquely():
    M = unary_structure([0, 1, 2], {0: 0, 1: 1, 2: 2}, set())
    P = constant_presheaf(discrete([0, 1]), M)
    rep = check_exactness(P)
    # identity restrictions: the two halves share no overlap, so families
    # with different values have no gluing
    assert gluing_oracle(P) == (rep.exact, rep.coherent)
    assert (rep.exact, rep.coherent) == (False, True)
    # a 2-cover {a,b} u {b,c} whose overlap {b} forces equal values
    T = build_topology("abc", [["a", "b"], ["b", "c"]])
    Q = constant_presheaf(T, M)
    rep = check_exactness(Q)
    assert (rep.exact, rep.coherent) == (True, True) == gluing_oracle(Q)


def test_sequence_sheaf_exact_and_coherent():
    P = sequence_sheaf(zn_structure(3), [0, 1, 2])
    rep = check_exactness(P)
    assert (rep.exact, rep.coherent) == (True, True)
    assert gluing_oracle(P) == (True, True)


def test_exactness_matches_oracle_on_generated_presheaves():
    insts = exact_instances(max_points=3, per_topology=2, seed=3)
    for inst in insts:
        rep = check_exactness(inst.presheaf)
        assert (rep.exact, rep.coherent) == gluing_oracle(inst.presheaf), inst.name
        assert rep.exact
        assert validate_presheaf(inst.presheaf) == []
