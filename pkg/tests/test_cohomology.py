from itertools import product
from math import gcd

import pytest
from hypothesis import given, settings, strategies as st

from sheaf_forcer.cohomology import (
    CohomologyError, CyclicDecomposition, DiagonalDifferential, DifferentialPresheaf,
    amplitude_cohomology, brute_force_amplitude, chain_cohomology, coprime_normalize,
    cyclic_subquotient, cyclic_subquotient_by_cosets, format_table, generic_cohomology,
    global_to_generic_map, matrix_differential, nilpotency_profile, ordinary_cohomology,
    sequence_differential, validate_differential, zn_structure,
)
from sheaf_forcer.sheaf import constant_presheaf, sequence_sheaf
from sheaf_forcer.space import OpenFilter, indiscrete, maximal_open_filters

from conftest import unary_structure

Z = CyclicDecomposition.of


def primes_of(n):
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    return out + ([n] if n > 1 else [])


def brute_degree(a, n):
    p = a % n
    for k in range(1, n + 1):
        if p == 0:
            return k
        p = p * a % n
    return None


def torsion_count(dec, k):
    """Number of elements killed by k in the group described by ``dec``."""
    out = 1
    for m in dec.orders:
        out *= gcd(m, k)
    return out


def quotient_torsion(n, dims, d, m, N):
    """Count cosets of im d^(N-m) inside ker d^m killed by k, for every k | n."""
    elems = list(product(range(n), repeat=dims))
    zero = (0,) * dims
    ker = [x for x in elems if d(x, m) == zero]
    im = {d(x, N - m) for x in elems}
    out = {}
    for k in range(1, n + 1):
        if n % k == 0:
            hits = sum(1 for x in ker if tuple(k * v % n for v in x) in im)
            out[k] = hits // len(im)
    return out


def seq(n, eigs, **kw):
    return sequence_differential(DiagonalDifferential(n, eigs), **kw)


def principal(dp, i):
    return OpenFilter.generated_by(dp.presheaf.topology, [{i}])


# --- residues --------------------------------------------------------------

def test_nilpotency_examples():
    assert nilpotency_profile(6, 12) == nilpotency_profile(6, 12).__class__(True, 2, True)
    assert nilpotency_profile(6, 48).degree == 4
    assert nilpotency_profile(0, 7).degree == 1
    p = nilpotency_profile(5, 12)
    assert not p.nilpotent and p.degree is None and not p.prime_criterion
    with pytest.raises(CohomologyError):
        nilpotency_profile(12, 12)


def test_nilpotency_criterion_exhaustive():
    for n in range(2, 201):
        ps = primes_of(n)
        for a in range(n):
            prof = nilpotency_profile(a, n)
            deg = brute_degree(a, n)
            assert prof.degree == deg
            assert prof.nilpotent == (deg is not None)
            assert prof.prime_criterion == all(a % p == 0 for p in ps) == prof.nilpotent


def test_subquotient_examples():
    s = cyclic_subquotient(6, 6, 12)
    assert (s.kernel_order, s.image_order, s.quotient) == (6, 2, Z(3))
    assert cyclic_subquotient(12, 12, 48).quotient == Z(3)
    assert cyclic_subquotient(24, 24, 48).quotient == Z(12)
    with pytest.raises(CohomologyError):
        cyclic_subquotient(2, 3, 12)
    with pytest.raises(CohomologyError):
        cyclic_subquotient_by_cosets(2, 3, 12)


def test_subquotient_formula_matches_cosets():
    for n in range(2, 49):
        for ak, ai in product(range(n), repeat=2):
            if ak * ai % n:
                continue
            assert cyclic_subquotient(ak, ai, n) == cyclic_subquotient_by_cosets(ak, ai, n)


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 300), st.integers(1, 10 ** 6))
def test_coprime_normalize(n, a):
    b, q = coprime_normalize(a, n)
    assert b * q == a and gcd(q, n) == 1
    assert all(n % p == 0 for p in primes_of(b))
    assert brute_degree(a % n, n) == brute_degree(b % n, n)
    assert gcd(a, n) == gcd(b, n)


def test_coprime_normalize_rejects_zero():
    with pytest.raises(CohomologyError):
        coprime_normalize(0, 12)


# --- decompositions ----------------------------------------------------------

def test_decomposition_forms():
    d = Z(3, 12)
    assert str(d) == "Z_3 + Z_12"
    assert str(Z(3, 3)) == "Z_3^2" and str(Z()) == "0" and Z(1, 1) == Z()
    assert d.order == 36
    assert Z(12).isomorphic(Z(3, 4)) and not Z(12).isomorphic(Z(2, 6))
    assert Z(2, 3, 4).invariant_factors() == Z(2, 12)
    assert format_table([("H_1", Z(3)), ("H_2", Z(3, 3))]) == "H_1: Z_3\nH_2: Z_3^2"


# --- diagonal differentials ----------------------------------------------------

def test_diagonal_differential_checks():
    d = DiagonalDifferential(48, [6])
    assert d.order == 4
    assert DiagonalDifferential(48, [12, 24]).order == 2
    with pytest.raises(CohomologyError):
        DiagonalDifferential(12, [5])
    with pytest.raises(CohomologyError):
        DiagonalDifferential(1, [0])


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 48).flatmap(lambda n: st.tuples(
    st.just(n), st.lists(st.integers(0, n - 1), min_size=1, max_size=3))))
def test_order_is_exact(case):
    n, eigs = case
    if not all(nilpotency_profile(a, n).nilpotent for a in eigs):
        return
    d = DiagonalDifferential(n, eigs)
    N = d.order
    one = tuple(1 for _ in eigs)
    assert d.apply(one, N) == (0,) * len(eigs)
    if N > 1:
        assert d.apply(one, N - 1) != (0,) * len(eigs)


def test_amplitude_examples():
    for m in (1, 2, 3):
        assert amplitude_cohomology(DiagonalDifferential(48, [6]), m) == Z(3)
    assert amplitude_cohomology(DiagonalDifferential(12, [6, 6]), 1) == Z(3, 3)
    assert amplitude_cohomology(DiagonalDifferential(48, [12, 24]), 1) == Z(3, 12)
    with pytest.raises(CohomologyError):
        amplitude_cohomology(DiagonalDifferential(12, [6]), 2)


def _nilpotent_cases(max_n, max_dims):
    return st.integers(2, max_n).flatmap(lambda n: st.tuples(
        st.just(n),
        st.lists(st.sampled_from([a for a in range(n) if nilpotency_profile(a, n).nilpotent]),
                 min_size=1, max_size=max_dims)))


@settings(max_examples=60, deadline=None)
@given(_nilpotent_cases(48, 2), st.data())
def test_amplitude_matches_enumeration(case, data):
    n, eigs = case
    d = DiagonalDifferential(n, eigs)
    if d.order < 2:
        return
    m = data.draw(st.integers(1, d.order - 1))
    dec = amplitude_cohomology(d, m)
    assert brute_force_amplitude(d, m).isomorphic(dec)
    counts = quotient_torsion(n, len(eigs), d.apply, m, d.order)
    assert counts == {k: torsion_count(dec, k) for k in counts}


@settings(max_examples=20, deadline=None)
@given(_nilpotent_cases(12, 3), st.data())
def test_amplitude_matches_enumeration_three_coordinates(case, data):
    n, eigs = case
    d = DiagonalDifferential(n, eigs)
    if d.order < 2:
        return
    m = data.draw(st.integers(1, d.order - 1))
    dec = amplitude_cohomology(d, m)
    counts = quotient_torsion(n, len(eigs), d.apply, m, d.order)
    assert counts == {k: torsion_count(dec, k) for k in counts}


@settings(max_examples=100, deadline=None)
@given(_nilpotent_cases(60, 4))
def test_amplitude_one_of_square_zero_is_ordinary(case):
    n, eigs = case
    eigs = [a for a in eigs if a * a % n == 0] or [0]
    d = DiagonalDifferential(n, eigs)
    if d.order == 2:
        assert amplitude_cohomology(d, 1) == ordinary_cohomology(d)


@settings(max_examples=100, deadline=None)
@given(_nilpotent_cases(60, 3), _nilpotent_cases(60, 3), st.data())
def test_amplitude_is_additive_over_index_sets(c1, c2, data):
    n, left = c1
    right = [a % n for a in c2[1] if nilpotency_profile(a % n, n).nilpotent]
    d = DiagonalDifferential(n, left + right)
    if d.order < 2:
        return
    m = data.draw(st.integers(1, d.order - 1))
    # amplitude uses the order of the whole differential, so compute the parts
    # coordinatewise at that same order
    parts = Z()
    for a in left + right:
        parts = parts + cyclic_subquotient(pow(a, m, n), pow(a, d.order - m, n), n).quotient
    assert amplitude_cohomology(d, m) == parts
    half = DiagonalDifferential(n, {i: a for i, a in enumerate(left + right) if i < len(left)})
    if half.order == d.order:
        other = {i: a for i, a in enumerate(left + right) if i >= len(left)}
        if other and DiagonalDifferential(n, other).order == d.order:
            assert amplitude_cohomology(d, m) == \
                amplitude_cohomology(half, m) + amplitude_cohomology(DiagonalDifferential(n, other), m)


def test_chain_cohomology_n12_explicit():
    M = zn_structure(12)
    H = chain_cohomology(M, lambda x: 6 * x % 12)
    assert sorted(H.kernel) == [0, 2, 4, 6, 8, 10] and H.image == {0, 6}
    assert H.decomposition == Z(3) and len(H.classes()) == 3


def test_chain_cohomology_needs_addition():
    M = unary_structure([0, 1], {0: 1, 1: 0}, set())
    with pytest.raises(CohomologyError):
        chain_cohomology(M, lambda x: x)


# --- presheaves of complexes ------------------------------------------------

def test_generic_cohomology_examples():
    dp = seq(12, [6, 6, 6])
    for F in maximal_open_filters(dp.presheaf.topology):
        assert generic_cohomology(dp, F).decomposition == Z(3)
    dp = seq(48, [12, 24])
    assert generic_cohomology(dp, principal(dp, 0)).decomposition == Z(3)
    assert generic_cohomology(dp, principal(dp, 1)).decomposition == Z(12)
    dp = seq(12, [0, 0])
    assert generic_cohomology(dp, principal(dp, 0)).decomposition == Z(12)


def test_generic_cohomology_errors():
    dp = seq(48, [6, 0])
    with pytest.raises(CohomologyError):
        generic_cohomology(dp, principal(dp, 0))
    with pytest.raises(CohomologyError):
        generic_cohomology(dp, principal(dp, 0), m=4)
    assert generic_cohomology(dp, principal(dp, 0), m=2).decomposition == Z(3)


@settings(max_examples=40, deadline=None)
@given(_nilpotent_cases(12, 3), st.data())
def test_localization_at_principal_filters(case, data):
    n, eigs = case
    dp = seq(n, eigs)
    N = dp.order()
    if N < 2:
        return
    m = data.draw(st.integers(1, N - 1))
    for i, a in enumerate(eigs):
        got = generic_cohomology(dp, principal(dp, i), m).decomposition
        want = cyclic_subquotient(pow(a, m, n), pow(a, N - m, n), n).quotient
        assert got.isomorphic(want)


def test_validate_diagonal():
    rep = validate_differential(seq(48, [6, 12]))
    assert rep.violations == [] and rep.order == 4


def test_non_diagonal_map_breaks_naturality():
    P = sequence_sheaf(zn_structure(12), [0, 1])
    dp = matrix_differential(P, 12, [[0, 6], [0, 0]])
    X, L = P.topology.whole, frozenset({0})
    # the square at {0} <= {0,1}, checked by hand
    assert any(dp.d[L][P.rho(L, X)[x]] != P.rho(L, X)[dp.d[X][x]] for x in P.fibers[X].universe)
    rep = validate_differential(dp)
    assert any(v.startswith("naturality fails on {0} <= {0,1}") for v in rep.violations)
    swap = validate_differential(matrix_differential(P, 12, [[0, 1], [1, 0]]))
    assert "d is not nilpotent" in swap.violations
    assert any("naturality" in v for v in swap.violations)


def test_non_additive_map_is_reported():
    P = sequence_sheaf(zn_structure(4), [0])
    dp = DifferentialPresheaf(P, {U: (lambda x: ((x[0] * x[0]) % 4,)) for U in P.fibers})
    assert any("not additive" in v for v in validate_differential(dp).violations)


def test_global_to_generic_indiscrete_is_iso():
    T = indiscrete("ab")
    P = constant_presheaf(T, zn_structure(12))
    dp = DifferentialPresheaf(P, {T.whole: lambda x: 6 * x % 12})
    (F,) = maximal_open_filters(T)
    g = global_to_generic_map(dp, F)
    assert g.commutes and g.well_defined and g.is_iso


def test_global_to_generic_projects_away_other_coordinate():
    dp = seq(12, [6, 0])
    g = global_to_generic_map(dp, principal(dp, 0))
    assert g.well_defined and g.is_surjective and not g.is_iso
    H, Hg = g.global_cohomology, g.generic_cohomology
    assert H.decomposition == Z(3, 12) and Hg.decomposition == Z(3)
    zero_class = Hg.class_of[g.chain_map((0, 0))]
    for x in H.kernel:
        image = g.cohomology_map[H.class_of[x]]
        assert image == g.cohomology_map[H.class_of[(x[0], 0)]]
        if x[0] % 6 == 0:
            assert image == zero_class
        else:
            assert image != zero_class


def test_global_to_generic_zero_differential():
    dp = seq(12, [0, 0])
    g = global_to_generic_map(dp, principal(dp, 1))
    for x in g.global_cohomology.kernel:
        assert g.cohomology_map[g.global_cohomology.class_of[x]] == \
            g.generic_cohomology.class_of[g.chain_map(x)]
    assert len(g.global_cohomology.classes()) == 144 and len(set(g.cohomology_map.values())) == 12
