from math import gcd, isqrt

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from torsion_cyclicity.finite_curves import (
    GroupShape,
    PrimeField,
    WeierstrassCurve,
    add,
    aut_size,
    aut_size_bruteforce,
    class_table,
    count_points,
    count_points_naive,
    group_structure,
    group_structure_exhaustive,
    group_structures,
    has_point_of_order,
    in_W,
    is_cyclic,
    is_isomorphic,
    long_to_short,
    point_order,
    scalar_mul,
    torsion_subgroup_shape,
)
from torsion_cyclicity.numtheory import factorize, primes_up_to

SMALL_PRIMES = [p for p in primes_up_to(61) if p > 3]


@st.composite
def curves(draw, primes=SMALL_PRIMES, long=True):
    p = draw(st.sampled_from(primes))
    n = 5 if long else 2
    coeffs = draw(st.lists(st.integers(0, p - 1), min_size=n, max_size=n))
    E = WeierstrassCurve.long(p, *coeffs) if long else WeierstrassCurve.short(p, *coeffs)
    return E


def nonsingular(E):
    return not E.is_singular


def test_field_validation():
    for bad in (2, 3, 4, 9, 15):
        with pytest.raises(ValueError):
            PrimeField(bad)


def test_short_discriminant_formula():
    for p in (5, 7, 11):
        for A in range(p):
            for B in range(p):
                E = WeierstrassCurve.short(p, A, B)
                assert E.discriminant == (-16 * (4 * A**3 + 27 * B**2)) % p


def test_long_to_short_identity_on_short():
    E = WeierstrassCurve.short(11, 2, 3)
    S, f = long_to_short(E)
    assert S is E and f((1, 2)) == (1, 2)


def test_long_to_short_family_example():
    # the m = 4 family at a = 1: y^2 + xy - y = x^3 - x^2
    E = WeierstrassCurve.long(7, 1, -1, -1, 0, 0)
    S, f = long_to_short(E)
    assert S.is_short and S.j_invariant == E.j_invariant
    for P in E.points():
        assert S.contains(f(P))


@given(curves().filter(nonsingular))
def test_long_to_short_maps_points_and_group_law(E):
    S, f = long_to_short(E)
    assert S.j_invariant == E.j_invariant
    pts = E.points()
    assert len(pts) == len(S.points())
    for P in pts[:6]:
        for Q in pts[:6]:
            assert f(add(P, Q, E)) == add(f(P), f(Q), S)


def test_group_law_examples():
    E = WeierstrassCurve.short(5, 0, 1)
    P = (0, 1)
    assert add(P, None, E) == P
    assert scalar_mul(6, P, E) is None
    assert add((4, 0), (4, 0), E) is None
    with pytest.raises(ValueError):
        add((1, 1), P, E)


@given(curves().filter(nonsingular), st.data())
def test_group_law_axioms(E, data):
    pts = E.points()
    P, Q, R = (data.draw(st.sampled_from(pts)) for _ in range(3))
    assert add(P, Q, E) == add(Q, P, E)
    assert add(add(P, Q, E), R, E) == add(P, add(Q, R, E), E)
    assert add(P, E.negate(P), E) is None
    assert scalar_mul(len(pts), P, E) is None


def test_count_examples():
    assert count_points(WeierstrassCurve.short(5, 0, 1)) == 6
    assert count_points(WeierstrassCurve.short(5, 1, 0)) == 4
    with pytest.raises(ValueError):
        count_points(WeierstrassCurve.short(5, 0, 0))


@given(curves().filter(nonsingular))
def test_count_matches_naive_and_hasse(E):
    N = count_points(E)
    assert N == count_points_naive(E) == len(E.points())
    assert abs(N - E.p - 1) <= isqrt(4 * E.p)


def test_group_structure_examples():
    s = group_structure(WeierstrassCurve.short(5, 0, 1))
    assert (s.N, s.n1, s.n2) == (6, 6, 1)
    s = group_structure(WeierstrassCurve.short(5, 1, 0))
    assert (s.N, s.n1, s.n2) == (4, 2, 2)


@pytest.mark.parametrize("p", SMALL_PRIMES)
def test_group_structure_matches_exhaustive_lcm(p):
    rng = np.random.default_rng(p)
    for _ in range(40):
        E = WeierstrassCurve.long(p, *rng.integers(0, p, 5).tolist())
        if E.is_singular:
            continue
        assert group_structure(E) == group_structure_exhaustive(E)


def test_group_structure_skewed_sylow():
    # large primes with Z/ell^a x Z/ell^b for b >= 2 are the hard case for the certificate search
    found = 0
    for p in (433, 577, 673, 1009):
        A = np.arange(1, p, dtype=np.int64)
        coeffs = np.zeros((A.size, 5), dtype=np.int64)
        coeffs[:, 3] = A
        coeffs[:, 4] = 1
        N, n2 = group_structures(p, coeffs)
        for i in np.flatnonzero(n2 >= 4)[:5]:
            E = WeierstrassCurve.short(p, int(A[i]), 1)
            assert group_structure_exhaustive(E).n2 == n2[i]
            found += 1
    assert found > 0


def test_cyclic_only_mode_agrees():
    p = 193
    rng = np.random.default_rng(1)
    coeffs = rng.integers(0, p, (300, 5))
    keep = [i for i, c in enumerate(coeffs) if not WeierstrassCurve.long(p, *c.tolist()).is_singular]
    coeffs = coeffs[keep]
    _, full = group_structures(p, coeffs)
    _, quick = group_structures(p, coeffs, cyclic_only=True)
    assert ((full == 1) == (quick == 1)).all()


def test_aut_size_examples():
    p = 13
    k = 5 * pow(1728 - 5, -1, p) % p
    E = WeierstrassCurve.short(p, 3 * k, 2 * k)
    assert E.j_invariant == 5 and aut_size(E) == 2
    assert aut_size(WeierstrassCurve.short(13, 1, 0)) == 4 == aut_size_bruteforce(WeierstrassCurve.short(13, 1, 0))
    assert aut_size(WeierstrassCurve.short(5, 0, 1)) == 2 == aut_size_bruteforce(WeierstrassCurve.short(5, 0, 1))


@given(curves(long=False).filter(nonsingular))
def test_aut_size_rule_matches_bruteforce(E):
    assert aut_size(E) == aut_size_bruteforce(E)


def test_isomorphism_examples():
    E = WeierstrassCurve.short(7, 1, 0)
    assert is_isomorphic(E, E)
    assert is_isomorphic(E, WeierstrassCurve.short(7, 4, 0))
    assert not is_isomorphic(E, WeierstrassCurve.short(7, 3, 0))


@given(curves(long=False).filter(nonsingular), st.integers(1, 10**6), st.integers(1, 10**6))
def test_isomorphism_is_equivalence_and_preserves_shape(E, u, w):
    p = E.p
    u, w = u % p or 1, w % p or 1
    F = WeierstrassCurve.short(p, u**4 * E.a4, u**6 * E.a6)
    G = WeierstrassCurve.short(p, w**4 * F.a4, w**6 * F.a6)
    assert is_isomorphic(E, F) and is_isomorphic(F, E)
    assert is_isomorphic(E, G)
    assert group_structure(E) == group_structure(F)


@pytest.mark.parametrize("p", [p for p in SMALL_PRIMES if p <= 31])
def test_models_per_class_is_p_minus_1_over_aut(p):
    for A in range(p):
        for B in range(p):
            E = WeierstrassCurve.short(p, A, B)
            if E.is_singular:
                continue
            u = np.arange(1, p)
            orbit = {(int(u4 * A % p), int(u6 * B % p)) for u4, u6 in zip(u**4 % p, u**6 % p)}
            assert len(orbit) == (p - 1) // aut_size(E)


def test_torsion_subgroup_examples():
    s16 = GroupShape(6, 6, 1, 0)
    s22 = GroupShape(4, 2, 2, -2)
    assert torsion_subgroup_shape(s16, 2) == (1, 2) and in_W(s16, 1, 2)
    assert torsion_subgroup_shape(s22, 2) == (2, 2) and in_W(s22, 2, 2)
    assert torsion_subgroup_shape(s22, 1) == (1, 1) and in_W(s22, 1, 1)
    # by enumeration: 2-torsion points of y^2 = x^3 + 1 over F_5
    E = WeierstrassCurve.short(5, 0, 1)
    assert sum(1 for P in E.points() if scalar_mul(2, P, E) is None) == 2
    with pytest.raises(ValueError):
        in_W(s16, 2, 3)


def test_cyclicity_examples():
    s16 = GroupShape(6, 6, 1, 0)
    s22 = GroupShape(4, 2, 2, -2)
    assert is_cyclic(s16) and has_point_of_order(s16, 6)
    assert not is_cyclic(s22) and has_point_of_order(s22, 2)
    assert is_cyclic(GroupShape(7, 7, 1, 0)) and has_point_of_order(GroupShape(7, 7, 1, 0), 1)


@pytest.mark.parametrize("p", SMALL_PRIMES)
def test_structure_invariants_exhaustive(p):
    A, B = np.meshgrid(np.arange(p), np.arange(p), indexing="ij")
    A, B = A.ravel(), B.ravel()
    keep = (4 * A**3 + 27 * B**2) % p != 0
    z = np.zeros(keep.sum(), dtype=np.int64)
    coeffs = np.stack([z, z, z, A[keep], B[keep]], axis=1)
    N, n2 = group_structures(p, coeffs)
    ells = factorize(p - 1).primes
    for n, k in zip(N.tolist(), n2.tolist()):
        s = GroupShape.from_orders(p, n, k)
        s.check(p)
        obvious = all(not in_W(s, ell, ell) for ell in ells)
        assert obvious == is_cyclic(s)


@pytest.mark.parametrize("p", [5, 7, 11, 13, 97, 101, 1009])
def test_class_table_matches_direct(p):
    t = class_table(p)
    rng = np.random.default_rng(p)
    A = rng.integers(1, p, 200)
    B = rng.integers(1, p, 200)
    keep = (4 * A**3 + 27 * B**2) % p != 0
    A, B = A[keep], B[keep]
    N, n2 = t.lookup(A, B)
    z = np.zeros(A.size, dtype=np.int64)
    N2, n22 = group_structures(p, np.stack([z, z, z, A, B], axis=1))
    assert (N == N2).all() and (n2 == n22).all()
    assert (t.lookup(np.array([0, 1]), np.array([1, 0]))[0] == -1).all()


def test_weil_pairing_constraint_on_random_large_curves():
    rng = np.random.default_rng(7)
    for p in (1009, 2003, 4001):
        coeffs = rng.integers(0, p, (100, 5))
        keep = [i for i, c in enumerate(coeffs) if not WeierstrassCurve.long(p, *c.tolist()).is_singular]
        N, n2 = group_structures(p, coeffs[keep])
        for n, k in zip(N.tolist(), n2.tolist()):
            GroupShape.from_orders(p, n, k).check(p)
            assert gcd(n // k, p - 1) % k == 0


def test_point_order_divides_group_order():
    E = WeierstrassCurve.short(101, 3, 7)
    N = count_points(E)
    for P in E.points()[:30]:
        o = point_order(P, E, N)
        assert N % o == 0 and scalar_mul(o, P, E) is None
