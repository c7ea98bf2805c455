from fractions import Fraction
from math import sqrt

import numpy as np
import pytest

from torsion_cyclicity import densities
from torsion_cyclicity.census import (
    census,
    compare,
    count_C,
    count_T,
    count_W,
    family_census,
    family_cyclic_counts,
)
from torsion_cyclicity.families import FAMILY_SET, reduce_family, special_j_degree_bound
from torsion_cyclicity.finite_curves import WeierstrassCurve, aut_size, group_structures, is_isomorphic
from torsion_cyclicity.numtheory import primes_up_to

CENSUS_PRIMES = [p for p in primes_up_to(60) if p > 3]


def all_model_shapes(p):
    A, B = np.meshgrid(np.arange(p), np.arange(p), indexing="ij")
    A, B = A.ravel(), B.ravel()
    keep = (4 * A**3 + 27 * B**2) % p != 0
    z = np.zeros(keep.sum(), dtype=np.int64)
    return group_structures(p, np.stack([z, z, z, A[keep], B[keep]], axis=1))


def test_census_p5():
    c = census(5)
    assert c.weighted_mass == 5 == c.mass_by_aut()
    E = WeierstrassCurve.short(5, 1, 0)
    (rep,) = [k for k in c if is_isomorphic(WeierstrassCurve.short(5, k.A, k.B), E)]
    assert (rep.shape.n1, rep.shape.n2) == (2, 2)


def test_singular_pairs_p7():
    p = 7
    singular = sum(1 for A in range(p) for B in range(p) if (4 * A**3 + 27 * B**2) % p == 0)
    assert singular == p
    assert census(p).model_count == p * p - p


@pytest.mark.parametrize("p", CENSUS_PRIMES)
def test_census_classes_are_exact(p):
    c = census(p)
    assert c.model_count == p * p - p
    assert c.mass_by_aut() == p
    for k in c:
        assert k.model_count * k.aut == p - 1
        assert aut_size(WeierstrassCurve.short(p, k.A, k.B)) == k.aut
    # representatives are pairwise non-isomorphic
    if p <= 13:
        reps = [WeierstrassCurve.short(p, k.A, k.B) for k in c]
        for i, E in enumerate(reps):
            assert not any(is_isomorphic(E, F) for F in reps[i + 1 :])


@pytest.mark.parametrize("p", [5, 7, 13, 31])
def test_cyclic_count_matches_model_enumeration(p):
    _, n2 = all_model_shapes(p)
    rec = count_C(p, 1)
    assert rec.model_count == np.count_nonzero(n2 == 1)
    assert rec.weighted_count == Fraction(rec.model_count, p - 1)


def test_count_examples():
    rec = count_C(5, 1)
    assert abs(rec.weighted_count - 5 * Fraction(5, 6)) <= 4 * sqrt(5)
    # N <= 10 and n2 | gcd(4, N / n2) force every 5-torsion curve over F_5 to be cyclic
    five = count_C(5, 5)
    assert five.model_count == count_T(5, 5).model_count > 0
    assert count_W(11, 1, 1).weighted_count == 11
    w = count_W(5, 2, 2)
    assert abs(w.weighted_count - 5 * densities.w_tilde(2, 2, 5)) <= 4 * 2 * sqrt(5)
    t = count_T(7, 5)
    assert 7 * densities.r_prime(7, 5) == Fraction(7, 4)
    assert abs(t.weighted_count - Fraction(7, 4)) <= 4 * 25 * sqrt(7)
    with pytest.raises(ValueError):
        count_W(7, 2, 3)


def test_compare_reports():
    rep = compare(101, "C", 5)
    assert np.isfinite(rep.normalized_error)
    assert rep.normalized_error == pytest.approx(rep.abs_error / sqrt(101))
    assert rep.main_term == 101 * densities.cyclic_mtors_density(101, 5)
    row = rep.row()
    assert Fraction(row["weighted_count_num"], row["weighted_count_den"]) == rep.count
    assert compare(101, "C", 1).main_term == 101 * densities.cyclic_mtors_density(101, 1)
    with pytest.raises(ValueError):
        compare(5, "C", 5)
    with pytest.raises(ValueError):
        compare(7, "T", 7)
    with pytest.raises(ValueError):
        compare(7, "W", 1, 2, weighted=False)


@pytest.mark.parametrize("p", [p for p in CENSUS_PRIMES if p >= 11])
def test_unweighted_main_term_and_partition(p):
    for m in (1, 2, 3, 4, 5):
        if m % p == 0:
            continue
        rec = count_C(p, m)
        assert rec.unweighted_count - 2 * rec.weighted_count == rec.partition_excess()
        rep = compare(p, "C", m, weighted=False)
        assert rep.abs_error <= 10 * sqrt(p) + 6


@pytest.mark.parametrize("p", CENSUS_PRIMES)
def test_cyclic_below_torsion(p):
    for m in (1, 2, 3, 4, 6, 8):
        c, t = count_C(p, m), count_T(p, m)
        assert c.model_count <= t.model_count
        assert t.weighted_count <= p + 2 * sqrt(p)


def test_family_census_p5():
    fc = family_census(5, 5)
    assert fc.parameters.tolist() == [1, 2, 4]
    assert fc.cyclic.all() and fc.cyclic_count == 3
    assert set(fc.N.tolist()) <= {5, 10}


@pytest.mark.parametrize("m", FAMILY_SET)
def test_family_census_methods_agree(m):
    for p in (37, 101, 211):
        t = family_census(p, m, "table")
        d = family_census(p, m, "direct")
        assert (t.N == d.N).all() and (t.n2 == d.n2).all()
        assert (t.marked_order == d.marked_order).all() and (m % t.marked_order == 0).all()
        assert family_cyclic_counts(p, [m])[m] == (t.valid_count, t.cyclic_count)


@pytest.mark.parametrize("m", FAMILY_SET)
def test_family_census_extra_automorphisms_bounded(m):
    bound = special_j_degree_bound(m)
    for p in primes_up_to(300):
        if p <= 3 or m % p == 0:
            continue
        fc = family_census(p, m)
        assert np.count_nonzero(fc.aut > 2) <= bound
        assert np.count_nonzero(reduce_family(m, p).special_j) <= bound


def test_family_census_tracks_main_term():
    worst = 0.0
    for m in FAMILY_SET:
        for p in primes_up_to(300):
            if p <= 3 or m % p == 0:
                continue
            fc = family_census(p, m)
            err = abs(fc.cyclic_count - float(fc.predicted_cyclic_count())) / sqrt(p)
            worst = max(worst, err)
    assert worst < 4
