"""Brute-force counts of isomorphism classes over a fixed prime field.

A census walks every short model ``y^2 = x^3 + Ax + B`` over F_p, groups the
models into isomorphism classes ``(u^4 A, u^6 B)``, and computes each class's
group structure once. Weighted counts (each class weighted by ``1/#Aut``)
equal ``model_count / (p - 1)`` because a class with automorphism group of
size ``w`` has exactly ``(p - 1) / w`` models.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd, sqrt

import numpy as np

from . import densities
from .families import FamilyReduction, marked_point_orders, reduce_family
from .finite_curves import GroupShape, PrimeField, class_table, group_structures
from .numtheory import euler_phi

__all__ = [
    "CENSUS_CAP",
    "FAMILY_CENSUS_CAP",
    "CensusClass",
    "Census",
    "census",
    "CensusRecord",
    "count_C",
    "count_W",
    "count_T",
    "count_classes",
    "ComparisonReport",
    "compare",
    "FamilyCensus",
    "family_census",
    "family_cyclic_counts",
]

CENSUS_CAP = 300
FAMILY_CENSUS_CAP = 1000


@dataclass(frozen=True)
class CensusClass:
    A: int  # lexicographically least model in the class
    B: int
    shape: GroupShape
    aut: int
    model_count: int


@dataclass(frozen=True)
class Census:
    p: int
    classes: tuple[CensusClass, ...]

    @property
    def model_count(self) -> int:
        return sum(c.model_count for c in self.classes)

    @property
    def weighted_mass(self) -> Fraction:
        return Fraction(self.model_count, self.p - 1)

    def mass_by_aut(self) -> Fraction:
        """``sum 1/#Aut`` over classes, class by class (the check, not the definition)."""
        return sum((Fraction(1, c.aut) for c in self.classes), Fraction(0))

    def __iter__(self):
        return iter(self.classes)

    def __len__(self):
        return len(self.classes)


def _orbits(p: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Least representative and size of every class of nonsingular short models."""
    u = np.arange(1, p, dtype=np.int64)
    u2 = u * u % p
    u4 = u2 * u2 % p
    u6 = u4 * u2 % p
    AA, BB = np.meshgrid(np.arange(p, dtype=np.int64), np.arange(p, dtype=np.int64), indexing="ij")
    disc = (4 * AA * AA % p * AA + 27 * BB * BB) % p
    seen = disc == 0
    reps_A, reps_B, sizes = [], [], []
    # row-major scan of the unseen mask visits models in lexicographic order
    for flat in np.flatnonzero(~seen.ravel()):
        A, B = divmod(int(flat), p)
        if seen[A, B]:
            continue
        oa = u4 * A % p
        ob = u6 * B % p
        seen[oa, ob] = True
        reps_A.append(A)
        reps_B.append(B)
        sizes.append(len(set(zip(oa.tolist(), ob.tolist()))))
    return np.array(reps_A, dtype=np.int64), np.array(reps_B, dtype=np.int64), np.array(sizes, dtype=np.int64)


@lru_cache(maxsize=8)
def census(p: int, cap: int = CENSUS_CAP) -> Census:
    """Every isomorphism class over F_p with its group structure and #Aut."""
    field_ = PrimeField(p)
    if p > cap:
        raise ValueError(f"census prime {p} exceeds cap {cap}")
    A, B, sizes = _orbits(field_.p)
    zeros = np.zeros_like(A)
    coeffs = np.stack([zeros, zeros, zeros, A, B], axis=1)
    N, n2 = group_structures(p, coeffs)
    classes = []
    for a, b, size, n, k in zip(A.tolist(), B.tolist(), sizes.tolist(), N.tolist(), n2.tolist()):
        shape = GroupShape.from_orders(p, n, k)
        classes.append(CensusClass(a, b, shape, (p - 1) // size, size))
    return Census(p, tuple(classes))


@dataclass(frozen=True)
class CensusRecord:
    p: int
    predicate: str
    model_count: int
    unweighted_count: int
    aut_partition: tuple[tuple[int, int], ...]  # (aut size, class count)

    @property
    def weighted_count(self) -> Fraction:
        return Fraction(self.model_count, self.p - 1)

    def partition_excess(self) -> Fraction:
        """``sum (1 - 2/#Aut)`` over the counted classes."""
        return sum((k * (1 - Fraction(2, w)) for w, k in self.aut_partition), Fraction(0))


def count_classes(p: int, predicate, name: str) -> CensusRecord:
    models = 0
    parts: Counter[int] = Counter()
    for c in census(p):
        if predicate(c.shape):
            models += c.model_count
            parts[c.aut] += 1
    return CensusRecord(p, name, models, sum(parts.values()), tuple(sorted(parts.items())))


def _reject_p_divides(p: int, m: int):
    if m % p == 0:
        raise ValueError(f"p={p} divides m={m}")


def count_C(p: int, m: int) -> CensusRecord:
    """Classes with cyclic group containing a point of order m."""
    return count_classes(p, lambda s: s.n2 == 1 and s.n1 % m == 0, f"C({m})")


def count_T(p: int, m: int) -> CensusRecord:
    """Classes with a point of order m."""
    return count_classes(p, lambda s: s.n1 % m == 0, f"T({m})")


def count_W(p: int, a: int, b: int) -> CensusRecord:
    """Classes with ``E[b](F_p) = Z/a x Z/b``."""
    if a < 1 or b % a:
        raise ValueError(f"{a} does not divide {b}")
    return count_classes(p, lambda s: s.n1 % b == 0 and gcd(b, s.n2) == a, f"W({a},{b})")


@dataclass(frozen=True)
class ComparisonReport:
    record: CensusRecord
    main_term: Fraction
    weighted: bool = True

    @property
    def count(self) -> Fraction:
        return self.record.weighted_count if self.weighted else Fraction(self.record.unweighted_count)

    @property
    def abs_error(self) -> float:
        return float(abs(self.count - self.main_term))

    @property
    def normalized_error(self) -> float:
        return self.abs_error / sqrt(self.record.p)

    def row(self) -> dict:
        r = self.record
        w = r.weighted_count
        return {
            "p": r.p,
            "predicate": r.predicate if self.weighted else r.predicate + "#unweighted",
            "model_count": r.model_count,
            "weighted_count_num": w.numerator,
            "weighted_count_den": w.denominator,
            "unweighted": r.unweighted_count,
            "main_term_num": self.main_term.numerator,
            "main_term_den": self.main_term.denominator,
            "abs_error": f"{self.abs_error:.6f}",
            "normalized_error": f"{self.normalized_error:.6f}",
        }


def compare(p: int, kind: str, *args: int, weighted: bool = True) -> ComparisonReport:
    """Pair a census count with its main term.

    ``kind`` is ``"C"`` (args ``m``), ``"T"`` (``m``) or ``"W"`` (``a, b``).
    The unweighted form of ``"C"`` is compared against twice the weighted
    main term, since almost every class has two automorphisms.
    """
    if kind in ("C", "T"):
        # main terms for p | m are formula-only; brute-force counts stay available
        _reject_p_divides(p, args[0])
    if kind == "C":
        (m,) = args
        rec, main = count_C(p, m), p * densities.cyclic_mtors_density(p, m)
    elif kind == "T":
        (m,) = args
        rec, main = count_T(p, m), p * densities.r_prime(p, m)
    elif kind == "W":
        a, b = args
        rec, main = count_W(p, a, b), densities.w_hat(a, b, p)
    else:
        raise ValueError(f"unknown comparison kind {kind!r}")
    if not weighted:
        if kind != "C":
            raise ValueError("the unweighted comparison is defined for C only")
        main = 2 * main
    return ComparisonReport(rec, main, weighted)


# ---------------------------------------------------------------------------
# families


@dataclass(frozen=True)
class FamilyCensus:
    """Group structure of ``E_m(b)`` for every valid ``b`` in F_p."""

    m: int
    p: int
    parameters: np.ndarray
    N: np.ndarray
    n2: np.ndarray
    aut: np.ndarray
    marked_order: np.ndarray
    method: str = field(default="table")

    @property
    def valid_count(self) -> int:
        return int(self.parameters.size)

    @property
    def cyclic(self) -> np.ndarray:
        return self.n2 == 1

    @property
    def cyclic_count(self) -> int:
        """``s_m(p)``: valid parameters with cyclic reduction."""
        return int(np.count_nonzero(self.cyclic))

    def cyclic_by_aut(self) -> dict[int, int]:
        return {w: int(np.count_nonzero(self.cyclic & (self.aut == w))) for w in (2, 4, 6)}

    @property
    def proper_marked_order(self) -> np.ndarray:
        """Parameters where ``(0, 0)`` has order a proper divisor of m."""
        return self.parameters[self.marked_order != self.m]

    def predicted_cyclic_count(self) -> Fraction:
        """``phi(m) p * cyclic_mtors_density(p, m)``: phi(m)/2 parameters per class, 2p density classes."""
        return euler_phi(self.m) * self.p * densities.cyclic_mtors_density(self.p, self.m)

    def shapes(self) -> list[GroupShape]:
        return [GroupShape.from_orders(self.p, int(n), int(k)) for n, k in zip(self.N, self.n2)]


def _aut_sizes(p: int, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    aut = np.full(A.shape, 2, dtype=np.int64)
    if p % 4 == 1:
        aut[B == 0] = 4
    if p % 3 == 1:
        aut[A == 0] = 6
    return aut


def _family_shapes(red: FamilyReduction, cyclic_only: bool, method: str) -> tuple[np.ndarray, ...]:
    p = red.p
    params = red.valid_parameters
    coeffs = red.coeffs[params]
    A, B = (x[params] for x in red.short_coefficients)
    if method == "direct":
        N, n2 = group_structures(p, coeffs, cyclic_only=cyclic_only)
        return params, N, n2, A, B
    if method != "table":
        raise ValueError(f"unknown method {method!r}")
    N, n2 = class_table(p, cyclic_only).lookup(A, B)
    special = (A == 0) | (B == 0)
    if special.any():
        Ns, n2s = group_structures(p, coeffs[special], cyclic_only=cyclic_only)
        N[special] = Ns
        n2[special] = n2s
    return params, N, n2, A, B


def family_census(p: int, m: int, method: str = "table", cap: int = FAMILY_CENSUS_CAP) -> FamilyCensus:
    """Group structure, marked-point order and #Aut for every valid parameter.

    ``method="table"`` reads the per-prime class table; ``"direct"``
    computes each curve on its own. Both give identical results.
    """
    if p > cap:
        raise ValueError(f"family census prime {p} exceeds cap {cap}")
    red = reduce_family(m, p)
    params, N, n2, A, B = _family_shapes(red, False, method)
    orders = marked_point_orders(m, p)[params]
    return FamilyCensus(m, p, params, N, n2, _aut_sizes(p, A, B), orders, method)


def family_cyclic_counts(p: int, ms) -> dict[int, tuple[int, int]]:
    """``(valid_count, s_m(p))`` for each m, sharing one class table."""
    out = {}
    for m in ms:
        red = reduce_family(m, p)
        params, _, n2, _, _ = _family_shapes(red, True, "table")
        out[m] = (int(params.size), int(np.count_nonzero(n2 == 1)))
    return out
