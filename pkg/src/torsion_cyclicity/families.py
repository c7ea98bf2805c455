"""Kubert's one-parameter families ``E_m(a)`` with a rational point of order m.

Every model has the Tate normal shape
``y^2 + a1(a) xy + a3(a) y = x^3 + a2(a) x^2`` with ``a2 = a3`` and marked
point ``(0, 0)``. Coefficients are stored as integer polynomial fractions and
discriminants as factor lists, so that validity mod ``p`` can be read off
factor by factor. Polynomials are tuples of integer coefficients, leading
coefficient first.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np

from . import _kernels
from .finite_curves import (
    PrimeField,
    WeierstrassCurve,
    inverse_table,
    is_isomorphic,
    quadratic_character_table,
)
from .numtheory import euler_phi, factorize, padic_valuation

Poly = tuple[int, ...]

FAMILY_SET = (4, 5, 6, 7, 8, 9, 10, 12)


@dataclass(frozen=True)
class TorsionLabel:
    """``m = 2^k * ell0^n``; ``ell0 = n = 1`` when m is a power of two."""

    m: int
    k: int
    ell0: int
    n: int

    @classmethod
    def of(cls, m: int) -> "TorsionLabel":
        if m not in (1, *FAMILY_SET):
            raise ValueError(f"m={m} is not one of 1, {', '.join(map(str, FAMILY_SET))}")
        k = padic_valuation(2, m)
        odd = [q for q in factorize(m).primes if q != 2]
        if not odd:
            return cls(m, k, 1, 1)
        ell0 = odd[0]
        return cls(m, k, ell0, padic_valuation(ell0, m))

    @property
    def is_two_power(self) -> bool:
        return self.ell0 == 1


@dataclass(frozen=True)
class RationalPoly:
    num: Poly
    den: Poly = (1,)


@dataclass(frozen=True)
class FamilySpec:
    label: TorsionLabel
    a1: RationalPoly
    a2: RationalPoly  # equal to a3 for every family
    disc_factors: tuple[tuple[Poly, int], ...]

    @property
    def a3(self) -> RationalPoly:
        return self.a2

    @property
    def m(self) -> int:
        return self.label.m

    @property
    def denominators(self) -> tuple[Poly, ...]:
        dens = {self.a1.den, self.a2.den}
        dens |= {f for f, e in self.disc_factors if e < 0}
        return tuple(sorted(d for d in dens if len(d) > 1))


def _spec(m, a1, a2, disc):
    return FamilySpec(TorsionLabel.of(m), a1, a2, tuple(disc))


A = (1, 0)  # the polynomial a
A_MINUS_1 = (1, -1)
TWO_A_MINUS_1 = (2, -1)

FAMILIES: dict[int, FamilySpec] = {
    s.m: s
    for s in [
        _spec(4, RationalPoly((1,)), RationalPoly((-1, 0)), [((16, 1), 1), (A, 4)]),
        _spec(5, RationalPoly((-1, 1)), RationalPoly((-1, 0)), [(A, 5), ((1, -11, -1), 1)]),
        _spec(6, RationalPoly((-1, 1)), RationalPoly((-1, -1, 0)), [((9, 1), 1), ((1, 1), 3), (A, 6)]),
        _spec(
            7,
            RationalPoly((-1, 1, 1)),
            RationalPoly((-1, 1, 0, 0)),
            [(A_MINUS_1, 7), (A, 7), ((1, -8, 5, 1), 1)],
        ),
        _spec(
            8,
            RationalPoly((-2, 4, -1), A),
            RationalPoly((-2, 3, -1)),
            [(A, -4), (TWO_A_MINUS_1, 4), (A_MINUS_1, 8), ((8, -8, 1), 1)],
        ),
        _spec(
            9,
            RationalPoly((-1, 1, 0, 1)),
            RationalPoly((-1, 2, -2, 1, 0, 0)),
            [(A_MINUS_1, 9), (A, 9), ((1, -1, 1), 3), ((1, -6, 3, 1), 1)],
        ),
        _spec(
            10,
            RationalPoly((2, -2, -2, 1), (1, -3, 1)),
            RationalPoly((-2, 3, -1, 0, 0, 0), (1, -6, 11, -6, 1)),
            [(TWO_A_MINUS_1, 5), (A_MINUS_1, 10), (A, 10), ((1, -3, 1), -10), ((4, -2, -1), 1)],
        ),
        _spec(
            12,
            RationalPoly((6, -8, 2, 2, -1), (1, -3, 3, -1)),
            RationalPoly((-12, 30, -34, 21, -7, 1, 0), (1, -4, 6, -4, 1)),
            [
                (A_MINUS_1, -24),
                (TWO_A_MINUS_1, 6),
                (A, 12),
                ((6, -6, 1), 1),
                ((2, -2, 1), 3),
                ((3, -3, 1), 4),
            ],
        ),
    ]
}


def family_spec(m: int) -> FamilySpec:
    try:
        return FAMILIES[m]
    except KeyError:
        raise ValueError(f"no torsion family for m={m}; choose from {FAMILY_SET}") from None


def poly_eval(poly: Poly, a):
    """Horner evaluation on ints, Fractions, or anything with + and *."""
    acc = 0
    for c in poly:
        acc = acc * a + c
    return acc


def poly_eval_mod(poly: Poly, a: np.ndarray, p: int) -> np.ndarray:
    acc = np.zeros_like(a)
    for c in poly:
        acc = (acc * a + c % p) % p
    return acc


def poly_degree(poly: Poly) -> int:
    return len(poly) - 1


class Validity(enum.IntEnum):
    VALID = 0
    SINGULAR = 1
    UNDEFINED = 2


class InvalidParameter(ValueError):
    def __init__(self, m, a, validity: Validity, where: str = ""):
        self.m, self.a, self.validity = m, a, validity
        super().__init__(f"E_{m}({a}){where} is {validity.name.lower()}")


@dataclass(frozen=True)
class FamilyParameter:
    value: int | Fraction
    validity: Validity


@dataclass(frozen=True)
class FamilyReduction:
    """All parameters ``b`` in F_p at once: coefficient rows and validity."""

    m: int
    p: int
    coeffs: np.ndarray  # (p, 5) long-form rows; rows of invalid b are zero
    validity: np.ndarray  # Validity codes, int8

    @property
    def valid(self) -> np.ndarray:
        return self.validity == Validity.VALID

    @property
    def valid_parameters(self) -> np.ndarray:
        return np.flatnonzero(self.valid)

    @cached_property
    def short_coefficients(self) -> tuple[np.ndarray, np.ndarray]:
        """``(A, B) = (-27 c4, -54 c6)`` for every row."""
        p = self.p
        a1, a2, a3, a4, a6 = (c for c in self.coeffs.T)
        b2 = (a1 * a1 + 4 * a2) % p
        b4 = (2 * a4 + a1 * a3) % p
        b6 = (a3 * a3 + 4 * a6) % p
        c4 = (b2 * b2 - 24 * b4) % p
        c6 = (-(b2 * b2 % p) * b2 + 36 * b2 * b4 % p - 216 * b6) % p
        return (-27 * c4) % p, (-54 * c6) % p

    @cached_property
    def special_j(self) -> np.ndarray:
        """Valid parameters whose curve has j = 0 or 1728 (extra automorphisms possible)."""
        A, B = self.short_coefficients
        return self.valid & ((A == 0) | (B == 0))


@lru_cache(maxsize=64)
def reduce_family(m: int, p: int) -> FamilyReduction:
    spec = family_spec(m)
    PrimeField(p)
    b = np.arange(p, dtype=np.int64)
    inv = inverse_table(p)
    undefined = np.zeros(p, dtype=bool)
    for den in spec.denominators:
        undefined |= poly_eval_mod(den, b, p) == 0
    singular = ~undefined & _positive_factor_vanishes(spec, b, p)

    def coeff(rp: RationalPoly):
        return poly_eval_mod(rp.num, b, p) * inv[poly_eval_mod(rp.den, b, p)] % p

    a1 = coeff(spec.a1)
    a2 = coeff(spec.a2)
    zeros = np.zeros(p, dtype=np.int64)
    coeffs = np.stack([a1, a2, a2, zeros, zeros], axis=1)
    validity = np.where(undefined, Validity.UNDEFINED, np.where(singular, Validity.SINGULAR, Validity.VALID))
    coeffs[validity != Validity.VALID] = 0
    coeffs.flags.writeable = False
    validity = validity.astype(np.int8)
    validity.flags.writeable = False
    return FamilyReduction(m, p, coeffs, validity)


def _positive_factor_vanishes(spec: FamilySpec, b: np.ndarray, p: int) -> np.ndarray:
    out = np.zeros(b.shape, dtype=bool)
    for f, e in spec.disc_factors:
        if e > 0:
            out |= poly_eval_mod(f, b, p) == 0
    return out


def classify_parameter(m: int, a: int | Fraction, p: int | None = None) -> Validity:
    """Validity of ``a`` in F_p, or over Q when ``p`` is None."""
    spec = family_spec(m)
    if p is None:
        a = Fraction(a)
        if any(poly_eval(d, a) == 0 for d in spec.denominators):
            return Validity.UNDEFINED
        if any(poly_eval(f, a) == 0 for f, e in spec.disc_factors if e > 0):
            return Validity.SINGULAR
        return Validity.VALID
    PrimeField(p)
    a = int(a) % p
    if any(poly_eval(d, a) % p == 0 for d in spec.denominators):
        return Validity.UNDEFINED
    if any(poly_eval(f, a) % p == 0 for f, e in spec.disc_factors if e > 0):
        return Validity.SINGULAR
    return Validity.VALID


def family_parameter(m: int, a: int | Fraction, p: int | None = None) -> FamilyParameter:
    value = Fraction(a) if p is None else int(a) % p
    return FamilyParameter(value, classify_parameter(m, a, p))


def family_discriminant(m: int, a: int | Fraction, p: int | None = None) -> int | Fraction:
    """``Delta_m(a)`` from the factored form, exactly over Q or as a residue mod p."""
    spec = family_spec(m)
    if classify_parameter(m, a, p) == Validity.UNDEFINED:
        raise InvalidParameter(m, a, Validity.UNDEFINED, "" if p is None else f" mod {p}")
    if p is None:
        a = Fraction(a)
        out = Fraction(1)
        for f, e in spec.disc_factors:
            out *= poly_eval(f, a) ** e
        return out
    a = int(a) % p
    out = 1
    for f, e in spec.disc_factors:
        v = poly_eval(f, a) % p
        out = out * pow(v, e, p) % p
    return out


def family_curve(m: int, a: int, p: int) -> WeierstrassCurve:
    """``E_m(a)`` over F_p; raises :class:`InvalidParameter` when undefined or singular."""
    validity = classify_parameter(m, a, p)
    if validity != Validity.VALID:
        raise InvalidParameter(m, a, validity, f" mod {p}")
    spec = family_spec(m)
    a = int(a) % p

    def coeff(rp: RationalPoly) -> int:
        return poly_eval(rp.num, a) * pow(poly_eval(rp.den, a), -1, p) % p

    a1, a2 = coeff(spec.a1), coeff(spec.a2)
    return WeierstrassCurve.long(p, a1, a2, a2, 0, 0)


def marked_point_order(m: int, a: int, p: int) -> int:
    """Order of ``(0, 0)`` on ``E_m(a)`` over F_p (a divisor of m)."""
    E = family_curve(m, a, p)
    a1, a2, a3, a4, _ = E.coefficients
    order = _kernels.point_order_dividing(m, 0, 0, a1, a2, a3, a4, p)
    if order == 0:
        raise ArithmeticError(f"(0,0) on E_{m}({a}) mod {p} has order not dividing {m}")
    return int(order)


def marked_point_orders(m: int, p: int) -> np.ndarray:
    """Order of ``(0, 0)`` for every parameter in F_p (0 where invalid)."""
    red = reduce_family(m, p)
    out = np.zeros(p, dtype=np.int64)
    for b in red.valid_parameters:
        a1, a2, a3, a4, _ = (int(c) for c in red.coeffs[b])
        out[b] = _kernels.point_order_dividing(m, 0, 0, a1, a2, a3, a4, p)
    return out


def _poly_mul(f: Poly, g: Poly) -> Poly:
    out = [0] * (len(f) + len(g) - 1)
    for i, x in enumerate(f):
        for j, y in enumerate(g):
            out[i + j] += x * y
    return tuple(out)


def _poly_add(f: Poly, g: Poly) -> Poly:
    n = max(len(f), len(g))
    f = (0,) * (n - len(f)) + f
    g = (0,) * (n - len(g)) + g
    out = tuple(x + y for x, y in zip(f, g))
    while len(out) > 1 and out[0] == 0:
        out = out[1:]
    return out


def _poly_scale(c: int, f: Poly) -> Poly:
    return _poly_add((0,), tuple(c * x for x in f))


def special_j_degree_bound(m: int) -> int:
    """Upper bound, independent of p, on #{a in F_p : j(E_m(a)) in {0, 1728}}.

    Clearing denominators turns ``c4`` and ``c6`` into integer polynomials
    in ``a``; the bound is the sum of their degrees.
    """
    spec = family_spec(m)
    n1, d1 = spec.a1.num, spec.a1.den
    n2, d2 = spec.a2.num, spec.a2.den
    # b2 = (n1^2 d2 + 4 n2 d1^2) / (d1^2 d2), b4 = n1 n2 / (d1 d2), b6 = n2^2 / d2^2
    b2 = _poly_add(_poly_mul(_poly_mul(n1, n1), d2), _poly_scale(4, _poly_mul(n2, _poly_mul(d1, d1))))
    b4 = _poly_mul(n1, n2)
    b6 = _poly_mul(n2, n2)
    # over the common denominator den^2: b4 -> b4 * d1^3 d2, b6 -> b6 * d1^4
    d13 = _poly_mul(_poly_mul(d1, d1), d1)
    c4 = _poly_add(_poly_mul(b2, b2), _poly_scale(-24, _poly_mul(_poly_mul(b4, d13), d2)))
    # over den^3 with den = d1^2 d2
    c6 = _poly_add(
        _poly_scale(-1, _poly_mul(_poly_mul(b2, b2), b2)),
        _poly_add(
            _poly_scale(36, _poly_mul(_poly_mul(b2, b4), _poly_mul(d13, d2))),
            _poly_scale(-216, _poly_mul(b6, _poly_mul(_poly_mul(d13, d13), d2))),
        ),
    )
    return poly_degree(c4) + poly_degree(c6)


# ---------------------------------------------------------------------------
# parameters giving isomorphic curves

# each map is (num, den) polynomials; the image of a is num(a)/den(a)
Mobius = tuple[Poly, Poly]

EQUIVALENCE_MAPS: dict[str, dict[int, tuple[Mobius, ...]]] = {
    "printed": {
        4: (),
        5: (((-1,), A),),
        6: (),
        7: (((-1, 1), A), ((-1,), (-1, 1))),  # (1-a)/a, -1/(1-a)
        8: (((-1, 1), (1,)),),
        9: (((1, -1), A), ((-1,), (1, -1))),  # (a-1)/a, -1/(a-1)
        10: (((1, -1), TWO_A_MINUS_1),),
        12: (((-1, 1), (1,)),),
    },
}
# the other sign choice for the two three-element rows
EQUIVALENCE_MAPS["variant"] = {
    **EQUIVALENCE_MAPS["printed"],
    7: EQUIVALENCE_MAPS["printed"][9],
    9: EQUIVALENCE_MAPS["printed"][7],
}
CONVENTIONS = tuple(EQUIVALENCE_MAPS)


def equivalent_parameters(m: int, a: int, p: int, convention: str = "printed") -> set[int]:
    """``a`` together with its images under the listed maps, where defined."""
    maps = EQUIVALENCE_MAPS[convention][family_spec(m).m]
    a = int(a) % p
    out = {a}
    for num, den in maps:
        d = poly_eval(den, a) % p
        if d:
            out.add(poly_eval(num, a) * pow(d, -1, p) % p)
    return out


def _class_keys(red: FamilyReduction) -> np.ndarray:
    """An isomorphism invariant for curves with AB != 0: ``j * 2 + [6AB square]``.

    Two short models with the same j and AB != 0 differ by a twist, which
    flips the quadratic character of AB; so this key is a complete
    invariant off j in {0, 1728}.
    """
    p = red.p
    A, B = red.short_coefficients
    inv = inverse_table(p)
    A3 = 4 * (A * A % p) * A % p
    j = 1728 * A3 % p * inv[(A3 + 27 * (B * B % p)) % p] % p
    sq = quadratic_character_table(p)[6 * (A * B % p) % p] == 1
    return np.where(red.valid, 2 * j + sq, -1)


@dataclass(frozen=True)
class EquivalenceReport:
    m: int
    p: int
    convention: str
    expected_orbit: int
    checked: int
    exceptional: tuple[int, ...]  # valid parameters with j in {0, 1728}
    discrepancies: tuple[tuple[int, str], ...]

    @property
    def ok(self) -> bool:
        return not self.discrepancies


def verify_parameter_equivalence(m: int, p: int, convention: str = "printed") -> EquivalenceReport:
    """Check every valid, non-exceptional ``a`` in F_p against the maps.

    A parameter is a discrepancy when an image is undefined as a map, is an
    invalid parameter, gives a non-isomorphic curve, or when the set of
    images does not have ``phi(m)/2`` elements.
    """
    spec = family_spec(m)
    red = reduce_family(m, p)
    maps = EQUIVALENCE_MAPS[convention][m]
    expected = euler_phi(m) // 2
    keys = _class_keys(red)
    special = red.special_j
    bad = []
    checked = 0
    for a in red.valid_parameters:
        a = int(a)
        if special[a]:
            continue
        checked += 1
        images = {a}
        reasons = []
        for num, den in maps:
            d = poly_eval(den, a) % p
            if d == 0:
                reasons.append("map undefined")
                continue
            b = poly_eval(num, a) * pow(d, -1, p) % p
            images.add(b)
            if red.validity[b] != Validity.VALID:
                reasons.append(f"image {b} {Validity(red.validity[b]).name.lower()}")
            elif keys[b] != keys[a]:
                reasons.append(f"image {b} not isomorphic")
        if not reasons and len(images) != expected:
            reasons.append(f"orbit size {len(images)} != {expected}")
        if reasons:
            bad.append((a, "; ".join(reasons)))
    exceptional = tuple(int(a) for a in np.flatnonzero(special))
    return EquivalenceReport(spec.m, p, convention, expected, checked, exceptional, tuple(bad))


def equivalence_convention(m: int, primes) -> dict[str, int]:
    """Number of discrepancies per convention over the given primes."""
    return {
        conv: sum(len(verify_parameter_equivalence(m, p, conv).discrepancies) for p in primes)
        for conv in CONVENTIONS
    }


def isomorphic_parameters(m: int, a: int, p: int) -> list[int]:
    """Every valid ``b`` in F_p with ``E_m(b)`` isomorphic to ``E_m(a)``. Slow."""
    E = family_curve(m, a, p)
    red = reduce_family(m, p)
    out = []
    for b in red.valid_parameters:
        b = int(b)
        if E.j_invariant != family_curve(m, b, p).j_invariant:
            continue
        if is_isomorphic(E, family_curve(m, b, p)):
            out.append(b)
    return out


# ---------------------------------------------------------------------------
# curves over Q


@dataclass(frozen=True)
class GlobalFamilyCurve:
    """``E_m(a)`` over Q for an integer or rational parameter."""

    m: int
    a: Fraction
    a1: Fraction
    a2: Fraction
    discriminant: Fraction

    @property
    def a3(self) -> Fraction:
        return self.a2

    @property
    def coefficients(self) -> tuple[Fraction, ...]:
        return (self.a1, self.a2, self.a2, Fraction(0), Fraction(0))

    def _bad_values(self) -> list[int]:
        spec = family_spec(self.m)
        vals = [self.a.denominator]
        vals += [poly_eval(d, self.a) for d in spec.denominators]
        vals += [poly_eval(f, self.a) for f, e in spec.disc_factors if e > 0]
        out = []
        for v in vals:
            v = Fraction(v)
            out += [abs(v.numerator), v.denominator]
        return [v for v in out if v > 1]

    def is_good(self, p: int) -> bool:
        """Good reduction of this model at p (and p > 3)."""
        return p > 3 and all(v % p for v in self._bad_values())

    @cached_property
    def bad_primes(self) -> frozenset[int]:
        """``{2, 3}``, primes in coefficient denominators, and primes dividing Delta."""
        out = {2, 3}
        for v in self._bad_values():
            out |= set(factorize(v).primes)
        return frozenset(out)

    def reduce(self, p: int) -> WeierstrassCurve:
        if not self.is_good(p):
            raise InvalidParameter(self.m, self.a, Validity.SINGULAR, f" has bad reduction at {p}")
        r = [c.numerator * pow(c.denominator, -1, p) % p for c in self.coefficients]
        return WeierstrassCurve.long(p, *r)


def integer_invalid_parameters(m: int) -> tuple[int, ...]:
    """Integers ``a`` with ``E_m(a)`` undefined or singular over Q.

    An integer root of an integer polynomial divides its constant term (or
    is 0 when that term vanishes), so the candidates are finite.
    """
    spec = family_spec(m)
    polys = list(spec.denominators) + [f for f, e in spec.disc_factors if e > 0]
    roots = set()
    for f in polys:
        const = f[-1]
        if const == 0:
            roots.add(0)
            continue
        c = abs(const)
        for d in range(1, c + 1):
            if c % d == 0:
                roots.update(r for r in (d, -d) if poly_eval(f, r) == 0)
    return tuple(sorted(roots))


def global_family(m: int, a: int | Fraction) -> GlobalFamilyCurve:
    spec = family_spec(m)
    a = Fraction(a)
    validity = classify_parameter(m, a)
    if validity != Validity.VALID:
        raise InvalidParameter(m, a, validity, " over Q")

    def coeff(rp: RationalPoly) -> Fraction:
        return Fraction(poly_eval(rp.num, a)) / poly_eval(rp.den, a)

    return GlobalFamilyCurve(m, a, coeff(spec.a1), coeff(spec.a2), family_discriminant(m, a))


def family_model_discriminant(m: int, a: int | Fraction) -> Fraction:
    """Discriminant of the model itself from its b-invariants, as a cross-check."""
    E = global_family(m, a)
    a1, a2, a3, a4, a6 = E.coefficients
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    return -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6


__all__ = [
    "FAMILY_SET",
    "TorsionLabel",
    "RationalPoly",
    "FamilySpec",
    "FAMILIES",
    "family_spec",
    "Validity",
    "InvalidParameter",
    "FamilyParameter",
    "FamilyReduction",
    "reduce_family",
    "classify_parameter",
    "family_parameter",
    "family_discriminant",
    "family_curve",
    "marked_point_order",
    "marked_point_orders",
    "special_j_degree_bound",
    "EQUIVALENCE_MAPS",
    "CONVENTIONS",
    "equivalent_parameters",
    "EquivalenceReport",
    "verify_parameter_equivalence",
    "equivalence_convention",
    "isomorphic_parameters",
    "GlobalFamilyCurve",
    "global_family",
    "integer_invalid_parameters",
    "family_model_discriminant",
]
