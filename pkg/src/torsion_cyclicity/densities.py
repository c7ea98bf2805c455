"""Exact densities for counts of curves over F_q.

All per-curve densities are normalized by q, so they lie in [0, 1]:

* ``w_tilde(a, b, q)``: main term of ``#W(a, b) / q`` where ``W(a, b)`` is
  the set of curves with ``E[b](F_q) = Z/a x Z/b``;
* ``r_prime(q, m)``: main term of the proportion with a point of order m;
* ``cyclic_mtors_density(q, m)``: main term of the proportion that are
  cyclic and have a point of order m.

Everything is :class:`fractions.Fraction`. Euler products over all primes are
the one place with decimals, and they carry a rigorous tail bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from math import gcd, prod

from .families import FAMILY_SET, TorsionLabel
from .numtheory import (
    divisors,
    euler_phi,
    factorize,
    is_prime,
    moebius,
    padic_valuation,
    primes_up_to,
    psi,
)

__all__ = [
    "w_hat",
    "w_tilde",
    "w_tilde_local",
    "r_prime",
    "r_prime_local",
    "verify_convolution",
    "prime_power_terms",
    "verify_prime_power_case",
    "cyclic_mtors_density",
    "inclusion_exclusion_main_term",
    "c_m",
    "REFERENCE_C_M",
    "euler_factor",
    "EulerProductResult",
    "euler_product",
]


def _require_prime(q: int):
    if not is_prime(q):
        raise ValueError(f"q={q} must be prime")


def w_tilde(a: int, b: int, q: int) -> Fraction:
    """``hat w(a, b) / q``; zero unless ``a | gcd(b, q - 1)``."""
    if a < 1 or b < 1 or b % a:
        raise ValueError(f"need a | b with a, b >= 1, got a={a}, b={b}")
    _require_prime(q)
    g = gcd(b, q - 1)
    if g % a:
        return Fraction(0)
    out = Fraction(psi(b // a), a * euler_phi(b) * psi(b))
    for ell in factorize(g // a).primes:
        out *= Fraction(ell - 1, ell)
    return out


def w_hat(a: int, b: int, q: int) -> Fraction:
    return q * w_tilde(a, b, q)


def w_tilde_local(ell: int, k: int, e: int, q: int) -> Fraction:
    """Local factor of ``w_tilde`` at ``(ell^k, ell^e)`` for the prime ``ell``."""
    if k > e or k < 0:
        raise ValueError(f"need 0 <= k <= e, got k={k}, e={e}")
    _require_prime(q)
    v = padic_valuation(ell, q - 1)
    if k > v:
        return Fraction(0)
    out = Fraction(psi(ell ** (e - k)), ell**k * euler_phi(ell**e) * psi(ell**e))
    if k < min(e, v):
        out *= Fraction(ell - 1, ell)
    return out


def r_prime_local(q: int, ell: int, n: int) -> Fraction:
    """``r'_q(ell^n)``."""
    if n == 0:
        return Fraction(1)
    if ell == q:
        return Fraction(1, ell**n - ell ** (n - 1))
    v = padic_valuation(ell, q - 1)
    if v >= n:
        # 1 / (ell^n - ell^(n-2)), written to stay integral at n = 1
        return Fraction(ell**2, ell ** (n + 2) - ell**n)
    return Fraction(ell ** (2 * v + 1) + 1, ell ** (n + 2 * v - 1) * (ell * ell - 1))


def r_prime(q: int, m: int) -> Fraction:
    """Main term of the proportion of curves over F_q with a point of order m."""
    _require_prime(q)
    if m < 1:
        raise ValueError(f"m must be positive, got {m}")
    return prod((r_prime_local(q, ell, n) for ell, n in factorize(m).factors), start=Fraction(1))


def verify_convolution(q: int, m: int) -> bool:
    """``r'_q(m) == sum_{d | m} w_tilde(d, m)`` exactly."""
    if m % q == 0:
        raise ValueError(f"q={q} divides m={m}")
    return r_prime(q, m) == sum((w_tilde(d, m, q) for d in divisors(m)), Fraction(0))


def prime_power_terms(q: int, ell: int, e: int) -> tuple[Fraction, Fraction, str]:
    """Both sides of the prime-power case and which branch ``v < e`` or ``v >= e`` it hits."""
    v = padic_valuation(ell, q - 1)
    lhs = r_prime(q, ell**e)
    rhs = sum((w_tilde(ell**k, ell**e, q) for k in range(min(v, e) + 1)), Fraction(0))
    return lhs, rhs, "v<e" if v < e else "v>=e"


def verify_prime_power_case(q: int, ell: int, e: int) -> bool:
    lhs, rhs, _ = prime_power_terms(q, ell, e)
    return lhs == rhs


def _cyclic_factor(ell: int) -> Fraction:
    return 1 - Fraction(1, ell * (ell * ell - 1))


def cyclic_mtors_density(q: int, m: int) -> Fraction:
    """Main term / q for curves that are cyclic and have a point of order m."""
    _require_prime(q)
    if m % q == 0:
        raise ValueError(f"q={q} divides m={m}")
    out = Fraction(1)
    fm = factorize(m)
    for ell, n in fm.factors:
        if (q - 1) % ell == 0:
            out /= ell**n
        else:
            out /= euler_phi(ell**n)
    for ell in factorize(q - 1).primes:
        if m % ell:
            out *= _cyclic_factor(ell)
    return out


def inclusion_exclusion_main_term(q: int, m: int) -> Fraction:
    """Main term of #{cyclic with a point of order m} by inclusion/exclusion.

    ``q r'(m) - sum_{d | m, d > 1} hat w(d, m)`` counts ``W(1, m)``; the
    Moebius sum over squarefree ``t | q - 1`` coprime to m, ``t > 1``, then
    removes curves with full ``ell``-torsion for some ``ell`` not dividing m.
    """
    _require_prime(q)
    if m % q == 0:
        raise ValueError(f"q={q} divides m={m}")
    total = q * r_prime(q, m)
    total -= sum((w_hat(d, m, q) for d in divisors(m) if d > 1), Fraction(0))
    for t in divisors(q - 1):
        if t > 1 and gcd(t, m) == 1:
            mu = moebius(t)
            if mu:
                total += mu * w_hat(t, m * t, q)
    return total


REFERENCE_C_M: dict[int, Fraction] = {
    4: Fraction(1, 2),
    5: Fraction(19, 20),
    6: Fraction(5, 12),
    7: Fraction(41, 42),
    8: Fraction(1, 2),
    9: Fraction(5, 6),
    10: Fraction(19, 40),
    12: Fraction(5, 12),
}


def c_m(m: int | TorsionLabel) -> Fraction:
    """Family correction constant multiplying the cyclicity Euler product."""
    label = m if isinstance(m, TorsionLabel) else TorsionLabel.of(m)
    if label.m not in FAMILY_SET:
        raise ValueError(f"c_m is defined for m in {FAMILY_SET}, got {label.m}")
    m = label.m
    base = Fraction(euler_phi(m), m)
    if label.is_two_power:
        return base
    ell0, k, n = label.ell0, label.k, label.n
    generic = Fraction(euler_phi(m), 2**k * euler_phi(ell0**n)) * Fraction(ell0 - 2, ell0 - 1)
    return generic + base * Fraction(1, ell0 - 1)


def euler_factor(ell: int) -> Fraction:
    """``1 - 1 / (ell (ell - 1) (ell^2 - 1))``."""
    return 1 - Fraction(1, ell * (ell - 1) * (ell * ell - 1))


@dataclass(frozen=True)
class EulerProductResult:
    """``prod_{ell <= L, ell not | m} euler_factor(ell)`` with a tail bound.

    The full product lies in ``[truncated * exp(-tail_bound), truncated]``.
    """

    m: int
    truncation_bound: int
    truncated_value: Decimal
    tail_bound: Decimal
    exact: Fraction | None = None

    @property
    def lower(self) -> Decimal:
        return self.truncated_value * (-self.tail_bound).exp()

    @property
    def upper(self) -> Decimal:
        return self.truncated_value

    @property
    def correct_digits(self) -> int:
        """Decimal digits guaranteed by the tail bound."""
        if self.tail_bound == 0:
            return 10**6
        return max(0, int(-self.tail_bound.log10()))


EXACT_LIMIT = 200  # exact rational products are kept for L up to this


def euler_product(m: int, L: int, precision: int = 40) -> EulerProductResult:
    if L < 2:
        raise ValueError(f"truncation bound must be >= 2, got {L}")
    primes = [ell for ell in primes_up_to(L) if m % ell]
    exact = None
    if L <= EXACT_LIMIT:
        exact = prod((euler_factor(ell) for ell in primes), start=Fraction(1))
    with localcontext() as ctx:
        ctx.prec = precision
        value = Decimal(1)
        for ell in primes:
            d = ell * (ell - 1) * (ell * ell - 1)
            value *= Decimal(d - 1) / Decimal(d)
        # -log(1 - 1/(l(l-1)(l^2-1))) <= 2/l^4 for l >= 3, and sum_{n > L} 2/n^4 <= 2/(3L^3)
        tail = Decimal(2) / (Decimal(3) * Decimal(L) ** 3)
        value = +value
    return EulerProductResult(m, L, value, tail, exact)
