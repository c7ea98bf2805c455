"""Integer and multiplicative-function helpers.

Everything here is exact. Rationals are plain :class:`fractions.Fraction`
values; factorizations are deterministic trial division against a cached
prime table, which is plenty for the sizes used in this package (< 10^8).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import isqrt, prod
from typing import Iterable, Iterator

import numpy as np

ExactRational = Fraction

__all__ = [
    "ExactRational",
    "FactoredInt",
    "factorize",
    "as_factored",
    "euler_phi",
    "psi",
    "moebius",
    "padic_valuation",
    "is_prime",
    "primes_up_to",
    "prime_pi",
    "divisors",
    "smallest_prime_factor_sieve",
    "shifted_prime_factorizations",
]


@dataclass(frozen=True)
class FactoredInt:
    """A positive integer together with its prime factorization."""

    value: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.value < 1:
            raise ValueError(f"FactoredInt needs a positive value, got {self.value}")
        primes = [q for q, _ in self.factors]
        if primes != sorted(set(primes)) or any(e < 1 for _, e in self.factors):
            raise ValueError(f"non-canonical factor list {self.factors}")
        if prod(q**e for q, e in self.factors) != self.value:
            raise ValueError(f"factors {self.factors} do not multiply to {self.value}")

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(q for q, _ in self.factors)

    def exponent(self, q: int) -> int:
        for r, e in self.factors:
            if r == q:
                return e
        return 0

    def __int__(self) -> int:
        return self.value


@lru_cache(maxsize=None)
def _small_primes(limit: int) -> tuple[int, ...]:
    return tuple(int(q) for q in _sieve(limit))


def _sieve(limit: int) -> np.ndarray:
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for q in range(3, isqrt(limit) + 1, 2):
        if flags[q]:
            flags[q * q :: 2 * q] = False
    return np.flatnonzero(flags).astype(np.int64)


def _trial_primes(n: int) -> Iterator[int]:
    # cached table up to 10^5 covers n < 10^10; beyond that fall back to odd numbers
    table = _small_primes(100_000)
    root = isqrt(n)
    for q in table:
        if q > root:
            return
        yield q
    q = table[-1] + 2
    while q <= root:
        yield q
        q += 2


def factorize(n: int) -> FactoredInt:
    """Canonical factorization of ``n >= 1`` by trial division."""
    n = int(n)
    if n < 1:
        raise ValueError(f"cannot factorize {n}")
    factors = []
    rest = n
    for q in _trial_primes(n):
        if q * q > rest:
            break
        if rest % q == 0:
            e = 0
            while rest % q == 0:
                rest //= q
                e += 1
            factors.append((q, e))
    if rest > 1:
        factors.append((rest, 1))
    return FactoredInt(n, tuple(factors))


def as_factored(n: int | FactoredInt) -> FactoredInt:
    return n if isinstance(n, FactoredInt) else factorize(n)


def euler_phi(n: int | FactoredInt) -> int:
    f = as_factored(n)
    return prod((q - 1) * q ** (e - 1) for q, e in f.factors)


def psi(n: int | FactoredInt) -> int:
    """Dedekind psi: ``n * prod_{q | n} (1 + 1/q)``."""
    f = as_factored(n)
    return prod((q + 1) * q ** (e - 1) for q, e in f.factors)


def moebius(n: int | FactoredInt) -> int:
    f = as_factored(n)
    if any(e > 1 for _, e in f.factors):
        return 0
    return -1 if len(f.factors) % 2 else 1


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    f = factorize(n)
    return f.factors == ((n, 1),)


def padic_valuation(ell: int, n: int) -> int:
    """Largest ``e`` with ``ell**e`` dividing ``n``."""
    if not is_prime(ell):
        raise ValueError(f"{ell} is not prime")
    if n < 1:
        raise ValueError(f"valuation needs n >= 1, got {n}")
    e = 0
    while n % ell == 0:
        n //= ell
        e += 1
    return e


def primes_up_to(x: int) -> list[int]:
    return [int(q) for q in _sieve(int(x))]


def prime_pi(x: int) -> int:
    return int(_sieve(int(x)).size)


def divisors(n: int | FactoredInt) -> list[int]:
    f = as_factored(n)
    divs = [1]
    for q, e in f.factors:
        divs = [d * q**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def smallest_prime_factor_sieve(n: int) -> np.ndarray:
    """``spf[k]`` is the least prime factor of ``k`` for ``2 <= k <= n``."""
    spf = np.zeros(n + 1, dtype=np.int64)
    for q in _sieve(isqrt(n)):
        q = int(q)
        block = spf[q * q :: q]
        block[block == 0] = q
    rest = spf == 0
    spf[rest] = np.arange(n + 1)[rest]
    return spf


def _factor_with_spf(k: int, spf: np.ndarray) -> tuple[tuple[int, int], ...]:
    out = []
    while k > 1:
        q = int(spf[k])
        e = 0
        while k % q == 0:
            k //= q
            e += 1
        out.append((q, e))
    return tuple(out)


def shifted_prime_factorizations(x: int, primes: Iterable[int] | None = None) -> dict[int, FactoredInt]:
    """Factor ``p - 1`` for every prime ``p <= x`` off one shared sieve."""
    spf = smallest_prime_factor_sieve(max(int(x), 2))
    ps = primes_up_to(x) if primes is None else primes
    return {p: FactoredInt(p - 1, _factor_with_spf(p - 1, spf)) for p in ps}
