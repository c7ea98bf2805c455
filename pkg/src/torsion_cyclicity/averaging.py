"""Average cyclicity over a torsion family at desk scale.

Two estimators of ``(1/#params) sum_a pi_cyc(E_m(a), x)``:

* direct mode sums over integer parameters ``|a| <= A``; each prime only
  sees ``a mod p``, so one residue table per prime answers every ``a``;
* density mode is the ``A -> infinity`` limit ``sum_{5 <= p <= x} s_m(p)/p``
  with ``s_m(p)`` the number of parameters in F_p with cyclic reduction.

Both are compared against ``C_m * prod_{ell not | m} (1 - 1/(ell(ell-1)(ell^2-1))) * pi(x)``.
The module also checks the mean values of the multiplicative functions
behind that constant over shifted primes ``p - 1``.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import densities
from .census import family_cyclic_counts
from .families import (
    TorsionLabel,
    Validity,
    classify_parameter,
    global_family,
    integer_invalid_parameters,
    reduce_family,
)
from .finite_curves import class_table, group_structure, group_structures
from .numtheory import FactoredInt, as_factored, prime_pi, primes_up_to, smallest_prime_factor_sieve

__all__ = [
    "DEFAULT_L",
    "MultiplicativeSpec",
    "MeanValueReport",
    "mean_over_shifted_primes",
    "split_mean",
    "SplitMeanReport",
    "pi_cyc",
    "full_two_torsion_parameters",
    "PerPrimeRow",
    "AverageReport",
    "density_sweep",
    "average_density",
    "average_direct",
    "average_direct_slow",
    "SwapDecomposition",
    "swap_decomposition",
    "MainTerm",
    "predicted_main_term",
]

DEFAULT_L = 10**5


@lru_cache(maxsize=None)
def _euler(m: int, L: int) -> densities.EulerProductResult:
    return densities.euler_product(m, L)


# ---------------------------------------------------------------------------
# multiplicative functions on shifted primes


@dataclass(frozen=True)
class MultiplicativeSpec:
    """One of ``F, F', chi, G, G'`` attached to ``m``.

    ``F(n) = prod_{ell | n, ell not | m} (1 - 1/(ell(ell^2-1)))``,
    ``chi(n) = [ell0 not | n]``, ``F' = F chi``, and ``G, G'`` are their
    Moebius transforms ``mu * F`` and ``mu * F'``.
    """

    name: str
    m: int

    NAMES = ("F", "F'", "chi", "G", "G'")

    def __post_init__(self):
        if self.name not in self.NAMES:
            raise ValueError(f"unknown function {self.name!r}; choose from {self.NAMES}")
        if self.name in ("F'", "chi", "G'") and self.label.is_two_power:
            raise ValueError(f"{self.name} needs an odd prime factor of m, m={self.m}")

    @property
    def label(self) -> TorsionLabel:
        return TorsionLabel.of(self.m)

    @property
    def ell0(self) -> int:
        return self.label.ell0

    def _base_local(self, name: str, ell: int, k: int) -> Fraction:
        # F-type functions only see the radical
        if k == 0:
            return Fraction(1)
        if name == "chi":
            return Fraction(0 if ell == self.ell0 else 1)
        f = Fraction(1) if self.m % ell == 0 else 1 - Fraction(1, ell * (ell * ell - 1))
        if name == "F'" and ell == self.ell0:
            return Fraction(0)
        return f

    def local(self, ell: int, k: int) -> Fraction:
        """Value at the prime power ``ell^k``."""
        if self.name in ("G", "G'"):
            base = "F" if self.name == "G" else "F'"
            if k == 0:
                return Fraction(1)
            return self._base_local(base, ell, k) - self._base_local(base, ell, k - 1)
        return self._base_local(self.name, ell, k)

    def __call__(self, n: int | FactoredInt) -> Fraction:
        out = Fraction(1)
        for ell, k in as_factored(n).factors:
            out *= self.local(ell, k)
        return out

    def limit(self, L: int = DEFAULT_L) -> Decimal:
        """``sum_d (mu * f)(d) / phi(d)``, the mean of ``f(p - 1)`` over primes."""
        if self.name in ("G", "G'"):
            raise ValueError("limits are taken for F, F' and chi")
        if self.name == "chi":
            return Decimal(self.ell0 - 2) / Decimal(self.ell0 - 1)
        # off m the local factor is 1 - 1/(ell(ell^2-1)(ell-1)); on m it is 1 + g(ell)/(ell-1)
        value = _euler(self.m, L).truncated_value
        g = MultiplicativeSpec("G" if self.name == "F" else "G'", self.m)
        for ell in (q for q in primes_up_to(self.m) if self.m % q == 0):
            local = 1 + g.local(ell, 1) / (ell - 1)
            value *= Decimal(local.numerator) / Decimal(local.denominator)
        return value


@lru_cache(maxsize=4)
def _shifted_prime_radicals(x: int) -> tuple[np.ndarray, tuple[np.ndarray, ...]]:
    """Primes ``p <= x`` and, per round, the next distinct prime factor of ``p - 1`` (1 once exhausted)."""
    ps = np.array(primes_up_to(x), dtype=np.int64)
    spf = smallest_prime_factor_sieve(max(x, 2))
    n = ps - 1  # >= 1, and spf[1] = 1
    rounds = []
    while np.any(n > 1):
        q = spf[n]
        rounds.append(q)
        while True:
            hit = (q > 1) & (n % q == 0)
            if not hit.any():
                break
            n = np.where(hit, n // q, n)
    return ps, tuple(rounds)


def _values_on_shifted_primes(spec: MultiplicativeSpec, x: int) -> tuple[np.ndarray, np.ndarray]:
    ps, rounds = _shifted_prime_radicals(x)
    ells = np.array(primes_up_to(x), dtype=np.float64)
    factors = np.ones_like(ells)
    if spec.name != "chi":
        factors = 1.0 - 1.0 / (ells * (ells * ells - 1.0))
        factors[np.fmod(spec.m, ells) == 0] = 1.0
    if spec.name in ("F'", "chi"):
        factors[ells == spec.ell0] = 0.0
    table = np.ones(max(x, 2) + 1)
    table[ells.astype(np.int64)] = factors
    vals = np.ones(ps.size)
    for q in rounds:
        vals *= table[q]
    return ps, vals


@dataclass(frozen=True)
class MeanValueReport:
    name: str
    m: int
    x: int
    measured: float
    predicted: float

    @property
    def relative_error(self) -> float:
        return abs(self.measured - self.predicted) / self.predicted


def mean_over_shifted_primes(spec: MultiplicativeSpec, x: int, L: int = DEFAULT_L) -> MeanValueReport:
    """``(1/pi(x)) sum_{p <= x} f(p - 1)`` against its Euler-product limit."""
    if x < 100:
        raise ValueError(f"x must be at least 100, got {x}")
    if spec.name in ("G", "G'"):
        raise ValueError("mean values are taken for F, F' and chi")
    _, vals = _values_on_shifted_primes(spec, x)
    return MeanValueReport(spec.name, spec.m, x, float(vals.mean()), float(spec.limit(L)))


@dataclass(frozen=True)
class SplitMeanReport:
    """Mean of ``F(p - 1)`` over ``p = 1 mod ell0`` with both ways of combining the limits."""

    m: int
    x: int
    measured: float
    minus_reading: float  # lim F - lim F'
    plus_reading: float  # lim F + lim F'

    @property
    def relative_error_minus(self) -> float:
        return abs(self.measured - self.minus_reading) / self.minus_reading

    @property
    def relative_error_plus(self) -> float:
        return abs(self.measured - self.plus_reading) / self.plus_reading


def split_mean(m: int, x: int, L: int = DEFAULT_L) -> SplitMeanReport:
    F = MultiplicativeSpec("F", m)
    Fp = MultiplicativeSpec("F'", m)
    ps, vals = _values_on_shifted_primes(F, x)
    measured = float(vals[(ps - 1) % F.ell0 == 0].sum() / ps.size)
    lf, lfp = float(F.limit(L)), float(Fp.limit(L))
    return SplitMeanReport(m, x, measured, lf - lfp, lf + lfp)


# ---------------------------------------------------------------------------
# curves over Q


def _family_primes(x: int) -> list[int]:
    return [p for p in primes_up_to(x) if p >= 5]


def pi_cyc(m: int, a: int, x: int) -> int:
    """Good primes ``5 <= p <= x`` where ``E_m(a)`` has cyclic reduction."""
    E = global_family(m, a)
    count = 0
    for p in _family_primes(x):
        if E.is_good(p) and group_structure(E.reduce(p)).n2 == 1:
            count += 1
    return count


def full_two_torsion_parameters(m: int, amax: int, primes=(5, 7, 11, 13, 17, 19, 23)) -> list[int]:
    """Integers ``|a| <= amax`` whose reductions have full 2-torsion at every test prime.

    Candidates for curves over Q with ``Z/2 x Z/2`` inside their torsion;
    these are never cyclic at a good prime.
    """
    out = []
    for a in range(-amax, amax + 1):
        if classify_parameter(m, a) != Validity.VALID:
            continue
        E = global_family(m, a)
        good = [p for p in primes if E.is_good(p)]
        if good and all(group_structure(E.reduce(p)).n2 % 2 == 0 for p in good):
            out.append(a)
    return out


# ---------------------------------------------------------------------------
# per-prime sweeps


def _sweep_chunk(args) -> list[tuple[int, dict[int, tuple[int, int]]]]:
    primes, ms = args
    return [(p, family_cyclic_counts(p, ms)) for p in primes]


def density_sweep(ms, x: int, workers: int = 1) -> dict[int, list[tuple[int, int, int]]]:
    """``(p, valid_count, s_m(p))`` for every ``5 <= p <= x`` and every m.

    Results are ordered by p whatever the worker count.
    """
    ms = tuple(ms)
    primes = _family_primes(x)
    if workers > 1 and len(primes) > workers:
        chunks = [primes[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(workers) as pool:
            parts = [r for chunk in pool.map(_sweep_chunk, [(c, ms) for c in chunks]) for r in chunk]
        parts.sort()
    else:
        parts = _sweep_chunk((primes, ms))
    return {m: [(p, *counts[m]) for p, counts in parts] for m in ms}


@dataclass(frozen=True)
class MainTerm:
    value: Decimal
    uncertainty: Decimal  # absolute, from the Euler-product tail

    def __float__(self) -> float:
        return float(self.value)


def predicted_main_term(m: int, x: int, L: int = DEFAULT_L) -> MainTerm:
    """``C_m * prod_{ell not | m, ell <= L} (...) * pi(x)``."""
    c = densities.c_m(m)
    ep = _euler(m, L)
    value = Decimal(c.numerator) / Decimal(c.denominator) * ep.truncated_value * prime_pi(x)
    return MainTerm(value, value * ep.tail_bound)


@dataclass(frozen=True)
class PerPrimeRow:
    p: int
    valid_count: int
    cyclic_count: int
    density: float
    cumulative_measured: float
    cumulative_predicted: float

    @property
    def relative_error(self) -> float:
        return abs(self.cumulative_measured - self.cumulative_predicted) / self.cumulative_predicted

    def row(self) -> dict:
        return {
            "p": self.p,
            "valid_count": self.valid_count,
            "cyclic_count": self.cyclic_count,
            "density": f"{self.density:.10f}",
            "cumulative_measured": f"{self.cumulative_measured:.10f}",
            "cumulative_predicted": f"{self.cumulative_predicted:.10f}",
            "relative_error": f"{self.relative_error:.10f}",
        }


@dataclass(frozen=True)
class AverageReport:
    m: int
    x: int
    mode: str
    measured: float
    predicted: float
    per_prime: tuple[PerPrimeRow, ...] = field(repr=False)
    A: int | None = None
    valid_parameters: int | None = None
    measured_exact: Fraction | None = field(default=None, repr=False)
    warning: str | None = None

    @property
    def relative_error(self) -> float:
        return abs(self.measured - self.predicted) / self.predicted


def _density_rows(m: int, rows, L: int) -> tuple[tuple[PerPrimeRow, ...], Fraction]:
    unit = float(predicted_main_term(m, 2, L))  # the constant, times pi(2) = 1
    total = Fraction(0)
    out = []
    for p, valid, cyc in rows:
        total += Fraction(cyc, p)
        out.append(PerPrimeRow(p, valid, cyc, cyc / p, float(total), unit * prime_pi(p)))
    return tuple(out), total


def average_density(m: int, x: int, sweep=None, L: int = DEFAULT_L, workers: int = 1) -> AverageReport:
    """``sum_{5 <= p <= x} s_m(p)/p`` against the predicted main term."""
    if x < 5:
        raise ValueError(f"x must be at least 5, got {x}")
    rows = (sweep or density_sweep((m,), x, workers))[m]
    rows = [r for r in rows if r[0] <= x]
    per_prime, total = _density_rows(m, rows, L)
    return AverageReport(
        m, x, "density", float(total), float(predicted_main_term(m, x, L)), per_prime, measured_exact=total
    )


@lru_cache(maxsize=256)
def _cyclic_residues(m: int, p: int) -> np.ndarray:
    """Boolean over F_p: parameter valid with cyclic reduction."""
    red = reduce_family(m, p)
    params = red.valid_parameters
    A, B = (v[params] for v in red.short_coefficients)
    _, n2 = class_table(p, True).lookup(A, B)
    special = (A == 0) | (B == 0)
    if special.any():
        _, n2s = group_structures(p, red.coeffs[params][special], cyclic_only=True)
        n2[special] = n2s
    out = np.zeros(p, dtype=bool)
    out[params[n2 == 1]] = True
    out.flags.writeable = False
    return out


def _param_range(m: int, A: int) -> tuple[np.ndarray, int]:
    a = np.arange(-A, A + 1, dtype=np.int64)
    invalid = [r for r in integer_invalid_parameters(m) if -A <= r <= A]
    return a, a.size - len(invalid)


def average_direct(m: int, A: int, x: int, L: int = DEFAULT_L) -> AverageReport:
    """``(1/#valid a) sum_{|a| <= A} pi_cyc(E_m(a), x)`` over nonsingular integer parameters."""
    if A < 1 or x < 5:
        raise ValueError(f"need A >= 1 and x >= 5, got A={A}, x={x}")
    a, n_valid = _param_range(m, A)
    unit = float(predicted_main_term(m, 2, L))
    rows = []
    cumulative = 0.0
    exact = Fraction(0)
    for p in _family_primes(x):
        residues = a % p
        good = reduce_family(m, p).valid[residues]
        cyc = int(np.count_nonzero(_cyclic_residues(m, p)[residues]))
        exact += Fraction(cyc, n_valid)
        cumulative += cyc / n_valid
        rows.append(PerPrimeRow(p, int(np.count_nonzero(good)), cyc, cyc / n_valid, cumulative, unit * prime_pi(p)))
    note = None
    if A <= x:
        note = f"A={A} <= x={x}: the averaging regime needs A > x^(1+eps)"
        warnings.warn(note, stacklevel=2)
    return AverageReport(
        m,
        x,
        "direct",
        float(exact),
        float(predicted_main_term(m, x, L)),
        tuple(rows),
        A=A,
        valid_parameters=n_valid,
        measured_exact=exact,
        warning=note,
    )


def average_direct_slow(m: int, A: int, x: int) -> Fraction:
    """Same average as :func:`average_direct`, one curve over Q at a time."""
    total = 0
    n_valid = 0
    for a in range(-A, A + 1):
        if classify_parameter(m, a) != Validity.VALID:
            continue
        n_valid += 1
        total += pi_cyc(m, a, x)
    return Fraction(total, n_valid)


@dataclass(frozen=True)
class SwapDecomposition:
    """``sum_a pi_cyc = (2A + 1) * sum_p s_m(p)/p + boundary``, all exact."""

    m: int
    A: int
    x: int
    direct_total: int
    density_sum: Fraction
    boundary: Fraction
    boundary_by_prime: tuple[tuple[int, Fraction], ...]

    @property
    def holds(self) -> bool:
        return self.direct_total == (2 * self.A + 1) * self.density_sum + self.boundary


def swap_decomposition(m: int, A: int, x: int) -> SwapDecomposition:
    """Split the direct double sum into the density term and per-prime boundary terms.

    For each prime the residue class of ``b`` holds ``(2A + 1)/p + delta_b``
    integers of ``[-A, A]`` with ``|delta_b| < 1``; the boundary is the sum
    of ``delta_b`` over parameters with cyclic reduction, enumerated.
    """
    a = np.arange(-A, A + 1, dtype=np.int64)
    span = 2 * A + 1
    direct_total = 0
    density_sum = Fraction(0)
    by_prime = []
    for p in _family_primes(x):
        cyc = _cyclic_residues(m, p)
        per_residue = np.bincount(a % p, minlength=p)
        direct_total += int(per_residue[cyc].sum())
        s = int(np.count_nonzero(cyc))
        density_sum += Fraction(s, p)
        by_prime.append((p, Fraction(int(per_residue[cyc].sum())) - Fraction(span * s, p)))
    boundary = sum((d for _, d in by_prime), Fraction(0))
    return SwapDecomposition(m, A, x, direct_total, density_sum, boundary, tuple(by_prime))

