"""Elliptic curves over prime fields F_p with p > 3.

Curves are stored in long Weierstrass form
``y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6``; the short form is the
special case ``a1 = a2 = a3 = 0``. Points are ``None`` (infinity) or
``(x, y)`` tuples of canonical residues.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from math import gcd, isqrt
from typing import Callable, Optional

import numpy as np

from . import _kernels
from .numtheory import factorize, is_prime

Point = Optional[tuple[int, int]]
INFINITY: Point = None


@dataclass(frozen=True)
class PrimeField:
    p: int

    def __post_init__(self):
        if self.p <= 3 or not is_prime(self.p):
            raise ValueError(f"need a prime p > 3, got {self.p}")

    def __call__(self, v: int) -> int:
        return v % self.p

    def inv(self, v: int) -> int:
        v %= self.p
        if v == 0:
            raise ZeroDivisionError(f"0 has no inverse mod {self.p}")
        return pow(v, -1, self.p)

    @property
    def chi(self) -> np.ndarray:
        return quadratic_character_table(self.p)

    @property
    def sqrt(self) -> np.ndarray:
        return sqrt_table(self.p)


@lru_cache(maxsize=64)
def quadratic_character_table(p: int) -> np.ndarray:
    """``chi[r]`` in {-1, 0, 1} for each residue ``r``."""
    chi = -np.ones(p, dtype=np.int8)
    sq = (np.arange(p, dtype=np.int64) ** 2) % p
    chi[sq] = 1
    chi[0] = 0
    chi.flags.writeable = False
    return chi


@lru_cache(maxsize=64)
def sqrt_table(p: int) -> np.ndarray:
    """``root[r]`` is some square root of ``r`` mod ``p``, or -1."""
    root = -np.ones(p, dtype=np.int64)
    ys = np.arange(p, dtype=np.int64)
    root[(ys * ys) % p] = ys
    root.flags.writeable = False
    return root


@dataclass(frozen=True)
class WeierstrassCurve:
    field: PrimeField
    a1: int = 0
    a2: int = 0
    a3: int = 0
    a4: int = 0
    a6: int = 0

    def __post_init__(self):
        p = self.field.p
        for name in ("a1", "a2", "a3", "a4", "a6"):
            object.__setattr__(self, name, getattr(self, name) % p)

    @classmethod
    def short(cls, p: int | PrimeField, A: int, B: int) -> "WeierstrassCurve":
        fld = p if isinstance(p, PrimeField) else PrimeField(p)
        return cls(fld, a4=A, a6=B)

    @classmethod
    def long(cls, p: int | PrimeField, a1, a2, a3, a4, a6) -> "WeierstrassCurve":
        fld = p if isinstance(p, PrimeField) else PrimeField(p)
        return cls(fld, a1, a2, a3, a4, a6)

    @property
    def p(self) -> int:
        return self.field.p

    @property
    def coefficients(self) -> tuple[int, int, int, int, int]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def is_short(self) -> bool:
        return self.a1 == self.a2 == self.a3 == 0

    @cached_property
    def b_invariants(self) -> tuple[int, int, int, int]:
        a1, a2, a3, a4, a6 = self.coefficients
        p = self.p
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return (b2 % p, b4 % p, b6 % p, b8 % p)

    @cached_property
    def c_invariants(self) -> tuple[int, int]:
        b2, b4, b6, _ = self.b_invariants
        return ((b2 * b2 - 24 * b4) % self.p, (-b2**3 + 36 * b2 * b4 - 216 * b6) % self.p)

    @cached_property
    def discriminant(self) -> int:
        b2, b4, b6, b8 = self.b_invariants
        return (-b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6) % self.p

    @property
    def is_singular(self) -> bool:
        return self.discriminant == 0

    @cached_property
    def j_invariant(self) -> int:
        if self.is_singular:
            raise ValueError("singular curve has no j-invariant")
        c4, _ = self.c_invariants
        return c4**3 * self.field.inv(self.discriminant) % self.p

    def short_coefficients(self) -> tuple[int, int]:
        """``(A, B)`` of the short model reached by :func:`long_to_short`."""
        if self.is_short:
            return (self.a4, self.a6)
        c4, c6 = self.c_invariants
        return ((-27 * c4) % self.p, (-54 * c6) % self.p)

    def contains(self, P: Point) -> bool:
        if P is None:
            return True
        x, y = P
        a1, a2, a3, a4, a6 = self.coefficients
        return (y * y + a1 * x * y + a3 * y - (x**3 + a2 * x * x + a4 * x + a6)) % self.p == 0

    def negate(self, P: Point) -> Point:
        if P is None:
            return None
        x, y = P
        return (x, (-y - self.a1 * x - self.a3) % self.p)

    def points(self) -> list[Point]:
        """All rational points, infinity first, then by increasing x."""
        p = self.p
        b2, b4, b6, _ = self.b_invariants
        root = self.field.sqrt
        inv2 = (p + 1) // 2
        out: list[Point] = [None]
        for x in range(p):
            s = int(root[(4 * x**3 + b2 * x * x + 2 * b4 * x + b6) % p])
            if s < 0:
                continue
            for t in {s, (-s) % p}:
                out.append((x, (t - self.a1 * x - self.a3) * inv2 % p))
        return out

    def __str__(self) -> str:
        return f"E[{self.coefficients}] / F_{self.p}"


def _require_nonsingular(curve: WeierstrassCurve):
    if curve.is_singular:
        raise ValueError(f"{curve} is singular")


def long_to_short(curve: WeierstrassCurve) -> tuple[WeierstrassCurve, Callable[[Point], Point]]:
    """Short model ``y^2 = x^3 - 27 c4 x - 54 c6`` and the point map into it.

    The substitution is ``(x, y) -> (36x + 3 b2, 108(2y + a1 x + a3))``.
    Already-short curves come back unchanged with the identity map.
    """
    if curve.is_short:
        return curve, lambda P: P
    A, B = curve.short_coefficients()
    short = WeierstrassCurve.short(curve.field, A, B)
    b2 = curve.b_invariants[0]
    p = curve.p
    a1, a3 = curve.a1, curve.a3

    def to_short(P: Point) -> Point:
        if P is None:
            return None
        x, y = P
        return ((36 * x + 3 * b2) % p, 108 * (2 * y + a1 * x + a3) % p)

    return short, to_short


def add(P: Point, Q: Point, curve: WeierstrassCurve) -> Point:
    if not (curve.contains(P) and curve.contains(Q)):
        raise ValueError(f"point not on {curve}")
    return _add(P, Q, curve)


def _add(P: Point, Q: Point, curve: WeierstrassCurve) -> Point:
    if P is None:
        return Q
    if Q is None:
        return P
    p = curve.p
    a1, a2, a3, a4, _ = curve.coefficients
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        if (y1 + y2 + a1 * x1 + a3) % p == 0:
            return None
        lam = (3 * x1 * x1 + 2 * a2 * x1 + a4 - a1 * y1) * pow(2 * y1 + a1 * x1 + a3, -1, p)
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, p)
    lam %= p
    nu = (y1 - lam * x1) % p
    x3 = (lam * lam + a1 * lam - a2 - x1 - x2) % p
    return (x3, (-(lam + a1) * x3 - nu - a3) % p)


def scalar_mul(k: int, P: Point, curve: WeierstrassCurve) -> Point:
    if not curve.contains(P):
        raise ValueError(f"{P} not on {curve}")
    if k < 0:
        k, P = -k, curve.negate(P)
    R: Point = None
    while k:
        if k & 1:
            R = _add(R, P, curve)
        k >>= 1
        if k:
            P = _add(P, P, curve)
    return R


def point_order(P: Point, curve: WeierstrassCurve, N: int | None = None) -> int:
    """Order of ``P`` using the factorization of the group order ``N``."""
    if N is None:
        N = count_points(curve)
    order = N
    for q, _ in factorize(N).factors:
        while order % q == 0 and scalar_mul(order // q, P, curve) is None:
            order //= q
    return order


def count_points(curve: WeierstrassCurve) -> int:
    """``#E(F_p)`` from the character sum over the 2-division cubic."""
    _require_nonsingular(curve)
    b2, b4, b6, _ = curve.b_invariants
    sums, _ = _kernels.char_sums(
        curve.p,
        np.array([b2], dtype=np.int64),
        np.array([b4], dtype=np.int64),
        np.array([b6], dtype=np.int64),
        curve.field.chi,
    )
    return curve.p + 1 + int(sums[0])


def count_points_naive(curve: WeierstrassCurve) -> int:
    """Exhaustive count over all ``(x, y)``; only meant for small ``p``."""
    p = curve.p
    a1, a2, a3, a4, a6 = curve.coefficients
    xs = np.arange(p, dtype=np.int64)[:, None]
    ys = np.arange(p, dtype=np.int64)[None, :]
    lhs = (ys * ys + a1 * xs * ys + a3 * ys) % p
    rhs = (xs**3 + a2 * xs * xs + a4 * xs + a6) % p
    return 1 + int(np.count_nonzero(lhs == rhs))


@dataclass(frozen=True)
class GroupShape:
    """``E(F_p) = Z/n1 x Z/n2`` with ``n2 | n1``."""

    N: int
    n1: int
    n2: int
    trace: int

    @classmethod
    def from_orders(cls, p: int, N: int, n2: int) -> "GroupShape":
        return cls(N=N, n1=N // n2, n2=n2, trace=N - p - 1)

    def check(self, p: int):
        assert self.n1 * self.n2 == self.N, self
        assert self.n1 % self.n2 == 0, self
        assert (p - 1) % self.n2 == 0, self
        assert self.trace == self.N - p - 1, self
        assert self.trace * self.trace <= 4 * p, self


def _ells(p: int) -> np.ndarray:
    return np.array(factorize(p - 1).primes, dtype=np.int64)


def group_structures(
    p: int,
    coeffs: np.ndarray,
    N: np.ndarray | None = None,
    cyclic_only: bool = False,
    roots: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Batch ``(N, n2)`` for an ``(n, 5)`` array of long-form coefficients.

    ``N`` and ``roots`` (affine 2-torsion counts) are computed by character
    sums unless both are supplied. With ``cyclic_only`` the second array
    only distinguishes ``n2 == 1`` from ``n2 > 1``.
    """
    coeffs = np.ascontiguousarray(np.asarray(coeffs, dtype=np.int64) % p)
    if N is None or roots is None:
        a1, a2, a3, a4, a6 = coeffs.T
        b2 = (a1 * a1 + 4 * a2) % p
        b4 = (2 * a4 + a1 * a3) % p
        b6 = (a3 * a3 + 4 * a6) % p
        sums, roots = _kernels.char_sums(p, b2, b4, b6, quadratic_character_table(p))
        if N is None:
            N = p + 1 + sums
    n2 = _kernels.noncyclic_parts(
        p, coeffs, np.asarray(N, dtype=np.int64), roots, _ells(p), sqrt_table(p), cyclic_only
    )
    return np.asarray(N, dtype=np.int64), n2


def group_structure(curve: WeierstrassCurve) -> GroupShape:
    _require_nonsingular(curve)
    N, n2 = group_structures(curve.p, np.array([curve.coefficients], dtype=np.int64))
    shape = GroupShape.from_orders(curve.p, int(N[0]), int(n2[0]))
    shape.check(curve.p)
    return shape


def group_structure_exhaustive(curve: WeierstrassCurve) -> GroupShape:
    """Exponent as the lcm of all point orders. Slow reference path."""
    _require_nonsingular(curve)
    pts = curve.points()
    N = len(pts)
    n1 = 1
    for P in pts:
        o = point_order(P, curve, N)
        n1 = n1 * o // gcd(n1, o)
        if n1 == N:
            break
    return GroupShape(N=N, n1=n1, n2=N // n1, trace=N - curve.p - 1)


def aut_size(curve: WeierstrassCurve) -> int:
    _require_nonsingular(curve)
    j, p = curve.j_invariant, curve.p
    if j == 1728 % p:
        return 4 if p % 4 == 1 else 2
    if j == 0:
        return 6 if p % 3 == 1 else 2
    return 2


def aut_size_bruteforce(curve: WeierstrassCurve) -> int:
    """Count ``u`` with ``u^4 A = A`` and ``u^6 B = B`` on the short model."""
    A, B = curve.short_coefficients()
    p = curve.p
    u = np.arange(1, p, dtype=np.int64)
    u2 = u * u % p
    u4 = u2 * u2 % p
    u6 = u4 * u2 % p
    return int(np.count_nonzero((u4 * A % p == A) & (u6 * B % p == B)))


def is_isomorphic(c1: WeierstrassCurve, c2: WeierstrassCurve) -> bool:
    """Search ``u`` in F_p^* with ``A2 = u^4 A1`` and ``B2 = u^6 B1``."""
    if c1.p != c2.p:
        raise ValueError("curves over different fields")
    _require_nonsingular(c1)
    _require_nonsingular(c2)
    if c1.j_invariant != c2.j_invariant:
        return False
    A1, B1 = c1.short_coefficients()
    A2, B2 = c2.short_coefficients()
    p = c1.p
    u = np.arange(1, p, dtype=np.int64)
    u2 = u * u % p
    u4 = u2 * u2 % p
    u6 = u4 * u2 % p
    return bool(np.any((u4 * A1 % p == A2) & (u6 * B1 % p == B2)))


def torsion_subgroup_shape(shape: GroupShape, b: int) -> tuple[int, int]:
    """``E[b](F_p) = Z/a' x Z/b'`` with ``a' | b'``."""
    if b < 1:
        raise ValueError(f"b must be positive, got {b}")
    return (gcd(b, shape.n2), gcd(b, shape.n1))


def in_W(shape: GroupShape, a: int, b: int) -> bool:
    """Membership in ``W(a, b)``: ``E[b](F_p) = Z/a x Z/b``."""
    if b % a:
        raise ValueError(f"{a} does not divide {b}")
    return shape.n1 % b == 0 and gcd(b, shape.n2) == a


def is_cyclic(shape: GroupShape) -> bool:
    return shape.n2 == 1


def has_point_of_order(shape: GroupShape, m: int) -> bool:
    return shape.n1 % m == 0


def hasse_bound(p: int) -> int:
    return isqrt(4 * p)


@lru_cache(maxsize=8)
def inverse_table(p: int) -> np.ndarray:
    """``inv[r] = r^-1 mod p`` (``inv[0] = 0``)."""
    r = np.arange(p, dtype=np.int64)
    out = np.ones(p, dtype=np.int64)
    base = r.copy()
    e = p - 2
    while e:
        if e & 1:
            out = out * base % p
        base = base * base % p
        e >>= 1
    out[0] = 0
    out.flags.writeable = False
    return out


def least_nonresidue(p: int) -> int:
    chi = quadratic_character_table(p)
    return int(np.flatnonzero(chi == -1)[0])


@dataclass(frozen=True)
class ClassTable:
    """Point counts and ``n2`` for every isomorphism class with j != 0, 1728.

    Index ``j`` holds the class of ``E_j: y^2 = x^3 + 3k x + 2k`` with
    ``k = j / (1728 - j)`` and of its quadratic twist by ``d``. A short
    curve ``(A, B)`` with ``AB != 0`` is isomorphic to ``E_j`` exactly when
    ``6AB`` is a square, and to the twist otherwise.
    """

    p: int
    d: int
    N_rep: np.ndarray
    n2_rep: np.ndarray
    N_twist: np.ndarray
    n2_twist: np.ndarray
    cyclic_only: bool

    def lookup(self, A: np.ndarray, B: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """``(N, n2)`` for short models with ``AB != 0`` (other entries get -1)."""
        p = self.p
        A = np.asarray(A, dtype=np.int64) % p
        B = np.asarray(B, dtype=np.int64) % p
        inv = inverse_table(p)
        A3 = 4 * (A * A % p) * A % p
        den = (A3 + 27 * (B * B % p)) % p
        j = 1728 * A3 % p * inv[den] % p
        rep = quadratic_character_table(p)[6 * (A * B % p) % p] == 1
        N = np.where(rep, self.N_rep[j], self.N_twist[j])
        n2 = np.where(rep, self.n2_rep[j], self.n2_twist[j])
        generic = (A != 0) & (B != 0)
        return np.where(generic, N, -1), np.where(generic, n2, -1)


def _rep_traces(p: int) -> tuple[np.ndarray, np.ndarray]:
    """``sum_x chi(x^3 + 3kx + 2k)`` and root counts for every ``k`` in F_p.

    For ``x != -2/3`` write ``chi(x^3 + k(3x+2)) = chi(3x+2) chi(r_x + k)``
    with ``r_x = x^3 / (3x+2)``; the sum over x is then a cyclic
    correlation of ``chi`` with a weight vector, done by FFT.
    """
    chi = quadratic_character_table(p).astype(np.float64)
    chi_i = quadratic_character_table(p).astype(np.int64)
    inv = inverse_table(p)
    x = np.arange(p, dtype=np.int64)
    x0 = (-2 * inv[3]) % p
    x = x[x != x0]
    c = (3 * x + 2) % p
    r = x * x % p * x % p * inv[c] % p
    w = np.bincount(r, weights=chi_i[c].astype(np.float64), minlength=p)
    corr = np.fft.irfft(np.conj(np.fft.rfft(w)) * np.fft.rfft(chi), n=p)
    S = np.rint(corr).astype(np.int64)
    if np.max(np.abs(corr - S)) > 0.25:
        raise ArithmeticError(f"FFT rounding unreliable at p={p}")
    S += chi_i[x0 * x0 % p * x0 % p]
    roots = np.bincount((-r) % p, minlength=p).astype(np.int64)
    return S, roots


@lru_cache(maxsize=4)
def class_table(p: int, cyclic_only: bool = False) -> ClassTable:
    PrimeField(p)
    inv = inverse_table(p)
    S, roots = _rep_traces(p)
    d = least_nonresidue(p)
    j = np.arange(p, dtype=np.int64)
    generic = (j != 0) & (j != 1728 % p)
    jg = j[generic]
    k = jg * inv[(1728 - jg) % p] % p
    A = 3 * k % p
    B = 2 * k % p
    zeros = np.zeros_like(A)
    rep = np.stack([zeros, zeros, zeros, A, B], axis=1)
    tw = np.stack([zeros, zeros, zeros, A * d % p * d % p, B * d % p * d % p * d % p], axis=1)
    N_rep = p + 1 + S[k]
    N_tw = p + 1 - S[k]
    _, n2_rep = group_structures(p, rep, N_rep, cyclic_only, roots[k])
    _, n2_tw = group_structures(p, tw, N_tw, cyclic_only, roots[k])

    def spread(vals):
        out = np.full(p, -1, dtype=np.int64)
        out[generic] = vals
        out.flags.writeable = False
        return out

    return ClassTable(p, d, spread(N_rep), spread(n2_rep), spread(N_tw), spread(n2_tw), cyclic_only)
