"""Compiled inner loops for curve arithmetic over small prime fields.

Points are ``(x, y, inf)`` int64 triples; ``inf == 1`` marks the point at
infinity. Curves are passed as the long-form coefficients
``a1, a2, a3, a4, a6`` reduced mod ``p``. All values stay below ``p``, so
int64 products are safe for ``p < 3 * 10**9``.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def inv_mod(a, p):
    t, new_t = 0, 1
    r, new_r = p, a % p
    while new_r != 0:
        q = r // new_r
        t, new_t = new_t, t - q * new_t
        r, new_r = new_r, r - q * new_r
    return t % p


@njit(cache=True)
def point_add(x1, y1, i1, x2, y2, i2, a1, a2, a3, a4, p):
    if i1 == 1:
        return x2, y2, i2
    if i2 == 1:
        return x1, y1, i1
    if x1 == x2:
        if (y1 + y2 + a1 * x1 + a3) % p == 0:
            return 0, 0, 1
        den = (2 * y1 + a1 * x1 + a3) % p
        num = (3 * x1 * x1 + 2 * a2 * x1 + a4 - a1 * y1) % p
    else:
        den = (x2 - x1) % p
        num = (y2 - y1) % p
    lam = num * inv_mod(den, p) % p
    nu = (y1 - lam * x1) % p
    x3 = (lam * lam + a1 * lam - a2 - x1 - x2) % p
    y3 = (-(lam + a1) * x3 - nu - a3) % p
    return x3, y3, 0


@njit(cache=True)
def point_mul(k, x, y, inf, a1, a2, a3, a4, p):
    rx, ry, ri = 0, 0, 1
    if k < 0:
        k = -k
        y = (-y - a1 * x - a3) % p
    while k > 0:
        if k & 1:
            rx, ry, ri = point_add(rx, ry, ri, x, y, inf, a1, a2, a3, a4, p)
        k >>= 1
        if k:
            x, y, inf = point_add(x, y, inf, x, y, inf, a1, a2, a3, a4, p)
    return rx, ry, ri


@njit(cache=True)
def char_sums(p, b2, b4, b6, chi):
    """For each curve return ``sum_x chi(4x^3 + b2 x^2 + 2 b4 x + b6)`` and
    the number of roots of that cubic (= affine 2-torsion points)."""
    n = b2.shape[0]
    sums = np.zeros(n, dtype=np.int64)
    roots = np.zeros(n, dtype=np.int64)
    for i in range(n):
        # forward differences of g(x) = 4x^3 + B2 x^2 + C x + D at step 1
        B2 = b2[i] % p
        C = (2 * b4[i]) % p
        g = b6[i] % p
        d1 = (4 + B2 + C) % p
        d2 = (24 + 2 * B2) % p
        d3 = 24 % p
        s = 0
        z = 0
        for _ in range(p):
            c = chi[g]
            s += c
            if g == 0:
                z += 1
            g += d1
            if g >= p:
                g -= p
            d1 += d2
            if d1 >= p:
                d1 -= p
            d2 += d3
            if d2 >= p:
                d2 -= p
        sums[i] = s
        roots[i] = z
    return sums, roots


@njit(cache=True)
def _dlog_small(rx, ry, r1x, r1y, ell, a1, a2, a3, a4, p):
    # t in [1, ell) with R = t * R1 for R, R1 of order ell, else -1
    tx, ty, ti = r1x, r1y, 0
    for t in range(1, ell):
        if ti == 0 and tx == rx and ty == ry:
            return t
        tx, ty, ti = point_add(tx, ty, ti, r1x, r1y, 0, a1, a2, a3, a4, p)
    return -1


@njit(cache=True)
def _ell_order(qx, qy, qi, ell, a1, a2, a3, a4, p):
    # (c, R) with ord(Q) = ell^c and R = ell^(c-1) Q
    c = 0
    tx, ty, ti = qx, qy, qi
    rx, ry = qx, qy
    while ti == 0:
        rx, ry = tx, ty
        tx, ty, ti = point_mul(ell, tx, ty, ti, a1, a2, a3, a4, p)
        c += 1
    return c, rx, ry


@njit(cache=True)
def sylow_exponent(p, a1, a2, a3, a4, a6, N, ell, v, sqrt_tab, cyclic_only):
    """Exponent ``a`` of the ``ell``-Sylow subgroup ``Z/ell^a x Z/ell^(v-a)``.

    Walks points in increasing ``x`` and projects each into the Sylow
    subgroup. Keeps ``P1`` of the largest order ``ell^a`` seen; each new
    projection ``Q`` is reduced modulo ``<P1>`` until it vanishes or its
    ``ell``-torsion image leaves ``<ell^(a-1) P1>``. In the latter case
    ``<P1> + <Q>`` is direct, so ``ord(P1) ord(Q) = ell^v`` certifies the
    structure. A point of order ``ell^v`` certifies cyclicity. If neither
    certificate appears every point has been seen and the maximum is exact.
    With ``cyclic_only`` returns ``-1`` once any independent pair is found.
    """
    b2 = (a1 * a1 + 4 * a2) % p
    b4 = (2 * a4 + a1 * a3) % p
    b6 = (a3 * a3 + 4 * a6) % p
    cof = N
    for _ in range(v):
        cof //= ell
    inv2 = (p + 1) // 2
    best = 0
    comp = 0
    p1x, p1y = 0, 0
    r1x, r1y = 0, 0
    for x in range(p):
        g = (((4 * x + b2) % p * x + 2 * b4) % p * x + b6) % p
        s = sqrt_tab[g]
        if s < 0:
            continue
        y = (s - a1 * x - a3) % p * inv2 % p
        qx, qy, qi = point_mul(cof, x, y, 0, a1, a2, a3, a4, p)
        if qi == 1:
            continue
        c, rx, ry = _ell_order(qx, qy, qi, ell, a1, a2, a3, a4, p)
        if c > best:
            # a complement found against the old P1 says nothing about the new one
            best = c
            comp = 0
            p1x, p1y = qx, qy
            r1x, r1y = rx, ry
            if best == v:
                return v
            continue
        while True:
            t = _dlog_small(rx, ry, r1x, r1y, ell, a1, a2, a3, a4, p)
            if t < 0:
                if cyclic_only:
                    return -1
                if c > comp:
                    comp = c
                break
            # Q -= t * ell^(best - c) * P1 lowers the order of Q
            k = t
            for _ in range(best - c):
                k *= ell
            sx, sy, si = point_mul(-k, p1x, p1y, 0, a1, a2, a3, a4, p)
            qx, qy, qi = point_add(qx, qy, qi, sx, sy, si, a1, a2, a3, a4, p)
            if qi == 1:
                break
            c, rx, ry = _ell_order(qx, qy, qi, ell, a1, a2, a3, a4, p)
        if best + comp == v:
            return best
    return best


@njit(cache=True)
def noncyclic_parts(p, coeffs, N, roots2, ells, sqrt_tab, cyclic_only):
    """``n2`` for each curve (or, with ``cyclic_only``, 1 for cyclic and a
    value > 1 otherwise).

    ``ells`` are the primes dividing ``p - 1``; only those can divide ``n2``.
    """
    n = coeffs.shape[0]
    out = np.ones(n, dtype=np.int64)
    for i in range(n):
        a1 = coeffs[i, 0]
        a2 = coeffs[i, 1]
        a3 = coeffs[i, 2]
        a4 = coeffs[i, 3]
        a6 = coeffs[i, 4]
        Ni = N[i]
        n2 = 1
        for j in range(ells.shape[0]):
            ell = ells[j]
            v = 0
            t = Ni
            while t % ell == 0:
                t //= ell
                v += 1
            if v < 2:
                continue
            if ell == 2 and roots2[i] < 3:
                continue
            if cyclic_only and ell == 2:
                n2 *= 2
                break
            a = sylow_exponent(p, a1, a2, a3, a4, a6, Ni, ell, v, sqrt_tab, cyclic_only)
            if a < 0:
                n2 *= ell
                break
            for _ in range(v - a):
                n2 *= ell
            if cyclic_only and n2 > 1:
                break
        out[i] = n2
    return out


@njit(cache=True)
def point_order_dividing(m, x, y, a1, a2, a3, a4, p):
    """Order of the affine point ``(x, y)`` given that it divides ``m``
    (returns 0 if ``m * P`` is not the identity)."""
    for d in range(1, m + 1):
        if m % d != 0:
            continue
        _, _, inf = point_mul(d, x, y, 0, a1, a2, a3, a4, p)
        if inf == 1:
            return d
    return 0
