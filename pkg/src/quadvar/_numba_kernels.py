"""numba implementations of the hot loops.

Every parallel loop writes into a slot owned by its index and the caller
reduces the slots in index order, so results do not depend on thread count.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit, prange

TWO_PI = 2.0 * math.pi


@njit(cache=True)
def _inverse(a, c):
    # extended Euclid; returns 0 when a is not a unit
    r0, r1 = c, a % c
    s0, s1 = 0, 1
    while r1 != 0:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if r0 != 1:
        return 0
    return s0 % c


@njit(cache=True)
def _tables(c):
    cos_t = np.empty(c)
    sin_t = np.empty(c)
    for j in range(c):
        ang = TWO_PI * j / c
        cos_t[j] = math.cos(ang)
        sin_t[j] = math.sin(ang)
    return cos_t, sin_t


@njit(cache=True)
def _units(c):
    xs = np.empty(c, dtype=np.int64)
    inv = np.empty(c, dtype=np.int64)
    count = 0
    if c == 1:
        xs[0] = 0
        inv[0] = 0
        return xs[:1], inv[:1]
    for x in range(1, c):
        y = _inverse(x, c)
        if y != 0:
            xs[count] = x
            inv[count] = y
            count += 1
    return xs[:count], inv[:count]


@njit(cache=True)
def _kloosterman_into(ms, ns, c, re, im):
    """re[i, j] + i*im[i, j] = S(ms[i], ns[j]; c) accumulated over units."""
    cos_t, sin_t = _tables(c)
    xs, inv = _units(c)
    nm = ms.shape[0]
    nn = ns.shape[0]
    mr = np.empty(nm, dtype=np.int64)
    nr = np.empty(nn, dtype=np.int64)
    for i in range(nm):
        mr[i] = ms[i] % c
    for j in range(nn):
        nr[j] = ns[j] % c
    fc = np.empty(nn)
    fs = np.empty(nn)
    re[:, :] = 0.0
    im[:, :] = 0.0
    for t in range(xs.shape[0]):
        x = xs[t]
        xb = inv[t]
        for j in range(nn):
            k = (nr[j] * xb) % c
            fc[j] = cos_t[k]
            fs[j] = sin_t[k]
        for i in range(nm):
            k = (mr[i] * x) % c
            ec = cos_t[k]
            es = sin_t[k]
            for j in range(nn):
                re[i, j] += ec * fc[j] - es * fs[j]
                im[i, j] += ec * fs[j] + es * fc[j]


@njit(cache=True)
def kloosterman_block(ms, ns, c):
    re = np.zeros((ms.shape[0], ns.shape[0]))
    im = np.zeros((ms.shape[0], ns.shape[0]))
    _kloosterman_into(ms, ns, c, re, im)
    return re, np.max(np.abs(im))


@njit(cache=True, parallel=True)
def kloosterman_grid(ms, ns, cs):
    out = np.empty((cs.shape[0], ms.shape[0], ns.shape[0]))
    imag = np.empty(cs.shape[0])
    for idx in prange(cs.shape[0]):
        im = np.zeros((ms.shape[0], ns.shape[0]))
        _kloosterman_into(ms, ns, cs[idx], out[idx], im)
        imag[idx] = np.max(np.abs(im))
    return out, imag


@njit(cache=True)
def twisted_accumulate(kmat, qa, gamma2, lin_a, lin_b, c):
    """sum_{a,b} K[q(a), q(b)] e_c(gamma2*a*b + lin_a*a + lin_b*b)."""
    cos_t, sin_t = _tables(c)
    sr = 0.0
    si = 0.0
    for a in range(c):
        row = kmat[qa[a]]
        base = (lin_a * a) % c
        step = (gamma2 * a + lin_b) % c
        k = base
        for b in range(c):
            w = row[qa[b]]
            sr += w * cos_t[k]
            si += w * sin_t[k]
            k += step
            if k >= c:
                k -= c
    return complex(sr, si)


@njit(cache=True)
def gauss_all_uv(c, jac, lin_x, lin_xb, const):
    """Collapsed closed form for every (u, v) mod c.

    jac[x] is the Jacobi symbol (x/c); lin_x and const are fixed, lin_xb[u]
    holds the u-dependent coefficient of x-bar. Returns the x-sum times c.
    """
    cos_t, sin_t = _tables(c)
    xs, inv = _units(c)
    re = np.zeros((c, c))
    im = np.zeros((c, c))
    for t in range(xs.shape[0]):
        x = xs[t]
        xb = inv[t]
        sgn = jac[x]
        for u in range(c):
            v = (xb * u) % c
            k = (lin_x * x + lin_xb[u] * xb + const[u]) % c
            re[u, v] += sgn * cos_t[k]
            im[u, v] += sgn * sin_t[k]
    return re * c, im * c


@njit(cache=True)
def _bessel_series(nu, x):
    half = 0.5 * x
    if half == 0.0:
        return 1.0 if nu == 0 else 0.0
    term = math.exp(nu * math.log(half) - math.lgamma(nu + 1.0))
    total = term
    q = -half * half
    n = 0
    while True:
        n += 1
        term *= q / (n * (nu + n))
        total += term
        if abs(term) <= 1e-17 * abs(total):
            break
    return total


@njit(cache=True)
def bessel_orders_into(nmax, x, out):
    """J_0..J_nmax at x: power series for x <= 1, Miller recurrence above."""
    if x == 0.0:
        out[:] = 0.0
        out[0] = 1.0
        return
    if x <= 1.0:
        for nu in range(nmax + 1):
            out[nu] = _bessel_series(nu, x)
        return
    top = max(nmax, int(x))
    start = top + 20 + int(math.sqrt(160.0 * top))
    start += start % 2
    buf = np.zeros(start + 2)
    buf[start] = 1e-300
    norm = 0.0
    for n in range(start, 0, -1):
        buf[n - 1] = (2.0 * n / x) * buf[n] - buf[n + 1]
        if abs(buf[n - 1]) > 1e250:
            for j in range(n - 1, start + 1):
                buf[j] *= 1e-250
            norm *= 1e-250
        if (n - 1) % 2 == 0 and n - 1 > 0:
            norm += 2.0 * buf[n - 1]
    norm += buf[0]
    for nu in range(nmax + 1):
        out[nu] = buf[nu] / norm


@njit(cache=True)
def bessel_table(nmax, xs):
    out = np.empty((xs.shape[0], nmax + 1))
    for i in range(xs.shape[0]):
        bessel_orders_into(nmax, xs[i], out[i])
    return out


@njit(cache=True, parallel=True)
def trace_block(vals, nus, cs):
    """G[t, l, i, j] = S(v_i, v_j; c)/c * J_{nus[l]}(4 pi sqrt(v_i v_j)/c) with c = cs[t].

    Only i <= j is filled; the block is symmetric in (i, j).
    """
    nv = vals.shape[0]
    nl = nus.shape[0]
    nmax = 0
    for l in range(nl):
        nmax = max(nmax, nus[l])
    out = np.zeros((cs.shape[0], nl, nv, nv))
    for t in prange(cs.shape[0]):
        c = cs[t]
        re = np.zeros((nv, nv))
        im = np.zeros((nv, nv))
        _kloosterman_into(vals, vals, c, re, im)
        jb = np.empty(nmax + 1)
        for i in range(nv):
            for j in range(i, nv):
                x = 4.0 * math.pi * math.sqrt(float(vals[i]) * float(vals[j])) / c
                bessel_orders_into(nmax, x, jb)
                for l in range(nl):
                    out[t, l, i, j] = re[i, j] / c * jb[nus[l]]
    return out
