"""Pure numpy versions of the hot loops, used when numba is disabled.

The signatures match ``_numba_kernels`` one for one.
"""

from __future__ import annotations

import math

import numpy as np

from .arithmetic import root_table, units


def kloosterman_block(ms, ns, c):
    table = root_table(int(c))
    xs, inv = units(int(c))
    em = table[np.outer(np.asarray(ms) % c, xs) % c]
    en = table[np.outer(np.asarray(ns) % c, inv) % c]
    s = (em[:, None, :] * en[None, :, :]).sum(axis=-1)
    return s.real.copy(), float(np.max(np.abs(s.imag)))


def kloosterman_grid(ms, ns, cs):
    out = np.empty((len(cs), len(ms), len(ns)))
    imag = np.empty(len(cs))
    for idx, c in enumerate(cs):
        out[idx], imag[idx] = kloosterman_block(ms, ns, int(c))
    return out, imag


def twisted_accumulate(kmat, qa, gamma2, lin_a, lin_b, c):
    a = np.arange(c, dtype=np.int64)
    phase = (gamma2 * np.outer(a, a) + (lin_a * a)[:, None] + (lin_b * a)[None, :]) % c
    weights = kmat[np.ix_(qa, qa)]
    return complex(np.sum(weights * root_table(int(c))[phase]))


def gauss_all_uv(c, jac, lin_x, lin_xb, const):
    xs, inv = units(int(c))
    u = np.arange(c, dtype=np.int64)
    phase = (lin_x * xs[:, None] + lin_xb[None, :] * inv[:, None] + const[None, :]) % c
    terms = jac[xs][:, None] * root_table(int(c))[phase]
    v = (inv[:, None] * u[None, :]) % c
    out = np.zeros((c, c), dtype=complex)
    # unbuffered scatter-add keeps the x order fixed
    np.add.at(out, (np.broadcast_to(u, v.shape), v), terms)
    return out.real * c, out.imag * c


def _series(nu, x):
    half = 0.5 * x
    term = np.exp(nu * np.log(half) - math.lgamma(nu + 1.0))
    total = term.copy()
    q = -half * half
    n = 0
    while True:
        n += 1
        term = term * q / (n * (nu + n))
        total += term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            return total


def _miller(nmax, xs):
    top = max(nmax, int(np.max(xs)))
    start = top + 20 + int(math.sqrt(160.0 * top))
    start += start % 2
    hi = np.zeros_like(xs)
    cur = np.full_like(xs, 1e-300)
    keep = np.empty((nmax + 1, xs.size))
    if start <= nmax:
        keep[start] = cur
    norm = np.zeros_like(xs)
    for n in range(start, 0, -1):
        nxt = (2.0 * n / xs) * cur - hi
        big = np.abs(nxt) > 1e250
        if big.any():
            scale = np.where(big, 1e-250, 1.0)
            nxt *= scale
            cur *= scale
            norm *= scale
            keep *= scale
        hi, cur = cur, nxt
        if n - 1 <= nmax:
            keep[n - 1] = cur
        if (n - 1) % 2 == 0 and n - 1 > 0:
            norm += 2.0 * cur
    norm += cur
    return (keep / norm).T


def bessel_table(nmax, xs):
    xs = np.asarray(xs, dtype=float)
    out = np.empty((xs.size, nmax + 1))
    zero = xs == 0.0
    small = (xs <= 1.0) & ~zero
    out[zero] = 0.0
    out[zero, 0] = 1.0
    if small.any():
        for nu in range(nmax + 1):
            out[small, nu] = _series(nu, xs[small])
    rest = np.flatnonzero(xs > 1.0)
    if rest.size:
        # group by magnitude so small arguments do not pay for a long recurrence
        order = rest[np.argsort(xs[rest], kind="stable")]
        edges = np.searchsorted(xs[order], 2.0 ** np.arange(1, 64), side="right")
        lo = 0
        for hi in list(edges) + [order.size]:
            if hi > lo:
                idx = order[lo:hi]
                out[idx] = _miller(nmax, xs[idx])
                lo = hi
    return out


def trace_block(vals, nus, cs):
    vals = np.asarray(vals, dtype=np.int64)
    nus = np.asarray(nus, dtype=np.int64)
    nv = vals.size
    nmax = int(np.max(nus))
    iu, ju = np.triu_indices(nv)
    root = np.sqrt(vals[iu].astype(float) * vals[ju].astype(float))
    out = np.zeros((len(cs), nus.size, nv, nv))
    xs = 4.0 * math.pi * root[None, :] / np.asarray(cs, dtype=float)[:, None]
    jb = bessel_table(nmax, xs.ravel()).reshape(len(cs), iu.size, nmax + 1)
    for t, c in enumerate(cs):
        kre, _ = kloosterman_block(vals, vals, int(c))
        out[t][:, iu, ju] = (kre[iu, ju] / c)[None, :] * jb[t][:, nus].T
    return out
