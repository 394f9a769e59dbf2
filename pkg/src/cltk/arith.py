"""Sieves and multiplicative-function helpers on ``1..n`` (index 0 unused)."""

from __future__ import annotations

import numpy as np


def spf_sieve(n: int) -> np.ndarray:
    """Smallest prime factor of each integer up to ``n`` (spf[0]=0, spf[1]=1)."""
    spf = np.arange(n + 1, dtype=np.int64)
    for p in range(2, int(n**0.5) + 1):
        if spf[p] == p:
            block = spf[p * p :: p]
            mask = block == np.arange(p * p, n + 1, p)
            block[mask] = p
    return spf


def primes_up_to(n: int) -> np.ndarray:
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    spf = spf_sieve(n)
    idx = np.arange(n + 1)
    return idx[(spf == idx) & (idx >= 2)]


def divisor_count(n: int) -> np.ndarray:
    d = np.zeros(n + 1, dtype=np.int64)
    for k in range(1, n + 1):
        d[k::k] += 1
    return d


def factor_parts(n: int, spf: np.ndarray | None = None):
    """For every m <= n: (p, e, p^e, m / p^e) with p the smallest prime factor."""
    if spf is None:
        spf = spf_sieve(n)
    m = np.arange(n + 1, dtype=np.int64)
    p = spf.copy()
    p[:2] = 1
    rest = m.copy()
    rest[0] = 1
    e = np.zeros(n + 1, dtype=np.int64)
    pe = np.ones(n + 1, dtype=np.int64)
    active = m >= 2
    while np.any(active):
        idx = np.flatnonzero(active)
        rest[idx] //= p[idx]
        pe[idx] *= p[idx]
        e[idx] += 1
        active[idx] = (rest[idx] % p[idx]) == 0
    return p, e, pe, rest


def multiplicative(n: int, prime_power_value, spf: np.ndarray | None = None) -> np.ndarray:
    """Tabulate a multiplicative function from its values on prime powers.

    ``prime_power_value(p, e)`` receives integer arrays and returns the values
    f(p^e) as a float (or complex) array.
    """
    p, e, pe, rest = factor_parts(n, spf)
    local = np.ones(n + 1, dtype=float)
    mask = np.arange(n + 1) >= 2
    vals = np.asarray(prime_power_value(p[mask], e[mask]))
    if np.iscomplexobj(vals):
        local = local.astype(complex)
    local[mask] = vals
    f = np.ones_like(local)
    f[0] = 0
    # f(m) = f(p^e) f(m / p^e); m / p^e has fewer prime factors, so omega(n)+1 sweeps suffice
    for _ in range(12):
        new = local * f[rest]
        new[0] = 0
        new[1] = 1
        if np.array_equal(new, f):
            break
        f = new
    return f


def dirichlet_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(a * b)(n) = sum_{d | n} a(d) b(n/d) for n <= len-1 (index 0 ignored)."""
    n = len(a) - 1
    dtype = np.result_type(a, b)
    out = np.zeros(n + 1, dtype=dtype)
    for d in range(1, n + 1):
        if a[d] == 0:
            continue
        out[d::d] += a[d] * b[1 : n // d + 1]
    return out
