"""Scalar special functions shared by the numeric modules.

``log_gamma`` is the principal branch of log Gamma (continuous off the
negative real axis), delegated to :func:`scipy.special.loggamma`.  ``zeta``
uses Borwein's accelerated alternating series for the eta function, falling
back to Euler-Maclaurin where ``1 - 2**(1-s)`` is too small to divide by.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .errors import PoleAtNonpositiveInteger, PoleAtOne

__all__ = [
    "Constants",
    "CONSTANTS",
    "log_gamma",
    "gamma",
    "zeta",
    "zeta_N",
    "zeta_derivative",
    "prime_divisors",
    "stirling_ratio_check",
]


def log_gamma(z):
    """Principal-branch log Gamma for scalar or array ``z``."""
    z = np.asarray(z, dtype=complex)
    on_axis = (z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))
    if np.any(on_axis):
        raise PoleAtNonpositiveInteger(f"Gamma has a pole at {z[on_axis].ravel()[0].real:g}")
    out = special.loggamma(z)
    return out[()] if out.ndim == 0 else out


def gamma(z):
    return np.exp(log_gamma(z))


# -- zeta ------------------------------------------------------------------


@lru_cache(maxsize=64)
def _borwein_weights(n: int) -> np.ndarray:
    """(-1)^k (d_k - d_n) / d_n for k < n, computed in log space."""
    i = np.arange(1, n + 1, dtype=float)
    # t_i / t_{i-1} = 4 (n+i-1)(n-i+1) / (2i (2i-1)), t_0 = 1
    log_ratio = np.log(4.0 * (n + i - 1.0) * (n - i + 1.0)) - np.log(2.0 * i * (2.0 * i - 1.0))
    log_t = np.concatenate(([0.0], np.cumsum(log_ratio)))
    log_d = np.logaddexp.accumulate(log_t)
    e = np.exp(log_d[:n] - log_d[n]) - 1.0
    signs = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    return signs * e


def _borwein_terms_needed(s: np.ndarray, tol: float) -> int:
    t = np.abs(s.imag)
    # |error| <~ 3 (1 + 2|t|) / ((3+sqrt 8)^n |Gamma(s)|) / |1 - 2^(1-s)|
    loggam = np.real(special.loggamma(s))
    need = (np.log(3.0 * (1.0 + 2.0 * t) / tol) - loggam) / math.log(3.0 + math.sqrt(8.0))
    return int(max(20, np.ceil(np.max(need)) + 5))


def _zeta_euler_maclaurin(s: complex) -> complex:
    t = abs(s.imag)
    N = int(max(20, t / 2 + 20))
    n = np.arange(1, N, dtype=float)
    total = np.sum(np.exp(-s * np.log(n)))
    total += N ** (1 - s) / (s - 1) + 0.5 * N ** (-s)
    fact = s
    power = N ** (-s - 1)
    for k in range(1, 15):
        b2k = float(special.bernoulli(2 * k)[-1])
        term = b2k / math.factorial(2 * k) * fact * power
        total += term
        fact *= (s + 2 * k - 1) * (s + 2 * k)
        power /= N * N
        if abs(term) < 1e-17 * abs(total):
            break
    return complex(total)


def zeta(s, tol: float = 1e-14):
    """Riemann zeta for complex ``s`` (scalar or array), ``s != 1``.

    Accurate to about 1e-12 for Re s >= 1/2, |Im s| <= 1e3.
    """
    s_arr = np.atleast_1d(np.asarray(s, dtype=complex))
    if np.any(s_arr == 1):
        raise PoleAtOne("zeta has a pole at s=1")
    out = np.empty_like(s_arr)
    denom = 1.0 - np.exp((1.0 - s_arr) * math.log(2.0))
    good = np.abs(denom) > 1e-3
    reflect = good & (s_arr.real < 0.5)
    main = good & ~reflect
    if np.any(main):
        sm = s_arr[main]
        n = _borwein_terms_needed(sm, tol)
        w = _borwein_weights(n)
        logk = np.log(np.arange(1, n + 1, dtype=float))
        acc = np.exp(-np.outer(sm, logk)) @ w
        out[main] = -acc / denom[main]
    if np.any(reflect):
        # zeta(s) = 2^s pi^(s-1) sin(pi s/2) Gamma(1-s) zeta(1-s)
        sr = s_arr[reflect]
        z1 = zeta(1.0 - sr, tol)
        out[reflect] = (
            np.exp(sr * math.log(2.0) + (sr - 1.0) * math.log(math.pi) + special.loggamma(1.0 - sr))
            * np.sin(np.pi * sr / 2.0)
            * z1
        )
    for idx in np.flatnonzero(~good):
        out[idx] = _zeta_euler_maclaurin(complex(s_arr[idx]))
    if np.ndim(s) == 0:
        return complex(out[0])
    return out.reshape(np.shape(s))


def prime_divisors(N: int) -> list[int]:
    ps, p, m = [], 2, N
    while p * p <= m:
        if m % p == 0:
            ps.append(p)
            while m % p == 0:
                m //= p
        p += 1
    if m > 1:
        ps.append(m)
    return ps


def zeta_N(s, N: int):
    """zeta(s) with the Euler factors at primes dividing N removed."""
    val = zeta(s)
    for p in prime_divisors(N):
        val = val * (1.0 - np.exp(-np.asarray(s, dtype=complex) * math.log(p)))
    return val


def zeta_derivative(s: complex, radius: float = 0.05, points: int = 32) -> complex:
    """zeta'(s) by the trapezoid rule on a Cauchy circle (s away from 1)."""
    theta = 2 * np.pi * np.arange(points) / points
    z = np.exp(1j * theta)
    vals = zeta(s + radius * z)
    return complex(np.mean(vals / z) / radius)


@dataclass(frozen=True)
class Constants:
    euler_gamma: float
    zeta2: float
    zeta2_logderiv: float


def _make_constants() -> Constants:
    z2 = zeta(2.0).real
    return Constants(
        euler_gamma=float(np.euler_gamma),
        zeta2=z2,
        zeta2_logderiv=zeta_derivative(2.0).real / z2,
    )


CONSTANTS = _make_constants()


def stirling_ratio_check(form, shifts, t: float, s: complex = 1.0) -> tuple[float, float]:
    """Relative deviations of X_{alpha,beta,t} and g_{alpha,beta}(s,t) from their
    Stirling forms q^{-2(alpha+beta)} (1 + i(alpha^2-beta^2)/t) and q^{2s}, q = t sqrt(N)/2pi.

    Expected decay: O(1/t^2) for the first, O(|s|^2/t) for the second.
    """
    from .lfunc import g_ratio, x_factor

    if t < 10:
        raise ValueError("t must be at least 10")
    a, b = complex(shifts.alpha), complex(shifts.beta)
    logq = math.log(t * math.sqrt(form.level) / (2 * math.pi))
    x_exact = x_factor(form, shifts, t)
    x_approx = np.exp(-2 * (a + b) * logq) * (1 + 1j * (a * a - b * b) / t)
    g_exact = complex(g_ratio(form, shifts, s, t))
    g_approx = np.exp(2 * complex(s) * logq)
    return float(abs(x_exact / x_approx - 1)), float(abs(g_exact / g_approx - 1))
