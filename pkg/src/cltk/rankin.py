"""Rankin-Selberg and symmetric-square series, the moment constants a_f and b_f,
the Euler product A_{alpha,beta}(u, v, s) and the degree-one CFKRS polynomial.

Three independent routes reach L(Sym^2 f, s) near s = 1:

* smoothed Dirichlet series with Richardson extrapolation in the cutoff
  (``sym2_at_1``; primary for the constants),
* the Rankin-Selberg series for L(f x f, s) near its pole (``rankin_L``,
  used by ``laurent_check``),
* the smoothed approximate functional equation of the completed
  symmetric square (``sym2_lvalue``; used off the real axis by ``cfkrs_p1``).

Smoothed sums use the product series directly (coefficients of
zeta^(N)(2s) times the inner series), since those L-functions are entire
apart from the pole of L(f x f, s) at 1.  The cutoff expansion then has only
integer powers of X, which Richardson extrapolation removes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import arith
from .analytic import CONSTANTS, prime_divisors, zeta, zeta_N
from .errors import FitIllConditioned, OutsideDomain, RadiiInvalid, TruncationBudgetExceeded
from .forms import CoefficientTable, ModularForm, ShiftPair
from .lfunc import AfeKernelConfig, GammaFactor, lvalue_self_dual

__all__ = [
    "MomentConstants",
    "nu_of_level",
    "sym2_coefficients",
    "rankin_coefficients",
    "sym2_gamma_factor",
    "sym2_lvalue",
    "sym2_taylor",
    "smoothed_sum",
    "sym2_at_1",
    "rankin_L",
    "laurent_check",
    "moment_constants",
    "in_domain",
    "euler_A",
    "euler_A_local",
    "cfkrs_p1",
]

# smoothing shapes: phi(x) and the cutoff factor beyond which phi < 1e-16
_SHAPES = {
    "exp": (lambda x: np.exp(-x), 37.0),
    "gauss": (lambda x: np.exp(-x * x), 6.1),
}


@dataclass(frozen=True)
class MomentConstants:
    a_f: float
    b_f: float
    sym2_value: float
    sym2_deriv: float
    rankin_residue: float
    nu_N: float
    error_estimates: dict = field(default_factory=dict, compare=False)

    def as_dict(self) -> dict:
        return {
            "a_f": self.a_f,
            "b_f": self.b_f,
            "sym2_value": self.sym2_value,
            "sym2_deriv": self.sym2_deriv,
            "rankin_residue": self.rankin_residue,
            "nu_N": self.nu_N,
        }


def nu_of_level(N: int) -> float:
    out = float(N)
    for p in prime_divisors(N):
        out *= 1 + 1 / p
    return out


# -- coefficient tables ---------------------------------------------------------


def _local_table(table: CoefficientTable, level: int, n_max: int, recurrence):
    """Multiplicative function on 1..n_max from per-prime power series.

    ``recurrence(lam_p, ramified, p, emax)`` returns an array (n_primes, emax+1)
    with the coefficients of p^0..p^emax.
    """
    if n_max > table.max_n:
        raise TruncationBudgetExceeded(f"need lambda(p) for p <= {n_max}, table has {table.max_n}")
    spf = arith.spf_sieve(n_max)
    primes = arith.primes_up_to(n_max)
    emax = max(1, int(math.log2(max(n_max, 2))) + 1)
    ramified = (level % primes) == 0
    coeffs = recurrence(table.lam[primes], ramified, primes.astype(float), emax)
    where = np.zeros(n_max + 1, dtype=np.int64)
    where[primes] = np.arange(len(primes))

    def value(p, e):
        return coeffs[where[p], e]

    return arith.multiplicative(n_max, value, spf)


def _sym2_recurrence(lam_p, ramified, p, emax):
    # 1/((1 - a^2 X)(1 - X)(1 - b^2 X)) = 1/(1 - (l^2-1)X + (l^2-1)X^2 - X^3) at good p
    out = np.zeros((len(lam_p), emax + 1))
    out[:, 0] = 1.0
    a = lam_p**2 - 1
    for e in range(1, emax + 1):
        c1 = out[:, e - 1]
        c2 = out[:, e - 2] if e >= 2 else 0.0
        c3 = out[:, e - 3] if e >= 3 else 0.0
        out[:, e] = a * (c1 - c2) + c3
    out[ramified] = (1.0 / p[ramified, None]) ** np.arange(emax + 1)[None, :]
    return out


def _rankin_recurrence(lam_p, ramified, p, emax):
    # L_p(f x f, X)^-1 = 1 - l^2 X + chi0 [(2 + l^2) X^2 - l^2 X^3 + X^4]
    out = np.zeros((len(lam_p), emax + 1))
    out[:, 0] = 1.0
    l2 = lam_p**2
    chi = np.where(ramified, 0.0, 1.0)
    for e in range(1, emax + 1):
        acc = l2 * out[:, e - 1]
        if e >= 2:
            acc = acc - chi * (2 + l2) * out[:, e - 2]
        if e >= 3:
            acc = acc + chi * l2 * out[:, e - 3]
        if e >= 4:
            acc = acc - chi * out[:, e - 4]
        out[:, e] = acc
    return out


def sym2_coefficients(form: ModularForm, table: CoefficientTable, n_max: int | None = None) -> np.ndarray:
    """Dirichlet coefficients of L(Sym^2 f, s) = zeta^(N)(2s) sum lambda(n^2) n^-s,
    built multiplicatively from lambda(p) (p <= n_max)."""
    return _cached_local(table, form.level, n_max or table.max_n, "sym2")


def rankin_coefficients(form: ModularForm, table: CoefficientTable, n_max: int | None = None) -> np.ndarray:
    """Dirichlet coefficients of L(f x f, s) = zeta^(N)(2s) sum lambda(m)^2 m^-s,
    i.e. sum over d^2 | n, (d, N) = 1 of lambda(n/d^2)^2, read off the table."""
    n_max = n_max or table.max_n
    if n_max > table.max_n:
        raise TruncationBudgetExceeded(f"rankin series needs {n_max} coefficients, table has {table.max_n}")
    sq = table.lam[: n_max + 1] ** 2
    out = sq.copy()
    for d in range(2, math.isqrt(n_max) + 1):
        if math.gcd(d, form.level) != 1:
            continue
        dd = d * d
        out[dd::dd] += sq[1 : n_max // dd + 1]
    return out


_LOCAL_CACHE: dict = {}


def _cached_local(table, level, n_max, kind):
    key = (id(table), level, n_max, kind)
    hit = _LOCAL_CACHE.get(key)
    if hit is not None and hit[0] is table:
        return hit[1]
    rec = _sym2_recurrence if kind == "sym2" else _rankin_recurrence
    out = _local_table(table, level, n_max, rec)
    out.setflags(write=False)
    if len(_LOCAL_CACHE) > 8:
        _LOCAL_CACHE.clear()
    _LOCAL_CACHE[key] = (table, out)
    return out


# -- symmetric square via the approximate functional equation ------------------


def sym2_gamma_factor(form: ModularForm) -> GammaFactor:
    """N^s pi^(-(s+1)/2) Gamma((s+1)/2) (2 pi)^(-(s+k-1)) Gamma(s+k-1), up to a
    constant; the completed function is invariant under s -> 1 - s."""
    log_q = math.log(form.level) - 0.5 * math.log(math.pi) - math.log(2 * math.pi)
    return GammaFactor(log_q, ((0.5, 0.5), (1.0, form.weight - 1.0)))


def sym2_lvalue(form: ModularForm, s, table: CoefficientTable, cfg: AfeKernelConfig | None = None) -> complex:
    s = complex(s)
    cfg = cfg or AfeKernelConfig(g_scale=0.25)
    coeffs = sym2_coefficients(form, table)
    k = form.weight
    scale = form.level * math.sqrt(abs(s.imag) + 2) * (abs(s.imag) + k) / (2 * math.pi) ** 1.5
    return lvalue_self_dual(s, coeffs, sym2_gamma_factor(form), 1, cfg, math.log(max(scale, 1.0)))


def sym2_taylor(
    form: ModularForm, table: CoefficientTable, radius: float = 0.75, points: int = 96, cfg=None
) -> np.ndarray:
    """Taylor coefficients of L(Sym^2 f, 1 + w) from values on |w| = radius."""
    w = radius * np.exp(2j * np.pi * np.arange(points) / points)
    vals = np.array([sym2_lvalue(form, 1 + wi, table, cfg) for wi in w])
    return np.fft.fft(vals) / points / radius ** np.arange(points)


# -- smoothed series and Richardson extrapolation -------------------------------


def smoothed_sum(coeffs: np.ndarray, s: complex, X: float, shape: str = "exp", log_power: int = 0) -> complex:
    """sum_n coeffs[n] (-ln n)^log_power n^-s phi(n/X)."""
    phi, reach = _SHAPES[shape]
    top = int(min(len(coeffs) - 1, math.ceil(reach * X)))
    if top < reach * X - 1:
        raise TruncationBudgetExceeded(f"cutoff X={X:g} needs {int(reach * X)} coefficients, have {len(coeffs) - 1}")
    n = np.arange(1, top + 1, dtype=float)
    logn = np.log(n)
    w = coeffs[1 : top + 1] * phi(n / X)
    if log_power:
        w = w * (-logn) ** log_power
    if s.imag == 0:
        return complex(np.sum(w * np.exp(-s.real * logn)))
    return complex(np.sum(w * np.exp(-s * logn)))


def _solve(basis: np.ndarray, y: np.ndarray, max_cond: float = 1e10):
    """Least-squares coefficients of y on the columns of basis (rows: cutoffs)."""
    scale = np.max(np.abs(basis), axis=0)
    b = basis / scale
    cond = np.linalg.cond(b)
    if not np.isfinite(cond) or cond > max_cond:
        raise FitIllConditioned(f"extrapolation system has condition number {cond:.3g}")
    coef, *_ = np.linalg.lstsq(b, y, rcond=None)
    return coef / scale


def _entire_extrapolate(values: np.ndarray, X: np.ndarray, shape: str):
    """Limit of S(X) = L + sum_k b_k X^-k (X^-2k for the Gaussian shape) and an error
    estimate from dropping the last correction term."""
    step = 2 if shape == "gauss" else 1
    full = np.column_stack([X ** (-step * k) for k in range(len(X))])
    best = _solve(full, values)[0]
    fewer = _solve(full[:-1, :-1], values[:-1])[0]
    return best, abs(best - fewer)


def _default_cutoff(table: CoefficientTable, shape: str) -> float:
    return (table.max_n - 1) / _SHAPES[shape][1]


def sym2_at_1(form: ModularForm, table: CoefficientTable, shape: str = "exp", levels: int = 4, with_error: bool = False):
    """L(Sym^2 f, 1) and L'(Sym^2 f, 1) from smoothed Dirichlet series.

    S(X) = sum c(n) n^-1 phi(n/X) equals L(1) + sum_k (-1)^k/k! L(1-k) X^-k for
    phi = e^-x (only even powers for phi = e^-x^2); the derivative series carries
    an extra -ln n.  The cutoffs are X, X/2, ..., X/2^(levels-1).
    """
    coeffs = sym2_coefficients(form, table)
    X = _default_cutoff(table, shape) / 2.0 ** np.arange(levels)
    val = np.array([smoothed_sum(coeffs, 1.0, x, shape).real for x in X])
    der = np.array([smoothed_sum(coeffs, 1.0, x, shape, log_power=1).real for x in X])
    L, dL = _entire_extrapolate(val, X, shape)
    D, dD = _entire_extrapolate(der, X, shape)
    if with_error:
        return (L, D), (dL, dD)
    return L, D


def _rankin_basis(s: complex, X: np.ndarray, terms: int) -> tuple[np.ndarray, int]:
    """Columns 1, pole term, X^-1..X^-terms; returns (basis, index of pole column).

    The pole column X^(1-s) merges with X^(1-m) when s is near an integer m >= 2;
    there it is replaced by the divided difference (X^(1-s) - X^(1-m))/(m-s),
    which spans the same space and stays well conditioned.
    """
    cols = [np.ones_like(X, dtype=complex)]
    m = round(s.real)
    pole = X ** (1 - s)
    if m >= 2 and abs(s - m) < 0.5:
        if s == m:
            pole = -X ** (1.0 - m) * np.log(X)
        else:
            pole = (X ** (1 - s) - X ** (1.0 - m)) / (m - s)
    cols.append(pole)
    cols += [X ** (-float(k)) + 0j for k in range(1, terms + 1)]
    return np.column_stack(cols), 1


def rankin_L(form: ModularForm, s, table: CoefficientTable, truncation: int | None = None, levels: int = 5):
    """L(f x f, s) = zeta^(N)(2s) sum lambda(m)^2 m^-s by a smoothed product series.

    S(X) = L(s) + R Gamma(1-s) X^(1-s) + sum_k (-1)^k/k! L(s-k) X^-k; the cutoffs
    X/2^j (j < levels, X = truncation/37) are fitted jointly.  Returns
    (value, error estimate).
    """
    s = complex(s)
    if s == 1:
        raise FitIllConditioned("L(f x f, s) has its pole at s = 1")
    n_max = truncation or table.max_n
    coeffs = rankin_coefficients(form, table, n_max)
    X = (n_max - 1) / _SHAPES["exp"][1] / 2.0 ** np.arange(levels)
    y = np.array([smoothed_sum(coeffs, s, x) for x in X])
    basis, _ = _rankin_basis(s, X, levels - 2)
    best = _solve(basis, y)[0]
    fewer = _solve(basis[1:, :-1], y[1:])[0]
    return complex(best), float(abs(best - fewer))


def laurent_check(form: ModularForm, table: CoefficientTable, radius: float = 0.05, points: int = 64):
    """(a_f, b_f) fitted from L(f x f, 1+z)/zeta^(N)(2+2z) = (a_f/2)/z + b_f/2 + O(z)
    on the circle |z| = radius, least squares on {1/z, 1, z, z^2}."""
    z = radius * np.exp(2j * np.pi * (np.arange(points) + 0.5) / points)
    F = np.array([rankin_L(form, 1 + zi, table)[0] for zi in z]) / zeta_N(2 + 2 * z, form.level)
    basis = np.column_stack([1 / z, np.ones_like(z), z, z * z])
    coef = _solve(basis, F)
    return float(2 * coef[0].real), float(2 * coef[1].real)


def moment_constants(form: ModularForm, table: CoefficientTable) -> MomentConstants:
    (L, dL), (eL, edL) = sym2_at_1(form, table, with_error=True)
    N = form.level
    nu = nu_of_level(N)
    a_f = 12 * N / (math.pi**2 * nu) * L
    bad = prime_divisors(N)
    log_term = sum(math.log(p) / (p + 1) for p in bad)
    ratio = dL / L
    b_f = a_f * (ratio + CONSTANTS.euler_gamma + log_term - 2 * CONSTANTS.zeta2_logderiv)
    residue = L * math.prod(1 - 1 / p for p in bad)
    err_a = abs(a_f) * eL / abs(L)
    err_b = abs(b_f) * eL / abs(L) + abs(a_f) * (edL / abs(L) + abs(dL) * eL / L**2)
    return MomentConstants(
        a_f=a_f,
        b_f=b_f,
        sym2_value=L,
        sym2_deriv=dL,
        rankin_residue=residue,
        nu_N=nu,
        error_estimates={"sym2_value": eL, "sym2_deriv": edL, "a_f": err_a, "b_f": err_b},
    )


# -- Euler product A_{alpha,beta} ------------------------------------------------


def in_domain(shifts: ShiftPair, u: complex, v: complex, s: complex) -> bool:
    a, b = complex(shifts.alpha).real, complex(shifts.beta).real
    u, v, s = complex(u).real, complex(v).real, complex(s).real
    return (
        u + v > -0.5
        and s > -0.25 - a / 2 - b / 2
        and u + s > -0.5 - a
        and v + s > -0.5 - b
    )


def _decay_exponent(shifts, u, v, s) -> float:
    # A_p - 1 = O(p^-kappa); kappa > 1 exactly on the domain
    a, b = complex(shifts.alpha).real, complex(shifts.beta).real
    u, v, s = complex(u).real, complex(v).real, complex(s).real
    return 2 + min(2 * (u + v), 2 * (a + b + 2 * s), 2 * (u + a + s), 2 * (v + b + s))


def _lp_inv(l2, chi, x):
    """1/L_p(f x f) at x = p^-z: (1 - a^2 x)(1 - x)^2 (1 - b^2 x) at good p, 1 - lambda(p)^2 x at bad p."""
    return 1 - l2 * x + chi * ((2 * l2 - 2) * x**2 - l2 * x**3 + x**4)


def _series_S0(lam_p, ramified, p, z, tol=1e-17):
    """sum_l lambda(p^l)^2 p^(-l z), summed until the terms fall below tol."""
    x = np.exp(-z * np.log(p))
    chi = np.where(ramified, 0.0, 1.0)
    prev = np.zeros_like(lam_p)
    cur = np.ones_like(lam_p)
    total = np.ones(len(p), dtype=complex)
    power = np.ones(len(p), dtype=complex)
    for _ in range(400):
        nxt = lam_p * cur - chi * prev
        prev, cur = cur, nxt
        power = power * x
        term = cur * cur * power
        total += term
        # |lambda(p^l)| <= l+1, so the remainder is bounded by a geometric tail
        if np.all(np.abs(term) < tol * np.abs(total)) and np.all(np.abs(x) < 0.8):
            break
    else:
        raise TruncationBudgetExceeded("local series did not converge")
    return total


def euler_A_local(form: ModularForm, shifts: ShiftPair, u, v, s, p: np.ndarray, lam_p: np.ndarray) -> np.ndarray:
    """Local factors A_p via the rearrangement of the four-fold local sum.

    The local sum is reduced to S0 = sum lambda(p^l)^2 p^-lz using
    sum lambda(p^l) lambda(p^(l+1)) p^-lz = lambda(p) S0/(1 + p^-z) and
    sum lambda(p^l) lambda(p^(l+2)) p^-lz = (lambda(p^2) - p^-z) S0/(1 + p^-z),
    with z = 1 + alpha + beta + 2s.
    """
    a, b = complex(shifts.alpha), complex(shifts.beta)
    u, v, s = complex(u), complex(v), complex(s)
    p = np.asarray(p, dtype=float)
    lp = np.log(p)
    ramified = (form.level % p.astype(np.int64)) == 0
    chi = np.where(ramified, 0.0, 1.0)

    def pw(e):
        return np.exp(-e * lp)

    z = 1 + a + b + 2 * s
    S0 = _series_S0(lam_p, ramified, p, z)
    l2 = lam_p**2
    lam_p2 = l2 - 1.0
    S1 = lam_p * S0 / (1 + pw(z))
    S2 = (lam_p2 - pw(z)) * S0 / (1 + pw(z))
    good = (
        (1 + l2 * pw(1 + u + v) + pw(2 * (1 + u + v))) * S0
        - lam_p * (pw(1 + v + b + s) + pw(1 + u + a + s)) * (1 + pw(1 + u + v)) * S1
        + (pw(2 * (1 + v + b + s)) + pw(2 * (1 + u + a + s))) * S2
    )
    bad = (1 + l2 * pw(1 + u + v) - l2 * pw(1 + a + u + s) - l2 * pw(1 + b + v + s)) * S0
    local = np.where(ramified, bad, good)
    # A_p = local * L_p(1+a+u+s) L_p(1+b+v+s) / (L_p(1+a+b+2s) L_p(1+u+v))
    num = _lp_inv(l2, chi, pw(1 + a + b + 2 * s)) * _lp_inv(l2, chi, pw(1 + u + v))
    den = _lp_inv(l2, chi, pw(1 + a + u + s)) * _lp_inv(l2, chi, pw(1 + b + v + s))
    return local * num / den


def euler_A(
    form: ModularForm,
    shifts: ShiftPair,
    u,
    v,
    s,
    prime_cutoff: int,
    table: CoefficientTable,
    with_error: bool = False,
):
    """prod_{p <= prime_cutoff} A_p, with an estimate of the omitted tail.

    The tail bound uses |A_p - 1| <= C p^-kappa fitted on (cutoff/2, cutoff],
    summed as C cutoff^(1-kappa) / ((kappa - 1) ln cutoff).
    """
    if not in_domain(shifts, u, v, s):
        raise OutsideDomain(f"(u, v, s) = ({u}, {v}, {s}) is outside the convergence domain")
    if prime_cutoff > table.max_n:
        raise TruncationBudgetExceeded(f"prime cutoff {prime_cutoff} exceeds table size {table.max_n}")
    primes = arith.primes_up_to(prime_cutoff)
    local = euler_A_local(form, shifts, u, v, s, primes, table.lam[primes])
    value = complex(np.exp(np.sum(np.log(local))))
    kappa = _decay_exponent(shifts, u, v, s)
    upper = primes > prime_cutoff / 2
    if np.any(upper):
        C = float(np.max(np.abs(local[upper] - 1) * primes[upper].astype(float) ** kappa))
        tail = C * prime_cutoff ** (1 - kappa) / ((kappa - 1) * math.log(prime_cutoff))
        err = abs(value) * math.expm1(min(tail, 50.0))
    else:
        err = float("inf")
    if with_error:
        return value, err
    return value


# -- CFKRS polynomial ----------------------------------------------------------


@lru_cache(maxsize=4)
def _sym2_taylor_cached(form, table_id, radius, points):
    table = _TABLES[table_id]
    return sym2_taylor(form, table, radius, points)


_TABLES: dict = {}


def _F_factory(form: ModularForm, table: CoefficientTable, reach: float):
    """w -> L(f x f, 1+w)/zeta^(N)(2+2w) for |w| <= reach, through the symmetric square."""
    _TABLES[id(table)] = table
    radius = max(0.5, 1.5 * reach)
    coef = _sym2_taylor_cached(form, id(table), radius, 96)
    bad = prime_divisors(form.level)

    def F(w):
        w = np.asarray(w, dtype=complex)
        sym2 = np.polynomial.polynomial.polyval(w, coef)
        euler = np.ones_like(w)
        for p in bad:
            euler = euler / (1 + np.exp(-(1 + w) * math.log(p)))
        return zeta(1 + w) / zeta(2 + 2 * w) * sym2 * euler

    return F


def cfkrs_p1(
    form: ModularForm,
    constants: MomentConstants | None,
    x: float,
    r1: float,
    r2: float,
    table: CoefficientTable | None = None,
    points: int = 48,
) -> float:
    """-1/(2 pi i)^2 times the double contour integral over |z1| = r1, |z2| = r2 of
    F(1 + z1 - z2) (z2 - z1)^2 / (z1^2 z2^2) exp(x (z1 - z2)/2), by the trapezoid rule.

    ``constants`` is not used by the integral; it is accepted so callers can pass
    the same bundle they compare against.
    """
    if not (0 < r1 and 0 < r2 and r1 != r2 and r1 + r2 < 1):
        raise RadiiInvalid(f"need 0 < r1 != r2 and r1 + r2 < 1, got r1={r1}, r2={r2}")
    if table is None:
        raise TruncationBudgetExceeded("cfkrs_p1 needs a coefficient table")
    F = _F_factory(form, table, r1 + r2)
    theta = 2 * np.pi * np.arange(points) / points
    z1 = r1 * np.exp(1j * theta)[:, None]
    z2 = r2 * np.exp(1j * theta)[None, :]
    w = z1 - z2
    integrand = F(w) * (z2 - z1) ** 2 / (z1**2 * z2**2) * np.exp(x * w / 2)
    # dz = i z dtheta on each circle; the (2 pi i)^2 cancels against the measure
    total = np.mean(integrand * z1 * z2)
    return float(-total.real)
