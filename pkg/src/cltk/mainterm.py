"""Closed-form main terms of the mollified second moment.

Everything reduces to integrals of polynomial x exponential over [0, 1]:

    I_n(c) = int_0^1 s^n e^{c s} ds,

tabulated by the recurrence I_n = (e^c - n I_{n-1}) / c, run forwards while
n <= |c| (where it is stable) and backwards from a high starting index above
that (Miller's algorithm).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.polynomial import Polynomial

from .errors import BadNormalization, DegenerateShift
from .forms import ShiftPair

__all__ = [
    "MollifierSpec",
    "Polynomial",
    "exp_moments",
    "integrate_exp_poly",
    "mollifier_polynomial",
    "check_normalized",
    "c_alpha_beta",
    "c_alpha_beta_integral",
    "c_pq",
]

NORMALIZATION_TOL = 1e-12


@dataclass(frozen=True)
class MollifierSpec:
    nu: float
    P: Polynomial
    sigma0_R: float = 0.0

    def __post_init__(self):
        if not 0 < float(self.nu) < 1:
            raise BadNormalization(f"nu must lie in (0, 1), got {self.nu}")
        check_normalized(self.P)

    def admissible(self, theta: float | Fraction) -> bool:
        """nu below (1 - 2 theta)/(4 + 2 theta)."""
        theta = Fraction(theta) if isinstance(theta, (int, Fraction)) else theta
        return self.nu < (1 - 2 * theta) / (4 + 2 * theta)


def check_normalized(P: Polynomial) -> None:
    c = np.asarray(P.coef)
    if abs(c[0]) > NORMALIZATION_TOL or abs(np.sum(c) - 1) > NORMALIZATION_TOL:
        raise BadNormalization(f"P must satisfy P(0)=0, P(1)=1; got P(0)={c[0]!r}, P(1)={np.sum(c)!r}")


def mollifier_polynomial(free: np.ndarray) -> Polynomial:
    """x + sum_j free[j] (x^(j+2) - x): P(0)=0 and P(1)=1 hold identically."""
    free = np.asarray(free, dtype=float)
    coef = np.zeros(len(free) + 2)
    coef[1] = 1.0 - np.sum(free)
    coef[2:] = free
    return Polynomial(coef)


def exp_moments(c: complex, nmax: int) -> np.ndarray:
    """I_n(c) = int_0^1 s^n e^{cs} ds for n = 0..nmax."""
    cplx = isinstance(c, complex) and c.imag != 0
    c = complex(c) if cplx else float(np.real(c))
    if c == 0:
        return 1.0 / np.arange(1, nmax + 2)
    ec = cmath.exp(c) if cplx else math.exp(c)
    split = min(nmax, int(abs(c)))
    out = [0.0] * (nmax + 1)
    if cplx:
        out[0] = (ec - 1) / c if abs(c) > 1e-3 else sum(c**k / math.factorial(k + 1) for k in range(8))
    else:
        out[0] = math.expm1(c) / c
    for n in range(1, split + 1):
        out[n] = (ec - n * out[n - 1]) / c
    if split < nmax:
        # backward: I_{n-1} = (e^c - c I_n) / n, errors shrink by |c|/n each step
        top = nmax + 40 + int(2 * abs(c))
        val = 0.0
        for n in range(top, split + 1, -1):
            val = (ec - c * val) / n
            if n <= nmax + 1:
                out[n - 1] = val
    return np.array(out, dtype=complex if cplx else float)


def integrate_exp_poly(p: Polynomial | np.ndarray, c: complex) -> complex:
    """int_0^1 p(s) e^{cs} ds in closed form.

    A Polynomial with a non-default domain/window is integrated in its own
    variable z = off + scl*s, which avoids expanding, e.g., powers of (1 - 2s)
    into monomials with large alternating coefficients.
    """
    if not isinstance(p, Polynomial):
        coef = np.asarray(p)
        return np.dot(coef, exp_moments(c, len(coef) - 1))
    off, scl = p.mapparms()
    coef = np.asarray(p.coef)
    n = len(coef) - 1
    if off == 0 and scl == 1:
        return np.dot(coef, exp_moments(c, n))
    # z = off + scl s: int = e^{-k off}/scl * [J(off + scl) - J(off)], J(a) = int_0^a z^n e^{kz} dz
    k = c / scl
    powers = np.arange(n + 1)

    def J(a):
        if a == 0:
            return np.zeros(n + 1)
        return a ** (powers + 1) * exp_moments(k * a, n)

    moments = (J(off + scl) - J(off)) * np.exp(-k * off) / scl
    return np.dot(coef, moments)


def _int01(p: Polynomial) -> float:
    return integrate_exp_poly(p, 0.0)


# -- c(alpha, beta) ---------------------------------------------------------------


def _prefactor(shifts: ShiftPair, T: float, limit: bool) -> complex:
    u = complex(shifts.alpha) + complex(shifts.beta)
    lnT = math.log(T)
    if u == 0:
        if not limit:
            raise DegenerateShift("alpha + beta = 0: pass limit=True for the analytic limit 2")
        return 2.0
    return -np.expm1(-2 * u * lnT) / (u * lnT)


def _bivariate_F(P: Polynomial) -> np.ndarray:
    """Coefficients F[a, b] of x^a y^b in int_0^1 P(x+u) P(y+u) du."""
    p = np.asarray(P.coef, dtype=float)
    d = len(p) - 1
    F = np.zeros((d + 1, d + 1))
    for i, pi in enumerate(p):
        for j, pj in enumerate(p):
            if pi == 0 or pj == 0:
                continue
            for a in range(i + 1):
                for b in range(j + 1):
                    F[a, b] += pi * pj * math.comb(i, a) * math.comb(j, b) / (i - a + j - b + 1)
    return F


def c_alpha_beta(spec: MollifierSpec, shifts: ShiftPair, T: float, limit: bool = False) -> complex:
    """1 + (1/nu) (1 - T^(-2(alpha+beta)))/((alpha+beta) ln T)
    * d^2/dxdy [M^(-beta x - alpha y) int_0^1 P(x+u) P(y+u) du] at x=y=0, M = T^nu.

    The mixed derivative is read off the bivariate coefficients of the integral;
    ``limit=True`` replaces the prefactor by its value 2 at alpha+beta = 0.
    """
    if T <= math.e:
        raise ValueError("T must exceed e")
    nu = float(spec.nu)
    lnM = nu * math.log(T)
    a, b = complex(shifts.alpha), complex(shifts.beta)
    F = _bivariate_F(spec.P)
    f00 = F[0, 0]
    f10 = F[1, 0] if F.shape[0] > 1 else 0.0
    f01 = F[0, 1] if F.shape[1] > 1 else 0.0
    f11 = F[1, 1] if min(F.shape) > 1 else 0.0
    ex, ey = -b * lnM, -a * lnM
    deriv = f11 + ex * f01 + ey * f10 + ex * ey * f00
    return complex(1 + _prefactor(shifts, T, limit) / nu * deriv)


def c_alpha_beta_integral(spec: MollifierSpec, shifts: ShiftPair, T: float, limit: bool = False) -> complex:
    """Same quantity from int_0^1 (P' - beta ln M P)(P' - alpha ln M P) du."""
    nu = float(spec.nu)
    lnM = nu * math.log(T)
    a, b = complex(shifts.alpha), complex(shifts.beta)
    P = spec.P
    dP = P.deriv()
    # expand the product so complex shifts stay exact
    pp, pdp, dpdp = _int01(P * P), _int01(P * dP), _int01(dP * dP)
    integral = dpdp - (a + b) * lnM * pdp + a * b * lnM**2 * pp
    return complex(1 + _prefactor(shifts, T, limit) / nu * integral)


# -- c(P, Q, r, xi) ----------------------------------------------------------------


def c_pq(P: Polynomial, Q: Polynomial, r: float, xi: float) -> float:
    """1 + (1/xi) int_0^1 int_0^1 e^{2rs} [U(s) P(u) + Q(s) P'(u)]^2 du ds,
    U = r xi Q + xi Q' (the x-derivative of e^{r xi x} Q(s + xi x) P(x + u) at 0)."""
    if xi <= 0:
        raise ValueError("xi must be positive")
    check_normalized(P)
    if abs(Q(0.0) - 1) > NORMALIZATION_TOL:
        raise BadNormalization(f"Q(0) must be 1, got {Q(0.0)!r}")
    dP = P.deriv()
    U = r * xi * Q + xi * Q.deriv()
    c = 2 * r
    s_uu = integrate_exp_poly(U * U, c)
    s_uq = integrate_exp_poly(U * Q, c)
    s_qq = integrate_exp_poly(Q * Q, c)
    total = s_uu * _int01(P * P) + 2 * s_uq * _int01(P * dP) + s_qq * _int01(dP * dP)
    return float(np.real(1 + total / xi))


def c_pq_quadratic_form(Q: Polynomial, r: float, xi: float, degree: int):
    """c_pq(P) = const + 2 g.b + b^T H b for P = mollifier_polynomial(b) of the given degree.

    Returned as (const, g, H) so the infimum over P is a linear solve.
    """
    c = 2 * r
    U = r * xi * Q + xi * Q.deriv()
    w_uu = integrate_exp_poly(U * U, c).real / xi
    w_uq = integrate_exp_poly(U * Q, c).real / xi
    w_qq = integrate_exp_poly(Q * Q, c).real / xi
    # basis: P = e0 + sum b_j e_j with e0 = x, e_j = x^(j+2) - x
    basis = [Polynomial([0, 1])] + [Polynomial([0, -1] + [0] * j + [1]) for j in range(degree - 1)]
    n = len(basis)
    G = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            pi, pj = basis[i], basis[j]
            G[i, j] = (
                w_uu * _int01(pi * pj)
                + w_uq * (_int01(pi * pj.deriv()) + _int01(pi.deriv() * pj))
                + w_qq * _int01(pi.deriv() * pj.deriv())
            )
    return 1 + G[0, 0], G[0, 1:], G[1:, 1:]


def minimize_c_pq(Q: Polynomial, r: float, xi: float, degree: int = 8):
    """min over P (degree <= ``degree``, P(0)=0, P(1)=1) of c_pq, and the minimiser."""
    const, g, H = c_pq_quadratic_form(Q, r, xi, degree)
    b = np.linalg.solve(H, -g)
    P = mollifier_polynomial(b)
    return c_pq(P, Q, r, xi), P
