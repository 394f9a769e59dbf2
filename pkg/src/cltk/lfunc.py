"""Local factors, approximate-functional-equation kernels and numeric L-values.

The smoothing kernels are inverse Mellin transforms

    V(x) = 1/(2 pi i) int_(c) G(u)/u * ratio(u) * x^(-u) du

evaluated by the trapezoid rule on the vertical line Re u = c.  The rule is
spectrally accurate here because the integrand is analytic in a strip of
half-width c around the line (the only nearby singularity is the pole at
u = 0) and decays like exp(-a y^2) along it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from numpy.polynomial import chebyshev

from .analytic import log_gamma
from .errors import CoefficientTableTooSmall, GammaPole, PoleAtNonpositiveInteger, TruncationBudgetExceeded
from .forms import CoefficientTable, ModularForm, ShiftPair

__all__ = [
    "AfeKernelConfig",
    "GammaFactor",
    "ContourKernel",
    "form_gamma_factor",
    "l_infinity",
    "l_infinity_duplicated",
    "x_factor",
    "g_ratio",
    "v_kernel",
    "afe_pair_product",
    "lvalue",
    "lvalue_self_dual",
    "completed_lvalue",
    "estimate_root_number",
    "fe_defect",
    "lvalues_on_line",
]


@dataclass(frozen=True)
class AfeKernelConfig:
    """Smoothing function G(s) = exp(g_scale s^2), optionally times
    ((a+b)^2 - 4 s^2)/(a+b)^2 for a shift pair with a+b != 0.

    ``contour_cutoff=None`` picks the truncation height from ``tol``.
    """

    g_scale: float = 1.0
    polynomial_factor: bool = False
    contour_re: float = 1.2
    contour_cutoff: float | None = None
    quad_step: float = 0.1
    tol: float = 1e-12

    def __post_init__(self):
        if self.contour_re <= 0:
            raise ValueError("contour_re must be positive")
        if self.g_scale <= 0:
            raise ValueError("g_scale must be positive")
        if self.quad_step <= 0:
            raise ValueError("quad_step must be positive")

    def log_G(self, u: np.ndarray, shift_sum: complex = 0.0) -> np.ndarray:
        out = self.g_scale * u * u
        if self.polynomial_factor and shift_sum != 0:
            out = out + np.log((shift_sum**2 - 4 * u * u) / shift_sum**2 + 0j)
        return out


@dataclass(frozen=True)
class GammaFactor:
    """gamma(s) = exp(s log_q) prod_j Gamma(a_j s + b_j)."""

    log_q: float
    gammas: tuple[tuple[float, float], ...]

    def log(self, s):
        s = np.asarray(s, dtype=complex)
        out = s * self.log_q
        for a, b in self.gammas:
            try:
                out = out + log_gamma(a * s + b)
            except PoleAtNonpositiveInteger as exc:
                raise GammaPole(str(exc)) from exc
        return out

    def pole_abscissa(self, s: complex) -> float:
        """Largest Re u at which gamma(s + u) has a pole."""
        return max(-(b + a * s.real) / a for a, b in self.gammas)


def form_gamma_factor(form: ModularForm) -> GammaFactor:
    return GammaFactor(math.log(math.sqrt(form.level) / (2 * math.pi)), ((1.0, (form.weight - 1) / 2),))


def l_infinity(form: ModularForm, s):
    """(sqrt N / 2 pi)^s Gamma(s + (k-1)/2)."""
    return np.exp(form_gamma_factor(form).log(s))


def l_infinity_duplicated(form: ModularForm, s):
    """The same factor written with two Gamma values at half arguments."""
    s = np.asarray(s, dtype=complex)
    k = form.weight
    log_val = (
        0.5 * math.log(2.0**k / (8 * math.pi))
        + s * math.log(math.sqrt(form.level) / math.pi)
        + log_gamma(s / 2 + (k - 1) / 4)
        + log_gamma(s / 2 + (k + 1) / 4)
    )
    return np.exp(log_val)


def _log_linf_pair(form, alpha, beta, u, t):
    gf = form_gamma_factor(form)
    return gf.log(0.5 + alpha + u + 1j * t) + gf.log(0.5 + beta + u - 1j * t)


def x_factor(form: ModularForm, shifts: ShiftPair, t: float) -> complex:
    a, b = shifts.alpha, shifts.beta
    gf = form_gamma_factor(form)
    log_num = gf.log(0.5 - a - 1j * t) + gf.log(0.5 - b + 1j * t)
    log_den = gf.log(0.5 + a + 1j * t) + gf.log(0.5 + b - 1j * t)
    return complex(np.exp(log_num - log_den))


def g_ratio(form: ModularForm, shifts: ShiftPair, s, t: float):
    s = np.asarray(s, dtype=complex)
    a, b = shifts.alpha, shifts.beta
    out = np.exp(_log_linf_pair(form, a, b, s, t) - _log_linf_pair(form, a, b, 0.0, t))
    return out[()] if out.ndim == 0 else out


# -- contour kernel -----------------------------------------------------------


class ContourKernel:
    """Trapezoid discretisation of V(x) = 1/(2 pi i) int G(u)/u ratio(u) x^-u du.

    ``log_ratio`` maps an array of u on the contour to log ratio(u).
    """

    def __init__(self, log_ratio, cfg: AfeKernelConfig, shift_sum: complex = 0.0, pole_re: float = -np.inf):
        c = cfg.contour_re
        if pole_re >= c:
            raise GammaPole(f"contour Re u = {c} is left of a Gamma pole at Re u = {pole_re:.3g}")
        self.cfg = cfg
        h = cfg.quad_step
        a = cfg.g_scale

        def weights(y):
            u = c + 1j * y
            return u, np.exp(cfg.log_G(u, shift_sum) + log_ratio(u)) / u

        if cfg.contour_cutoff is None:
            S = math.sqrt(max(c * c + math.log(1.0 / cfg.tol) / a, 1.0))
            while True:
                tail = self._tail(weights, S, a)
                if tail < cfg.tol:
                    break
                S += 1.0
                if S > 40.0 / math.sqrt(a) + 40:
                    raise TruncationBudgetExceeded(f"kernel tail {tail:.3g} above tol {cfg.tol:.3g}")
        else:
            S = cfg.contour_cutoff
            tail = self._tail(weights, S, a)
            if tail > cfg.tol:
                raise TruncationBudgetExceeded(
                    f"contour cutoff {S} leaves tail {tail:.3g} above tol {cfg.tol:.3g}"
                )
        self.cutoff = S
        self.tail_bound = tail
        self._bound_args = (cfg, log_ratio, shift_sum)
        self._log_bounds = None
        J = int(math.ceil(S / h))
        y = h * np.arange(-J, J + 1)
        self.u, w = weights(y)
        self.w = w * (h / (2 * np.pi))
        # rounding level of the trapezoid sum itself (cancellation when |w| is large)
        self.noise_floor = 1e-16 * float(np.sum(np.abs(self.w)))

    @staticmethod
    def _tail(weights, S, a):
        # |W(y)| <= |W(S)| exp(-a (y^2 - S^2)) beyond S; integral of that is |W(S)|/(2aS)
        _, w = weights(np.array([-S, S]))
        return float(np.sum(np.abs(w)) / (2 * a * S) / (2 * np.pi))

    @staticmethod
    def _shifted_bounds(cfg, log_ratio, shift_sum):
        # log of (1/2pi) int |G(u)/u ratio(u)| dy on Re u = c', for several c' > 0;
        # |V(x)| <= B(c') x^-c' for each of them since no poles lie right of 0
        cs = np.concatenate((np.linspace(0.25, 4.0, 16), np.arange(5.0, 41.0, 2.0)))
        y = np.linspace(-60.0, 60.0, 601) / math.sqrt(cfg.g_scale)
        out = []
        for c in cs:
            u = c + 1j * y
            logw = np.real(cfg.log_G(u, shift_sum) + log_ratio(u)) - np.log(np.abs(u))
            top = np.max(logw)
            out.append(top + math.log(np.sum(np.exp(logw - top)) * (y[1] - y[0]) / (2 * np.pi)))
        return cs, np.array(out)

    def log_bound(self, logx) -> np.ndarray:
        if self._log_bounds is None:
            self._log_bounds = self._shifted_bounds(*self._bound_args)
        cs, lb = self._log_bounds
        return np.min(lb[None, :] - np.outer(logx, cs), axis=1)

    def direct(self, x) -> np.ndarray:
        logx = np.log(np.asarray(x, dtype=float))
        out = np.empty(logx.shape, dtype=complex)
        flat = logx.ravel()
        res = out.reshape(-1)
        step = max(1, 2_000_000 // len(self.u))
        for i in range(0, len(flat), step):
            res[i : i + step] = np.exp(-np.outer(flat[i : i + step], self.u)) @ self.w
        return out

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.size <= 4 * len(self.u):
            return self.direct(x)
        return self.interpolant(float(np.min(x)), float(np.max(x)))(x)

    def interpolant(self, xmin: float, xmax: float, start_degree: int = 32):
        """Chebyshev interpolant of V in log x on [xmin, xmax], self-validated."""
        lo, hi = math.log(xmin), math.log(xmax)
        if hi - lo < 1e-12:
            val = self.direct(np.array([xmin]))[0]
            return lambda x: np.full(np.shape(x), val)
        rng = np.random.default_rng(0)
        probe = np.exp(rng.uniform(lo, hi, 16))
        exact = self.direct(probe)
        target = max(10 * self.cfg.tol, 100 * self.noise_floor)
        deg = start_degree
        while True:
            coef = chebyshev.chebinterpolate(lambda z: self.direct(np.exp(lo + (z + 1) * (hi - lo) / 2)), deg)

            def f(x, coef=coef):
                z = (2 * np.log(np.asarray(x, dtype=float)) - lo - hi) / (hi - lo)
                return chebyshev.chebval(z, coef)

            err = np.max(np.abs(f(probe) - exact))
            if err < target:
                self.last_degree = deg
                return f
            if deg >= 1024:
                raise TruncationBudgetExceeded(f"kernel interpolation error {err:.3g}")
            deg *= 2

    def effective_cutoff(self, sigma: float, tol: float, scale: float = 1.0) -> int:
        """Smallest X such that sum_{n > X} d(n) n^-sigma |V(n)| is below tol (estimated)."""
        ell = np.arange(0.0, 60.0 + math.log(max(scale, 1.0)), 0.125)
        # tail sum ~ X^(1-sigma) (1 + ln X)^2 |V(X)|
        score = self.log_bound(ell) + (1 - sigma) * ell + 2 * np.log1p(ell)
        bad = np.flatnonzero(score > math.log(tol))
        if len(bad) == 0:
            return 1
        if bad[-1] == len(ell) - 1:
            raise TruncationBudgetExceeded("kernel does not decay within the scanned range")
        return int(math.ceil(math.exp(ell[bad[-1] + 1])))


def v_kernel(form: ModularForm, shifts: ShiftPair, x, t: float, cfg: AfeKernelConfig | None = None):
    """V_{alpha,beta}(x, t) of the paired approximate functional equation."""
    cfg = cfg or AfeKernelConfig()
    kernel = _pair_kernel(form, shifts.alpha, shifts.beta, t, cfg)
    out = kernel(np.atleast_1d(x))
    return out[0] if np.ndim(x) == 0 else out


def _pair_kernel(form, alpha, beta, t, cfg):
    base = _log_linf_pair(form, alpha, beta, 0.0, t)
    k = form.weight
    pole = max(-(k - 1) / 2 - 0.5 - np.real(alpha), -(k - 1) / 2 - 0.5 - np.real(beta))
    return ContourKernel(
        lambda u: _log_linf_pair(form, alpha, beta, u, t) - base,
        cfg,
        shift_sum=alpha + beta,
        pole_re=pole,
    )


def _convolve_hyperbola(a: np.ndarray, b: np.ndarray, K: int) -> np.ndarray:
    """c[k] = sum_{mn = k} a[m] b[n] for k <= K, by the hyperbola split."""
    c = np.zeros(K + 1, dtype=complex)
    r = math.isqrt(K)
    for m in range(1, r + 1):
        top = K // m
        c[m : m * top + 1 : m] += a[m] * b[1 : top + 1]
    for n in range(1, r + 1):
        top = K // n
        if top <= r:
            continue
        c[n * (r + 1) : n * top + 1 : n] += b[n] * a[r + 1 : top + 1]
    return c


def afe_pair_product(
    form: ModularForm,
    shifts: ShiftPair,
    t: float,
    cfg: AfeKernelConfig | None = None,
    table: CoefficientTable | None = None,
) -> complex:
    """L(f, 1/2+alpha+it) L(f, 1/2+beta-it) from the two double sums over (m, n).

    Summation runs over k = mn in increasing order.
    """
    cfg = cfg or AfeKernelConfig()
    a, b = complex(shifts.alpha), complex(shifts.beta)
    k1 = _pair_kernel(form, a, b, t, cfg)
    k2 = _pair_kernel(form, -b, -a, t, cfg)
    scale = (abs(t) * math.sqrt(form.level) / (2 * math.pi)) ** 2
    sigma = 0.5 - max(abs(a.real), abs(b.real))
    K = max(k1.effective_cutoff(sigma, cfg.tol * 1e2, scale), k2.effective_cutoff(sigma, cfg.tol * 1e2, scale))
    if table is None or K > table.max_n:
        raise CoefficientTableTooSmall(
            f"need coefficients up to {K}, table has {0 if table is None else table.max_n}", needed=K
        )
    n = np.arange(K + 1, dtype=float)
    n[0] = 1.0
    logn = np.log(n)
    lam = table.lam[: K + 1]

    def side(p, q, kernel):
        x = lam * np.exp(-(0.5 + p + 1j * t) * logn)
        y = lam * np.exp(-(0.5 + q - 1j * t) * logn)
        c = _convolve_hyperbola(x, y, K)
        v = kernel(np.arange(1, K + 1, dtype=float))
        return np.sum(c[1:] * v)

    first = side(a, b, k1)
    second = side(-b, -a, k2)
    return complex(first + x_factor(form, shifts, t) * second)


# -- single-value AFE -----------------------------------------------------------


def lvalue_self_dual(
    s: complex,
    coeffs: np.ndarray,
    gamma_factor: GammaFactor,
    root_number: int,
    cfg: AfeKernelConfig,
    log_conductor_scale: float,
    sigma_floor: float | None = None,
) -> complex:
    """L(s) for a self-dual L-function with real Dirichlet coefficients ``coeffs``
    (coeffs[n], n >= 1) and functional equation gamma(s)L(s) = eps gamma(1-s)L(1-s)."""
    s = complex(s)
    logs = {}
    kernels = []
    for z in (s, 1 - s):
        base = gamma_factor.log(z)
        logs[z] = base
        kernels.append(
            ContourKernel(
                lambda u, z=z, base=base: gamma_factor.log(z + u) - base,
                cfg,
                pole_re=gamma_factor.pole_abscissa(z),
            )
        )
    scale = math.exp(log_conductor_scale)
    factor = root_number * np.exp(logs[1 - s] - logs[s])
    X = max(
        kernels[0].effective_cutoff(s.real, cfg.tol * 1e2, scale),
        kernels[1].effective_cutoff(1 - s.real, cfg.tol * 1e2 / max(abs(factor), 1e-300), scale),
    )
    if X > len(coeffs) - 1:
        raise CoefficientTableTooSmall(f"need coefficients up to {X}, have {len(coeffs) - 1}", needed=X)
    n = np.arange(1, X + 1, dtype=float)
    logn = np.log(n)
    a = coeffs[1 : X + 1]
    first = np.sum(a * np.exp(-s * logn) * kernels[0](n))
    second = np.sum(a * np.exp(-(1 - s) * logn) * kernels[1](n))
    return complex(first + factor * second)


def _form_scale(form: ModularForm, s: complex) -> float:
    return math.log(max(1.0, (abs(s.imag) + form.weight / 2) * math.sqrt(form.level) / (2 * math.pi)))


def lvalue(form: ModularForm, s, cfg: AfeKernelConfig | None = None, table: CoefficientTable | None = None) -> complex:
    """L(f, s) by the smoothed approximate functional equation."""
    cfg = cfg or AfeKernelConfig()
    s = complex(s)
    if table is None:
        raise CoefficientTableTooSmall("a coefficient table is required")
    return lvalue_self_dual(
        s, table.lam, form_gamma_factor(form), form.root_number, cfg, _form_scale(form, s)
    )


def completed_lvalue(form: ModularForm, s, cfg=None, table=None) -> complex:
    s = complex(s)
    return complex(l_infinity(form, s)) * lvalue(form, s, cfg, table)


def estimate_root_number(form: ModularForm, table: CoefficientTable, cfg: AfeKernelConfig | None = None) -> tuple[int, float]:
    """Sign in {+1, -1} for which the approximate functional equation is consistent,
    and the corresponding defect.

    Any sign gives an expression symmetric under s -> 1-s, so the test is instead
    that the value does not depend on the smoothing function: two kernels G that
    differ in scale agree only with the true root number.
    """
    cfg = cfg or AfeKernelConfig(g_scale=0.25)
    other = replace(cfg, g_scale=cfg.g_scale / 2)
    probes = [0.3 + 2.0j, 0.7 + 5.0j, 0.4 + 9.0j]
    best = None
    for eps in (1, -1):
        trial = replace(form, root_number=eps, coeff_source="file")
        defect = 0.0
        for s in probes:
            a = lvalue(trial, s, cfg, table)
            b = lvalue(trial, s, other, table)
            defect = max(defect, abs(a - b) / max(abs(a), abs(b), 1e-300))
        if best is None or defect < best[1]:
            best = (eps, defect)
    return best


def fe_defect(form: ModularForm, s, cfg=None, table=None) -> float:
    """|L(s) - eps gamma(1-s)/gamma(s) L(1-s)| / |L(s)|, i.e. the functional-equation
    defect with the Gamma factors divided out (no underflow at large |Im s|)."""
    s = complex(s)
    gf = form_gamma_factor(form)
    lhs = lvalue(form, s, cfg, table)
    rhs = form.root_number * np.exp(gf.log(1 - s) - gf.log(s)) * lvalue(form, 1 - s, cfg, table)
    return float(abs(lhs - rhs) / max(abs(lhs), 1e-300))


def lvalues_on_line(
    form: ModularForm, sigma: float, t: np.ndarray, cfg: AfeKernelConfig | None = None, table: CoefficientTable | None = None
) -> np.ndarray:
    """L(f, sigma + i t) for an array of t (sigma real), sharing one term cutoff.

    Same formula as :func:`lvalue`; on sigma = 1/2 the dual sum is the complex
    conjugate of the direct one, so only one kernel is built per t.
    """
    cfg = cfg or AfeKernelConfig()
    t = np.asarray(t, dtype=float)
    if table is None:
        raise CoefficientTableTooSmall("a coefficient table is required")
    if t.size == 0:
        return np.zeros(0, dtype=complex)
    gf = form_gamma_factor(form)
    eps = form.root_number
    self_conj = sigma == 0.5

    def kernel(z):
        base = gf.log(z)
        return ContourKernel(lambda u: gf.log(z + u) - base, cfg, pole_re=gf.pole_abscissa(z)), base

    # V_z(x) decays in x / |z| (conductor scale), so the largest |t| fixes the cutoff
    t_big = float(np.max(np.abs(t)))
    s_big = complex(sigma, t_big)
    factor_big = abs(np.exp(gf.log(1 - s_big) - gf.log(s_big)))
    scale = math.exp(_form_scale(form, s_big))
    X = max(
        kernel(s_big)[0].effective_cutoff(sigma, cfg.tol * 1e2, scale),
        kernel(1 - s_big)[0].effective_cutoff(1 - sigma, cfg.tol * 1e2 / max(factor_big, 1e-300), scale),
    )
    if X > table.max_n:
        raise CoefficientTableTooSmall(f"need coefficients up to {X}, table has {table.max_n}", needed=X)
    n = np.arange(1, X + 1, dtype=float)
    logn = np.log(n)
    a = table.lam[1 : X + 1]
    out = np.empty(t.shape, dtype=complex)
    # V(n) = sum_k c_k T_k(z_n) with z affine in log n; the Vandermonde block is
    # shared by every t, so each Dirichlet sum becomes coef . (T^T (a n^-s))
    hi = max(logn[-1], 1e-12)
    z = 2 * logn / hi - 1
    deg = 32
    vander = np.ascontiguousarray(chebyshev.chebvander(z, deg).T)
    amp = a * np.exp(-sigma * logn)

    def dirichlet_sum(k, s_val):
        nonlocal deg, vander
        f = k.interpolant(1.0, math.exp(hi), deg)
        if k.last_degree > deg:
            deg = k.last_degree
            vander = np.ascontiguousarray(chebyshev.chebvander(z, deg).T)
        coef = np.zeros(deg + 1, dtype=complex)
        c = f.__defaults__[0]
        coef[: len(c)] = c
        # a n^-s = amp n^(sigma - s); s - sigma is purely imaginary apart from the dual side
        b = amp * np.exp(-(s_val - sigma) * logn)
        return coef @ (vander @ b.real + 1j * (vander @ b.imag))

    for idx, tv in np.ndenumerate(t):
        s = complex(sigma, tv)
        k1, base1 = kernel(s)
        first = dirichlet_sum(k1, s)
        if self_conj:
            second = np.conj(first)
            base2 = np.conj(base1)
        else:
            k2, base2 = kernel(1 - s)
            second = dirichlet_sum(k2, 1 - s)
        out[idx] = first + eps * np.exp(base2 - base1) * second
    return out
