"""Desk-scale numerics for the second moment of L(f, 1/2 + it), windowed and sharp.

Values of L on the critical line are cached on an integer grid t = k * base_step,
so the windowed runs at several T, the sharp-cutoff runs and the step-halving
error estimates all reuse one set of evaluations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .forms import CoefficientTable, ModularForm, ShiftPair
from .lfunc import AfeKernelConfig, lvalues_on_line
from .rankin import MomentConstants

__all__ = [
    "EXPERIMENT_AFE",
    "SmoothWindow",
    "make_window",
    "LineCache",
    "MomentResult",
    "MainTerm",
    "SharpResult",
    "second_moment_numeric",
    "second_moment_mainterm",
    "sharp_cutoff_moment",
    "sharp_mainterm",
    "mollified_moment_numeric",
    "moment_csv",
]

# g_scale = 1/4: cutoff ~ 5e4 terms at t = 1000 with |V| growth only ~e^2.5
EXPERIMENT_AFE = AfeKernelConfig(g_scale=0.25, tol=1e-12)


# -- window ---------------------------------------------------------------------


def _step(x):
    """C-infinity step: 0 for x <= 0, 1 for x >= 1, built from exp(-1/x)."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        b = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1 - x, 1.0)), 0.0)
    return a / (a + b)


@dataclass(frozen=True)
class SmoothWindow:
    """1 on [T/2, T], 0 outside [T/2 - delta, T + delta] inside [T/4, 2T]."""

    T: float
    delta: float

    @property
    def support(self) -> tuple[float, float]:
        return self.T / 2 - self.delta, self.T + self.delta

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        lo, hi = self.support
        return _step((t - lo) / self.delta) * _step((hi - t) / self.delta)

    def derivative(self, t, j: int, h: float | None = None):
        """j-th derivative by central differences (j <= 3)."""
        h = h or self.delta * 1e-3
        stencils = {0: [1.0], 1: [-0.5, 0, 0.5], 2: [1.0, -2.0, 1.0], 3: [-0.5, 1.0, 0, -1.0, 0.5]}
        w = np.asarray(stencils[j])
        offs = (np.arange(len(w)) - (len(w) - 1) / 2) * h
        t = np.asarray(t, dtype=float)
        return sum(wi * self(t + o) for wi, o in zip(w, offs)) / h**j

    def derivative_scale(self, j: int, samples: int = 4001) -> float:
        """max |w^(j)| * delta^j over the transition regions."""
        lo, hi = self.support
        t = np.concatenate([np.linspace(lo, lo + self.delta, samples), np.linspace(hi - self.delta, hi, samples)])
        return float(np.max(np.abs(self.derivative(t, j))) * self.delta**j)

    def _quad(self, g) -> float:
        lo, hi = self.support
        plateau = quad(g, self.T / 2, self.T, epsabs=0, epsrel=1e-13, limit=200)[0]
        rise = quad(lambda t: self(t) * g(t), lo, self.T / 2, epsabs=0, epsrel=1e-13, limit=200)[0]
        fall = quad(lambda t: self(t) * g(t), self.T, hi, epsabs=0, epsrel=1e-13, limit=200)[0]
        return plateau + rise + fall

    def mass(self) -> float:
        """w-hat(0) = int w."""
        return self._quad(lambda t: 1.0)

    def log_mass(self) -> float:
        """int w(t) ln t dt."""
        return self._quad(math.log)


def make_window(T: float, delta_pow: int = 1) -> SmoothWindow:
    """Plateau bump with transition width T / (ln T)^delta_pow, capped at T/4."""
    if T < 40:
        raise ValueError("T must be at least 40")
    if delta_pow not in (1, 2):
        raise ValueError("delta_pow must be 1 or 2")
    return SmoothWindow(T=float(T), delta=min(T / math.log(T) ** delta_pow, T / 4))


# -- critical-line cache ------------------------------------------------------------


@dataclass
class LineCache:
    """L(f, sigma + i k h0) for integer k, filled on demand in chunks."""

    form: ModularForm
    table: CoefficientTable
    sigma: float = 0.5
    base_step: float = 0.05
    cfg: AfeKernelConfig = EXPERIMENT_AFE
    chunk: int = 1000
    values: dict = field(default_factory=dict, repr=False)

    def get(self, k: np.ndarray) -> np.ndarray:
        k = np.asarray(k, dtype=np.int64)
        missing = np.array(sorted({int(x) for x in k.ravel()} - self.values.keys()), dtype=np.int64)
        # chunks are contiguous in t so each shares a cutoff close to its own max |t|
        for i in range(0, len(missing), self.chunk):
            kk = missing[i : i + self.chunk]
            vals = lvalues_on_line(self.form, self.sigma, kk * self.base_step, self.cfg, self.table)
            self.values.update(zip(kk.tolist(), vals))
        return np.array([self.values[int(x)] for x in k.ravel()], dtype=complex).reshape(k.shape)

    def grid(self, lo: float, hi: float, step: float) -> np.ndarray:
        """Indices of the grid of spacing ``step`` covering [lo, hi] (endpoints rounded outward)."""
        m = round(step / self.base_step)
        if m < 1 or not math.isclose(m * self.base_step, step, rel_tol=1e-9):
            raise ValueError(f"step {step} is not a multiple of the cache step {self.base_step}")
        a = math.floor(lo / step + 1e-9)
        b = math.ceil(hi / step - 1e-9)
        return np.arange(a, b + 1, dtype=np.int64) * m


_CACHES: dict = {}


def default_cache(form: ModularForm, table: CoefficientTable, sigma: float = 0.5, base_step: float = 0.05) -> LineCache:
    key = (form, id(table), sigma, base_step)
    if key not in _CACHES:
        _CACHES[key] = LineCache(form, table, sigma, base_step)
    return _CACHES[key]


# -- windowed moment ---------------------------------------------------------------


@dataclass(frozen=True)
class MomentResult:
    value: complex
    error_estimate: float
    step: float
    points: int


def _pair_values(cache: LineCache, form, table, shifts: ShiftPair, t: np.ndarray, cfg) -> np.ndarray:
    """L(1/2+alpha+it) L(1/2+beta-it) = L(1/2+alpha+it) * conj(L(1/2+conj(beta)+it))."""
    a, b = complex(shifts.alpha), complex(shifts.beta)
    if a == 0 and b == 0:
        k = np.rint(t / cache.base_step).astype(np.int64)
        v = cache.get(k)
        return (v * np.conj(v)).real.astype(complex)
    first = lvalues_on_line(form, 0.5 + a.real, t + a.imag, cfg, table)
    second = lvalues_on_line(form, 0.5 + b.real, t - b.imag, cfg, table)
    return first * np.conj(second)


def second_moment_numeric(
    form: ModularForm,
    window: SmoothWindow,
    shifts: ShiftPair = ShiftPair(),
    grid_step: float = 0.05,
    table: CoefficientTable | None = None,
    cfg: AfeKernelConfig = EXPERIMENT_AFE,
    cache: LineCache | None = None,
) -> MomentResult:
    """Trapezoid rule for int w(t) L(1/2+alpha+it) L(1/2+beta-it) dt.

    The error estimate is |I(h) - I(2h)|; w vanishes to all orders at the ends of
    its support, so I(h) converges much faster than this estimate suggests.
    """
    cache = cache or default_cache(form, table, 0.5, grid_step)
    lo, hi = window.support
    k = cache.grid(lo, hi, grid_step)
    t = k * cache.base_step
    y = window(t) * _pair_values(cache, form, table, shifts, t, cfg)
    fine = grid_step * np.sum(y)
    start = int(k[0] // round(grid_step / cache.base_step)) % 2
    coarse = 2 * grid_step * np.sum(y[start::2])
    value = complex(fine)
    if shifts.alpha == 0 and shifts.beta == 0:
        value = value.real
    return MomentResult(value=value, error_estimate=float(abs(fine - coarse)), step=grid_step, points=len(t))


@dataclass(frozen=True)
class MainTerm:
    value: float
    split: float
    log_mass: float
    mass: float


def second_moment_mainterm(form: ModularForm, window: SmoothWindow, constants: MomentConstants) -> MainTerm:
    """int w(t) [a_f ln(t sqrt(N)/2pi) + b_f] dt, computed directly and in the split
    arrangement a_f int w ln t + (b_f + a_f ln(sqrt(N)/2pi)) w-hat(0)."""
    a, b = constants.a_f, constants.b_f
    shift = math.log(math.sqrt(form.level) / (2 * math.pi))
    direct = window._quad(lambda t: a * math.log(t * math.sqrt(form.level) / (2 * math.pi)) + b)
    log_mass, mass = window.log_mass(), window.mass()
    split = float(a * log_mass + (b + a * shift) * mass)
    if abs(direct - split) > 1e-10 * abs(direct):
        raise ArithmeticError(f"main-term arrangements disagree: {direct!r} vs {split!r}")
    return MainTerm(value=direct, split=split, log_mass=log_mass, mass=mass)


# -- sharp cutoff --------------------------------------------------------------------


@dataclass(frozen=True)
class SharpResult:
    T: float
    numeric: float
    mainterm: float
    ratio: float
    error_estimate: float
    step: float


def sharp_mainterm(form: ModularForm, T: float, constants: MomentConstants) -> float:
    """a_f T ln T + [b_f + a_f ln(sqrt(N)/(2 pi e))] T."""
    a, b = constants.a_f, constants.b_f
    return a * T * math.log(T) + (b + a * math.log(math.sqrt(form.level) / (2 * math.pi * math.e))) * T


def sharp_cutoff_moment(
    form: ModularForm,
    T: float,
    table: CoefficientTable,
    constants: MomentConstants,
    grid_step: float = 0.05,
    cache: LineCache | None = None,
) -> SharpResult:
    """int_0^T |L(1/2+it)|^2 dt.

    The trapezoid rule is only O(h^2) with hard endpoints, so the two step sizes
    are combined by Richardson extrapolation (Simpson's rule); T is rounded onto
    the coarse grid.
    """
    if T > 1000:
        raise ValueError("sharp cutoff is desk scale only (T <= 1000)")
    cache = cache or default_cache(form, table, 0.5, grid_step)
    m = round(grid_step / cache.base_step)
    n2 = max(1, round(T / (2 * grid_step)))
    k = np.arange(0, 2 * n2 + 1, dtype=np.int64) * m
    y = np.abs(cache.get(k)) ** 2
    h = grid_step
    trap = h * (np.sum(y) - (y[0] + y[-1]) / 2)
    yc = y[::2]
    trap2 = 2 * h * (np.sum(yc) - (yc[0] + yc[-1]) / 2)
    value = (4 * trap - trap2) / 3
    T_eff = 2 * n2 * h
    main = float(sharp_mainterm(form, T_eff, constants))
    return SharpResult(
        T=T_eff, numeric=float(value), mainterm=main, ratio=float(value / main),
        error_estimate=float(abs(value - trap)), step=h,
    )


# -- mollified integrand (diagnostic) ------------------------------------------------


def mollified_moment_numeric(
    form: ModularForm,
    T: float,
    Q,
    P,
    R_sigma: float,
    nu: float,
    table: CoefficientTable,
    grid_step: float = 0.25,
    nodes: int = 16,
    radius: float = 0.25,
    cfg: AfeKernelConfig = EXPERIMENT_AFE,
) -> float:
    """(1/T) int_1^T |V psi(sigma0 + it)|^2 dt with sigma0 = 1/2 - R_sigma/ln T.

    V = Q(-(1/(2 ln T)) d/ds) L(f, s), the derivatives taken by a Cauchy integral
    on a circle of the given radius; psi is the mollifier of length M = T^nu.
    No asymptotic claim is attached: at desk T the o(1) term is large.
    """
    L = math.log(T)
    sigma0 = 0.5 - R_sigma / L
    M = T**nu
    t = np.arange(1.0, T + grid_step / 2, grid_step)
    q = np.asarray(Q.convert().coef)
    j = np.arange(len(q))
    V = np.zeros(len(t), dtype=complex)
    for k in range(nodes):
        z = radius * np.exp(2j * np.pi * k / nodes)
        weight = np.sum(q * (-1 / (2 * L)) ** j * np.array([math.factorial(x) for x in j]) * z ** (-j)) / nodes
        V += weight * lvalues_on_line(form, sigma0 + z.real, t + z.imag, cfg, table)
    n = np.arange(1, int(M) + 1)
    mu = table.mu[1 : int(M) + 1]
    coef = mu * n ** (-(0.5 - sigma0)) * P(np.log(M / n) / math.log(M))
    psi = np.exp(-np.outer(sigma0 + 1j * t, np.log(n))) @ coef
    y = np.abs(V * psi) ** 2
    return float(grid_step * (np.sum(y) - (y[0] + y[-1]) / 2) / T)


def moment_csv(window: SmoothWindow, cache: LineCache, step: float) -> str:
    """Rows t, w(t), |L(1/2+it)|^2 over the window support."""
    lo, hi = window.support
    k = cache.grid(lo, hi, step)
    t = k * cache.base_step
    v = np.abs(cache.get(k)) ** 2
    lines = ["t,w,abs_L_sq"] + [f"{a:.6f},{b:.17g},{c:.17g}" for a, b, c in zip(t, window(t), v)]
    return "\n".join(lines) + "\n"
