"""Conrey's closed-form infimum over the mollifier polynomial, the resulting
lower bound for the proportion of critical zeros, and its optimisation over
(R, Q).

Q has one of two shapes:

* ``"odd"``:      Q(x) = 1 + sum_n h_n [(1-2x)^(2n-1) - 1]   (real h, searched)
* ``"complex"``:  Q(x) = 1 + sum_n i^(n+1) h_n [(1-2x)^n - 1] (evaluation only)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import minimize

from .errors import NonpositiveR
from .mainterm import c_pq, exp_moments

__all__ = [
    "LevinsonParams",
    "ConreyFunctionals",
    "TABLE",
    "TABLE_AS_PRINTED",
    "q_polynomial",
    "conrey_functionals",
    "conrey_infimum",
    "proportion_objective",
    "proportion",
    "proposition_bound",
    "gradient_norm",
    "optimize_proportion",
    "mollified_moment_mainterm",
    "nu_of_theta",
    "table_params",
]


@dataclass(frozen=True)
class LevinsonParams:
    R: float
    h: tuple = ()
    nu: float | Fraction = Fraction(1, 4)
    family: str = "odd"

    def __post_init__(self):
        object.__setattr__(self, "h", tuple(float(x) for x in self.h))
        if self.family not in ("odd", "complex"):
            raise ValueError(f"unknown Q family {self.family!r}")

    @property
    def Q(self) -> Polynomial:
        return q_polynomial(self.h, self.family)


@dataclass(frozen=True)
class ConreyFunctionals:
    A: float
    B: complex
    C: float
    alpha: float
    w1_sq: float


def q_polynomial(h, family: str = "odd") -> Polynomial:
    """Q as a function of x, stored in the variable z = 1 - 2x (``.convert()`` gives monomials in x)."""
    return Polynomial(_q_in_z(h, family), domain=[0, 1], window=[1, -1])


def _q_in_z(h, family: str) -> np.ndarray:
    """Coefficients of Q in z = 1 - 2x, where they stay O(|h|)."""
    h = np.asarray(h, dtype=float)
    if family == "odd":
        coef = np.zeros(max(2 * len(h), 1), dtype=float)
        coef[1::2] = h
    else:
        coef = np.zeros(len(h) + 1, dtype=complex)
        coef[1:] = (1j ** np.arange(2, len(h) + 2)) * h
    coef[0] = 1.0 - coef[1:].sum()
    return coef


def _sym_moments(R: float, nmax: int) -> np.ndarray:
    """int_0^1 z^n e^{2Rx} dx for z = 1 - 2x, n = 0..nmax.

    Equals (e^R / 2) int_{-1}^{1} z^n e^{-Rz} dz, split at z = 0 into two
    one-sided moments, so no binomial expansion (and no cancellation) occurs.
    """
    sign = (-1.0) ** np.arange(nmax + 1)
    return 0.5 * math.exp(R) * (exp_moments(-R, nmax) + sign * exp_moments(R, nmax))


def conrey_functionals(params: LevinsonParams) -> ConreyFunctionals:
    """A, B, C of w(x) = e^{Rx} Q(x) on [0, 1] and alpha = sqrt((B - conj B)^2 + 4AC)/(2A)."""
    R = float(params.R)
    q = _q_in_z(params.h, params.family)
    wq = R * q  # e^{-Rx} w' = R Q + dQ/dx, and d/dx = -2 d/dz
    wq[:-1] -= 2 * q[1:] * np.arange(1, len(q))
    m = _sym_moments(R, 2 * len(q))

    def integ(a, b):
        p = np.convolve(a, np.conj(b))
        return np.dot(p, m[: len(p)])

    A = float(integ(q, q).real)
    B = complex(integ(q, wq))
    C = float(integ(wq, wq).real)
    disc = (B - B.conjugate()) ** 2 + 4 * A * C
    alpha = math.sqrt(max(disc.real, 0.0)) / (2 * A)
    q1 = complex(np.dot(q, (-1.0) ** np.arange(len(q))))
    return ConreyFunctionals(A=A, B=B, C=C, alpha=alpha, w1_sq=math.exp(2 * R) * abs(q1) ** 2)


def _coth_term(F: ConreyFunctionals, nu: float) -> float:
    """A alpha / tanh(nu alpha / 2), with the alpha -> 0 limit 2A/nu."""
    if F.alpha * F.alpha < 1e-20:
        return 2 * F.A / nu
    return F.A * F.alpha / math.tanh(nu * F.alpha / 2)


def conrey_infimum(params: LevinsonParams) -> float:
    """inf over P of c(P, Q, R, nu/2): (1 + |w(1)|^2)/2 + A alpha / tanh(nu alpha/2)."""
    F = conrey_functionals(params)
    return (1 + F.w1_sq) / 2 + _coth_term(F, float(params.nu))


def proportion_objective(params: LevinsonParams) -> float:
    """g(R, h) = (1/R) ln[(1 + w(1)^2)/2 + sqrt(AC)/tanh((nu/2) sqrt(C/A))];
    the proportion bound is 1 - g."""
    if params.R <= 0:
        raise NonpositiveR(f"R must be positive, got {params.R}")
    return math.log(conrey_infimum(params)) / params.R


def proportion(params: LevinsonParams) -> float:
    return 1.0 - proportion_objective(params)


def proposition_bound(c_value: float, R_sigma: float) -> float:
    """1 - (1/(2 R_sigma)) ln c, the bound stated with sigma0 = 1/2 - R_sigma/ln T."""
    return 1.0 - math.log(c_value) / (2 * R_sigma)


def mollified_moment_mainterm(params: LevinsonParams, P: Polynomial, T: float | None = None) -> float:
    """c(P, Q, r, nu/2) with r = params.R.

    ``params.R`` is the rotation parameter of the proportion objective, which is
    twice the R of sigma0 = 1/2 - R/ln T; T itself does not enter the main term.
    """
    return c_pq(P, params.Q, params.R, float(params.nu) / 2)


def nu_of_theta(theta) -> Fraction:
    """(1 - 2 theta)/(4 + 2 theta) in exact rational arithmetic."""
    theta = Fraction(theta)
    return (1 - 2 * theta) / (4 + 2 * theta)


# -- the tabulated optimisers --------------------------------------------------------

# (R, h1..h4) per nu.  For nu = 5/27 the printed h2 = -2.8999828229132398066 gives a
# negative bound; the digits 89/98 are swapped and -2.9899828229132398066 is the
# stationary point (the optimiser lands within 1e-4 of it).
TABLE = {
    Fraction(1, 6): (
        6.6838894702116801322,
        (1.6017785744634898860, -3.0362512753510924917, 3.0757757634512927939, -1.1407980564855935531),
    ),
    Fraction(5, 27): (
        6.4278834168344993342,
        (1.5898336242677838745, -2.9899828229132398066, 3.0171733454035522056, -1.1164150244992046552),
    ),
    Fraction(1, 4): (
        5.6503610091685135131,
        (1.5369390514358411982, -2.7929104872905007806, 2.7758193765120241770, -1.0187870607687957034),
    ),
}

TABLE_AS_PRINTED = dict(TABLE)
TABLE_AS_PRINTED[Fraction(5, 27)] = (
    6.4278834168344993342,
    (1.5898336242677838745, -2.8999828229132398066, 3.0171733454035522056, -1.1164150244992046552),
)


def table_params(nu, printed: bool = False) -> LevinsonParams:
    R, h = (TABLE_AS_PRINTED if printed else TABLE)[Fraction(nu)]
    return LevinsonParams(R=R, h=h, nu=Fraction(nu))


def _objective_vector(x: np.ndarray, nu: float) -> float:
    if x[0] <= 0:
        return math.inf
    try:
        return proportion_objective(LevinsonParams(R=float(x[0]), h=tuple(x[1:]), nu=nu))
    except OverflowError:
        return math.inf


def gradient_norm(params: LevinsonParams, step: float = 1e-6) -> float:
    """Euclidean norm of the central-difference gradient of g in (R, h)."""
    x0 = np.array([params.R, *params.h])
    nu = float(params.nu)
    grad = np.zeros_like(x0)
    for i in range(len(x0)):
        e = np.zeros_like(x0)
        e[i] = step
        grad[i] = (_objective_vector(x0 + e, nu) - _objective_vector(x0 - e, nu)) / (2 * step)
    return float(np.linalg.norm(grad))


@dataclass
class OptimizeResult:
    params: LevinsonParams
    proportion: float
    objective: float
    gradient_norm: float
    starts: int
    seed: int
    history: list = field(default_factory=list, repr=False)


def _local_search(x0: np.ndarray, nu: float, max_iter: int):
    res = minimize(
        _objective_vector,
        x0,
        args=(nu,),
        method="Nelder-Mead",
        options={"xatol": 1e-9, "fatol": 1e-13, "maxiter": max_iter, "maxfev": max_iter},
    )
    return float(res.fun), res.x


def optimize_proportion(
    nu, degree: int, starts: int, seed: int, max_iter: int = 3000, workers: int = 1
) -> OptimizeResult:
    """Multistart Nelder-Mead over (R, h_1..h_degree), R ~ U[1, 12], h ~ U[-4, 4].

    Starts are independent; with ``workers > 1`` they run in a process pool.
    Ties are broken by the lowest start index, so the result depends only on the seed.
    """
    if degree < 0 or starts < 1:
        raise ValueError("degree must be >= 0 and starts >= 1")
    nu_f = float(nu)
    rng = np.random.default_rng(seed)
    inits = np.column_stack([rng.uniform(1, 12, starts), rng.uniform(-4, 4, (starts, degree))])
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_local_search, inits, [nu_f] * starts, [max_iter] * starts))
    else:
        results = [_local_search(x0, nu_f, max_iter) for x0 in inits]
    history = [fun for fun, _ in results]
    best = min((i for i in range(starts) if np.isfinite(history[i])), key=lambda i: (history[i], i))
    fun, x = results[best]
    nu_out = nu if isinstance(nu, float) else Fraction(nu)
    params = LevinsonParams(R=float(x[0]), h=tuple(x[1:]), nu=nu_out)
    return OptimizeResult(
        params=params,
        proportion=1 - fun,
        objective=fun,
        gradient_norm=gradient_norm(params),
        starts=starts,
        seed=seed,
        history=history,
    )
