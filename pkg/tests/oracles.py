"""Independent reference computations shared by the test modules."""

import numpy as np

from cltk import arith


def quadruple_sum(table, shifts, u, v, s, K):
    """sum over am = bn <= K of mu(a) mu(b) lam(m) lam(n) / (a^(1/2+v) b^(1/2+u) m^(1/2+alpha+s) n^(1/2+beta+s))."""
    n = np.arange(K + 1, dtype=float)
    n[0] = 1.0
    logn = np.log(n)
    mu, lam = table.mu[: K + 1], table.lam[: K + 1]
    left = arith.dirichlet_convolve(mu * np.exp(-(0.5 + v) * logn), lam * np.exp(-(0.5 + shifts.alpha + s) * logn))
    right = arith.dirichlet_convolve(mu * np.exp(-(0.5 + u) * logn), lam * np.exp(-(0.5 + shifts.beta + s) * logn))
    terms = left[1:] * right[1:]
    return np.sum(terms), np.sum(terms[: K // 2])
