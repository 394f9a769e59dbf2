import math

import numpy as np
from hypothesis import given, strategies as st

from cltk import arith


def brute_spf(n):
    return next(p for p in range(2, n + 1) if n % p == 0)


def test_sieve_against_trial_division():
    spf = arith.spf_sieve(500)
    assert all(spf[n] == brute_spf(n) for n in range(2, 501))
    primes = arith.primes_up_to(100)
    assert primes.tolist() == [p for p in range(2, 101) if brute_spf(p) == p]


def test_divisor_count():
    d = arith.divisor_count(300)
    assert all(d[n] == sum(1 for k in range(1, n + 1) if n % k == 0) for n in range(1, 301))


def test_multiplicative_sigma1():
    sigma = arith.multiplicative(400, lambda p, e: (p.astype(float) ** (e + 1) - 1) / (p - 1))
    for n in range(1, 401):
        assert sigma[n] == sum(k for k in range(1, n + 1) if n % k == 0)


@given(st.integers(2, 60), st.integers(2, 60))
def test_convolution_is_commutative_and_dirichlet(i, j):
    rng = np.random.default_rng(i * 100 + j)
    a, b = rng.normal(size=61), rng.normal(size=61)
    ab = arith.dirichlet_convolve(a, b)
    assert np.allclose(ab, arith.dirichlet_convolve(b, a))
    n = i
    assert math.isclose(ab[n], sum(a[d] * b[n // d] for d in range(1, n + 1) if n % d == 0), abs_tol=1e-12)
