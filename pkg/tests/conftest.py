import numpy as np
import pytest
from hypothesis import settings

from cltk import forms, rankin
from cltk.forms import DELTA, ModularForm

settings.register_profile("cltk", deadline=None, max_examples=40)
settings.load_profile("cltk")


def pentagonal(n_max: int) -> np.ndarray:
    """prod (1 - q^n) up to q^n_max, from Euler's pentagonal number theorem."""
    out = np.zeros(n_max + 1, dtype=np.int64)
    k = 0
    while True:
        hit = False
        for g in {k * (3 * k - 1) // 2, k * (3 * k + 1) // 2}:
            if g <= n_max:
                out[g] = (-1) ** (k % 2)
                hit = True
        if not hit:
            break
        k += 1
    return out


def level11_coefficients(n_max: int) -> np.ndarray:
    """a(n) of q prod (1-q^n)^2 (1-q^{11n})^2, the weight-2 newform of level 11."""
    A = pentagonal(n_max)
    B = np.zeros(n_max + 1, dtype=np.int64)
    B[::11] = A[: n_max // 11 + 1]
    AB = np.convolve(A, B)[: n_max + 1]
    series = np.convolve(AB, AB)[: n_max + 1]
    a = np.zeros(n_max + 1, dtype=np.int64)
    a[1:] = series[:n_max]
    return a


LEVEL11 = ModularForm(2, 11, 1, "file", "11a")


@pytest.fixture(scope="session")
def delta_small():
    return forms.build_delta_coefficients(10_000)


@pytest.fixture(scope="session")
def delta_1e5():
    return forms.build_delta_coefficients(100_000)


@pytest.fixture(scope="session")
def delta_1e6():
    return forms.build_delta_coefficients(1_000_000)


@pytest.fixture(scope="session")
def level11_table():
    n_max = 20_000
    a = level11_coefficients(n_max)
    lam = np.zeros(n_max + 1)
    lam[1:] = a[1:] / np.sqrt(np.arange(1, n_max + 1))
    return forms.CoefficientTable(n_max, lam, forms.mu_from_lambda(lam, LEVEL11))


@pytest.fixture(scope="session")
def delta_constants(delta_1e6):
    return rankin.moment_constants(DELTA, delta_1e6)
