import math

import numpy as np
import pytest

from cltk import rankin
from cltk.analytic import zeta
from cltk.errors import OutsideDomain, RadiiInvalid
from cltk.forms import DELTA, ShiftPair

from oracles import quadruple_sum


@pytest.mark.parametrize(
    "shifts,u,v,s",
    [
        (ShiftPair(0.1, -0.05), 0.6, 0.8, 0.7),
        (ShiftPair(0.0, 0.0), 0.5, 0.5, 0.5),
        (ShiftPair(0.05, 0.05), 0.9, 0.4, 0.6),
    ],
)
def test_euler_product_against_quadruple_sum(delta_1e5, shifts, u, v, s):
    K = 100_000
    full, half = quadruple_sum(delta_1e5, shifts, u, v, s, K)
    a, b = shifts.alpha, shifts.beta

    def L(z):
        return rankin.rankin_L(DELTA, z, delta_1e5)[0]

    ratio = L(1 + a + b + 2 * s) * L(1 + u + v) / (L(1 + a + u + s) * L(1 + b + v + s))
    A, err = rankin.euler_A(DELTA, shifts, u, v, s, K, delta_1e5, with_error=True)
    tail = 4 * abs(full - half) + abs(ratio) * err + 1e-9
    assert abs(full - ratio * A) <= tail
    assert tail < 1e-3 * abs(full)


def test_euler_A_origin_and_symmetry(delta_small):
    value, err = rankin.euler_A(DELTA, ShiftPair(), 0, 0, 0, 10_000, delta_small, with_error=True)
    assert abs(value - 1) < 1e-3 and err < 1e-3
    sh = ShiftPair(0.07, -0.02)
    one = rankin.euler_A(DELTA, sh, 0.1, 0.3, 0.05, 5_000, delta_small)
    two = rankin.euler_A(DELTA, sh.swapped, 0.3, 0.1, 0.05, 5_000, delta_small)
    assert abs(one - two) < 1e-12


def test_euler_A_domain(delta_small):
    assert not rankin.in_domain(ShiftPair(), -0.3, -0.3, 0.0)
    with pytest.raises(OutsideDomain):
        rankin.euler_A(DELTA, ShiftPair(), -0.3, -0.3, 0.0, 1000, delta_small)


def test_rankin_L_truncation_stable(delta_1e5, delta_1e6):
    a, ea = rankin.rankin_L(DELTA, 2.0, delta_1e5)
    b, eb = rankin.rankin_L(DELTA, 2.0, delta_1e6)
    assert abs(a - b) < 1e-8 and ea < 1e-6


def test_rankin_L_absolutely_convergent(delta_1e6):
    s = 3.0
    n = np.arange(1, delta_1e6.max_n + 1, dtype=float)
    direct = zeta(2 * s).real * np.sum(delta_1e6.lam[1:] ** 2 * n**-s)
    assert abs(rankin.rankin_L(DELTA, s, delta_1e6)[0] - direct) < 1e-10


def test_factorisation_through_symmetric_square(delta_1e5):
    # L(f x f, s) = zeta(s) L(Sym^2 f, s): series fit against the AFE of the symmetric square
    for s in (1.5, 1.3 + 0.4j):
        lhs = rankin.rankin_L(DELTA, s, delta_1e5)[0]
        rhs = zeta(s) * rankin.sym2_lvalue(DELTA, s, delta_1e5)
        assert abs(lhs - rhs) < 1e-7 * abs(rhs)


def test_sym2_at_1_routes(delta_1e5):
    L_exp, D_exp = rankin.sym2_at_1(DELTA, delta_1e5, shape="exp")
    L_gauss, D_gauss = rankin.sym2_at_1(DELTA, delta_1e5, shape="gauss")
    afe = rankin.sym2_lvalue(DELTA, 1.0, delta_1e5)
    assert abs(L_exp - L_gauss) < 1e-8
    assert abs(L_exp - afe) < 1e-8
    h = 1e-3
    afe_d = (rankin.sym2_lvalue(DELTA, 1 + h, delta_1e5) - rankin.sym2_lvalue(DELTA, 1 - h, delta_1e5)) / (2 * h)
    assert abs(D_exp - afe_d.real) < 1e-5
    assert abs(D_exp - D_gauss) < 1e-7


def test_moment_constants(delta_constants):
    c = delta_constants
    assert math.isclose(c.a_f, 12 / math.pi**2 * c.sym2_value, rel_tol=1e-15)
    assert abs(c.sym2_value - 0.6317929457) < 1e-9
    assert c.error_estimates["a_f"] < 1e-8
    assert rankin.nu_of_level(11) == 12.0 and rankin.nu_of_level(1) == 1.0


def test_laurent(delta_1e6, delta_constants):
    a_fit, b_fit = rankin.laurent_check(DELTA, delta_1e6)
    assert abs(a_fit - delta_constants.a_f) < 1e-3 * delta_constants.a_f
    assert abs(b_fit - delta_constants.b_f) < 1e-3 * abs(delta_constants.b_f)


def test_cfkrs_polynomial(delta_1e5, delta_constants):
    c = delta_constants
    for x in (0.0, 1.0, 3.0):
        for r1, r2 in ((0.1, 0.2), (0.3, 0.15)):
            val = rankin.cfkrs_p1(DELTA, c, x, r1, r2, delta_1e5)
            assert abs(val - (c.a_f / 2 * x + c.b_f)) < 1e-6
    with pytest.raises(RadiiInvalid):
        rankin.cfkrs_p1(DELTA, c, 1.0, 0.2, 0.2, delta_1e5)
    with pytest.raises(RadiiInvalid):
        rankin.cfkrs_p1(DELTA, c, 1.0, 0.6, 0.5, delta_1e5)


def test_local_rankin_factor():
    # 1/L_p(f x f, z) times sum lambda(p^l)^2 x^l equals 1 - x^2 (the zeta(2z) factor)
    from cltk.forms import prime_power_lambdas

    lam_p = np.array([0.3, -1.7, 1.2])
    x = 0.3
    pp = prime_power_lambdas(lam_p, np.zeros(3, bool), 200)
    series = np.sum(pp**2 * x ** np.arange(201), axis=1)
    assert np.allclose(rankin._lp_inv(lam_p**2, 1.0, x) * series, 1 - x * x, atol=1e-13)
    ram = prime_power_lambdas(lam_p, np.ones(3, bool), 200)
    assert np.allclose(rankin._lp_inv(lam_p**2, 0.0, x) * np.sum(ram**2 * x ** np.arange(201), axis=1), 1.0)
