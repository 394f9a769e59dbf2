import math

import numpy as np
import pytest
from numpy.polynomial import Polynomial
from scipy import integrate

from cltk import experiment, lfunc
from cltk.experiment import EXPERIMENT_AFE, LineCache, make_window
from cltk.forms import DELTA, ShiftPair


@pytest.fixture(scope="module")
def cache(delta_1e5):
    return LineCache(DELTA, delta_1e5, 0.5, 0.05)


@pytest.mark.parametrize("T,p", [(60, 1), (200, 1), (500, 2), (1e4, 1)])
def test_window_shape(T, p):
    w = make_window(T, p)
    lo, hi = w.support
    assert T / 4 <= lo and hi <= 2 * T
    assert np.all(w(np.linspace(T / 2, T, 50)) == 1.0)
    assert np.all(w(np.array([lo - 1, lo, hi, hi + 1])) == 0.0)
    t = np.linspace(lo, hi, 2001)
    assert np.all((w(t) >= 0) & (w(t) <= 1))
    # the step satisfies s(x) + s(1 - x) = 1, so each transition contributes delta/2
    assert math.isclose(w.mass(), T / 2 + w.delta, rel_tol=1e-12)
    ref = integrate.quad(lambda x: w(x) * math.log(x), lo, hi, limit=400, epsrel=1e-12, points=[T / 2, T])[0]
    assert math.isclose(w.log_mass(), ref, rel_tol=1e-10)
    for j in (1, 2, 3):
        assert w.derivative_scale(j) < 200


def test_window_errors():
    with pytest.raises(ValueError):
        make_window(20)
    with pytest.raises(ValueError):
        make_window(100, 3)


def test_mainterm_arrangements(delta_constants):
    for T in (100, 300, 5000):
        m = experiment.second_moment_mainterm(DELTA, make_window(T), delta_constants)
        assert abs(m.value - m.split) <= 1e-10 * m.value
    # sharp main term as the T-derivative picture: M'(T) = a_f ln(T/2pi) + b_f
    T, h = 300.0, 1e-3
    d = (experiment.sharp_mainterm(DELTA, T + h, delta_constants) - experiment.sharp_mainterm(DELTA, T - h, delta_constants)) / (2 * h)
    assert math.isclose(d, delta_constants.a_f * math.log(T / (2 * math.pi)) + delta_constants.b_f, rel_tol=1e-8)


def test_numeric_moment_converged(delta_1e5, cache):
    w = make_window(60)
    fine = experiment.second_moment_numeric(DELTA, w, grid_step=0.05, table=delta_1e5, cache=cache)
    coarse = experiment.second_moment_numeric(DELTA, w, grid_step=0.1, table=delta_1e5, cache=cache)
    assert fine.error_estimate < 1e-8 * fine.value
    assert abs(fine.value - coarse.value) < 1e-8 * fine.value
    assert fine.points == len(cache.grid(*w.support, 0.05))


def test_grid_rejects_off_multiple(cache):
    with pytest.raises(ValueError):
        cache.grid(0, 10, 0.07)


def test_shifted_moment(delta_1e5, cache):
    w = make_window(60)
    base = experiment.second_moment_numeric(DELTA, w, table=delta_1e5, cache=cache).value
    a, b = 0.01 + 0.02j, -0.015 + 0.01j
    one = experiment.second_moment_numeric(DELTA, w, ShiftPair(a, b), 0.2, delta_1e5, cache=cache).value
    two = experiment.second_moment_numeric(
        DELTA, w, ShiftPair(b.conjugate(), a.conjugate()), 0.2, delta_1e5, cache=cache
    ).value
    assert abs(one - two.conjugate()) < 1e-9 * abs(one)
    tiny = experiment.second_moment_numeric(DELTA, w, ShiftPair(1e-6, 1e-6), 0.2, delta_1e5, cache=cache).value
    assert abs(tiny - base) < 1e-4 * base


def test_sharp_cutoff(delta_1e5, delta_constants, cache):
    r = experiment.sharp_cutoff_moment(DELTA, 60, delta_1e5, delta_constants, cache=cache)
    assert r.T == 60.0
    assert abs(r.ratio - 1) < 0.05
    # |Simpson - trapezoid| bounds the cruder of the two rules
    assert r.error_estimate < 1e-4 * r.numeric
    with pytest.raises(ValueError):
        experiment.sharp_cutoff_moment(DELTA, 2000, delta_1e5, delta_constants, cache=cache)


def test_moment_csv(cache):
    w = make_window(60)
    text = experiment.moment_csv(w, cache, 0.5)
    lines = text.splitlines()
    assert lines[0] == "t,w,abs_L_sq"
    assert len(lines) - 1 == len(cache.grid(*w.support, 0.5))


def test_mollified_diagnostic_operators(delta_1e5):
    # M = T^nu < 2: the mollifier is the constant P(1) = 1 and only V remains
    T, nu, R = 30.0, 0.15, 0.5
    L = math.log(T)
    sigma0 = 0.5 - R / L
    t = np.arange(1.0, T + 0.125, 0.25)
    vals = lfunc.lvalues_on_line(DELTA, sigma0, t, EXPERIMENT_AFE, delta_1e5)

    def trap(y):
        return 0.25 * (np.sum(y) - (y[0] + y[-1]) / 2) / T

    P = Polynomial([0, 1])
    got = experiment.mollified_moment_numeric(DELTA, T, Polynomial([1.0]), P, R, nu, delta_1e5)
    assert math.isclose(got, trap(np.abs(vals) ** 2), rel_tol=1e-9)
    # Q(x) = 1 - x: V = L + L'/(2 ln T), with L' by central differences in sigma
    h = 1e-4
    up = lfunc.lvalues_on_line(DELTA, sigma0 + h, t, EXPERIMENT_AFE, delta_1e5)
    dn = lfunc.lvalues_on_line(DELTA, sigma0 - h, t, EXPERIMENT_AFE, delta_1e5)
    V = vals + (up - dn) / (2 * h) / (2 * L)
    got = experiment.mollified_moment_numeric(DELTA, T, Polynomial([1.0, -1.0]), P, R, nu, delta_1e5)
    assert math.isclose(got, trap(np.abs(V) ** 2), rel_tol=1e-6)
