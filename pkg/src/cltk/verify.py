"""Invariant suites behind ``cltk verify``.

Each suite returns a list of :class:`Check` records; a suite passes when all of
its checks do.  Sizes are kept small enough that ``--suite all`` runs in about
a minute on one core.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from . import forms, levinson, lfunc, mainterm, rankin
from .forms import DELTA, ShiftPair


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tolerance: float
    passed: bool

    def as_dict(self) -> dict:
        return asdict(self)


def _le(name, value, tol) -> Check:
    value = float(value)
    return Check(name, value, tol, bool(value <= tol))


def hecke_suite(form=DELTA, table=None, max_n: int = 10_000) -> list[Check]:
    table = table or forms.build_delta_coefficients(max_n)
    n = min(max_n, table.max_n)
    lam = table.lam
    return [
        _le("hecke_multiplicativity", forms.hecke_defect(lam, form.level, n), 1e-12),
        _le("mollifier_inverse", forms.inverse_identity_defect(lam, form.level, n), 1e-12),
        _le("lambda_star_mu", forms.convolution_defect(table), 1e-12),
        _le("deligne_violations", len(forms.deligne_violations(table)), 0),
    ]


def afe_suite(form=DELTA, table=None) -> list[Check]:
    table = table or forms.build_delta_coefficients(100_000)
    cfg = lfunc.AfeKernelConfig(g_scale=0.25)
    points = [0.3 + 2j, 0.5 + 14.1j, 0.7 + 30j, 0.1 + 55j, 0.9 + 100j]
    worst = max(lfunc.fe_defect(form, s, cfg, table) for s in points)
    out = [_le("functional_equation", worst, 1e-6)]
    for t in (20.0, 50.0):
        pair = lfunc.afe_pair_product(form, ShiftPair(), t, cfg, table)
        single = abs(lfunc.lvalue(form, 0.5 + 1j * t, cfg, table)) ** 2
        out.append(_le(f"pair_product_t{int(t)}", abs(pair - single), 1e-5))
    return out


def euler_suite(form=DELTA, table=None) -> list[Check]:
    table = table or forms.build_delta_coefficients(10_000)
    value, err = rankin.euler_A(form, ShiftPair(), 0.0, 0.0, 0.0, 10_000, table, with_error=True)
    return [
        _le("A_at_origin", abs(value - 1), 1e-3),
        _le("A_tail_estimate", err, 1e-3),
    ]


def laurent_suite(form=DELTA, table=None) -> list[Check]:
    table = table or forms.build_delta_coefficients(1_000_000)
    consts = rankin.moment_constants(form, table)
    a_fit, b_fit = rankin.laurent_check(form, table)
    return [
        _le("a_f_relative", abs(a_fit - consts.a_f) / consts.a_f, 1e-3),
        _le("b_f_relative", abs(b_fit - consts.b_f) / abs(consts.b_f), 1e-3),
    ]


def conrey_suite(seed: int = 0) -> list[Check]:
    out = []
    # the claimed percentages are lower bounds, so compare from below
    for nu, claim in ((Fraction(1, 6), 0.0165), (Fraction(5, 27), 0.0297), (Fraction(1, 4), 0.0693)):
        p = levinson.table_params(nu)
        out.append(_le(f"proportion_at_least_{claim}_nu_{nu}", claim - levinson.proportion(p), 0.0))
        out.append(_le(f"gradient_nu_{nu}", levinson.gradient_norm(p), 1e-4))
    rng = np.random.default_rng(seed)
    for i in range(3):
        R = float(rng.uniform(1, 7))
        h = tuple(rng.uniform(-2, 2, 3))
        nu = float(rng.uniform(0.1, 0.5))
        p = levinson.LevinsonParams(R, h, nu)
        numeric, _ = mainterm.minimize_c_pq(p.Q, R, nu / 2, 8)
        out.append(_le(f"inf_over_P_{i}", abs(numeric - levinson.conrey_infimum(p)), 1e-6))
    nu = levinson.nu_of_theta(Fraction(7, 64))
    out.append(Check("nu_of_theta_7_64", float(nu), 0.0, nu == Fraction(5, 27)))
    return out


SUITES = {
    "hecke": hecke_suite,
    "afe": afe_suite,
    "euler": euler_suite,
    "laurent": laurent_suite,
    "conrey": conrey_suite,
}


def run_suite(name: str) -> dict[str, list[Check]]:
    names = list(SUITES) if name == "all" else [name]
    return {n: SUITES[n]() for n in names}
