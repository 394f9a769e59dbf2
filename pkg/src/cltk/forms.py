"""Modular-form metadata, Hecke eigenvalues and the mollifier coefficients mu_f.

Eigenvalues use the arithmetic normalisation ``lam[1] == 1``.  Arrays are
indexed by ``n`` directly; slot 0 is unused and holds 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import gmpy2
import numpy as np

from . import arith
from .analytic import prime_divisors
from .errors import (
    HeckeViolation,
    IndexOutOfRange,
    InvalidForm,
    MissingIndex,
    NotNormalized,
)

HECKE_TOL = 1e-9


@dataclass(frozen=True)
class ModularForm:
    weight: int
    level: int
    root_number: int = 1
    coeff_source: str = "file"
    label: str = ""

    def __post_init__(self):
        if self.weight < 2 or self.weight % 2:
            raise InvalidForm(f"weight must be even and >= 2, got {self.weight}")
        if self.level < 1 or any(self.level % (p * p) == 0 for p in prime_divisors(self.level)):
            raise InvalidForm(f"level must be a square-free positive integer, got {self.level}")
        if self.root_number not in (1, -1):
            raise InvalidForm("root number must be +1 or -1")
        if self.coeff_source not in ("builtin-delta", "file"):
            raise InvalidForm(f"unknown coefficient source {self.coeff_source!r}")
        if self.coeff_source == "builtin-delta" and (self.weight, self.level, self.root_number) != (12, 1, 1):
            raise InvalidForm("builtin-delta is the weight 12 level 1 form with root number +1")

    @property
    def bad_primes(self) -> list[int]:
        return prime_divisors(self.level)


DELTA = ModularForm(12, 1, 1, "builtin-delta", "delta")


@dataclass(frozen=True)
class ShiftPair:
    alpha: complex = 0.0
    beta: complex = 0.0

    def check_small(self, T: float, multiple: float) -> None:
        bound = multiple / math.log(T)
        if abs(self.alpha) > bound or abs(self.beta) > bound:
            raise ValueError(f"shifts exceed {multiple}/ln T = {bound:.3g}")

    @property
    def swapped(self) -> "ShiftPair":
        return ShiftPair(self.beta, self.alpha)


@dataclass(frozen=True, eq=False)
class CoefficientTable:
    max_n: int
    lam: np.ndarray = field(repr=False)
    mu: np.ndarray = field(repr=False)

    def __post_init__(self):
        for arr in (self.lam, self.mu):
            if len(arr) != self.max_n + 1:
                raise ValueError("coefficient arrays must have length max_n + 1")
            arr.setflags(write=False)

    def check_index(self, n: int) -> None:
        if n < 1 or n > self.max_n:
            raise IndexOutOfRange(f"index {n} outside 1..{self.max_n}")


# -- Ramanujan tau ------------------------------------------------------------


def _bytes_for(coeffs) -> int:
    # every coefficient of the square is bounded by sum a_j^2 (Cauchy-Schwarz)
    bound = sum(c * c for c in coeffs)
    return (bound.bit_length() + 2 + 7) // 8


def _pack(coeffs, nb: int) -> gmpy2.mpz:
    off = 1 << (8 * nb - 1)
    buf = b"".join((c + off).to_bytes(nb, "little") for c in coeffs)
    offsets = bytes(([0] * (nb - 1) + [0x80]) * len(coeffs))
    return gmpy2.mpz(int.from_bytes(buf, "little")) - gmpy2.mpz(int.from_bytes(offsets, "little"))


def _unpack(value: gmpy2.mpz, n: int, nb: int) -> list[int]:
    mod = gmpy2.mpz(1) << (8 * nb * n)
    offsets = gmpy2.mpz(int.from_bytes(bytes(([0] * (nb - 1) + [0x80]) * n), "little"))
    raw = bytearray(int((value % mod + offsets) % mod).to_bytes(nb * n, "little"))
    raw[nb - 1 :: nb] = bytes(b ^ 0x80 for b in raw[nb - 1 :: nb])
    return [int.from_bytes(raw[i * nb : (i + 1) * nb], "little", signed=True) for i in range(n)]


def _square_series(coeffs: list[int]) -> list[int]:
    """Exact square of an integer power series, truncated to len(coeffs) terms."""
    n = len(coeffs)
    nb = _bytes_for(coeffs)
    v = _pack(coeffs, nb)
    return _unpack(v * v, n, nb)


@lru_cache(maxsize=4)
def tau_values(max_n: int) -> tuple[int, ...]:
    """(0, tau(1), ..., tau(max_n)) as exact integers.

    prod (1-q^n)^24 = (eta^3 / q^(1/8))^8 with Jacobi's
    sum_k (-1)^k (2k+1) q^(k(k+1)/2); each squaring is one big-integer
    product (Kronecker substitution).
    """
    n = max_n
    series = [0] * n
    k = 0
    while k * (k + 1) // 2 < n:
        series[k * (k + 1) // 2] = (-1) ** k * (2 * k + 1)
        k += 1
    for _ in range(3):
        series = _square_series(series)
    return (0, *series)


# -- tables -------------------------------------------------------------------


def mu_from_lambda(lam: np.ndarray, form: ModularForm) -> np.ndarray:
    """Dirichlet inverse of lam, via mu(p) = -lam(p), mu(p^2) = [p does not divide N],
    mu(p^j) = 0 for j >= 3, extended multiplicatively."""
    n = len(lam) - 1
    if n < 1 or lam[1] != 1:
        raise NotNormalized("lam[1] must equal 1")
    level = form.level

    def local(p, e):
        out = np.zeros(len(p))
        one = e == 1
        out[one] = -lam[p[one]]
        two = e == 2
        out[two] = (level % p[two] != 0).astype(float)
        return out

    return arith.multiplicative(n, local)


@lru_cache(maxsize=4)
def build_delta_coefficients(max_n: int) -> CoefficientTable:
    if max_n < 1:
        raise ValueError("max_n must be >= 1")
    tau = tau_values(max_n)
    n = np.arange(max_n + 1, dtype=float)
    lam = np.zeros(max_n + 1)
    lam[1:] = np.array([float(t) for t in tau[1:]]) / n[1:] ** 5.5
    lam[1] = 1.0
    return CoefficientTable(max_n, lam, mu_from_lambda(lam, DELTA))


def hecke_defect(lam: np.ndarray, level: int, max_n: int | None = None) -> float:
    """max |lam(m) lam(n) - sum_{d | (m,n), (d,N)=1} lam(mn/d^2)| over mn <= max_n."""
    max_n = len(lam) - 1 if max_n is None else max_n
    worst = 0.0
    for m in range(2, math.isqrt(max_n) + 1):
        n = np.arange(m, max_n // m + 1)
        if len(n) == 0:
            continue
        acc = lam[m * n].copy()
        for d in range(2, m + 1):
            if m % d or math.gcd(d, level) != 1:
                continue
            sel = n % d == 0
            acc[sel] += lam[m * n[sel] // (d * d)]
        worst = max(worst, float(np.max(np.abs(lam[m] * lam[n] - acc))))
    return worst


def inverse_identity_defect(lam: np.ndarray, level: int, max_n: int | None = None) -> float:
    """max |lam(mn) - sum_{d | (m,n), (d,N)=1} mu(d) lam(m/d) lam(n/d)| over mn <= max_n."""
    max_n = len(lam) - 1 if max_n is None else max_n
    moebius = _moebius(math.isqrt(max_n) + 1)
    worst = 0.0
    for m in range(2, math.isqrt(max_n) + 1):
        n = np.arange(m, max_n // m + 1)
        acc = lam[m] * lam[n]
        for d in range(2, m + 1):
            if m % d or moebius[d] == 0 or math.gcd(d, level) != 1:
                continue
            sel = n % d == 0
            acc[sel] += moebius[d] * lam[m // d] * lam[n[sel] // d]
        worst = max(worst, float(np.max(np.abs(lam[m * n] - acc))))
    return worst


def _moebius(n: int) -> np.ndarray:
    return arith.multiplicative(n, lambda p, e: np.where(e == 1, -1.0, 0.0))


def convolution_defect(table: CoefficientTable) -> float:
    """max_n |(lam * mu)(n) - [n = 1]|."""
    conv = arith.dirichlet_convolve(table.mu, table.lam)
    conv[1] -= 1.0
    return float(np.max(np.abs(conv[1:])))


def deligne_violations(table: CoefficientTable, tol: float = 1e-12) -> np.ndarray:
    """Indices n with |lam(n)| > d(n) + tol."""
    d = arith.divisor_count(table.max_n)
    bad = np.abs(table.lam[1:]) > d[1:] + tol
    return np.flatnonzero(bad) + 1


def load_coefficients(path, form: ModularForm) -> CoefficientTable:
    """Read a ``n,lambda`` CSV file and validate it as a Hecke eigenform."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip().replace(" ", "") != "n,lambda":
        raise ValueError(f"{path}: expected header 'n,lambda'")
    values = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        n_str, v_str = line.split(",")
        n = int(n_str)
        if n != len(values) + 1:
            raise MissingIndex(f"{path}:{lineno}: expected n={len(values) + 1}, found {n}")
        values.append(float(v_str))
    if not values:
        raise MissingIndex(f"{path}: no coefficients")
    lam = np.concatenate(([0.0], values))
    if abs(lam[1] - 1.0) > HECKE_TOL:
        raise NotNormalized(f"{path}: lambda(1) = {lam[1]!r}, expected 1")
    lam[1] = 1.0
    defect = hecke_defect(lam, form.level)
    if defect > HECKE_TOL:
        raise HeckeViolation(f"{path}: Hecke relation fails by {defect:.3g}")
    return CoefficientTable(len(values), lam, mu_from_lambda(lam, form))


def write_coefficients(path, table: CoefficientTable) -> None:
    rows = ["n,lambda"] + [f"{n},{float(table.lam[n])!r}" for n in range(1, table.max_n + 1)]
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def hecke_product(m: int, n: int, table: CoefficientTable, form: ModularForm) -> float:
    """sum_{d | (m,n), (d,N)=1} lam(mn/d^2); equals lam(m) lam(n)."""
    table.check_index(m * n)
    g = math.gcd(m, n)
    total = 0.0
    for d in range(1, g + 1):
        if g % d == 0 and math.gcd(d, form.level) == 1:
            total += table.lam[m * n // (d * d)]
    return total


def shifted_convolution_brute(l1: int, l2: int, h: int, lo: int, hi: int, table: CoefficientTable) -> float:
    """sum of lam(m1) lam(m2) over l1 m1 - l2 m2 = h with m1, m2 in [lo, hi]."""
    if h == 0:
        raise ValueError("shift h must be nonzero")
    table.check_index(hi)
    table.check_index(lo)
    m2 = np.arange(lo, hi + 1)
    num = h + l2 * m2
    ok = num % l1 == 0
    m1 = num[ok] // l1
    m2 = m2[ok]
    keep = (m1 >= lo) & (m1 <= hi)
    return float(np.sum(table.lam[m1[keep]] * table.lam[m2[keep]]))


# -- prime-power helpers used by the Rankin-Selberg code ---------------------


def prime_power_lambdas(lam_p: np.ndarray, ramified: np.ndarray, emax: int) -> np.ndarray:
    """lam(p^e) for e = 0..emax from lam(p) by the Hecke recursion.

    Returns shape (len(lam_p), emax+1).
    """
    out = np.zeros((len(lam_p), emax + 1))
    out[:, 0] = 1.0
    if emax >= 1:
        out[:, 1] = lam_p
    chi = np.where(ramified, 0.0, 1.0)
    for e in range(2, emax + 1):
        out[:, e] = lam_p * out[:, e - 1] - chi * out[:, e - 2]
    return out
