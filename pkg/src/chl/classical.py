"""One-variable modular forms and the index-one Jacobi building blocks.

Everything here is a :class:`~chl.series.TriSeries`; one-variable forms live
in the q variable with no t or p dependence.  Jacobi forms use the p variable
for the elliptic argument, with the half-integral powers of ``K`` handled by
a p-denominator of 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .series import (
    TriSeries,
    frac_substitute,
    series_invert,
    series_mul,
    weighted_product,
)


class ClassicalError(ValueError):
    pass


# ---------------------------------------------------------------------------
# arithmetic helpers
# ---------------------------------------------------------------------------


def divisors(n: int) -> list[int]:
    n = abs(n)
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def mobius(n: int) -> int:
    if n < 1:
        raise ValueError("mobius needs a positive integer")
    result = 1
    d = 2
    while d * d <= n:
        if n % d == 0:
            n //= d
            if n % d == 0:
                return 0
            result = -result
        d += 1
    if n > 1:
        result = -result
    return result


def sigma(k: int, n: int) -> int:
    """Divisor power sum sigma_k(n)."""
    return sum(d**k for d in divisors(n))


def phi_d(d: int, N: int) -> int:
    """Number of points of order exactly N in (Z/N)^d: N^d prod_{p | N} (1 - p^-d)."""
    value = Fraction(N**d)
    for p in prime_factors(N):
        value *= 1 - Fraction(1, p**d)
    if value.denominator != 1:
        raise ArithmeticError("phi_d produced a non-integer")
    return int(value)


def arith_fn(which: str, *args: int) -> int:
    if which == "mobius":
        return mobius(*args)
    if which == "sigma_k":
        return sigma(*args)
    if which == "phi_d":
        return phi_d(*args)
    raise ValueError(f"unknown arithmetic function {which!r}")


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """Bernoulli number B_n with B_1 = -1/2 (Akiyama-Tanigawa)."""
    a = [Fraction(0)] * (n + 1)
    for m in range(n + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
    value = a[0]
    return -value if n == 1 else value


# ---------------------------------------------------------------------------
# eta quotients
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EtaQuotientSpec:
    """prod_m eta(m tau)^e_m, given as (multiplier, exponent) pairs."""

    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        mults = [m for m, _ in self.factors]
        if len(set(mults)) != len(mults):
            raise ClassicalError("eta quotient multipliers must be distinct")
        if any(m < 1 for m in mults):
            raise ClassicalError("eta quotient multipliers must be positive")

    @property
    def leading_power(self) -> Fraction:
        return Fraction(sum(m * e for m, e in self.factors), 24)


DELTA_SPECS: dict[int, EtaQuotientSpec] = {
    1: EtaQuotientSpec(((1, 24),)),
    2: EtaQuotientSpec(((1, 8), (2, 8))),
    3: EtaQuotientSpec(((1, 6), (3, 6))),
    4: EtaQuotientSpec(((1, 4), (2, 2), (4, 4))),
    5: EtaQuotientSpec(((1, 4), (5, 4))),
    6: EtaQuotientSpec(((1, 2), (2, 2), (3, 2), (6, 2))),
    7: EtaQuotientSpec(((1, 3), (7, 3))),
    8: EtaQuotientSpec(((1, 2), (2, 1), (4, 1), (8, 2))),
}


def euler_factors(spec: Sequence[tuple[int, int]], depth) -> dict:
    """Factor map {(m n, 0, 0): e} for prod_m prod_n (1 - q^(m n))^e up to q-order ``depth``."""
    factors: dict = {}
    for m, e in spec:
        n = 1
        while m * n <= depth:
            key = (m * n, 0, 0)
            factors[key] = factors.get(key, 0) + e
            n += 1
    return factors


@lru_cache(maxsize=256)
def eta_quotient(spec: EtaQuotientSpec, qmax) -> TriSeries:
    """q^(sum e m / 24) prod_m prod_n (1 - q^(m n))^e exact to q-order ``qmax``."""
    qmax = Fraction(qmax)
    lead = spec.leading_power
    if qmax < lead:
        raise ClassicalError(f"qmax {qmax} is below the leading power {lead}")
    depth = qmax - lead
    body = weighted_product(euler_factors(spec.factors, depth), qmax=depth)
    return series_mul(body, TriSeries.monomial(lead, 0, 0))


def delta_N(N: int, qmax) -> TriSeries:
    if N not in DELTA_SPECS:
        raise ClassicalError(f"Delta_N is tabulated for N = 1..8, not {N}")
    return eta_quotient(DELTA_SPECS[N], Fraction(qmax))


def delta_N_spec(N: int) -> EtaQuotientSpec:
    if N not in DELTA_SPECS:
        raise ClassicalError(f"Delta_N is tabulated for N = 1..8, not {N}")
    return DELTA_SPECS[N]


# ---------------------------------------------------------------------------
# Eisenstein series
# ---------------------------------------------------------------------------


@lru_cache(maxsize=64)
def eisenstein(k: int, qmax) -> TriSeries:
    """E_k = 1 - (2k / B_k) sum sigma_{k-1}(m) q^m, the weight-k normalization."""
    if k % 2 or k < 2:
        raise ClassicalError("Eisenstein series need an even weight k >= 2")
    qmax = int(Fraction(qmax))
    factor = -Fraction(2 * k) / bernoulli(k)
    coeffs = {0: 1}
    for m in range(1, qmax + 1):
        coeffs[m] = factor * sigma(k - 1, m)
    return TriSeries.q_series(coeffs, qmax)


@lru_cache(maxsize=64)
def eisenstein_level(N: int, variant: str, qmax) -> TriSeries:
    """The weight-two forms [N E_2(N tau) - E_2(tau)] / (N - 1) and their rescaling by (N-1)/N.

    ``variant`` is ``"E"`` for the form with constant term 1 and ``"Etilde"``
    for E_2(q^N) - E_2(q)/N; the latter is also defined (as zero) for N = 1.
    """
    qmax = Fraction(qmax)
    if variant not in ("E", "Etilde"):
        raise ClassicalError(f"unknown variant {variant!r}")
    if variant == "E" and N < 2:
        raise ClassicalError("the level Eisenstein series needs N >= 2")
    if N < 1:
        raise ClassicalError("N must be positive")
    e2 = eisenstein(2, int(qmax))
    e2n = frac_substitute(e2, "q", (N, 0, 1)).truncate(qmax=qmax)
    tilde = e2n - e2.scale(Fraction(1, N))
    if variant == "Etilde":
        return tilde.truncate(qmax=qmax)
    return tilde.scale(Fraction(N, N - 1)).truncate(qmax=qmax)


# ---------------------------------------------------------------------------
# Jacobi building blocks
# ---------------------------------------------------------------------------


def _theta_body(qmax, power: int) -> TriSeries:
    """prod_m [(1 - p q^m)(1 - p^-1 q^m) / (1 - q^m)^2]^power, exact in p."""
    qmax = Fraction(qmax)
    factors = {}
    m = 1
    while m <= qmax:
        factors[(m, 0, 1)] = power
        factors[(m, 0, -1)] = power
        factors[(m, 0, 0)] = -2 * power
        m += 1
    return weighted_product(factors, qmax=qmax)


@lru_cache(maxsize=64)
def k_function(qmax) -> TriSeries:
    """K = (p^1/2 - p^-1/2) prod (1 - p q^m)(1 - p^-1 q^m) / (1 - q^m)^2."""
    lead = TriSeries.from_terms({(0, 0, Fraction(1, 2)): 1, (0, 0, Fraction(-1, 2)): -1})
    return series_mul(lead, _theta_body(qmax, 1))


@lru_cache(maxsize=64)
def k_squared(qmax) -> TriSeries:
    """K^2 = (p - 2 + p^-1) R with R the squared product."""
    return series_mul(TriSeries.p_laurent({1: 1, 0: -2, -1: 1}), _theta_body(qmax, 2))


@lru_cache(maxsize=64)
def theta_body_squared(qmax) -> TriSeries:
    """R = K^2 / (p - 2 + p^-1), an exact Laurent polynomial in every q-layer."""
    return _theta_body(qmax, 2)


def _wp_polynomial_part(qmax) -> TriSeries:
    """sum_d sum_{k | d} k (p^k - 2 + p^-k) q^d."""
    qmax = int(Fraction(qmax))
    terms: dict = {}
    for d in range(1, qmax + 1):
        for k in divisors(d):
            for e, c in ((k, k), (0, -2 * k), (-k, k)):
                terms[(d, 0, e)] = terms.get((d, 0, e), 0) + c
    return TriSeries(terms, qmax=qmax, qlo=0, tlo=0)


@lru_cache(maxsize=64)
def weierstrass_p(qmax, pmax) -> TriSeries:
    """The normalized Weierstrass function 1/12 + p/(1-p)^2 + sum_d sum_{k|d} k (p^k - 2 + p^-k) q^d.

    The q^0 layer p/(1-p)^2 has unbounded p-support and is kept to ``pmax``.
    """
    pmax = int(Fraction(pmax))
    head = {(0, 0, 0): Fraction(1, 12)}
    for n in range(1, pmax + 1):
        head[(0, 0, n)] = n
    base = TriSeries(head, pmax=pmax, qlo=0, tlo=0)
    poly = _wp_polynomial_part(qmax).truncate(pmax=pmax)
    return (base + poly).truncate(qmax=qmax)


@lru_cache(maxsize=64)
def phi_m2_1(qmax) -> TriSeries:
    """phi_{-2,1} = -K^2."""
    return -k_squared(qmax)


@lru_cache(maxsize=64)
def phi_0_1(qmax) -> TriSeries:
    """phi_{0,1} = 12 K^2 wp, evaluated in closed form so every layer is an exact polynomial.

    Using K^2 * p/(1-p)^2 = R this becomes K^2 + 12 R + 12 K^2 (wp - 1/12 - p/(1-p)^2).
    """
    k2 = k_squared(qmax)
    r = theta_body_squared(qmax)
    return k2 + r.scale(12) + series_mul(k2, _wp_polynomial_part(qmax)).scale(12)


def jacobi_basic(name: str, qmax, pmax=None) -> TriSeries:
    """Named index-one building blocks.

    ``pmax`` bounds the p-window for the functions with unbounded p-support
    (only ``wp``); the others are exact polynomials in every q-layer.
    """
    qmax = Fraction(qmax)
    if name == "K":
        return k_function(qmax)
    if name in ("K2", "Ksq"):
        return k_squared(qmax)
    if name == "ThetaSq":
        return -k_squared(qmax)
    if name in ("wp", "℘"):
        if pmax is None:
            raise ClassicalError("wp needs a p-window top (pmax)")
        return weierstrass_p(qmax, Fraction(pmax))
    if name in ("phi-2-1", "phi_{-2,1}", "B"):
        return phi_m2_1(qmax)
    if name in ("phi0-1", "phi_{0,1}"):
        return phi_0_1(qmax)
    if name == "A":
        return phi_0_1(qmax).scale(Fraction(1, 4))
    raise ClassicalError(f"unknown Jacobi building block {name!r}")


def theta_sq_inverse(qmax, pmax) -> TriSeries:
    """1/Theta(q, p)^2 = -1/K^2, expanded for |q| << |p| < 1."""
    return -series_invert(k_squared(qmax + 2), pmax=pmax).truncate(qmax=qmax)
