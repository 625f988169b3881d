from fractions import Fraction

import pytest

from chl import classical
from chl.classical import (
    ClassicalError,
    bernoulli,
    delta_N,
    delta_N_spec,
    divisors,
    eisenstein,
    eisenstein_level,
    jacobi_basic,
    mobius,
    phi_d,
    sigma,
)
from chl.series import series_mul
from chl.tables import LEVELS, lift_weight


def eta_product(factors, n):
    """prod_m prod_k (1 - q^(m k))^e_m as an integer list, by direct multiplication."""
    poly = [1] + [0] * n
    for m, e in factors:
        for k in range(1, n // m + 1):
            step = m * k
            for _ in range(abs(e)):
                if e > 0:
                    for i in range(n, step - 1, -1):
                        poly[i] -= poly[i - step]
                else:
                    for i in range(step, n + 1):
                        poly[i] += poly[i - step]
    return poly


def test_arithmetic_functions():
    assert divisors(12) == [1, 2, 3, 4, 6, 12]
    assert [mobius(n) for n in range(1, 11)] == [1, -1, -1, 0, -1, 1, -1, 0, 0, 1]
    assert sigma(3, 6) == 1 + 8 + 27 + 216
    assert bernoulli(1) == Fraction(-1, 2)
    assert [bernoulli(n) for n in (2, 4, 6, 12)] == [Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42), Fraction(-691, 2730)]


def test_phi_d_counts_points_of_exact_order():
    from itertools import product
    from math import gcd

    for N in LEVELS:
        for d in (1, 2):
            exact = sum(1 for v in product(range(N), repeat=d) if gcd(N, *v) == 1)
            assert phi_d(d, N) == exact


def test_ramanujan_tau():
    d = delta_N(1, 10)
    tau = [1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920]
    assert [d.coefficient(n) for n in range(1, 11)] == tau


@pytest.mark.parametrize("N", LEVELS)
def test_delta_n_is_its_eta_product(N):
    spec = delta_N_spec(N)
    assert sum(m * e for m, e in spec.factors) == 24
    assert sum(e for _, e in spec.factors) == 2 * (lift_weight(N) + 2)
    n = 12
    ref = eta_product(spec.factors, n)
    d = delta_N(N, n + 1)
    assert [d.coefficient(k + 1) for k in range(n + 1)] == ref


def test_delta_two_leading_terms():
    d = delta_N(2, 5)
    assert [d.coefficient(n) for n in range(1, 6)] == [1, -8, 12, 64, -210]


def test_unknown_level_raises():
    with pytest.raises(ClassicalError):
        delta_N(9, 3)


def test_eisenstein_from_divisor_sums():
    e4 = eisenstein(4, 6)
    e6 = eisenstein(6, 6)
    assert [e4.coefficient(n) for n in range(7)] == [1] + [240 * sigma(3, n) for n in range(1, 7)]
    assert [e6.coefficient(n) for n in range(7)] == [1] + [-504 * sigma(5, n) for n in range(1, 7)]
    with pytest.raises(ClassicalError):
        eisenstein(3, 4)


def test_e4_cubed_minus_e6_squared_is_1728_delta():
    e4, e6 = eisenstein(4, 8), eisenstein(6, 8)
    lhs = series_mul(series_mul(e4, e4), e4) - series_mul(e6, e6)
    assert lhs.first_difference(delta_N(1, 8).scale(1728), qmax=8) is None


def test_level_two_eisenstein_is_d4_theta():
    # D4 = {x in Z^4 : sum x even}; count vectors of norm 2n by brute force.
    counts = [0] * 5
    r = range(-3, 4)
    for a in r:
        for b in r:
            for c in r:
                for d in r:
                    if (a + b + c + d) % 2 == 0:
                        n2 = a * a + b * b + c * c + d * d
                        if n2 <= 8:
                            counts[n2 // 2] += 1
    e = eisenstein_level(2, "E", 4)
    assert [e.coefficient(n) for n in range(5)] == counts == [1, 24, 24, 96, 24]
    assert eisenstein_level(2, "Etilde", 4).first_difference(e.scale(Fraction(1, 2)), qmax=4) is None


def test_level_eisenstein_variant_checks():
    with pytest.raises(ClassicalError):
        eisenstein_level(1, "E", 3)
    with pytest.raises(ClassicalError):
        eisenstein_level(2, "F", 3)
    assert eisenstein_level(1, "Etilde", 3).is_zero()


def test_weak_jacobi_forms_known_coefficients():
    phi0 = jacobi_basic("phi0-1", 1)
    assert [phi0.coefficient(0, 0, j) for j in (-1, 0, 1)] == [1, 10, 1]
    assert [phi0.coefficient(1, 0, j) for j in (-2, -1, 0, 1, 2)] == [10, -64, 108, -64, 10]
    phim2 = jacobi_basic("phi-2-1", 1)
    # p - 2 + 1/p at q^0 up to an overall sign convention
    sign = phim2.coefficient(0, 0, 1)
    assert [sign * phim2.coefficient(0, 0, j) for j in (-1, 0, 1)] == [1, -2, 1]
    assert [sign * phim2.coefficient(1, 0, j) for j in (-2, -1, 0, 1, 2)] == [-2, 8, -12, 8, -2]


def test_phi01_is_twelve_k2_wp():
    phi = classical.phi_0_1(4)
    k2wp = series_mul(classical.k_squared(6), classical.weierstrass_p(6, 14)).scale(12)
    assert phi.first_difference(k2wp, qmax=4, pmin=-6, pmax=6) is None


def test_wp_requires_window():
    with pytest.raises(ClassicalError):
        jacobi_basic("wp", 2)
    with pytest.raises(ClassicalError):
        jacobi_basic("nope", 2)
