from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from chl.scalars import (
    Cyclotomic,
    NotRationalError,
    OrderMismatchError,
    as_rational,
    cyclo_to_rational,
    cyclotomic_polynomial,
    euler_phi,
    exact_div,
    parse_scalar,
    render_scalar,
    root_of_unity,
)


def test_cyclotomic_polynomials_match_known_values():
    assert cyclotomic_polynomial(1) == (-1, 1)
    assert cyclotomic_polynomial(4) == (1, 0, 1)
    assert cyclotomic_polynomial(6) == (1, -1, 1)
    assert cyclotomic_polynomial(8) == (1, 0, 0, 0, 1)
    assert cyclotomic_polynomial(12) == (1, 0, -1, 0, 1)
    assert [euler_phi(m) for m in range(1, 13)] == [1, 1, 2, 2, 4, 2, 6, 4, 6, 4, 10, 4]


@pytest.mark.parametrize("m", range(1, 13))
def test_roots_of_unity_sum_and_power(m):
    z = root_of_unity(m, 1)
    assert z**m == 1
    total = sum((root_of_unity(m, k) for k in range(m)), Cyclotomic(m, [0]))
    assert cyclo_to_rational(total) == (1 if m == 1 else 0)


def test_primitive_cube_root_relation():
    w = root_of_unity(3, 1)
    assert w * w + w + 1 == 0
    assert (w**2).conjugate_power(2) == w**4


def test_inverse_and_division():
    z = root_of_unity(8, 1)
    x = 3 + 2 * z - z**3
    assert x * x.inverse() == 1
    assert (x / x) == 1
    assert 1 / (1 + z) == (1 + z).inverse()
    with pytest.raises(ZeroDivisionError):
        Cyclotomic(8, [0]).inverse()


def test_lift_into_larger_field():
    i4 = root_of_unity(4, 1)
    assert i4.lift(8) == root_of_unity(8, 2)
    with pytest.raises(OrderMismatchError):
        i4.lift(6)
    with pytest.raises(OrderMismatchError):
        i4 + root_of_unity(8, 1)


def test_rational_extraction():
    assert (root_of_unity(6, 1) + root_of_unity(6, 5)).to_rational() == 1
    with pytest.raises(NotRationalError):
        root_of_unity(6, 1).to_rational()
    assert as_rational("6/4") == Fraction(3, 2)
    assert as_rational(Fraction(4, 2)) == 2 and type(as_rational(Fraction(4, 2))) is int
    with pytest.raises(TypeError):
        as_rational(0.5)


def test_exact_div_stays_exact():
    assert exact_div(6, 3) == 2
    assert exact_div(7, 2) == Fraction(7, 2)
    assert exact_div(Fraction(4, 3), 2) == Fraction(2, 3)


rationals = st.fractions(max_denominator=50).filter(lambda f: abs(f) < 10**6)


@given(rationals)
def test_render_parse_roundtrip_rational(x):
    assert parse_scalar(render_scalar(x)) == x


@given(st.sampled_from([3, 4, 5, 8, 12]), st.lists(rationals, min_size=4, max_size=4))
def test_render_parse_roundtrip_cyclotomic(m, coeffs):
    x = Cyclotomic(m, coeffs[: euler_phi(m)])
    assert parse_scalar(render_scalar(x)) == x


@given(st.lists(rationals, min_size=4, max_size=4), st.lists(rationals, min_size=4, max_size=4))
def test_field_axioms_in_q_zeta8(a, b):
    x, y = Cyclotomic(8, a), Cyclotomic(8, b)
    assert x * y == y * x
    assert (x + y) * y == x * y + y * y
    if y:
        assert (x / y) * y == x
