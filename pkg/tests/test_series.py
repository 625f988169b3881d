from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from chl.scalars import root_of_unity
from chl.series import (
    NonInvertibleError,
    OutOfRangeError,
    TriSeries,
    WindowError,
    extract_coeff,
    frac_substitute,
    series_invert,
    series_mul,
    swap_qt_scaled,
    swap_variables,
    weighted_product,
)


def euler_partitions(n):
    """Partition numbers by the textbook recursion, as an independent oracle."""
    p = [1] + [0] * n
    for k in range(1, n + 1):
        for m in range(k, n + 1):
            p[m] += p[m - k]
    return p


small = st.builds(Fraction, st.integers(-20, 20), st.integers(1, 6))


@st.composite
def series(draw, unit=False):
    terms = draw(st.dictionaries(
        st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(-2, 2)), small, max_size=6))
    if unit:
        terms[(0, 0, 0)] = draw(st.builds(Fraction, st.integers(1, 9), st.integers(1, 6)))
        terms = {k: v for k, v in terms.items() if k[:2] != (0, 0) or k[2] == 0}
    return TriSeries.from_terms(terms, qmax=3, tmax=3)


@settings(max_examples=40, deadline=None)
@given(series(), series(), series())
def test_ring_axioms(a, b, c):
    assert series_mul(a, b).identical(series_mul(b, a))
    assert series_mul(series_mul(a, b), c).first_difference(series_mul(a, series_mul(b, c))) is None
    assert series_mul(a, b + c).first_difference(series_mul(a, b) + series_mul(a, c)) is None
    assert (a - a).is_zero()


@settings(max_examples=40, deadline=None)
@given(series(unit=True))
def test_inverse_round_trip(a):
    inv = series_invert(a)
    assert series_mul(a, inv).first_difference(TriSeries.one(), qmax=3, tmax=3) is None
    assert series_invert(inv).first_difference(a, qmax=3, tmax=3) is None


@settings(max_examples=40, deadline=None)
@given(series())
def test_json_round_trip_is_bit_exact(a):
    again = TriSeries.from_json(a.to_json())
    assert again.identical(a)
    assert again.to_json() == a.to_json()


def test_inverse_euler_product_gives_partition_numbers():
    eta_part = weighted_product({(k, 0, 0): 1 for k in range(1, 16)}, qmax=15)
    inv = series_invert(eta_part)
    assert [inv.coefficient(n) for n in range(16)] == euler_partitions(15)


def test_laurent_polynomial_in_p_inverted_as_power_series():
    one_minus_p = TriSeries.p_laurent({0: 1, 1: -1})
    inv = series_invert(one_minus_p, pmax=5)
    assert [inv.coefficient(0, 0, k) for k in range(6)] == [1] * 6
    with pytest.raises(OutOfRangeError):
        inv.coefficient(0, 0, 6)


def test_widening_the_p_window_keeps_retained_coefficients():
    a = TriSeries.from_terms({(0, 0, -1): 1, (0, 0, 0): -2, (0, 0, 1): 1, (1, 0, 0): 3, (1, 1, 2): -1}, qmax=3, tmax=2)
    narrow = series_invert(a, pmax=4)
    wide = series_invert(a, pmax=10)
    assert narrow.first_difference(wide, qmax=narrow.qmax, tmax=narrow.tmax, pmax=4) is None


def test_invert_rejects_non_units():
    with pytest.raises(NonInvertibleError):
        series_invert(TriSeries.zero())
    two_leads = TriSeries.from_terms({(1, 0, 0): 1, (0, 1, 0): 1}, qmax=3, tmax=3)
    with pytest.raises(NonInvertibleError):
        series_invert(two_leads)


def test_window_validation_and_truncation():
    with pytest.raises(WindowError):
        TriSeries({}, pmin=2, pmax=1)
    a = TriSeries.from_terms({(0, 0, 0): 1, (3, 0, 0): 5}, qmax=4)
    assert a.truncate(qmax=2).coefficient(3 - 1) == 0
    with pytest.raises(OutOfRangeError):
        a.truncate(qmax=2).coefficient(3)


def test_fractional_exponents_and_swaps():
    a = TriSeries.from_terms({(1, Fraction(1, 3), 1): 1, (2, Fraction(2, 3), 0): -2}, qmax=3, tmax=1)
    b = swap_qt_scaled(a, 3)
    assert b.coefficient(1, Fraction(1, 3), 1) == 1
    assert b.coefficient(2, Fraction(2, 3), 0) == -2
    assert b.qmax == 3 and b.tmax == 1
    assert swap_variables(swap_variables(a, "q", "t"), "q", "t").identical(a)
    with pytest.raises(ValueError):
        swap_variables(a, "q", "p")


def test_extract_coefficient():
    a = TriSeries.from_terms({(0, -1, 1): 2, (1, -1, 0): 3, (1, 0, 0): 7}, qmax=2, tmax=1)
    c = extract_coeff(a, "t", -1)
    assert c.coefficient(0, 0, 1) == 2 and c.coefficient(1, 0, 0) == 3
    with pytest.raises(OutOfRangeError):
        extract_coeff(a, "t", 2)
    with pytest.raises(ValueError):
        extract_coeff(a, "p", 0)


def test_fractional_substitution_with_phase():
    a = TriSeries.q_series({0: 1, 1: 1, 2: 1, 3: 1}, 3)
    b = frac_substitute(a, "q", (1, 1, 3), order=3)
    w = root_of_unity(3, 1)
    assert b.coefficient(Fraction(1, 3)) == w
    assert b.coefficient(Fraction(2, 3)) == w**2
    assert b.coefficient(1) == 1


def test_text_rendering_is_sorted():
    a = TriSeries.from_terms({(1, 0, 0): 3, (0, 0, -1): 1, (0, 0, 1): 1, (0, 0, 0): 10})
    assert a.to_text() == "p^-1 + 10 + p + 3*q"
