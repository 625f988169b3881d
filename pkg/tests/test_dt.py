import json
from fractions import Fraction

import pytest

from chl import dt
from chl.classical import delta_N, sigma
from chl.series import TriSeries, extract_coeff, series_mul
from chl.tables import LEVELS

from test_series import euler_partitions


def test_partition_enumeration_counts():
    counts = euler_partitions(10)
    for n in range(11):
        parts = list(dt.partitions(n))
        assert len(parts) == counts[n]
        assert len(set(parts)) == len(parts)
        assert all(p.size == n for p in parts)
        assert {p.transpose() for p in parts} == set(parts)


def test_partition_validation_and_transpose():
    assert dt.Partition((3, 1)).transpose() == dt.Partition((2, 1, 1))
    assert dt.Partition(()).transpose() == dt.Partition(())
    with pytest.raises(dt.DTError):
        dt.Partition((1, 2))
    with pytest.raises(dt.DTError):
        dt.Partition((2, 0))


def test_rational_functions_in_p():
    f = dt.RationalP.make({0: 1}, {0: 1, 2: -1})
    g = dt.RationalP.laurent({0: 1, 2: -1})
    assert (f * g - dt.RationalP.laurent({0: 1})).is_zero()
    assert (f.invert_variable().invert_variable() - f).is_zero()
    # 1/(1 - p) + 1/(1 - 1/p) = 1
    assert (f + f.invert_variable() - dt.RationalP.laurent({0: 1})).is_zero()
    with pytest.raises(ZeroDivisionError):
        dt.RationalP.make({0: 1}, {})


def test_vertex_of_empty_partition():
    e = dt.vertex_e_lambda(dt.Partition(()))
    assert (e - dt.RationalP.make({1: 1}, {0: 1, 2: -1})).is_zero()


@pytest.mark.parametrize("N", [1, 2])
def test_block_okounkov_identity(N):
    assert dt.block_okounkov_check(N, 6) is None


def test_block_okounkov_detects_a_perturbation():
    assert dt.block_okounkov_check(1, 4, dt.Partition((2, 1))) == 3


def test_k3_hilbert_scheme_euler_numbers():
    h = dt.hilb_orbifold_gen(1, 5)
    assert [h.coefficient(n) for n in range(6)] == [1, 24, 324, 3200, 25650, 176256]


@pytest.mark.parametrize("N", LEVELS)
def test_orbifold_hilbert_series_inverts_delta(N):
    h = dt.hilb_orbifold_gen(N, 10)
    prod = series_mul(h, delta_N(N, 11))
    assert prod.first_difference(TriSeries.monomial(1, 0, 0), qmax=10) is None


def test_diagonal_counts_from_divisor_sums():
    assert dt.diagonal_count(1, 6) == [48 * sigma(1, d) for d in range(1, 7)]
    assert dt.diagonal_count(2, 6) == [16 * (sigma(1, d) - (sigma(1, d // 2) if d % 2 == 0 else 0)) for d in range(1, 7)]


@pytest.mark.parametrize("N", LEVELS)
def test_fiber_counts_match_euler_numbers(N):
    assert dt.fiber_cross_check(N)


def test_leading_layer_of_level_one_partition_function():
    # -1 / (q t (p - 2 + 1/p)) = -q^-1 t^-1 p / (1 - p)^2
    z = dt.z_chl(1, -1, -1, pmax=6)
    layer = extract_coeff(extract_coeff(z, "q", -1), "t", -1)
    assert [layer.coefficient(0, 0, k) for k in range(0, 7)] == [0, -1, -2, -3, -4, -5, -6]


@pytest.mark.parametrize("N", [1, 2, 3])
def test_leading_coefficients_both_sides(N):
    from chl.suites import thm1_check

    assert thm1_check(N) == (None, None)


def test_order_two_dispatch():
    with pytest.raises(dt.DTError):
        dt.z_order2("mixed", 0, 0)
    assert dt.untwisted_numerator(0, 0).coefficient(0, 0, 0) == Fraction(-1, 2)


def test_dt_class_validation():
    with pytest.raises(dt.DTError):
        dt.DTClass(2, 1, Fraction(1, 2), 0)
    with pytest.raises(dt.DTError):
        dt.DTClass(2, 1, Fraction(1, 3), 0, twisted=True)
    with pytest.raises(dt.DTError):
        dt.DTClass(2, 1, 0, -1)
    with pytest.raises(dt.DTError):
        dt.DTClass(2, 1, 0, 0, div=0)


def test_multiple_cover_sums_over_divisors():
    table = {("untw", 4, Fraction(8), 1): 10, ("untw", 2, Fraction(2), 1): 6, ("tw", 2, Fraction(2), 1): 100}

    def acc(kind, n, s, d):
        return table[(kind, n, Fraction(s), d)]

    untw = dt.DTClass(2, 4, 8, 1, div=2)
    assert dt.multiple_cover(acc, untw) == 10 + Fraction(6, 2)
    tw = dt.DTClass(2, 4, 8, 1, div=2, twisted=True)
    # k = 1 leaves div / k = 2 even, so still untwisted; k = 2 leaves 1, which is odd
    assert dt.multiple_cover(acc, tw) == 10 + Fraction(100, 2)
    odd = dt.DTClass(2, 3, 8, 1, div=2)
    with pytest.raises(KeyError):
        dt.multiple_cover(acc, odd)


def test_series_accessor_reports_missing_windows():
    z = dt.z_untw(1, 1, pmax=2)
    acc = dt.series_accessor(z, None)
    with pytest.raises(dt.MissingCoefficientError):
        acc("untw", 5, Fraction(0), 1)
    with pytest.raises(dt.MissingCoefficientError):
        acc("tw", 0, Fraction(0), 1)


def test_dt_export_formats():
    z = dt.z_untw(0, 0, pmax=2)
    rows = dt.dt_rows(z, 2, "untw")
    assert rows == sorted(rows, key=lambda r: (r[4], r[3], r[2]))
    text = dt.dt_csv(rows)
    assert text.splitlines()[0] == "N,kind,n,s,d,value"
    assert len(text.splitlines()) == len(rows) + 1
    data = json.loads(dt.dt_json(rows))
    assert [d["value"] for d in data] == [str(r[5]) for r in rows]
    for _, _, n, s, d, v in rows:
        assert v == (-1) ** (n % 2) * z.coefficient(d - 1, s, n)
