import json
from fractions import Fraction
from itertools import product

import pytest

from chl import lattice
from chl.classical import sigma
from chl.lattice import LatticeError, LatticeSpec, OutOfCacheError


def test_gram_validation():
    with pytest.raises(LatticeError):
        LatticeSpec(((2, 1), (0, 2)))
    with pytest.raises(LatticeError):
        LatticeSpec(((2, -1), (-1, 2)), shift=(Fraction(1, 2),))


def test_short_vectors_of_a2_match_brute_force():
    lat = LatticeSpec(((2, -1), (-1, 2)), name="A2plain")
    counts = {}
    for v, n in lattice.short_vectors(lat, 8):
        counts[n] = counts.get(n, 0) + 1
    brute = {}
    for a, b in product(range(-6, 7), repeat=2):
        n = 2 * a * a - 2 * a * b + 2 * b * b
        if n <= 8:
            brute[n] = brute.get(n, 0) + 1
    assert counts == brute


@pytest.mark.parametrize("n", range(1, 9))
def test_shift_norm_closed_form(n):
    assert lattice.a_n_shift_norm(n) == Fraction(n * (n + 2), 24 * (n + 1))


def test_a1_shifted_theta_by_direct_summation():
    # A_1 shifted by rho / 2 = 1/4: theta = sum_x q^((x + 1/4)^2)
    th = lattice.an_theta(1, 4)
    expected = {}
    for x in range(-5, 5):
        e = Fraction((4 * x + 1) ** 2, 16)
        if e <= 4:
            expected[e] = expected.get(e, 0) + 1
    assert {k[0]: v for k, v in th.terms().items()} == expected


@pytest.mark.parametrize("n", range(1, 9))
def test_an_theta_equals_eta_quotient(n):
    assert lattice.an_theta(n, 4).first_difference(lattice.an_eta_quotient(n, 4), qmax=4) is None


def test_e8_shells_follow_e4_coefficients(isolated_cache):
    table = lattice.e8_table(8)
    for m in range(0, 5):
        expect = 1 if m == 0 else 240 * sigma(3, m)
        assert len(table.shell(2 * m)) == expect
    assert len(table.shell(3)) == 0
    with pytest.raises(OutOfCacheError):
        table.shell(10)


def test_e8_theta_series_is_e4():
    th = lattice.e8_theta(4)
    assert [th.coefficient(n) for n in range(5)] == [1, 240, 2160, 6720, 17520]


def test_r_e8_small_matrices():
    table = lattice.enumerate_shells(lattice.E8, 4)
    assert lattice.r_e8(((0, 0), (0, 0)), table) == 1
    assert lattice.r_e8(((2, 2), (2, 2)), table) == 240
    assert lattice.r_e8(((2, 1), (1, 2)), table) == 240 * 56
    assert lattice.r_e8(((2, 0), (0, 2)), table) == 240 * 126
    with pytest.raises(LatticeError):
        lattice.r_e8(((1, 0), (0, 2)), table)
    with pytest.raises(LatticeError):
        lattice.r_e8(((2, 3), (3, 2)), table)
    with pytest.raises(OutOfCacheError):
        lattice.r_e8(((6, 0), (0, 2)), table)


def test_shell_cache_round_trip(tmp_path):
    lat = LatticeSpec(lattice.cartan_a(3), name="A3")
    first = lattice.lattice_shells(lat, 6, cache=tmp_path)
    files = list(tmp_path.glob("shells_A3_norm6.json"))
    assert len(files) == 1
    obj = json.loads(files[0].read_text())
    assert obj["gram"] == [list(r) for r in lat.gram]
    lattice.clear_memory_cache()
    again = lattice.lattice_shells(lat, 4, cache=tmp_path)
    assert again.norm_bound == 6
    assert again.to_json_obj() == first.to_json_obj()


def test_jacobi_theta_of_e8_at_y(isolated_cache):
    from chl.lifts import seed_theta_e8

    for y in lattice.default_y_vectors():
        assert lattice.E8.norm(y) == 4
        assert lattice.theta_e8_jacobi(y, 2).first_difference(seed_theta_e8(2), qmax=2) is None


def test_genus_two_generators_leading_terms():
    g = lattice.siegel_generators(1, 1)
    assert g["W"].coefficient(1, 1, 0) == -2 and g["W"].coefficient(1, 1, 1) == 1
    assert g["Z"].coefficient(1, 1, 0) == 2
    assert g["T"].coefficient(0, 1, 0) == 1
    assert g["X"].coefficient(0, 0, 0) == 1 and g["Y"].coefficient(0, 0, 0) == 1
    with pytest.raises(LatticeError):
        lattice.genus2_theta("0101", 1, 1)


def test_e8_siegel_theta_low_coefficients():
    th = lattice.e8_siegel_theta(1, 1, 2)
    assert th.coefficient(1, 0, 0) == 240 and th.coefficient(0, 1, 0) == 240
    assert th.coefficient(1, 1, 0) == 240 * 126
    assert th.coefficient(1, 1, 1) == 240 * 56
    assert th.coefficient(1, 1, 2) == 240
