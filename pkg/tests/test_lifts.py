from fractions import Fraction

import pytest

from chl import lifts
from chl.genera import DepthError, chat_table
from chl.lattice import siegel_generators
from chl.series import TriSeries, swap_variables
from chl.tables import LEVELS


def test_binomial_series():
    assert lifts._binomial_series(3, 5) == [1, -3, 3, -1]
    assert lifts._binomial_series(-2, 4) == [1, 2, 3, 4, 5]
    assert lifts._binomial_series(0, 3) == [1]


def test_chi10_known_fourier_coefficients():
    chi = lifts.named_lift("chi10", 2, 2)
    assert [chi.coefficient(1, 1, r) for r in (-1, 0, 1)] == [1, -2, 1]
    assert [chi.coefficient(1, 2, r) for r in (-2, -1, 0, 1, 2)] == [-2, -16, 36, -16, -2]
    assert [chi.coefficient(2, 1, r) for r in (-2, -1, 0, 1, 2)] == [-2, -16, 36, -16, -2]


def test_product_formula_matches_level_one_lift():
    b = lifts.borcherds_lift(1, 3, 3)
    i = lifts.igusa_product(3, 3)
    assert b.first_difference(i, qmax=3, tmax=3, pmin=-6, pmax=6) is None


@pytest.mark.parametrize("N", LEVELS)
def test_lift_starts_with_theta_squared(N):
    lead = lifts.borcherds_lift(N, 1, Fraction(1, N))
    expect = TriSeries.from_terms({(1, Fraction(1, N), 1): 1, (1, Fraction(1, N), 0): -2, (1, Fraction(1, N), -1): 1})
    assert lead.first_difference(expect) is None


def test_empty_box_gives_zero():
    assert lifts.borcherds_lift(2, Fraction(1, 2), 1).is_zero()


def test_shallow_table_rejected():
    with pytest.raises(DepthError):
        lifts.borcherds_lift(2, 3, 2, table=chat_table(2, 1))
    with pytest.raises(lifts.LiftError):
        lifts.borcherds_lift(2, 2, 1, table=chat_table(3, 6))


def test_additive_lifts_low_terms():
    e = lifts.named_lift("E4_2", 1, 1)
    assert e.coefficient(0, 0, 0) == 1 and e.coefficient(1, 0, 0) == 240
    assert [e.coefficient(1, 1, r) for r in (-2, -1, 0)] == [240, 240 * 56, 240 * 126]
    g = lifts.named_lift("G4", 1, 1)
    assert g.coefficient(0, 0, 0) == Fraction(-7, 240)
    f = lifts.named_lift("F4", 1, 1)
    assert f.coefficient(0, 0, 0) == Fraction(1, 240)
    with pytest.raises(lifts.LiftError):
        lifts.named_lift("H6", 1, 1)


def test_f4_is_not_symmetric():
    f = lifts.named_lift("F4", 2, 2)
    diff = f.first_difference(swap_variables(f, "q", "t"), qmax=2, tmax=2)
    assert diff is not None


@pytest.mark.parametrize("name", ["chi10", "E4", "E4_2Z", "G4", "F4"])
def test_generator_identities(name):
    gens = siegel_generators(2, 2)
    ok, diff = lifts.generator_identity_check(
        lifts.form_by_name(name, 2, 2), lifts.IDENTITIES[name], 2, 2, generators=gens
    )
    assert ok, diff


def test_lift_disk_cache(tmp_path):
    first = lifts.cached_borcherds_lift(3, 2, 1, directory=tmp_path)
    files = list((tmp_path / "lifts").glob("*.json"))
    assert len(files) == 1
    again = lifts.cached_borcherds_lift(3, 2, 1, directory=tmp_path)
    assert again.identical(first)
    files[0].write_text("not json")
    assert lifts.cached_borcherds_lift(3, 2, 1, directory=tmp_path).identical(first)
