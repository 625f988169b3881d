from fractions import Fraction

import pytest

from chl import genera
from chl.classical import phi_0_1
from chl.genera import DepthError, GeneraError
from chl.series import TriSeries, extract_coeff
from chl.tables import COINVARIANT_RANK, FIXED_POINTS, LEVELS


def test_untwisted_untwined_genus_is_k3_elliptic_genus():
    f = genera.twisted_twined(1, 0, 0, 3).series
    assert f.first_difference(phi_0_1(3).scale(2), qmax=3) is None


@pytest.mark.parametrize("N", [n for n in LEVELS if n > 1])
def test_twining_genus_constant_term_from_lefschetz(N):
    # N F^(0,1) at q^0 is 2/p + (number of fixed points - 4) + 2p
    f = genera.twisted_twined(N, 0, 1, 0).series.scale(N)
    expect = TriSeries.p_laurent({-1: 2, 0: FIXED_POINTS[N] - 4, 1: 2})
    assert extract_coeff(f, "q", 0).first_difference(expect) is None


@pytest.mark.parametrize("N", LEVELS)
def test_every_entry_has_rational_transform(N):
    for r in range(N):
        for ell in range(N):
            alpha, g = genera.dft_parts(N, r, ell, Fraction(2))
            assert isinstance(alpha, (int, Fraction))
            assert all(isinstance(v, (int, Fraction)) for v in g.coeffs.values())


def test_k3_exponent_table_matches_phi01():
    # 2 phi_{0,1} has c(-1) = 2, c(0) = 20, c(3) = -128, c(4) = 216, c(7) = -1026, c(8) = 1616
    t = genera.chat_table(1, 8)
    assert [t.lookup(0, 0, 1, d) for d in (-1, 3, 7)] == [2, -128, -1026]
    assert [t.lookup(0, 0, 0, d) for d in (0, 4, 8)] == [20, 216, 1616]
    assert t.lookup(0, 0, 0, -4) == 0


@pytest.mark.parametrize("N", LEVELS)
def test_exponent_table_leading_values(N):
    t = genera.chat_table(N, 2 * N)
    assert t.is_symmetric() is None
    assert t.lookup(0, 0, 1, -1) == 2
    assert t.lookup(0, 0, 0, 0) == 20 - COINVARIANT_RANK[N]
    assert all(isinstance(v, int) for v in t.entries.values())


def test_exponent_table_depth_is_enforced():
    t = genera.chat_table(2, 3)
    with pytest.raises(DepthError):
        t.lookup(0, 0, 0, 4)
    obj = t.to_json_obj()
    assert obj["N"] == 2 and obj["Dmax"] == "3"
    assert obj["entries"] == sorted(obj["entries"])


def test_unknown_level_rejected():
    with pytest.raises(GeneraError):
        genera.genus_entry(9, 0, 0)


def test_indices_reduced_mod_n():
    assert genera.genus_entry(4, 5, -1) == genera.genus_entry(4, 1, 3)


@pytest.mark.parametrize("N", LEVELS)
def test_chi_y_genus_at_q0(N):
    f = genera.dft_hat(N, 0, 0, 0)
    assert extract_coeff(f.series, "q", 0).first_difference(genera.chi_y_genus_value(N)) is None


@pytest.mark.parametrize("N", [2, 3, 4, 6])
def test_transform_depends_on_discriminant_only(N):
    for r, ell in ((0, 0), (1, 0), (0, 1), (1, 1)):
        assert genera.discriminant_consistency(N, r, ell, 3) is None
