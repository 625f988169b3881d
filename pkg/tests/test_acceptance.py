"""Acceptance criteria, one test each; every test prints a single PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -s`` to see the lines, or execute this
file directly.  Every comparison is exact equality of rational coefficients.
"""

from fractions import Fraction

import pytest

from chl import dt, genera, lifts, suites
from chl.series import TriSeries, series_invert, series_mul
from chl.suites import SuiteReport
from chl.tables import LEVELS


def report(number: int, description: str, failures: dict) -> None:
    bad = {k: v for k, v in failures.items() if v is not None and v is not True}
    status = "PASS" if not bad else "FAIL"
    print(f"criterion {number}: {description} ... {status}")
    assert not bad, bad


def test_criterion_01_igusa_four_way():
    report(1, "chi_10 four-way agreement to q^4 t^4, p in [-8, 8]", suites.igusa_four_way(4, 4, -8, 8))


def test_criterion_02_generator_identities():
    out = suites.generator_identities(3)
    witness = suites.f4_asymmetry(3)
    out["F4 asymmetry witness"] = None if witness is not None else "F4 symmetric on the window"
    report(2, "E4, E4(2Z), G4, F4 in X, Y, Z, W, T to order 3; F4 asymmetric", out)


def test_criterion_03_e4_lift_is_e8_theta():
    report(3, "E_4^(2) lift = E8 x E8 Siegel theta for m, n <= 2, |r| <= 4",
           {"lift vs theta": suites.e4_theta_comparison(2, 4)})


def test_criterion_04_leading_coefficients():
    out = {}
    for N in LEVELS:
        t_side, q_side = suites.thm1_check(N)
        out[f"N={N} t-side"] = t_side
        out[f"N={N} q-side"] = q_side
    report(4, "t^(-1/N) and q^-1 coefficients of -1/Phi_N for N = 1..8", out)


def test_criterion_05_t0_coefficient():
    report(5, "t^0 coefficient of -1/Phi_N for N = 1, 2, 3 (conditional)",
           {f"N={N}": suites.thm2_check(N) for N in (1, 2, 3)})


def test_criterion_06_symmetry():
    report(6, "Phi_N(q, t, p) = Phi_N(t^(1/N), q^N, p) for N = 1..8",
           {f"N={N}": suites.symmetry_check(N) for N in LEVELS})


def test_criterion_07_chat_tables():
    out = {}
    for N in LEVELS:
        for label, outcome in suites.chat_checks(N).items():
            out[f"N={N} {label}"] = outcome
    report(7, "hat c tables integral, symmetric, c_1(-1) = 2, c_0(0) = 20 - rank", out)


def test_criterion_08_hilbert_series():
    report(8, "hilb_orbifold_gen(N) * Delta_N = q to q^12 for N = 1..8",
           {f"N={N}": suites.hilb_check(N, 12) for N in LEVELS})


def test_criterion_09_an_theta_and_fibers():
    out = {f"A_{n}": suites.an_check(n, 4) for n in range(1, 9)}
    out.update({f"fibers N={N}": suites.fiber_norm_check(N) for N in LEVELS})
    report(9, "A_n shifted theta = eta quotient; fiber shift norms sum to (N-1)/N", out)


def test_criterion_10_block_okounkov():
    report(10, "Block-Okounkov identity for |lambda| <= 8, N = 1 and N = 2",
           {f"N={N}": dt.block_okounkov_check(N, 8) for N in (1, 2)})


def test_criterion_11_order_two_base_cases():
    t_side, q_side = suites.untwisted_checks(3, 6)
    report(11, "Z^untw t^-1 and q^-1 coefficients", {"t^-1": t_side, "q^-1": q_side})


def _dft_rational_everywhere() -> object:
    for N in LEVELS:
        for r in range(N):
            for ell in range(N):
                try:
                    genera.dft_parts(N, r, ell, Fraction(2))
                except genera.TableInconsistencyError as exc:
                    return f"N={N} (r, l)=({r}, {ell}): {exc}"
    return None


def _window_soundness() -> object:
    phi = lifts.borcherds_lift(2, 2, 1)
    narrow = series_invert(phi, pmax=4)
    wide = series_invert(phi, pmax=8)
    return narrow.first_difference(wide, qmax=narrow.qmax, tmax=narrow.tmax, pmax=4)


def test_criterion_12_property_suite():
    out = {}
    for suite in (suites.suite_scalars, suites.suite_series):
        rep = SuiteReport(suite.__name__)
        suite(rep)
        out[suite.__name__] = None if rep.passed else rep.to_text()
    a = TriSeries.from_terms({(0, 0, 0): 3, (1, 1, 2): -1, (2, 0, -1): Fraction(1, 2)}, qmax=3, tmax=3)
    out["invert twice"] = series_invert(series_invert(a)).first_difference(a, qmax=3, tmax=3)
    out["a * a^-1"] = series_mul(a, series_invert(a)).first_difference(TriSeries.one(), qmax=3, tmax=3)
    out["p-window soundness for 1 / Phi_2"] = _window_soundness()
    out["DFT rationality"] = _dft_rational_everywhere()
    untw = dt.z_untw(1, 1)
    acc = dt.series_accessor(untw, None)
    mismatch = None
    for q, t, p, v in untw.sorted_terms():
        if p.denominator == 1 and t.denominator == 1:
            cls = dt.DTClass(2, int(p), t, int(q + 1), 1, False)
            if dt.multiple_cover(acc, cls) != acc("untw", int(p), t, int(q + 1)):
                mismatch = cls
                break
    out["multiple_cover at div = 1"] = mismatch
    report(12, "ring axioms, inversion, p-window soundness, DFT rationality, multiple cover", out)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
