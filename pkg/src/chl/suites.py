"""Named verification suites used by ``chl verify`` and the acceptance tests."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from . import classical, dt, genera, lattice, lifts
from .scalars import Cyclotomic, cyclo_to_rational, root_of_unity
from .series import (
    TriSeries,
    extract_coeff,
    series_invert,
    series_mul,
    swap_qt_scaled,
    swap_variables,
)
from .tables import COINVARIANT_RANK, LEVELS, SINGULAR_FIBERS, EulerTable


@dataclass
class Check:
    description: str
    status: str
    discrepancy: Optional[str] = None
    conditional: bool = False


@dataclass
class SuiteReport:
    suite: str
    checks: list[Check] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.status != "fail" or c.conditional for c in self.checks)

    def add(self, description: str, outcome, conditional: bool = False) -> None:
        """Record a check; ``outcome`` is True/False or a discrepancy (None meaning agreement)."""
        if outcome is True or outcome is None:
            ok, disc = True, None
        elif outcome is False:
            ok, disc = False, "mismatch"
        else:
            ok, disc = False, _show(outcome)
        if conditional:
            status = "conditional" if ok else "fail"
        else:
            status = "pass" if ok else "fail"
        self.checks.append(Check(description, status, disc, conditional))

    def to_text(self) -> str:
        lines = [f"suite {self.suite}: {'PASS' if self.passed else 'FAIL'} ({self.seconds:.1f}s)"]
        for c in self.checks:
            extra = f"  first discrepancy: {c.discrepancy}" if c.discrepancy else ""
            tag = " [conditional]" if c.conditional and c.status == "fail" else ""
            lines.append(f"  {c.status:<11} {c.description}{tag}{extra}")
        return "\n".join(lines)

    def to_json_obj(self) -> dict:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "seconds": round(self.seconds, 3),
            "checks": [
                {
                    "description": c.description,
                    "status": c.status,
                    "conditional": c.conditional,
                    "discrepancy": c.discrepancy,
                }
                for c in self.checks
            ],
        }


def _show(x) -> str:
    if isinstance(x, tuple):
        return "(" + ", ".join(str(v) for v in x) + ")"
    return str(x)


def _window(a: TriSeries, b: TriSeries, **region):
    return a.first_difference(b, **region)


# ---------------------------------------------------------------------------
# individual check groups (also used by the acceptance tests)
# ---------------------------------------------------------------------------


def igusa_four_way(qmax=4, tmax=4, pmin=-8, pmax=8) -> dict[str, object]:
    """Borcherds lift at N = 1, product formula, additive lift and Y W, compared pairwise."""
    region = dict(qmax=qmax, tmax=tmax, pmin=pmin, pmax=pmax)
    b = lifts.borcherds_lift(1, qmax, tmax)
    i = lifts.igusa_product(qmax, tmax)
    a = lifts.named_lift("chi10", qmax, tmax)
    g = lattice.siegel_generators(qmax, tmax)
    yw = series_mul(g["Y"], g["W"]).truncate(qmax=qmax, tmax=tmax)
    return {
        "Borcherds vs product": b.first_difference(i, **region),
        "Borcherds vs additive": b.first_difference(a, **region),
        "Borcherds vs Y W": b.first_difference(yw, **region),
    }


def generator_identities(order=3) -> dict[str, object]:
    gens = lattice.siegel_generators(order, order)
    out = {}
    for name in ("E4", "E4_2Z", "G4", "F4"):
        form = lifts.form_by_name(name, order, order)
        ok, diff = lifts.generator_identity_check(form, lifts.IDENTITIES[name], order, order, generators=gens)
        out[name] = diff
    return out


def f4_asymmetry(order=3):
    """A monomial where F_4(q, t, p) and F_4(t, q, p) differ, or None."""
    f = lifts.named_lift("F4", order, order)
    return f.first_difference(swap_variables(f, "q", "t"), qmax=order, tmax=order)


def e4_theta_comparison(order=2, rmax=4):
    lift = lifts.named_lift("E4_2", order, order, -rmax, rmax)
    theta = lattice.e8_siegel_theta(order, order, rmax)
    return lift.first_difference(theta, qmax=order, tmax=order, pmin=-rmax, pmax=rmax)


def thm1_check(N: int, pmax=6) -> tuple[object, object]:
    z = dt.z_chl(N, 2 * N, Fraction(-1, N), pmax=pmax)
    lhs = extract_coeff(z, "t", Fraction(-1, N))
    t_side = lhs.first_difference(dt.thm1_rhs(N, "t", 2 * N, pmax), qmax=2 * N, pmin=-pmax, pmax=pmax)
    z = dt.z_chl(N, -1, 2, pmax=pmax)
    lhs = extract_coeff(z, "q", -1)
    q_side = lhs.first_difference(dt.thm1_rhs(N, "q", 2, pmax), tmax=2, pmin=-pmax, pmax=pmax)
    return t_side, q_side


def thm2_check(N: int, pmax=5):
    z = dt.z_chl(N, 2 * N, 0, pmax=pmax)
    lhs = extract_coeff(z, "t", 0)
    return lhs.first_difference(dt.thm2_rhs(N, 2 * N, pmax), qmax=2 * N, pmin=-pmax, pmax=pmax)


def symmetry_check(N: int):
    phi = lifts.borcherds_lift(N, 3 * N, 3)
    return phi.first_difference(swap_qt_scaled(phi, N), qmax=3 * N, tmax=3)


def chat_checks(N: int) -> dict[str, object]:
    """Integrality and symmetry (raised as errors by chat_table) plus the two leading values."""
    try:
        table = genera.chat_table(N, 8 * N)
    except genera.TableInconsistencyError as exc:
        return {"integral and symmetric": str(exc)}
    c1 = table.lookup(0, 0, 1, -1)
    c0 = table.lookup(0, 0, 0, 0)
    return {
        "integral and symmetric": table.is_symmetric(),
        "c_1(-1) = 2": None if c1 == 2 else c1,
        "c_0(0) = 20 - rank": None if c0 == 20 - COINVARIANT_RANK[N] else c0,
    }


def hilb_check(N: int, order=12):
    h = dt.hilb_orbifold_gen(N, order)
    prod = series_mul(h, classical.delta_N(N, order + 1))
    return prod.first_difference(TriSeries.monomial(1, 0, 0), qmax=order)


def an_check(n: int, order=4):
    return lattice.an_theta(n, order).first_difference(lattice.an_eta_quotient(n, order), qmax=order)


def fiber_norm_check(N: int):
    total = sum(count * lattice.a_n_shift_norm(n - 1) for n, count in SINGULAR_FIBERS[N].items() if n > 1)
    return None if total == Fraction(N - 1, N) else total


def untwisted_checks(order=3, pmax=6) -> tuple[object, object]:
    z = dt.z_untw(order, -1, pmax=pmax)
    t_side = extract_coeff(z, "t", -1).first_difference(
        dt.order2_untwisted_rhs("t", order, pmax), qmax=order, pmin=-pmax, pmax=pmax
    )
    z = dt.z_untw(-1, order, pmax=pmax)
    q_side = extract_coeff(z, "q", -1).first_difference(
        dt.order2_untwisted_rhs("q", order, pmax), tmax=order, pmin=-pmax, pmax=pmax
    )
    return t_side, q_side


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------


def suite_scalars(r: SuiteReport) -> None:
    for N in LEVELS:
        z = root_of_unity(N, 1)
        r.add(f"zeta_{N}^{N} = 1", (z**N) == 1)
        total = sum((root_of_unity(N, k) for k in range(N)), Cyclotomic(N, [0]))
        r.add(f"sum of the {N}-th roots of unity", cyclo_to_rational(total) == (1 if N == 1 else 0))
    z = root_of_unity(8, 1)
    r.add("(1 + zeta_8) * (1 + zeta_8)^-1 = 1", (1 + z) * (1 + z).inverse() == 1)
    r.add("zeta_4 + zeta_4^-1 = 0", cyclo_to_rational(root_of_unity(4, 1) + root_of_unity(4, 3)) == 0)


def suite_series(r: SuiteReport) -> None:
    a = TriSeries.from_terms({(0, 0, 0): 1, (1, 0, 1): 2, (0, 1, -1): Fraction(1, 3), (1, 1, 0): -1}, qmax=4, tmax=4)
    b = TriSeries.from_terms({(0, 0, 0): 2, (1, 0, 0): 1, (0, 1, 1): -3}, qmax=4, tmax=4)
    c = TriSeries.from_terms({(0, 0, 0): 1, (2, 1, 2): 5}, qmax=4, tmax=4)
    r.add("commutativity", series_mul(a, b).first_difference(series_mul(b, a)))
    r.add("associativity", series_mul(series_mul(a, b), c).first_difference(series_mul(a, series_mul(b, c))))
    r.add("distributivity", series_mul(a, b + c).first_difference(series_mul(a, b) + series_mul(a, c)))
    inv = series_invert(a)
    r.add("a * a^-1 = 1", series_mul(a, inv).first_difference(TriSeries.one(), qmax=4, tmax=4))
    k2 = classical.k_squared(4)
    kinv = series_invert(k2, pmax=6)
    prod = series_mul(k2, kinv)
    r.add("K^2 * K^-2 = 1 on its window", prod.first_difference(TriSeries.one(), qmax=2, tmax=0, pmax=prod.pmax))
    wide = series_invert(k2, pmax=12)
    r.add("widening the p-window keeps coefficients", kinv.first_difference(wide, qmax=kinv.qmax, pmax=6))
    r.add("exchanging q and t twice is the identity", swap_variables(swap_variables(a, "q", "t"), "q", "t").first_difference(a))


def suite_classical(r: SuiteReport) -> None:
    d2 = classical.delta_N(2, 5)
    r.add("Delta_2 = q - 8q^2 + 12q^3 + 64q^4 - 210q^5",
          [d2.coefficient(n) for n in range(1, 6)] == [1, -8, 12, 64, -210])
    for N in LEVELS:
        lead = min(e[0] for e in classical.delta_N(N, 2).terms())
        r.add(f"Delta_{N} has leading exponent 1", lead == 1)
    phi = classical.phi_0_1(4)
    k2wp = series_mul(classical.k_squared(6), classical.weierstrass_p(6, 14)).scale(12)
    r.add("phi_{0,1} = 12 K^2 wp", phi.first_difference(k2wp, qmax=4, pmin=-6, pmax=6))
    c = lifts._phi01_discriminant_table(8)
    r.add("2 phi_{0,1}: c(-1) = 2 and c(0) = 20", c.get(-1) == 2 and c.get(0) == 20)
    d4 = lattice.LatticeSpec(((2, -1, 0, 0), (-1, 2, -1, -1), (0, -1, 2, 0), (0, -1, 0, 2)), name="D4")
    terms: dict = {}
    for _, nrm in lattice.short_vectors(d4, 8):
        terms[(nrm / 2, 0, 0)] = terms.get((nrm / 2, 0, 0), 0) + 1
    theta = TriSeries.from_terms(terms, qmax=4)
    r.add("E_2 level-2 form = D4 theta series", classical.eisenstein_level(2, "E", 4).first_difference(theta, qmax=4))
    r.add("phi_2(2) = 3, mu(6) = 1, phi_1(6) = 2",
          classical.phi_d(2, 2) == 3 and classical.mobius(6) == 1 and classical.phi_d(1, 6) == 2)


def suite_lattice(r: SuiteReport) -> None:
    for n in range(1, 9):
        r.add(f"A_{n} shifted theta = eta quotient to q^4", an_check(n))
    for N in LEVELS:
        r.add(f"fiber shift norms sum to (N-1)/N for N = {N}", fiber_norm_check(N))
        r.add(f"I_n fiber counts match e_d for N = {N}", dt.fiber_cross_check(N))
        r.add(f"sum d e_d = 24 for N = {N}", EulerTable(N).weighted_euler_sum() == 24)
    counts = {n: len(lattice.e8_table(8).shell(n)) for n in (0, 2, 4, 6, 8)}
    r.add("E8 shells 1, 240, 2160, 6720, 17520", counts == {0: 1, 2: 240, 4: 2160, 6: 6720, 8: 17520})
    for y in lattice.default_y_vectors():
        th = lattice.theta_e8_jacobi(y, 3)
        r.add(f"Theta_E8,y closed form for y = {y}", th.first_difference(lifts.seed_theta_e8(3), qmax=3))
    r.add("E_4^(2) additive lift = E8 Siegel theta", e4_theta_comparison())


def suite_genera(r: SuiteReport) -> None:
    for N in LEVELS:
        for label, outcome in chat_checks(N).items():
            r.add(f"N = {N}: {label}", outcome)
        f00 = genera.dft_hat(N, 0, 0, 0)
        r.add(f"N = {N}: q^0 of hat F^(0,0) is the chi_y genus",
              extract_coeff(f00.series, "q", 0).first_difference(genera.chi_y_genus_value(N)))
        r.add(f"N = {N}: (0, s) rows have integral q-powers",
              all(genera.translation_invariant(N, s, 2) for s in range(N)))
        for rr, ll in ((0, 0), (1 % N, 0), (0, 1 % N), (1 % N, 1 % N), (N - 1, N // 2)):
            r.add(f"N = {N}: hat F^({rr},{ll}) depends only on (4n - j^2, j mod 2)",
                  genera.discriminant_consistency(N, rr, ll, 3))
    f = genera.twisted_twined(1, 0, 0, 0).series
    r.add("F^(0,0)_1 starts 2(p^-1 + 10 + p)", f.first_difference(TriSeries.p_laurent({-1: 2, 0: 20, 1: 2})))


def suite_lifts(r: SuiteReport) -> None:
    for label, outcome in igusa_four_way().items():
        r.add(f"chi_10: {label}", outcome)
    for name, outcome in generator_identities().items():
        r.add(f"generator identity for {name}", outcome)
    r.add("F_4 is not symmetric in q and t", f4_asymmetry() is not None)
    for N in LEVELS:
        r.add(f"Phi_{N}(q, t, p) = Phi_{N}(t^(1/N), q^N, p)", symmetry_check(N))
        lead = lifts.borcherds_lift(N, 1, Fraction(1, N))
        expect = TriSeries.from_terms({(1, Fraction(1, N), 1): 1, (1, Fraction(1, N), 0): -2, (1, Fraction(1, N), -1): 1})
        r.add(f"Phi_{N} starts q t^(1/N) (p - 2 + 1/p)", lead.first_difference(expect))


def suite_thm1(r: SuiteReport) -> None:
    for N in LEVELS:
        t_side, q_side = thm1_check(N)
        r.add(f"N = {N}: t^(-1/N) coefficient", t_side)
        r.add(f"N = {N}: q^(-1) coefficient", q_side)


def suite_thm2(r: SuiteReport) -> None:
    for N in (1, 2, 3):
        r.add(f"N = {N}: t^0 coefficient (conditional)", thm2_check(N), conditional=True)


def suite_order2(r: SuiteReport) -> None:
    t_side, q_side = untwisted_checks()
    r.add("untwisted t^-1 coefficient = 1 / (2 Theta^2 Delta_2)", t_side)
    r.add("untwisted q^-1 coefficient = E_4(t^2) / (2 Theta^2 Delta)", q_side)
    z = dt.z_tw(4, Fraction(-1, 2))
    r.add("twisted t^(-1/2) coefficient = leading-coefficient formula at N = 2",
          extract_coeff(z, "t", Fraction(-1, 2)).first_difference(dt.thm1_rhs(2, "t", 4), qmax=4, pmin=-6, pmax=6))
    num = dt.untwisted_numerator(0, 0)
    r.add("numerator constant term is -1/2", num.coefficient(0, 0, 0) == Fraction(-1, 2))
    for N in LEVELS:
        r.add(f"hilb_orbifold_gen(N = {N}) * Delta_N = q", hilb_check(N))
        u = dt.hilb_orbifold_gen(N, 8, "U")
        expect = series_mul(dt.hilb_orbifold_gen(N, 8), _one_minus_qn_squared(N, 8))
        r.add(f"U-series for N = {N}", u.first_difference(expect, qmax=8))
        counts = dt.diagonal_count(N, 6)
        r.add(f"diagonal counts are non-negative integers for N = {N}", all(c >= 0 for c in counts))
    r.add("delta(1), delta(2) at N = 1 are 48, 144", dt.diagonal_count(1, 2) == [48, 144])
    r.add("delta(1) at N = 2 is 16", dt.diagonal_count(2, 1) == [16])
    untw = dt.z_untw(2, 2)
    acc = dt.series_accessor(untw, None)
    ok = True
    for d in range(0, 3):
        for s in range(-1, 2):
            for n in range(-3, 4):
                if untw.known(d - 1, s, n):
                    cls = dt.DTClass(2, n, s, d, 1, False)
                    ok &= dt.multiple_cover(acc, cls) == acc("untw", n, Fraction(s), d)
    r.add("multiple cover formula at divisibility 1 is the identity", ok)


def _one_minus_qn_squared(N: int, order: int) -> TriSeries:
    from .series import weighted_product

    factors = {(N * k, 0, 0): 2 for k in range(1, order // N + 1)}
    return weighted_product(factors, qmax=order)


def suite_vertex(r: SuiteReport) -> None:
    r.add("Block-Okounkov identity, N = 1, |lambda| <= 8", dt.block_okounkov_check(1, 8))
    r.add("Block-Okounkov identity, N = 2, |lambda| <= 8", dt.block_okounkov_check(2, 8))
    r.add("perturbing E_(2,1) breaks the identity", dt.block_okounkov_check(1, 3, dt.Partition((2, 1))) == 3)
    e = dt.vertex_e_lambda(dt.Partition(()))
    r.add("E_empty = y^(1/2) / (1 - y)", (e - dt.RationalP.make({1: 1}, {0: 1, 2: -1})).is_zero())
    e = dt.vertex_e_lambda(dt.Partition((2, 1)))
    expect = dt.RationalP.laurent({-3: 1, 1: 1}) + dt.RationalP.make({5: 1}, {0: 1, 2: -1})
    r.add("E_(2,1) = y^(-3/2) + y^(1/2) + y^(5/2) / (1 - y)", (e - expect).is_zero())


SUITES: dict[str, Callable[[SuiteReport], None]] = {
    "scalars": suite_scalars,
    "series": suite_series,
    "classical": suite_classical,
    "lattice": suite_lattice,
    "genera": suite_genera,
    "lifts": suite_lifts,
    "thm1": suite_thm1,
    "thm2": suite_thm2,
    "order2": suite_order2,
    "vertex": suite_vertex,
}


def run_suite(name: str) -> list[SuiteReport]:
    names = list(SUITES) if name == "all" else [name]
    reports = []
    for n in names:
        if n not in SUITES:
            raise KeyError(n)
        report = SuiteReport(n)
        start = time.perf_counter()
        SUITES[n](report)
        report.seconds = time.perf_counter() - start
        reports.append(report)
    return reports


def reports_json(reports: list[SuiteReport]) -> str:
    return json.dumps([r.to_json_obj() for r in reports], indent=2)
