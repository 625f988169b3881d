"""Donaldson-Thomas partition functions of elliptic CHL models and their closed forms."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Optional

from .classical import (
    delta_N,
    delta_N_spec,
    divisors,
    eisenstein,
    eisenstein_level,
    mobius,
    phi_d,
    theta_sq_inverse,
    weierstrass_p,
)
from .lifts import additive_lift, borcherds_lift, e4_2z, LIFTS
from .scalars import Rational, normalize
from .series import (
    TriSeries,
    frac_substitute,
    rename_q_to_t,
    series_invert,
    series_mul,
    weighted_product,
)
from .tables import EulerTable


class DTError(ValueError):
    pass


class MissingCoefficientError(DTError):
    pass


# ---------------------------------------------------------------------------
# partition functions
# ---------------------------------------------------------------------------


def z_chl(N: int, qmax, tmax, pmax=6) -> TriSeries:
    """-1 / Phi_N exact for q-order <= qmax, t-order <= tmax and p-exponents <= pmax."""
    qmax = Fraction(qmax)
    tmax = Fraction(tmax)
    phi = borcherds_lift(N, qmax + 2, tmax + Fraction(2, N))
    return -series_invert(phi, pmax=pmax)


def z_tw(qmax, tmax, pmax=6) -> TriSeries:
    """Twisted order-two series, taken as -1 / Phi_2."""
    return z_chl(2, qmax, tmax, pmax)


def untwisted_numerator(qmax, tmax) -> TriSeries:
    """-8 F_4 + 8 G_4 - (7/30) E_4^(2)(2Z)."""
    f4 = additive_lift(LIFTS["F4"], qmax, tmax)
    g4 = additive_lift(LIFTS["G4"], qmax, tmax)
    e4 = e4_2z(qmax, tmax)
    return (f4.scale(-8) + g4.scale(8) - e4.scale(Fraction(7, 30))).truncate(qmax=qmax, tmax=tmax)


def z_untw(qmax, tmax, pmax=6) -> TriSeries:
    """(-8 F_4 + 8 G_4 - (7/30) E_4^(2)(2Z)) / chi_10."""
    qmax = Fraction(qmax)
    tmax = Fraction(tmax)
    chi = additive_lift(LIFTS["chi10"], qmax + 2, tmax + 2)
    num = untwisted_numerator(qmax + 1, tmax + 1)
    inv = series_invert(chi, pmax=pmax + _p_reach(num))
    return series_mul(num, inv).truncate(qmax=qmax, tmax=tmax, pmax=pmax)


def _p_reach(s: TriSeries) -> int:
    """How far multiplication by s can push p-exponents downward."""
    lo = min((k[2] for k in s.terms()), default=0)
    return max(0, -int(lo) + 1)


def z_order2(kind: str, qmax, tmax, pmax=6) -> TriSeries:
    if kind == "twisted":
        return z_tw(qmax, tmax, pmax)
    if kind == "untwisted":
        return z_untw(qmax, tmax, pmax)
    raise DTError(f"kind must be 'twisted' or 'untwisted', not {kind!r}")


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------


def _inverse_delta(N: int, qmax) -> TriSeries:
    qmax = Fraction(qmax)
    lead = delta_N_spec(N).leading_power
    return series_invert(delta_N(N, qmax + 2 * lead))


def thm1_rhs(N: int, side: str, order, pmax=6) -> TriSeries:
    """1 / (Theta(q^N, p)^2 Delta_N(q)) on the t-side, 1 / (Theta(t, p)^2 Delta_N(t^(1/N))) on the q-side.

    ``order`` is the q-order (t-side) or t-order (q-side) kept.
    """
    order = Fraction(order)
    if side == "t":
        th = theta_sq_inverse(order // N + 2, pmax)
        th = frac_substitute(th, "q", (N, 0, 1)).truncate(qmax=order + 1)
        return series_mul(th, _inverse_delta(N, order + 1)).truncate(qmax=order, pmax=pmax)
    if side == "q":
        th = theta_sq_inverse(order + 2, pmax)
        d = frac_substitute(delta_N(N, N * (order + 1) + 2), "q", (1, 0, N)).truncate(qmax=order + 2)
        out = series_mul(th, series_invert(d)).truncate(qmax=order, pmax=pmax)
        return rename_q_to_t(out)
    raise DTError("side must be 't' or 'q'")


def thm2_rhs(N: int, order, pmax=6) -> TriSeries:
    """(2 phi_1 / (Delta_N phi_2)) (-12 wp(q^N, p) + E~_N - (1/phi_1) sum_{m|N} mu(m) E~_m)."""
    order = Fraction(order)
    depth = order + 1
    phi1 = phi_d(1, N)
    phi2 = phi_d(2, N)
    wp = frac_substitute(weierstrass_p(depth // N + 1, pmax), "q", (N, 0, 1)).truncate(qmax=depth)
    bracket = wp.scale(-12) + eisenstein_level(N, "Etilde", depth)
    for m in divisors(N):
        mu = mobius(m)
        if mu:
            bracket = bracket - eisenstein_level(m, "Etilde", depth).scale(Fraction(mu, phi1))
    out = series_mul(bracket.truncate(qmax=depth), _inverse_delta(N, depth))
    return out.scale(Fraction(2 * phi1, phi2)).truncate(qmax=order, pmax=pmax)


def order2_untwisted_rhs(side: str, order, pmax=6) -> TriSeries:
    """Closed forms of the lowest coefficients of the untwisted series.

    t-side: 1 / (2 Theta(q, p)^2 Delta_2(q)); q-side: E_4(t^2) / (2 Theta(t, p)^2 Delta(t)).
    """
    order = Fraction(order)
    if side == "t":
        th = theta_sq_inverse(order + 2, pmax)
        return series_mul(th, _inverse_delta(2, order + 1)).scale(Fraction(1, 2)).truncate(qmax=order, pmax=pmax)
    if side == "q":
        th = theta_sq_inverse(order + 2, pmax)
        e4 = frac_substitute(eisenstein(4, order + 2), "q", (2, 0, 1)).truncate(qmax=order + 2)
        out = series_mul(series_mul(th, e4), _inverse_delta(1, order + 1))
        return rename_q_to_t(out.scale(Fraction(1, 2)).truncate(qmax=order, pmax=pmax))
    raise DTError("side must be 't' or 'q'")


# ---------------------------------------------------------------------------
# orbifold Hilbert schemes and diagonal curves
# ---------------------------------------------------------------------------


def hilb_orbifold_gen(N: int, qmax, which: str = "K3") -> TriSeries:
    """sum_n e(Hilb^n) q^n = prod_{d | N} prod_k (1 - q^((N/d) k))^(-e_d)."""
    table = EulerTable(N)
    if which == "K3":
        e = table.e_d
    elif which == "U":
        e = table.e_d_open()
    else:
        raise DTError("which must be 'K3' or 'U'")
    factors: dict = {}
    qmax = Fraction(qmax)
    for d, ed in e.items():
        step = N // d
        k = 1
        while step * k <= qmax:
            key = (step * k, 0, 0)
            factors[key] = factors.get(key, 0) - ed
            k += 1
    return weighted_product(factors, qmax=qmax)


def diagonal_count(N: int, dmax: int) -> list[int]:
    """delta(1..dmax) from sum delta(d) q^d = (-2 / phi_2(N)) sum_{m | N} mu(m) (E_2(q^m) - 1)."""
    e2 = eisenstein(2, dmax)
    total = TriSeries.zero(qmax=dmax)
    for m in divisors(N):
        mu = mobius(m)
        if mu:
            em = frac_substitute(e2, "q", (m, 0, 1)).truncate(qmax=dmax)
            total = total + (em - TriSeries.one()).scale(mu)
    total = total.scale(Fraction(-2, phi_d(2, N)))
    out = []
    for d in range(1, dmax + 1):
        v = normalize(total.coefficient(d, 0, 0))
        if not isinstance(v, int):
            raise DTError(f"delta({d}) = {v} is not an integer")
        out.append(v)
    return out


def fiber_cross_check(N: int) -> bool:
    """The I_n fiber counts agree with the stabilizer Euler numbers e_d (d = n)."""
    table = EulerTable(N)
    return table.fibers == table.e_d


# ---------------------------------------------------------------------------
# rational functions in p^(1/2)
# ---------------------------------------------------------------------------


def _poly_trim(a: dict) -> dict:
    return {k: v for k, v in a.items() if v}


def _poly_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for i, x in a.items():
        for j, y in b.items():
            out[i + j] = out.get(i + j, 0) + x * y
    return _poly_trim(out)


def _poly_add(a: dict, b: dict) -> dict:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + v
    return _poly_trim(out)


def _poly_divmod(a: dict, b: dict) -> tuple[dict, dict]:
    """Division of ordinary polynomials (non-negative exponents)."""
    a = dict(a)
    db = max(b)
    lead = Fraction(b[db])
    quo: dict = {}
    while a and max(a) >= db:
        da = max(a)
        c = a[da] / lead
        quo[da - db] = c
        for k, v in b.items():
            a[k + da - db] = a.get(k + da - db, 0) - c * v
        a = _poly_trim(a)
    return quo, a


def _poly_gcd(a: dict, b: dict) -> dict:
    while b:
        _, r = _poly_divmod(a, b)
        a, b = b, r
    lead = Fraction(a[max(a)])
    return {k: v / lead for k, v in a.items()}


def _shift_to_poly(a: dict) -> tuple[dict, int]:
    lo = min(a)
    return {k - lo: v for k, v in a.items()}, lo


@dataclass(frozen=True)
class RationalP:
    """num / den with both Laurent polynomials in s = p^(1/2), stored as {exponent: coefficient}."""

    num: tuple[tuple[int, Rational], ...]
    den: tuple[tuple[int, Rational], ...]

    @classmethod
    def make(cls, num: dict, den: dict) -> "RationalP":
        num = _poly_trim(num)
        den = _poly_trim(den)
        if not den:
            raise ZeroDivisionError("zero denominator")
        if not num:
            return cls((), ((0, 1),))
        pn, ln = _shift_to_poly(num)
        pd, ld = _shift_to_poly(den)
        g = _poly_gcd(pn, pd)
        pn, _ = _poly_divmod(pn, g)
        pd, _ = _poly_divmod(pd, g)
        lead = Fraction(pd[max(pd)])
        shift = ln - ld
        n = {k + shift: normalize(v / lead) for k, v in pn.items()}
        d = {k: normalize(v / lead) for k, v in pd.items()}
        return cls(tuple(sorted(_poly_trim(n).items())), tuple(sorted(d.items())))

    @classmethod
    def laurent(cls, terms: dict) -> "RationalP":
        return cls.make(terms, {0: 1})

    def __add__(self, other: "RationalP") -> "RationalP":
        n1, d1 = dict(self.num), dict(self.den)
        n2, d2 = dict(other.num), dict(other.den)
        return RationalP.make(_poly_add(_poly_mul(n1, d2), _poly_mul(n2, d1)), _poly_mul(d1, d2))

    def __neg__(self) -> "RationalP":
        return RationalP(tuple((k, -v) for k, v in self.num), self.den)

    def __sub__(self, other: "RationalP") -> "RationalP":
        return self + (-other)

    def __mul__(self, other: "RationalP") -> "RationalP":
        return RationalP.make(_poly_mul(dict(self.num), dict(other.num)), _poly_mul(dict(self.den), dict(other.den)))

    def scale(self, c) -> "RationalP":
        return RationalP.make({k: v * c for k, v in self.num}, dict(self.den))

    def invert_variable(self) -> "RationalP":
        """s -> 1/s."""
        return RationalP.make({-k: v for k, v in self.num}, {-k: v for k, v in self.den})

    def is_zero(self) -> bool:
        return not self.num

    def __str__(self) -> str:
        def show(p):
            return " + ".join(f"{v}*s^{k}" for k, v in p) or "0"

        return f"({show(self.num)}) / ({show(self.den)})"


ONE_MINUS_P = {0: 1, 2: -1}


@dataclass(frozen=True)
class Partition:
    parts: tuple[int, ...]

    def __post_init__(self):
        if any(x <= 0 for x in self.parts) or any(a < b for a, b in zip(self.parts, self.parts[1:])):
            raise DTError(f"{self.parts} is not a partition")

    @property
    def size(self) -> int:
        return sum(self.parts)

    def transpose(self) -> "Partition":
        if not self.parts:
            return self
        return Partition(tuple(sum(1 for x in self.parts if x > i) for i in range(self.parts[0])))


def partitions(n: int, largest: Optional[int] = None) -> Iterator[Partition]:
    if largest is None:
        largest = n
    if n == 0:
        yield Partition(())
        return
    for first in range(min(n, largest), 0, -1):
        for rest in partitions(n - first, first):
            yield Partition((first,) + rest.parts)


def vertex_e_lambda(lam: Partition) -> RationalP:
    """E_lambda(y) = sum_i y^(-lambda_i + i - 1/2), resummed; exponents are in s = y^(1/2)."""
    finite = {}
    for i, part in enumerate(lam.parts, start=1):
        e = 2 * (i - part) - 1
        finite[e] = finite.get(e, 0) + 1
    ell = len(lam.parts)
    tail = RationalP.make({2 * ell + 1: 1}, ONE_MINUS_P)
    return RationalP.laurent(finite) + tail if finite else tail


def block_okounkov_sides(N: int, M: int, perturb: Optional[Partition] = None) -> tuple[RationalP, RationalP]:
    """Both sides of the q^(N M) coefficient of the vertex identity."""
    delta = 1 if N == 1 else 0
    lhs = RationalP.laurent({})
    for lam in partitions(M):
        e = vertex_e_lambda(lam)
        e_inv = e.invert_variable()
        if perturb is not None and lam == perturb:
            e = e * RationalP.laurent({1: 1})
        lhs = lhs + RationalP.laurent({0: -delta}) + e * e_inv
    rhs = RationalP.laurent({})
    counts = _partition_counts(M)
    for a in range(M + 1):
        b = M - a
        fb = _bo_coefficient(b)
        term = fb
        if b == 0:
            term = RationalP.laurent({0: -delta}) + fb
        rhs = rhs + term.scale(counts[a])
    return lhs, rhs


def _partition_counts(M: int) -> list[int]:
    counts = [1] + [0] * M
    for k in range(1, M + 1):
        for n in range(k, M + 1):
            counts[n] += counts[n - k]
    return counts


def _bo_coefficient(b: int) -> RationalP:
    """q^b coefficient of F(p, 1/p; q) = -p/(1-p)^2 - sum_d sum_{k|d} k (p^k + p^-k) q^d."""
    if b == 0:
        return RationalP.make({2: -1}, {0: 1, 2: -2, 4: 1})
    terms: dict = {}
    for k in divisors(b):
        terms[2 * k] = terms.get(2 * k, 0) - k
        terms[-2 * k] = terms.get(-2 * k, 0) - k
    return RationalP.laurent(terms)


def block_okounkov_check(N: int, mmax: int, perturb: Optional[Partition] = None) -> Optional[int]:
    """None when every q-order |lambda| <= mmax agrees, else the first failing size."""
    for M in range(mmax + 1):
        lhs, rhs = block_okounkov_sides(N, M, perturb)
        if not (lhs - rhs).is_zero():
            return M
    return None


# ---------------------------------------------------------------------------
# DT classes and the multiple cover rule
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DTClass:
    N: int
    n: int
    s: Fraction
    d: int
    div: int = 1
    twisted: bool = False

    def __post_init__(self):
        s = Fraction(self.s)
        object.__setattr__(self, "s", s)
        if self.div < 1:
            raise DTError("divisibility must be positive")
        if self.d < 0:
            raise DTError("d must be non-negative")
        if self.twisted and (2 * s).denominator != 1:
            raise DTError("twisted classes have s in (1/2)Z")
        if not self.twisted and s.denominator != 1:
            raise DTError("untwisted classes have integral s")


Accessor = Callable[[str, int, Fraction, int], Rational]


def multiple_cover(primitive: Accessor, cls: DTClass) -> Rational:
    """DT of a possibly imprimitive class from primitive invariants.

    ``primitive(kind, n, s, d)`` returns the primitive invariant of kind
    'untw' or 'tw'.  k ranges over divisors of gcd(n, div), with every k | 0.
    """
    total = Fraction(0)
    for k in divisors(cls.div):
        if cls.n % k:
            continue
        s_k = cls.s / (k * k)
        if not cls.twisted:
            kind = "untw"
        else:
            kind = "untw" if (cls.div // k) % 2 == 0 else "tw"
        total += Fraction(1, k) * primitive(kind, cls.n // k, s_k, cls.d)
    return normalize(total)


def series_accessor(untw: Optional[TriSeries], tw: Optional[TriSeries]) -> Accessor:
    """Read DT^kind_(n, s, d) as (-1)^n times the coefficient of q^(d-1) t^s p^n."""

    def get(kind: str, n: int, s: Fraction, d: int):
        series = untw if kind == "untw" else tw
        if series is None:
            raise MissingCoefficientError(f"no {kind} series supplied")
        if not series.known(d - 1, s, n):
            raise MissingCoefficientError(f"{kind} coefficient (n={n}, s={s}, d={d}) is outside the computed window")
        return (-1) ** (n % 2) * series.coefficient(d - 1, s, n)

    return get


def dt_rows(series: TriSeries, N: int, kind: str) -> list[tuple[int, str, int, Fraction, int, Rational]]:
    """(N, kind, n, s, d, DT) for every stored coefficient, sorted."""
    rows = []
    for q, t, p, v in series.sorted_terms():
        if p.denominator != 1 or (q + 1).denominator != 1:
            continue
        n = int(p)
        rows.append((N, kind, n, t, int(q + 1), (-1) ** (n % 2) * v))
    rows.sort(key=lambda r: (r[4], r[3], r[2]))
    return rows


def dt_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["N", "kind", "n", "s", "d", "value"])
    for N, kind, n, s, d, v in rows:
        w.writerow([N, kind, n, str(s), d, str(v)])
    return buf.getvalue()


def dt_json(rows) -> str:
    return json.dumps(
        [{"N": N, "kind": kind, "n": n, "s": str(s), "d": d, "value": str(v)} for N, kind, n, s, d, v in rows],
        separators=(",", ":"),
    )
