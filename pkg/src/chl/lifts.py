"""Siegel modular forms of degree two as (q, t, p) expansions.

Two constructions are provided.  The multiplicative (Borcherds) lift is a
product over (1 - q^l t^k p^j) with exponents read from an exponent table;
it is evaluated on a dense numpy array of Python integers, one binomial
expansion per factor.  The additive lift sums a^(w-1) c(mn/a^2, r/a) over
common divisors for a seed Jacobi form of index one (or two).
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Callable, Mapping, Optional

import numpy as np

from .classical import (
    _wp_polynomial_part,
    eisenstein,
    eisenstein_level,
    jacobi_basic,
    k_squared,
    theta_body_squared,
)
from .genera import ChatTable, DepthError, chat_table
from .lattice import cache_dir, siegel_generators
from .series import TriSeries, frac_substitute, scale_all, series_mul
from .tables import lift_weight


class LiftError(ValueError):
    pass


# ---------------------------------------------------------------------------
# multiplicative lifts
# ---------------------------------------------------------------------------


def _binomial_series(c: int, imax: int) -> list[int]:
    """Coefficients of (1 - x)^c up to x^imax, for any integer c."""
    out = [1]
    coef = 1
    for i in range(1, imax + 1):
        coef = coef * (c - i + 1) // i if c >= 0 else coef * (-c + i - 1) // i
        if c >= 0:
            if i > c:
                break
            out.append(coef * (-1) ** i)
        else:
            out.append(coef)
    return out


def _dense_product(
    exponent: Callable[[int, int, int], int],
    qs: int,
    ts: int,
    tden: int,
) -> TriSeries:
    """prod (1 - q^l t^(K/tden) p^j)^exponent(l, K, j) over l <= qs, K <= ts.

    The factor family is the one of a Borcherds product: l, K >= 0, j < 0
    when l = K = 0, and |j| limited by 4 K l / tden - j^2 >= -1.
    """
    # each factor with l + K >= 1 moves |j| by at most 1 + l + K, the
    # pure factor (1 - 1/p)^c moves it by at most 2; one spare slot on each
    # side lets the edge test below detect an overflow
    pm = 3 + 2 * (qs + ts)
    width = 2 * pm + 1
    arr = np.zeros((qs + 1, ts + 1, width), dtype=object)
    arr[...] = 0
    arr[0, 0, pm] = 1

    c = exponent(0, 0, -1)
    if c < 0:
        raise LiftError("the p^-1 factor must have a non-negative exponent")
    for i, b in enumerate(_binomial_series(c, c)):
        if i:
            arr[0, 0, pm - i] += b

    for ell in range(qs + 1):
        for K in range(ts + 1):
            if ell == 0 and K == 0:
                continue
            jmax = math.isqrt(4 * K * ell // tden + 1) + 1
            for j in range(-jmax, jmax + 1):
                if 4 * K * ell - tden * j * j < -tden:
                    continue
                c = exponent(ell, K, j)
                if not c:
                    continue
                imax = min(qs // ell if ell else ts // K, ts // K if K else qs // ell)
                coeffs = _binomial_series(c, imax)
                if len(coeffs) == 1:
                    continue
                src = arr.copy()
                for i, b in enumerate(coeffs):
                    if i == 0 or not b:
                        continue
                    dq, dt, dp = ell * i, K * i, j * i
                    if dp >= 0:
                        arr[dq:, dt:, dp:] += b * src[: qs + 1 - dq, : ts + 1 - dt, : width - dp]
                    else:
                        arr[dq:, dt:, :dp] += b * src[: qs + 1 - dq, : ts + 1 - dt, -dp:]
    terms = {}
    nz = np.nonzero(arr != 0)
    for a, b, e in zip(*nz):
        terms[(int(a), int(b), int(e) - pm)] = int(arr[a, b, e])
    if arr[:, :, 0].any() or arr[:, :, -1].any():
        raise LiftError("p-range of the dense product was exceeded")
    return TriSeries(terms, (1, tden, 1), qs, Fraction(ts, tden), None, None, 0, 0)


def borcherds_lift(
    N: int,
    qmax,
    tmax,
    pmin=None,
    pmax=None,
    table: Optional[ChatTable] = None,
) -> TriSeries:
    """The multiplicative lift of the level-N twisted-twined genera.

    Exact for all monomials q^a t^b p^c with a <= qmax and b <= tmax.  A
    supplied exponent table must reach discriminant 4 (qmax - 1)(tmax - 1/N).
    """
    qmax = Fraction(qmax)
    tmax = Fraction(tmax)
    qs = math.floor(qmax) - 1
    ts = math.floor(tmax * N) - 1
    if qs < 0 or ts < 0:
        return TriSeries.zero(qmax=qmax, tmax=tmax).truncate(pmin=pmin, pmax=pmax)
    need = Fraction(4 * qs * ts, N)
    if table is None:
        table = chat_table(N, max(need, Fraction(1)))
    elif table.N != N:
        raise LiftError(f"exponent table is for level {table.N}, not {N}")
    elif table.dmax < need:
        raise DepthError(f"exponent table reaches D = {table.dmax}; the lift needs Dmax >= {need}")

    def exponent(ell, K, j):
        return table.value(K % N, ell % N, j % 2, 4 * K * ell - N * j * j)

    body = _dense_product(exponent, qs, ts, N)
    lead = TriSeries.monomial(1, Fraction(1, N), 1)
    out = series_mul(body, lead).truncate(qmax=qmax, tmax=tmax)
    return out.truncate(pmin=pmin, pmax=pmax) if (pmin is not None or pmax is not None) else out


@lru_cache(maxsize=None)
def _phi01_discriminant_table(dmax: int) -> dict[int, int]:
    """c(D) for 2 phi_{0,1} = sum c(4n - j^2) q^n p^j."""
    nmax = (dmax + 1) // 4 + 1
    phi = jacobi_basic("phi0-1", nmax)
    out = {}
    for (n, _, j), v in phi.terms().items():
        if j in (0, 1):
            out[int(4 * n - j * j)] = 2 * v
    return out


def igusa_product(qmax, tmax, pmin=None, pmax=None) -> TriSeries:
    """chi_10 as p q t prod (1 - p^k q^h t^d)^c(4hd - k^2) with c from 2 phi_{0,1}."""
    qmax = Fraction(qmax)
    tmax = Fraction(tmax)
    qs = math.floor(qmax) - 1
    ts = math.floor(tmax) - 1
    if qs < 0 or ts < 0:
        return TriSeries.zero(qmax=qmax, tmax=tmax)
    c = _phi01_discriminant_table(4 * qs * ts + 1)

    def exponent(h, d, k):
        return c.get(4 * h * d - k * k, 0)

    body = _dense_product(exponent, qs, ts, 1)
    out = series_mul(body, TriSeries.monomial(1, 1, 1)).truncate(qmax=qmax, tmax=tmax)
    return out.truncate(pmin=pmin, pmax=pmax) if (pmin is not None or pmax is not None) else out


# ---------------------------------------------------------------------------
# seeds for additive lifts
# ---------------------------------------------------------------------------


@lru_cache(maxsize=32)
def k2_wp(qmax) -> TriSeries:
    """K^2 wp as an exact polynomial in every q-layer: R + K^2 / 12 + K^2 (wp - 1/12 - p/(1-p)^2)."""
    k2 = k_squared(qmax)
    return theta_body_squared(qmax) + k2.scale(Fraction(1, 12)) + series_mul(k2, _wp_polynomial_part(qmax))


def _eisenstein_at(k: int, mult: int, qmax) -> TriSeries:
    e = eisenstein(k, int(qmax))
    if mult == 1:
        return e
    return frac_substitute(e, "q", (mult, 0, 1)).truncate(qmax=qmax)


@lru_cache(maxsize=32)
def seed_e41(qmax) -> TriSeries:
    """E_{4,1} = K^2 (E_4 wp - E_6 / 12)."""
    qmax = Fraction(qmax)
    return (
        series_mul(k2_wp(qmax), eisenstein(4, qmax))
        - series_mul(k_squared(qmax), eisenstein(6, qmax)).scale(Fraction(1, 12))
    ).truncate(qmax=qmax)


@lru_cache(maxsize=32)
def seed_g41(qmax) -> TriSeries:
    """G_{4,1} = K^2 (wp E_4(2 tau) - theta_D4^3 / 8 + E_4 theta_D4 / 24), theta_D4 = 1 + 24q + 24q^2 + ..."""
    qmax = Fraction(qmax)
    theta = eisenstein_level(2, "E", qmax)
    inner = (
        theta**3
    ).scale(Fraction(-1, 8)) + series_mul(eisenstein(4, qmax), theta).scale(Fraction(1, 24))
    return (
        series_mul(k2_wp(qmax), _eisenstein_at(4, 2, qmax)) + series_mul(k_squared(qmax), inner.truncate(qmax=qmax))
    ).truncate(qmax=qmax)


@lru_cache(maxsize=32)
def seed_chi10(qmax) -> TriSeries:
    """-phi_{-2,1} Delta = K^2 Delta."""
    from .classical import delta_N

    qmax = Fraction(qmax)
    return series_mul(k_squared(qmax), delta_N(1, qmax)).truncate(qmax=qmax)


@lru_cache(maxsize=32)
def seed_theta_e8(qmax) -> TriSeries:
    """Theta_{E8,y} = K^4 (wp^2 E_4 - wp E_6 / 6 + E_4^2 / 144), index two."""
    qmax = Fraction(qmax)
    kw = k2_wp(qmax)
    k2 = k_squared(qmax)
    e4 = eisenstein(4, qmax)
    e6 = eisenstein(6, qmax)
    out = series_mul(series_mul(kw, kw), e4)
    out = out - series_mul(series_mul(kw, k2), e6).scale(Fraction(1, 6))
    out = out + series_mul(series_mul(k2, k2), series_mul(e4, e4)).scale(Fraction(1, 144))
    return out.truncate(qmax=qmax)


# ---------------------------------------------------------------------------
# additive lifts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LiftSpec:
    """Description of a lifted Siegel form.

    For additive lifts the coefficient of q^m t^n p^r (not all zero) is
    ``multiplier * sum_a a^(weight-1) c(m' n / a^2, r / a)`` over common
    divisors a of (m', n, r) allowed by ``divisor_rule``, where m' = m/2
    when ``m_even`` is set (and odd m give zero) and m' = m otherwise.
    """

    name: str
    kind: str
    weight: int
    constant_term: object = 0
    divisor_rule: str = "all"
    m_even: bool = False
    multiplier: int = 1
    index: int = 1
    seed: Optional[Callable[[Fraction], TriSeries]] = field(default=None, compare=False)
    level: int = 1

    def __post_init__(self):
        if self.kind not in ("borcherds", "igusa_product", "additive"):
            raise LiftError(f"unknown lift kind {self.kind!r}")
        if self.divisor_rule not in ("all", "odd", "coprime"):
            raise LiftError(f"unknown divisor rule {self.divisor_rule!r}")
        if self.kind == "borcherds" and self.weight != lift_weight(self.level):
            raise LiftError("Borcherds lift weight must be ceil(24/(N+1)) - 2")

    def allows(self, a: int) -> bool:
        if self.divisor_rule == "odd":
            return a % 2 == 1
        if self.divisor_rule == "coprime":
            return math.gcd(a, self.level) == 1
        return True


LIFTS: dict[str, LiftSpec] = {
    "chi10": LiftSpec("chi10", "additive", 10, 0, "all", seed=seed_chi10),
    "E4_2": LiftSpec("E4_2", "additive", 4, 1, "all", multiplier=240, seed=seed_e41),
    "G4": LiftSpec("G4", "additive", 4, Fraction(-7, 240), "odd", seed=seed_g41),
    "F4": LiftSpec("F4", "additive", 4, Fraction(1, 240), "all", m_even=True, index=2, seed=seed_theta_e8),
}


def borcherds_spec(N: int) -> LiftSpec:
    return LiftSpec(f"Phi{N}", "borcherds", lift_weight(N), 0, "all", level=N)


def _divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def additive_lift(spec: LiftSpec, qmax, tmax, pmin=None, pmax=None) -> TriSeries:
    """Evaluate an additive lift on the box q-order <= qmax, t-order <= tmax."""
    if spec.kind != "additive" or spec.seed is None:
        raise LiftError(f"{spec.name} is not an additive lift")
    qm = math.floor(Fraction(qmax))
    tm = math.floor(Fraction(tmax))
    mq = qm // 2 if spec.m_even else qm
    depth = mq * tm
    seed = spec.seed(Fraction(max(depth, 1)))
    if seed.qmax is not None and seed.qmax < depth:
        raise DepthError(f"seed {spec.name} reaches q-order {seed.qmax}, lift needs {depth}")
    rows: dict[int, dict[int, object]] = {}
    for (n, _, j), v in seed.terms().items():
        if n.denominator != 1 or j.denominator != 1:
            raise LiftError("seed must have integral exponents")
        rows.setdefault(int(n), {})[int(j)] = v
    k1 = spec.weight - 1
    terms: dict = {}
    if spec.constant_term:
        terms[(0, 0, 0)] = spec.constant_term
    for m in range(qm + 1):
        if spec.m_even and m % 2:
            continue
        mp = m // 2 if spec.m_even else m
        for n in range(tm + 1):
            rmax = math.isqrt(4 * spec.index * mp * n) + 2
            lo = -rmax if pmin is None else max(-rmax, math.ceil(Fraction(pmin)))
            hi = rmax if pmax is None else min(rmax, math.floor(Fraction(pmax)))
            for r in range(lo, hi + 1):
                if m == 0 and n == 0 and r == 0:
                    continue
                g = math.gcd(math.gcd(mp, n), r)
                total = 0
                for a in _divisors(g):
                    if not spec.allows(a):
                        continue
                    row = rows.get(mp * n // (a * a))
                    if row is None:
                        continue
                    c = row.get(r // a, 0)
                    if c:
                        total += a**k1 * c
                if total:
                    terms[(m, n, r)] = spec.multiplier * total
    return TriSeries(terms, (1, 1, 1), qm, tm, None if pmin is None else Fraction(pmin),
                     None if pmax is None else Fraction(pmax), 0, 0)


def named_lift(name: str, qmax, tmax, pmin=None, pmax=None) -> TriSeries:
    if name not in LIFTS:
        raise LiftError(f"unknown lift {name!r}; choose from {sorted(LIFTS)}")
    return additive_lift(LIFTS[name], qmax, tmax, pmin, pmax)


def e4_2z(qmax, tmax, pmin=None, pmax=None) -> TriSeries:
    """E_4^(2)(2Z): every exponent of E_4^(2) doubled."""
    qmax = Fraction(qmax)
    tmax = Fraction(tmax)
    base = additive_lift(LIFTS["E4_2"], qmax / 2, tmax / 2)
    out = scale_all(base, 2).truncate(qmax=qmax, tmax=tmax)
    return out.truncate(pmin=pmin, pmax=pmax) if (pmin is not None or pmax is not None) else out


# ---------------------------------------------------------------------------
# generator identities
# ---------------------------------------------------------------------------

Polynomial = Mapping[tuple[str, ...], object]

IDENTITIES: dict[str, Polynomial] = {
    "chi10": {("Y", "W"): 1},
    "E4": {("X", "X"): 4, ("Y",): -3, ("Z",): 12288},
    "E4_2Z": {("X", "X"): Fraction(1, 4), ("Y",): Fraction(3, 4), ("Z",): -192},
    "G4": {("X", "X"): Fraction(1, 120), ("Y",): Fraction(-3, 80), ("Z",): Fraction(-12, 5)},
    "F4": {("X", "X"): Fraction(1, 960), ("Y",): Fraction(3, 960), ("Z",): Fraction(3072, 960), ("T",): 1},
}


def evaluate_polynomial(poly: Polynomial, generators: Mapping[str, TriSeries]) -> TriSeries:
    total = None
    for names, coef in poly.items():
        term = TriSeries.one()
        for name in names:
            term = series_mul(term, generators[name])
        term = term.scale(coef)
        total = term if total is None else total + term
    return total if total is not None else TriSeries.zero()


def generator_identity_check(
    form: TriSeries,
    poly: Polynomial,
    qmax,
    tmax,
    pmin=None,
    pmax=None,
    generators: Optional[Mapping[str, TriSeries]] = None,
):
    """(True, None) when form agrees with the generator polynomial on the box, else (False, monomial)."""
    if generators is None:
        generators = siegel_generators(qmax, tmax)
    rhs = evaluate_polynomial(poly, generators)
    diff = form.first_difference(rhs, qmax=qmax, tmax=tmax, pmin=pmin, pmax=pmax)
    return diff is None, diff


def form_by_name(name: str, qmax, tmax) -> TriSeries:
    """Forms appearing on the left of the generator identities."""
    if name == "chi10":
        return named_lift("chi10", qmax, tmax)
    if name == "E4":
        return named_lift("E4_2", qmax, tmax)
    if name == "E4_2Z":
        return e4_2z(qmax, tmax)
    if name in ("G4", "F4"):
        return named_lift(name, qmax, tmax)
    raise LiftError(f"no identity for {name!r}")


# ---------------------------------------------------------------------------
# disk cache
# ---------------------------------------------------------------------------


def _lift_cache_path(name: str, N: int, qmax, tmax, directory: Optional[Path]) -> Path:
    base = Path(directory) if directory is not None else cache_dir()
    key = f"{name}-N{N}-q{Fraction(qmax)}-t{Fraction(tmax)}".replace("/", "_")
    return base / "lifts" / f"{key}.json"


def cached_borcherds_lift(N: int, qmax, tmax, directory: Optional[Path] = None) -> TriSeries:
    """borcherds_lift memoized on disk in the TriSeries JSON format."""
    path = _lift_cache_path("borcherds", N, qmax, tmax, directory)
    if path.exists():
        try:
            return TriSeries.from_json(path.read_text())
        except (ValueError, KeyError, json.JSONDecodeError):
            pass
    out = borcherds_lift(N, qmax, tmax)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(f".{os.getpid()}.tmp")
    tmp.write_text(out.to_json())
    os.replace(tmp, path)
    return out
