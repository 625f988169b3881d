"""Twisted-twined elliptic genera of K3 for automorphisms of order N = 1..8.

Every genus is stored as ``alpha * A + B * g(tau)`` with ``A = phi_{0,1}/4``,
``B = phi_{-2,1}`` and ``g`` a combination of level Eisenstein series
evaluated at fractional linear arguments.  Keeping the one-variable part
``g`` separate makes the discrete Fourier transform and the exponent table
cheap: both act on ``alpha`` and ``g`` only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

from .classical import eisenstein_level, jacobi_basic
from .scalars import (
    NotRationalError,
    as_rational,
    normalize,
    root_of_unity_scalar,
)
from .series import TriSeries, frac_substitute, series_mul
from .tables import COINVARIANT_RANK, LEVELS

F = Fraction


class GeneraError(ValueError):
    pass


class TableInconsistencyError(GeneraError):
    pass


class DepthError(GeneraError):
    pass


@dataclass(frozen=True)
class EisensteinTerm:
    """coeff * E_M((a tau + b) / c) for the level-M weight-two Eisenstein series."""

    coeff: Fraction
    level: int
    rule: tuple[int, int, int] = (1, 0, 1)


@dataclass(frozen=True)
class GenusEntry:
    """F = a_coeff * A + B * sum(terms)."""

    a_coeff: Fraction
    terms: tuple[EisensteinTerm, ...]
    case: str


def _t(coeff, level, rule=(1, 0, 1)) -> EisensteinTerm:
    return EisensteinTerm(F(coeff), level, rule)


def _inverse_mod(a: int, n: int) -> int:
    return pow(a, -1, n)


def _solve_mult(r: int, s: int, N: int, count: int) -> int:
    """The parameter k in 0..count-1 with r k = s (mod N)."""
    for k in range(count):
        if (r * k - s) % N == 0:
            return k
    raise TableInconsistencyError(f"no k with {r} k = {s} mod {N}")


def _entry_prime(N: int, r: int, s: int) -> GenusEntry:
    if r == 0 and s == 0:
        return GenusEntry(F(8, N), (), "F(0,0) = 8A/N")
    if r == 0:
        return GenusEntry(F(8, N * (N + 1)), (_t(F(-2, N + 1), N),), "F(0,s)")
    k = (s * _inverse_mod(r, N)) % N
    return GenusEntry(
        F(8, N * (N + 1)),
        (_t(F(2, N * (N + 1)), N, (1, k, N)),),
        f"F(r,rk) with k={k}",
    )


def _entry_4(r: int, s: int) -> GenusEntry:
    if (r, s) == (0, 0):
        return GenusEntry(F(2), (), "F(0,0) = 2A")
    if r == 0 and s in (1, 3):
        return GenusEntry(F(1, 3), (_t(F(1, 12), 2), _t(F(-1, 2), 4)), "F(0,1) = F(0,3)")
    if r == 0 and s == 2:
        return GenusEntry(F(2, 3), (_t(F(-1, 3), 2),), "F(0,2)")
    if r in (1, 3):
        k = _solve_mult(r, s, 4, 4)
        return GenusEntry(
            F(1, 3),
            (_t(F(-1, 24), 2, (1, k, 2)), _t(F(1, 8), 4, (1, k, 4))),
            f"F(1,s) = F(3,3s) with s={k}",
        )
    if r == 2 and s in (1, 3):
        return GenusEntry(F(1, 3), (_t(F(-5, 12), 2), _t(F(1, 2), 4)), "F(2,1) = F(2,3)")
    if r == 2 and s in (0, 2):
        k = s // 2
        return GenusEntry(F(2, 3), (_t(F(1, 6), 2, (1, k, 2)),), f"F(2,2s) with s={k}")
    raise TableInconsistencyError(f"no table entry for N=4, (r,s)=({r},{s})")


def _entry_6(r: int, s: int) -> GenusEntry:
    if (r, s) == (0, 0):
        return GenusEntry(F(4, 3), (), "F(0,0) = 4A/3")
    if r == 0:
        if s in (1, 5):
            return GenusEntry(
                F(1, 9), (_t(F(1, 36), 2), _t(F(1, 12), 3), _t(F(-5, 12), 6)), "F(0,1) = F(0,5)"
            )
        if s in (2, 4):
            return GenusEntry(F(1, 3), (_t(F(-1, 4), 3),), "F(0,2) = F(0,4)")
        return GenusEntry(F(4, 9), (_t(F(-2, 9), 2),), "F(0,3)")
    if r in (1, 5):
        k = _solve_mult(r, s, 6, 6)
        return GenusEntry(
            F(1, 9),
            (_t(F(-1, 72), 2, (1, k, 2)), _t(F(-1, 36), 3, (1, k, 3)), _t(F(5, 72), 6, (1, k, 6))),
            f"F(1,k) = F(5,5k) with k={k}",
        )
    if r in (2, 4) and s % 2 == 1:
        if r == 2:
            k = (s - 1) // 2
            shift = k + 2
            case = f"F(2,2k+1) with k={k}"
        else:
            k = _solve_mult(4, s - 1, 6, 3)
            shift = k + 1
            case = f"F(4,4k+1) with k={k}"
        return GenusEntry(
            F(1, 9),
            (_t(F(1, 36), 3, (1, shift, 3)), _t(F(1, 36), 2), _t(F(-1, 36), 2, (1, shift, 3))),
            case,
        )
    if r in (2, 4):
        k = _solve_mult(r, s, 6, 3)
        return GenusEntry(F(1, 3), (_t(F(1, 12), 3, (1, k, 3)),), f"F(2r,2rk) with k={k}")
    if r == 3 and s in (1, 5):
        return GenusEntry(
            F(1, 9),
            (_t(F(-1, 12), 3), _t(F(-1, 72), 2, (1, 1, 2)), _t(F(1, 8), 2, (3, 1, 2))),
            "F(3,1) = F(3,5)",
        )
    if r == 3 and s in (2, 4):
        return GenusEntry(
            F(1, 9),
            (_t(F(-1, 12), 3), _t(F(-1, 72), 2, (1, 0, 2)), _t(F(1, 8), 2, (3, 0, 2))),
            "F(3,2) = F(3,4)",
        )
    if r == 3 and s in (0, 3):
        k = s // 3
        return GenusEntry(F(4, 9), (_t(F(1, 9), 2, (1, k, 2)),), f"F(3,3k) with k={k}")
    raise TableInconsistencyError(f"no table entry for N=6, (r,s)=({r},{s})")


def _entry_8(r: int, s: int) -> GenusEntry:
    if (r, s) == (0, 0):
        return GenusEntry(F(1), (), "F(0,0) = A")
    if r == 0:
        if s % 2 == 1:
            return GenusEntry(F(1, 12), (_t(F(1, 16), 4), _t(F(-7, 24), 8)), "F(0,odd)")
        if s in (2, 6):
            return GenusEntry(F(1, 6), (_t(F(1, 24), 2), _t(F(-1, 4), 4)), "F(0,2) = F(0,6)")
        return GenusEntry(F(1, 3), (_t(F(-1, 6), 2),), "F(0,4)")
    if r % 2 == 1:
        k = _solve_mult(r, s, 8, 8)
        return GenusEntry(
            F(1, 12),
            (_t(F(-1, 64), 4, (1, k, 4)), _t(F(7, 192), 8, (1, k, 8))),
            f"F(r,rk), r odd, k={k}",
        )
    if r in (2, 6) and s % 2 == 1:
        if (r, s) in ((2, 1), (6, 3), (2, 5), (6, 7)):
            b = 1
        else:
            b = 3
        return GenusEntry(
            F(1, 12),
            (_t(F(-1, 24), 2, (2, 0, 1)), _t(F(1, 16), 4, (2, b, 4))),
            f"F(2,{b}) class",
        )
    if r in (2, 6):
        k = _solve_mult(r, s, 8, 4)
        return GenusEntry(
            F(1, 6),
            (_t(F(-1, 48), 2, (1, k, 2)), _t(F(1, 16), 4, (1, k, 4))),
            f"F(2,2s) = F(6,6s) with s={k}",
        )
    if r == 4 and s in (0, 4):
        k = s // 4
        return GenusEntry(F(1, 3), (_t(F(1, 12), 2, (1, k, 2)),), f"F(4,4s) with s={k}")
    if r == 4 and s in (2, 6):
        return GenusEntry(F(1, 6), (_t(F(-1, 8), 2), _t(F(1, 6), 2, (2, 0, 1))), "F(4,2) = F(4,6)")
    if r == 4:
        return GenusEntry(
            F(1, 12),
            (_t(F(1, 6), 2, (4, 0, 1)), _t(F(-1, 12), 2, (2, 0, 1)), _t(F(-1, 16), 4)),
            "F(4,2k+1)",
        )
    raise TableInconsistencyError(f"no table entry for N=8, (r,s)=({r},{s})")


def genus_entry(N: int, r: int, s: int) -> GenusEntry:
    """The tabulated expression for F^(r,s) at level N (indices taken mod N)."""
    if N not in LEVELS:
        raise GeneraError(f"level {N} is not tabulated")
    r %= N
    s %= N
    if N in (1, 2, 3, 5, 7):
        return _entry_prime(N, r, s)
    if N == 4:
        return _entry_4(r, s)
    if N == 6:
        return _entry_6(r, s)
    return _entry_8(r, s)


def _check_phase_orders() -> None:
    """Every root of unity in the tables must live in Q(zeta_N)."""
    for N in LEVELS:
        for r in range(N):
            for s in range(N):
                for term in genus_entry(N, r, s).terms:
                    a, b, c = term.rule
                    if N % c:
                        raise AssertionError(f"level {N} table uses zeta_{c}")


_check_phase_orders()


# ---------------------------------------------------------------------------
# expansions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JacobiExpansion:
    """Fourier coefficients of a weight-0 index-1 Jacobi form, in q and p.

    ``series`` is exact to q-order ``series.qmax``; ``coeffs`` keys are
    (N * n, j).
    """

    level: int
    indices: tuple[int, int]
    series: TriSeries
    kind: str = "F"
    weight: int = 0
    index: int = 1

    @property
    def coeffs(self) -> dict[tuple[int, int], object]:
        N = self.level
        out = {}
        for (n, _, j), v in self.series.terms().items():
            out[(int(n * N), int(j))] = v
        return out

    def coeff(self, n, j):
        return self.series.coefficient(Fraction(n), 0, j)

    @property
    def qmax(self):
        return self.series.qmax


@lru_cache(maxsize=None)
def _eisenstein_piece(N: int, level: int, rule: tuple[int, int, int], qmax: Fraction) -> TriSeries:
    a, b, c = rule
    depth = Fraction(qmax) * c / a
    base = eisenstein_level(level, "E", int(depth) + 1)
    return frac_substitute(base, "q", (a, b, c), order=N).truncate(qmax=qmax)


@lru_cache(maxsize=None)
def modular_part(N: int, r: int, s: int, qmax: Fraction) -> TriSeries:
    """The one-variable series g with F^(r,s) = alpha A + B g."""
    entry = genus_entry(N, r, s)
    out = TriSeries.zero(qmax=qmax)
    for term in entry.terms:
        out = out + _eisenstein_piece(N, term.level, term.rule, qmax).scale(term.coeff)
    return out.truncate(qmax=qmax)


def _jacobi_combination(alpha, g: TriSeries, qmax: Fraction) -> TriSeries:
    A = jacobi_basic("A", qmax)
    B = jacobi_basic("B", qmax)
    out = A.scale(alpha) if alpha else TriSeries.zero(qmax=qmax)
    if not g.is_zero():
        out = out + series_mul(B, g)
    return out.truncate(qmax=qmax)


def twisted_twined(N: int, r: int, s: int, qmax) -> JacobiExpansion:
    """F^(r,s)_N as an exact expansion (coefficients in Q(zeta_N))."""
    qmax = Fraction(qmax)
    r %= N
    s %= N
    entry = genus_entry(N, r, s)
    g = modular_part(N, r, s, qmax)
    return JacobiExpansion(N, (r, s), _jacobi_combination(entry.a_coeff, g, qmax), "F")


def _to_rational(x, what: str):
    try:
        return as_rational(x)
    except NotRationalError as exc:
        raise TableInconsistencyError(f"{what} is not rational: {x}") from exc


@lru_cache(maxsize=None)
def dft_parts(N: int, r: int, ell: int, qmax: Fraction) -> tuple[Fraction, TriSeries]:
    """(alpha_hat, g_hat) with hat F^(r,l) = alpha_hat A + B g_hat, both checked rational."""
    r %= N
    ell %= N
    alpha = 0
    g = TriSeries.zero(qmax=qmax)
    for s in range(N):
        zeta = root_of_unity_scalar(N, -s * ell, N if N > 2 else None)
        alpha = alpha + genus_entry(N, r, s).a_coeff * zeta
        g = g + modular_part(N, r, s, qmax).scale(zeta)
    alpha = _to_rational(alpha, f"A-coefficient of hat F^({r},{ell}) at level {N}")
    coeffs = {}
    for key, v in g.coeffs.items():
        coeffs[key] = _to_rational(v, f"coefficient {key} of hat F^({r},{ell}) at level {N}")
    g_hat = TriSeries(coeffs, g.denoms, g.qmax, g.tmax, g.pmin, g.pmax, g.qlo, g.tlo)
    return alpha, g_hat


def dft_hat(N: int, r: int, ell: int, qmax) -> JacobiExpansion:
    """hat F^(r,l) = sum_s zeta_N^(-s l) F^(r,s), with every coefficient reduced to a rational."""
    qmax = Fraction(qmax)
    alpha, g = dft_parts(N, r % N, ell % N, qmax)
    return JacobiExpansion(N, (r % N, ell % N), _jacobi_combination(alpha, g, qmax), "Fhat")


# ---------------------------------------------------------------------------
# exponent table
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _basic_columns(nmax: int) -> dict[str, dict[int, dict[int, object]]]:
    """Columns j = 0 and j = 1 of A and B: {name: {b: {n: coefficient}}}."""
    out = {}
    for name in ("A", "B"):
        s = jacobi_basic(name, nmax)
        cols = {0: {}, 1: {}}
        for (n, t, j), v in s.terms().items():
            if j in (0, 1) and n.denominator == 1:
                cols[int(j)][int(n)] = v
        out[name] = cols
    return out


@dataclass
class ChatTable:
    """Integer exponents hat c_b^(r,l)(D) keyed by (r, l, b, N * D)."""

    N: int
    dmax: Fraction
    entries: dict[tuple[int, int, int, int], int]

    def value(self, r: int, ell: int, b: int, d_scaled: int) -> int:
        N = self.N
        if 4 * d_scaled < -4 * N:
            return 0
        if Fraction(d_scaled, N) > self.dmax:
            raise DepthError(
                f"exponent table at level {N} holds D <= {self.dmax}; "
                f"this lookup needs Dmax >= {Fraction(d_scaled, N)}"
            )
        return self.entries.get((r % N, ell % N, b % 2, d_scaled), 0)

    def lookup(self, r: int, ell: int, b: int, D) -> int:
        D = Fraction(D)
        ds = D * self.N
        if ds.denominator != 1:
            return 0
        return self.value(r, ell, b, int(ds))

    def is_symmetric(self) -> Optional[tuple[int, int, int, int]]:
        """None when hat c^(r,l) = hat c^(l,r) everywhere, else the first offending key."""
        for (r, ell, b, d), v in sorted(self.entries.items()):
            if self.entries.get((ell, r, b, d), 0) != v:
                return (r, ell, b, d)
        return None

    def to_json_obj(self) -> dict:
        return {
            "N": self.N,
            "Dmax": str(self.dmax),
            "entries": [[r, ell, b, d, v] for (r, ell, b, d), v in sorted(self.entries.items())],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), separators=(",", ":"))


@lru_cache(maxsize=None)
def chat_table(N: int, dmax) -> ChatTable:
    """All hat c_b^(r,l)(D) with D <= dmax, checked integral and symmetric in (r, l)."""
    dmax = Fraction(dmax)
    # hat c_b(D) is the coefficient of q^n p^b with n = (D + b) / 4
    nmax = (dmax + 1) / 4
    n_int = int(nmax) + 1
    cols = _basic_columns(n_int)
    entries: dict = {}
    for r in range(N):
        for ell in range(N):
            alpha, g = dft_parts(N, r, ell, Fraction(n_int))
            gterms = [(m, v) for (m, _, _), v in g.terms().items()]
            for b in (0, 1):
                colA = cols["A"][b]
                colB = cols["B"][b]
                acc: dict[Fraction, object] = {}
                if alpha:
                    for n, v in colA.items():
                        acc[Fraction(n)] = acc.get(Fraction(n), 0) + alpha * v
                for m, gv in gterms:
                    for n, v in colB.items():
                        key = m + n
                        acc[key] = acc.get(key, 0) + gv * v
                for n, v in acc.items():
                    if n > nmax:
                        continue
                    v = normalize(v)
                    if not v:
                        continue
                    if not isinstance(v, int):
                        raise TableInconsistencyError(
                            f"hat c_{b}^({r},{ell}) at n={n} is not an integer: {v}"
                        )
                    d = (4 * n - b) * N
                    if d.denominator != 1:
                        raise TableInconsistencyError("non-integral scaled discriminant")
                    entries[(r, ell, b, int(d))] = v
    table = ChatTable(N, dmax, entries)
    bad = table.is_symmetric()
    if bad is not None:
        raise TableInconsistencyError(f"exponent table at level {N} is not symmetric at {bad}")
    return table


def discriminant_consistency(N: int, r: int, ell: int, qmax) -> Optional[tuple]:
    """Check that the coefficient of q^n p^j in hat F^(r,l) is hat c_{j mod 2}(4n - j^2).

    Returns None on success or the first offending (n, j).
    """
    qmax = Fraction(qmax)
    fhat = dft_hat(N, r, ell, qmax)
    dmax = 4 * qmax + 1
    table = chat_table(N, dmax)
    for (n, _, j), v in sorted(fhat.series.terms().items()):
        D = 4 * n - j * j
        if D < -1:
            return (n, j)
        if table.lookup(r, ell, int(j) % 2, D) != v:
            return (n, j)
    # every table entry with small D should also appear
    for (rr, ll, b, d), v in table.entries.items():
        if (rr, ll) != (r % N, ell % N):
            continue
        n = (Fraction(d, N) + b) / 4
        if n <= qmax and fhat.series.coefficient(n, 0, b) != v:
            return (n, b)
    return None


def chi_y_genus_value(N: int) -> TriSeries:
    """2(p + p^-1) + 20 - rank of the coinvariant lattice."""
    rank = COINVARIANT_RANK[N]
    return TriSeries.p_laurent({1: 2, 0: 20 - rank, -1: 2})


def translation_invariant(N: int, s: int, qmax) -> bool:
    """F^(0,s)(tau + 1) = F^(0,s)(tau): the (0, s) row only carries integer q-powers."""
    f = twisted_twined(N, 0, s, qmax)
    return all(n.denominator == 1 for (n, _, _) in f.series.terms())
