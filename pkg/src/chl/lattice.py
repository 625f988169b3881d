"""Lattice enumeration and theta series.

Short vectors of a positive definite lattice are enumerated exactly using
an LDL^T decomposition of the Gram matrix over the rationals.  On top of
that sit the shifted A_n theta functions, the E_8 shells (with an on-disk
cache), representation numbers of binary forms by E_8, the index-two
Jacobi theta function of E_8 and the genus-two theta constants together
with the five generators built from them.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Iterator, Optional, Sequence

import numpy as np

from .series import TriSeries, series_mul, weighted_product


class LatticeError(ValueError):
    pass


class OutOfCacheError(LatticeError):
    pass


class UnsupportedCharacteristicError(LatticeError):
    pass


# ---------------------------------------------------------------------------
# lattice data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LatticeSpec:
    """Integral Gram matrix with an optional rational shift vector."""

    gram: tuple[tuple[int, ...], ...]
    shift: tuple[Fraction, ...] = ()
    name: str = ""

    def __post_init__(self):
        n = len(self.gram)
        if any(len(row) != n for row in self.gram):
            raise LatticeError("Gram matrix must be square")
        for i in range(n):
            for j in range(n):
                if self.gram[i][j] != self.gram[j][i]:
                    raise LatticeError("Gram matrix must be symmetric")
        if self.shift and len(self.shift) != n:
            raise LatticeError("shift vector has the wrong length")

    @property
    def rank(self) -> int:
        return len(self.gram)

    def shift_vector(self) -> tuple[Fraction, ...]:
        return self.shift if self.shift else tuple(Fraction(0) for _ in range(self.rank))

    def norm(self, v: Sequence) -> Fraction:
        """v^T G v."""
        g = self.gram
        n = self.rank
        return sum(Fraction(v[i]) * g[i][j] * v[j] for i in range(n) for j in range(n))

    def inner(self, u: Sequence, v: Sequence):
        g = self.gram
        n = self.rank
        return sum(u[i] * g[i][j] * v[j] for i in range(n) for j in range(n))


def cartan_a(n: int) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(2 if i == j else (-1 if abs(i - j) == 1 else 0) for j in range(n)) for i in range(n))


def _solve_rational(gram, rhs) -> list[Fraction]:
    """Solve G x = rhs exactly by Gaussian elimination."""
    n = len(gram)
    m = [[Fraction(x) for x in row] + [Fraction(rhs[i])] for i, row in enumerate(gram)]
    for col in range(n):
        piv = next(r for r in range(col, n) if m[r][col] != 0)
        m[col], m[piv] = m[piv], m[col]
        inv = 1 / m[col][col]
        m[col] = [x * inv for x in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[col])]
    return [m[i][n] for i in range(n)]


def a_n_lattice(n: int) -> LatticeSpec:
    """A_n with Cartan Gram matrix and shift v_n = C^-1 (1,...,1) / (n+1)."""
    if n < 1:
        raise LatticeError("A_n needs n >= 1")
    c = cartan_a(n)
    v = _solve_rational(c, [Fraction(1, n + 1)] * n)
    return LatticeSpec(c, tuple(v), name=f"A{n}")


def a_n_shift_norm(n: int) -> Fraction:
    """1/2 v_n^T C v_n, which equals n (n + 2) / (24 (n + 1))."""
    lat = a_n_lattice(n)
    return lat.norm(lat.shift) / 2


# Bourbaki labelling: simple roots a1..a8 with a2 attached to a4.
E8_GRAM: tuple[tuple[int, ...], ...] = (
    (2, 0, -1, 0, 0, 0, 0, 0),
    (0, 2, 0, -1, 0, 0, 0, 0),
    (-1, 0, 2, -1, 0, 0, 0, 0),
    (0, -1, -1, 2, -1, 0, 0, 0),
    (0, 0, 0, -1, 2, -1, 0, 0),
    (0, 0, 0, 0, -1, 2, -1, 0),
    (0, 0, 0, 0, 0, -1, 2, -1),
    (0, 0, 0, 0, 0, 0, -1, 2),
)

E8 = LatticeSpec(E8_GRAM, name="E8")


# ---------------------------------------------------------------------------
# exact short-vector enumeration
# ---------------------------------------------------------------------------


def ldl_decomposition(gram) -> tuple[list[list[Fraction]], list[Fraction]]:
    """G = L D L^T with L unit lower triangular, exactly over Q."""
    n = len(gram)
    L = [[Fraction(0)] * n for _ in range(n)]
    D = [Fraction(0)] * n
    for j in range(n):
        s = Fraction(gram[j][j]) - sum(L[j][k] ** 2 * D[k] for k in range(j))
        if s <= 0:
            raise LatticeError("Gram matrix is not positive definite")
        D[j] = s
        L[j][j] = Fraction(1)
        for i in range(j + 1, n):
            L[i][j] = (Fraction(gram[i][j]) - sum(L[i][k] * L[j][k] * D[k] for k in range(j))) / D[j]
    return L, D


def _integer_range(center: Fraction, radius_sq: Fraction) -> tuple[int, int]:
    """All integers x with (x - center)^2 <= radius_sq, as an inclusive range (may be empty)."""
    if radius_sq < 0:
        return 1, 0
    approx = math.sqrt(float(radius_sq))
    lo = math.floor(float(center) - approx) - 1
    hi = math.ceil(float(center) + approx) + 1
    while (lo - center) ** 2 > radius_sq and lo <= hi:
        lo += 1
    while (lo - 1 - center) ** 2 <= radius_sq:
        lo -= 1
    while (hi - center) ** 2 > radius_sq and hi >= lo:
        hi -= 1
    while (hi + 1 - center) ** 2 <= radius_sq:
        hi += 1
    return lo, hi


def short_vectors(lattice: LatticeSpec, bound) -> Iterator[tuple[tuple[int, ...], Fraction]]:
    """Yield (x, (x+v)^T G (x+v)) for all integer x with that norm <= bound."""
    bound = Fraction(bound)
    L, D = ldl_decomposition(lattice.gram)
    v = lattice.shift_vector()
    n = lattice.rank
    x = [0] * n

    def rec(i: int, remaining: Fraction):
        # center of coordinate i given the coordinates above it
        c = -sum(L[j][i] * (x[j] + v[j]) for j in range(i + 1, n)) - v[i]
        lo, hi = _integer_range(c, remaining / D[i])
        for xi in range(lo, hi + 1):
            x[i] = xi
            used = D[i] * (xi - c) ** 2
            rest = remaining - used
            if i == 0:
                yield tuple(x), bound - rest
            else:
                yield from rec(i - 1, rest)
        x[i] = 0

    if n == 0:
        yield (), Fraction(0)
        return
    yield from rec(n - 1, bound)


# ---------------------------------------------------------------------------
# A_n shifted theta
# ---------------------------------------------------------------------------


@lru_cache(maxsize=32)
def an_theta(n: int, qmax) -> TriSeries:
    """sum over m in Z^n of q^(1/2 (m + v_n)^T C (m + v_n)), exact to q-order ``qmax``."""
    qmax = Fraction(qmax)
    lat = a_n_lattice(n)
    terms: dict = {}
    for _, nrm in short_vectors(lat, 2 * qmax):
        key = (nrm / 2, 0, 0)
        terms[key] = terms.get(key, 0) + 1
    lead = a_n_shift_norm(n)
    return TriSeries.from_terms(terms, qmax=qmax, qlo=lead, tlo=0)


def an_eta_quotient(n: int, qmax) -> TriSeries:
    """eta(q)^(n+1) / eta(q^(1/(n+1))) exact to q-order ``qmax``."""
    qmax = Fraction(qmax)
    lead = Fraction(n + 1, 24) - Fraction(1, 24 * (n + 1))
    depth = qmax - lead
    factors: dict = {}
    k = 1
    while k <= depth:
        factors[(k, 0, 0)] = factors.get((k, 0, 0), 0) + (n + 1)
        k += 1
    k = 1
    while Fraction(k, n + 1) <= depth:
        key = (Fraction(k, n + 1), 0, 0)
        factors[key] = factors.get(key, 0) - 1
        k += 1
    body = weighted_product(factors, qmax=depth)
    return series_mul(body, TriSeries.monomial(lead, 0, 0))


# ---------------------------------------------------------------------------
# E8 shells with a disk cache
# ---------------------------------------------------------------------------


CACHE_ENV = "CHL_CACHE_DIR"


def cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path(os.path.expanduser("~")) / ".cache" / "chl"


@dataclass
class ShellTable:
    """Vectors of a lattice grouped by norm, complete up to ``norm_bound``."""

    lattice: LatticeSpec
    norm_bound: int
    shells: dict[int, np.ndarray] = field(default_factory=dict)

    def shell(self, norm: int) -> np.ndarray:
        if norm > self.norm_bound:
            raise OutOfCacheError(
                f"norm {norm} exceeds the enumerated bound {self.norm_bound}; enumerate with norm_bound >= {norm}"
            )
        arr = self.shells.get(norm)
        if arr is None:
            return np.zeros((0, self.lattice.rank), dtype=np.int64)
        return arr

    def counts(self) -> dict[int, int]:
        return {k: int(len(v)) for k, v in sorted(self.shells.items())}

    def to_json_obj(self) -> dict:
        return {
            "lattice": self.lattice.name,
            "gram": [list(r) for r in self.lattice.gram],
            "norm_bound": self.norm_bound,
            "shells": {str(k): v.tolist() for k, v in sorted(self.shells.items())},
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "ShellTable":
        gram = tuple(tuple(int(x) for x in r) for r in obj["gram"])
        lat = LatticeSpec(gram, name=obj.get("lattice", ""))
        shells = {int(k): np.array(v, dtype=np.int64).reshape(-1, lat.rank) for k, v in obj["shells"].items()}
        return cls(lat, int(obj["norm_bound"]), shells)


def enumerate_shells(lattice: LatticeSpec, norm_bound: int) -> ShellTable:
    groups: dict[int, list] = {}
    for x, nrm in short_vectors(lattice, norm_bound):
        if nrm.denominator != 1:
            raise LatticeError("non-integral norm in an integral lattice")
        groups.setdefault(int(nrm), []).append(x)
    shells = {k: np.array(sorted(v), dtype=np.int64) for k, v in sorted(groups.items())}
    return ShellTable(lattice, norm_bound, shells)


_cache_lock = threading.Lock()
_memory_shells: dict[tuple, ShellTable] = {}


def _cache_file(lattice: LatticeSpec, norm_bound: int, directory: Path) -> Path:
    return directory / f"shells_{lattice.name or 'lattice'}_norm{norm_bound}.json"


def _find_cached(lattice: LatticeSpec, norm_bound: int, directory: Path) -> Optional[ShellTable]:
    if not directory.is_dir():
        return None
    prefix = f"shells_{lattice.name or 'lattice'}_norm"
    best = None
    for path in directory.glob(prefix + "*.json"):
        try:
            b = int(path.stem[len(prefix) :])
        except ValueError:
            continue
        if b >= norm_bound and (best is None or b < best[0]):
            best = (b, path)
    if best is None:
        return None
    try:
        obj = json.loads(best[1].read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise LatticeError(f"cannot read shell cache {best[1]}: {exc}") from exc
    if [list(r) for r in lattice.gram] != obj.get("gram"):
        return None
    return ShellTable.from_json_obj(obj)


def _write_cache(table: ShellTable, directory: Path) -> Path:
    path = _cache_file(table.lattice, table.norm_bound, directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp_", suffix=".json")
        with os.fdopen(fd, "w") as fh:
            json.dump(table.to_json_obj(), fh, separators=(",", ":"))
        os.replace(tmp, path)
    except OSError as exc:
        raise LatticeError(f"cannot write shell cache at {path}: {exc}") from exc
    return path


def lattice_shells(lattice: LatticeSpec, norm_bound: int, cache: bool | str | Path = True) -> ShellTable:
    """Shells of norm <= norm_bound, reusing memory and disk caches.

    ``cache`` may be False (no disk access), True (default directory) or an
    explicit directory.
    """
    key = (lattice.gram, lattice.name)
    with _cache_lock:
        mem = _memory_shells.get(key)
        if mem is not None and mem.norm_bound >= norm_bound:
            return mem
        directory = None if cache is False else (cache_dir() if cache is True else Path(cache))
        table = None
        if directory is not None:
            table = _find_cached(lattice, norm_bound, directory)
        if table is None:
            table = enumerate_shells(lattice, norm_bound)
            if directory is not None:
                _write_cache(table, directory)
        _memory_shells[key] = table
        return table


def clear_memory_cache() -> None:
    with _cache_lock:
        _memory_shells.clear()


def e8_shells(norm_bound: int, cache: bool | str | Path = True) -> dict[int, np.ndarray]:
    return lattice_shells(E8, norm_bound, cache).shells


def e8_table(norm_bound: int, cache: bool | str | Path = True) -> ShellTable:
    return lattice_shells(E8, norm_bound, cache)


def r_e8(T, table: ShellTable | None = None) -> int:
    """Number of pairs (x, y) in E8^2 with Gram matrix T = [[2m, r], [r, 2n]]."""
    (a, r), (r2, b) = T
    if r != r2:
        raise LatticeError("T must be symmetric")
    if a % 2 or b % 2:
        raise LatticeError("diagonal entries of T must be even")
    if a < 0 or b < 0 or a * b - r * r < 0:
        raise LatticeError(f"T = {T} is not positive semidefinite")
    if table is None:
        table = e8_table(max(a, b, 2))
    if max(a, b) > table.norm_bound:
        raise OutOfCacheError(f"T needs norms up to {max(a, b)}; the cache holds {table.norm_bound}")
    X = table.shell(a)
    Y = table.shell(b)
    if len(X) == 0 or len(Y) == 0:
        return 0
    G = np.array(table.lattice.gram, dtype=np.int64)
    ip = X @ G @ Y.T
    return int(np.count_nonzero(ip == r))


def e8_inner_products(table: ShellTable, a: int, b: int) -> dict[int, int]:
    """Histogram of <x, y> over x of norm a and y of norm b."""
    X = table.shell(a)
    Y = table.shell(b)
    if len(X) == 0 or len(Y) == 0:
        return {}
    G = np.array(table.lattice.gram, dtype=np.int64)
    vals, counts = np.unique(X @ G @ Y.T, return_counts=True)
    return {int(v): int(c) for v, c in zip(vals, counts)}


def e8_theta(qmax, cache: bool | str | Path = True) -> TriSeries:
    """sum_x q^(<x,x>/2) over E8."""
    qmax = int(Fraction(qmax))
    table = e8_table(2 * qmax, cache)
    coeffs = {n // 2: len(table.shell(n)) for n in range(0, 2 * qmax + 1, 2)}
    return TriSeries.q_series(coeffs, qmax)


def e8_siegel_theta(mmax: int, nmax: int, rmax: int, cache: bool | str | Path = True) -> TriSeries:
    """sum over T of r_E8(T) q^m t^n p^r for m <= mmax, n <= nmax, |r| <= rmax."""
    table = e8_table(2 * max(mmax, nmax, 1), cache)
    terms = {}
    for m in range(mmax + 1):
        for n in range(nmax + 1):
            for r, c in e8_inner_products(table, 2 * m, 2 * n).items():
                if abs(r) <= rmax:
                    terms[(m, n, r)] = c
    return TriSeries(terms, qmax=mmax, tmax=nmax, pmin=-rmax, pmax=rmax, qlo=0, tlo=0)


def default_y_vectors(cache: bool | str | Path = True) -> list[tuple[int, ...]]:
    """Two norm-four vectors of E8 in root coordinates.

    The first is the sum of the orthogonal simple roots a1 and a2; the second
    is the first vector of the norm-four shell with every root coordinate
    nonzero.
    """
    y1 = (1, 1, 0, 0, 0, 0, 0, 0)
    shell = e8_table(4, cache).shell(4)
    y2 = next(tuple(int(c) for c in row) for row in shell if all(row))
    for y in (y1, y2):
        if E8.norm(y) != 4:
            raise LatticeError(f"{y} does not have norm 4")
    return [y1, y2]


def theta_e8_jacobi(y: Sequence[int], qmax, cache: bool | str | Path = True) -> TriSeries:
    """sum_x q^(<x,x>/2) p^(<x,y>) for a norm-four vector y; exact polynomial in every q-layer."""
    y = tuple(int(c) for c in y)
    if E8.norm(y) != 4:
        raise LatticeError("theta_e8_jacobi needs a vector of norm 4")
    qmax = int(Fraction(qmax))
    table = e8_table(2 * qmax, cache)
    G = np.array(E8.gram, dtype=np.int64)
    gy = G @ np.array(y, dtype=np.int64)
    terms: dict = {}
    for n in range(0, 2 * qmax + 1, 2):
        X = table.shell(n)
        if len(X) == 0:
            continue
        vals, counts = np.unique(X @ gy, return_counts=True)
        for v, c in zip(vals, counts):
            terms[(n // 2, 0, int(v))] = int(c)
    return TriSeries(terms, qmax=qmax, qlo=0, tlo=0)


# ---------------------------------------------------------------------------
# genus-two theta constants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThetaCharacteristic:
    """Digits (m'_1, m'_2, m''_1, m''_2), each 0 or 1."""

    digits: tuple[int, int, int, int]

    @classmethod
    def parse(cls, label: str) -> "ThetaCharacteristic":
        if len(label) != 4 or any(ch not in "01" for ch in label):
            raise LatticeError(f"bad characteristic label {label!r}")
        return cls(tuple(int(ch) for ch in label))

    @property
    def label(self) -> str:
        return "".join(str(d) for d in self.digits)

    @property
    def is_even(self) -> bool:
        a1, a2, b1, b2 = self.digits
        return (a1 * b1 + a2 * b2) % 2 == 0


EVEN_LABELS = ("0000", "0001", "0010", "0011", "0100", "0110", "1000", "1001", "1100", "1111")


def _check_even_labels() -> None:
    computed = {
        f"{a}{b}{c}{d}"
        for a in (0, 1)
        for b in (0, 1)
        for c in (0, 1)
        for d in (0, 1)
        if ThetaCharacteristic((a, b, c, d)).is_even
    }
    if computed != set(EVEN_LABELS):
        raise AssertionError("digit order does not reproduce the ten even characteristics")


_check_even_labels()


@lru_cache(maxsize=64)
def genus2_theta(label: str, qmax, tmax) -> TriSeries:
    """Theta constant with characteristic ``label`` as a series in q, t, p.

    The term for x in Z^2 is e(v^T m''/2) q^(v1^2/2) t^(v2^2/2) p^(v1 v2)
    with v = x + m'/2; for even characteristics the phase is always +-1.
    """
    ch = ThetaCharacteristic.parse(label)
    if not ch.is_even:
        raise UnsupportedCharacteristicError(f"characteristic {label} is odd")
    a1, a2, b1, b2 = ch.digits
    qmax = Fraction(qmax)
    tmax = Fraction(tmax)
    terms: dict = {}
    r1 = math.isqrt(int(2 * qmax) + 1) + 2
    r2 = math.isqrt(int(2 * tmax) + 1) + 2
    for x1 in range(-r1, r1 + 1):
        v1 = x1 + Fraction(a1, 2)
        e1 = v1 * v1 / 2
        if e1 > qmax:
            continue
        for x2 in range(-r2, r2 + 1):
            v2 = x2 + Fraction(a2, 2)
            e2 = v2 * v2 / 2
            if e2 > tmax:
                continue
            s = v1 * b1 + v2 * b2
            if s.denominator != 1:
                raise UnsupportedCharacteristicError("phase is not real for this characteristic")
            sign = -1 if int(s) % 2 else 1
            key = (e1, e2, v1 * v2)
            terms[key] = terms.get(key, 0) + sign
    qlo = Fraction(a1, 8)
    tlo = Fraction(a2, 8)
    return TriSeries.from_terms(terms, qmax=qmax, tmax=tmax, qlo=qlo, tlo=tlo)


def siegel_generators(qmax, tmax) -> dict[str, TriSeries]:
    """The generators X, Y, Z, W, T built from the even theta constants."""
    th = {lab: genus2_theta(lab, Fraction(qmax), Fraction(tmax)) for lab in EVEN_LABELS}

    def prod(labels, power=1):
        out = TriSeries.one()
        for lab in labels:
            out = series_mul(out, th[lab])
        return out**power if power != 1 else out

    fourth = {lab: th[lab] ** 4 for lab in ("0000", "0001", "0010", "0011", "0100", "0110")}
    X = (fourth["0000"] + fourth["0001"] + fourth["0010"] + fourth["0011"]).scale(Fraction(1, 4))
    Y = prod(["0000", "0001", "0010", "0011"]) ** 2
    Zs = (fourth["0100"] - fourth["0110"]) ** 2
    Z = Zs.scale(Fraction(1, 16384))
    W = (prod(["0100", "0110", "1000", "1001", "1100", "1111"]) ** 2).scale(Fraction(1, 4096))
    T = series_mul(th["0100"], th["0110"]) ** 4
    T = T.scale(Fraction(1, 256))
    out = {"X": X, "Y": Y, "Z": Z, "W": W, "T": T}
    return {k: v.truncate(qmax=qmax, tmax=tmax) for k, v in out.items()}
