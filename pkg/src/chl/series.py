"""Truncated trivariate Puiseux-Laurent series in (q, t, p).

A :class:`TriSeries` stores coefficients on integer exponent triples scaled
by per-variable denominators.  It records how far each coefficient is known:

* ``qmax`` / ``tmax``: every coefficient with q-exponent <= qmax and
  t-exponent <= tmax is exact (``None`` means no truncation).
* ``pmin`` / ``pmax``: the p-window on which coefficients are exact.  ``None``
  on a side means the series is fully known in that direction, so its
  support there is whatever is stored.
* ``qlo`` / ``tlo``: lower bounds for the q- and t-support.  These feed the
  truncation rule for products.

Expansions follow the region ``|q|, |t| << |p| < 1``: Laurent polynomials in
p are inverted as power series in p.
"""

from __future__ import annotations

import json
from fractions import Fraction
from math import gcd
from typing import Callable, Iterable, Mapping, Optional

from .scalars import (
    Cyclotomic,
    exact_div,
    normalize,
    parse_scalar,
    render_scalar,
    root_of_unity_scalar,
)

Bound = Optional[Fraction]

MAX_DENOMINATOR = 1 << 20


class SeriesError(ValueError):
    """Base class for series failures."""


class NonInvertibleError(SeriesError):
    pass


class OutOfRangeError(SeriesError):
    pass


class DivergentFactorError(SeriesError):
    pass


class DenominatorOverflowError(SeriesError):
    pass


class WindowError(SeriesError):
    pass


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _opt_frac(x) -> Bound:
    return None if x is None else _frac(x)


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


def _min_up(*xs: Bound) -> Bound:
    """Minimum where ``None`` stands for +infinity."""
    vals = [x for x in xs if x is not None]
    return min(vals) if vals else None


def _add_up(x: Bound, y: Bound) -> Bound:
    """Sum where ``None`` stands for +infinity."""
    if x is None or y is None:
        return None
    return x + y


def _max_down(*xs: Bound) -> Bound:
    """Maximum where ``None`` stands for -infinity."""
    vals = [x for x in xs if x is not None]
    return max(vals) if vals else None


_NEG_INF = object()
_POS_INF = object()


class TriSeries:
    """Immutable truncated series; see the module docstring for the bookkeeping."""

    __slots__ = ("denoms", "coeffs", "qmax", "tmax", "pmin", "pmax", "qlo", "tlo")

    def __init__(
        self,
        coeffs: Mapping[tuple[int, int, int], object],
        denoms: tuple[int, int, int] = (1, 1, 1),
        qmax: Bound = None,
        tmax: Bound = None,
        pmin: Bound = None,
        pmax: Bound = None,
        qlo: Bound = None,
        tlo: Bound = None,
        *,
        _trusted: bool = False,
    ):
        self.denoms = tuple(int(d) for d in denoms)
        if any(d < 1 for d in self.denoms):
            raise ValueError("denominators must be positive")
        self.qmax = _opt_frac(qmax)
        self.tmax = _opt_frac(tmax)
        self.pmin = _opt_frac(pmin)
        self.pmax = _opt_frac(pmax)
        if self.pmin is not None and self.pmax is not None and self.pmin > self.pmax:
            raise WindowError(f"empty p-window [{self.pmin}, {self.pmax}]")
        if _trusted:
            self.coeffs = dict(coeffs)
        else:
            self.coeffs = self._clean(coeffs)
        dq, dt, _ = self.denoms
        if qlo is None:
            if self.coeffs:
                qlo = Fraction(min(k[0] for k in self.coeffs), dq)
            else:
                qlo = self.qmax
        if tlo is None:
            if self.coeffs:
                tlo = Fraction(min(k[1] for k in self.coeffs), dt)
            else:
                tlo = self.tmax
        self.qlo = _opt_frac(qlo)
        self.tlo = _opt_frac(tlo)

    def _clean(self, coeffs) -> dict:
        dq, dt, dp = self.denoms
        out = {}
        qm = None if self.qmax is None else self.qmax * dq
        tm = None if self.tmax is None else self.tmax * dt
        pl = None if self.pmin is None else self.pmin * dp
        ph = None if self.pmax is None else self.pmax * dp
        for key, c in coeffs.items():
            if not c:
                continue
            eq, et, ep = key
            if qm is not None and eq > qm:
                continue
            if tm is not None and et > tm:
                continue
            if pl is not None and ep < pl:
                continue
            if ph is not None and ep > ph:
                continue
            out[(int(eq), int(et), int(ep))] = normalize(c)
        return out

    # ------------------------------------------------------------------
    # constructors
    # ------------------------------------------------------------------

    @classmethod
    def from_terms(
        cls,
        terms: Mapping[tuple, object],
        qmax=None,
        tmax=None,
        pmin=None,
        pmax=None,
        qlo=None,
        tlo=None,
    ) -> "TriSeries":
        """Build from rational exponent triples ``(a, b, c) -> coefficient``."""
        keys = [tuple(_frac(x) for x in k) for k in terms]
        dens = [1, 1, 1]
        for k in keys:
            for i in range(3):
                dens[i] = _lcm(dens[i], k[i].denominator)
        coeffs: dict = {}
        for k, c in zip(keys, terms.values()):
            sk = tuple(int(k[i] * dens[i]) for i in range(3))
            coeffs[sk] = coeffs.get(sk, 0) + c
        return cls(coeffs, tuple(dens), qmax, tmax, pmin, pmax, qlo, tlo)

    @classmethod
    def monomial(cls, q=0, t=0, p=0, coeff=1, **bounds) -> "TriSeries":
        return cls.from_terms({(q, t, p): coeff}, **bounds)

    @classmethod
    def one(cls) -> "TriSeries":
        return cls({(0, 0, 0): 1})

    @classmethod
    def zero(cls, qmax=None, tmax=None) -> "TriSeries":
        return cls({}, qmax=qmax, tmax=tmax, qlo=qmax, tlo=tmax)

    @classmethod
    def q_series(cls, coeffs: Mapping[int, object], qmax, denom: int = 1, var: str = "q") -> "TriSeries":
        """One-variable series sum c_n x^(n/denom) in ``var`` (q or t), exact to ``qmax``."""
        if var == "q":
            data = {(n, 0, 0): c for n, c in coeffs.items()}
            return cls(data, (denom, 1, 1), qmax=qmax)
        if var == "t":
            data = {(0, n, 0): c for n, c in coeffs.items()}
            return cls(data, (1, denom, 1), tmax=qmax)
        raise ValueError("var must be q or t")

    @classmethod
    def p_laurent(cls, coeffs: Mapping[int, object], pmin=None, pmax=None, denom: int = 1) -> "TriSeries":
        data = {(0, 0, j): c for j, c in coeffs.items()}
        return cls(data, (1, 1, denom), pmin=pmin, pmax=pmax, qlo=0, tlo=0)

    # ------------------------------------------------------------------
    # basic queries
    # ------------------------------------------------------------------

    def __repr__(self) -> str:
        return (
            f"TriSeries({len(self.coeffs)} terms, denoms={self.denoms}, qmax={self.qmax}, "
            f"tmax={self.tmax}, p-window=[{self.pmin}, {self.pmax}])"
        )

    def __len__(self) -> int:
        return len(self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def terms(self) -> dict[tuple[Fraction, Fraction, Fraction], object]:
        """Coefficients keyed by unscaled rational exponents."""
        dq, dt, dp = self.denoms
        return {
            (Fraction(a, dq), Fraction(b, dt), Fraction(c, dp)): v for (a, b, c), v in self.coeffs.items()
        }

    def known(self, q, t, p) -> bool:
        q, t, p = _frac(q), _frac(t), _frac(p)
        if self.qmax is not None and q > self.qmax:
            return False
        if self.tmax is not None and t > self.tmax:
            return False
        if self.pmin is not None and p < self.pmin:
            return False
        if self.pmax is not None and p > self.pmax:
            return False
        return True

    def coefficient(self, q=0, t=0, p=0):
        """Exact coefficient of q^q t^t p^p; raises when it lies outside the validity region."""
        q, t, p = _frac(q), _frac(t), _frac(p)
        if not self.known(q, t, p):
            raise OutOfRangeError(f"coefficient q^{q} t^{t} p^{p} is outside the validity region of {self!r}")
        dq, dt, dp = self.denoms
        if (q * dq).denominator != 1 or (t * dt).denominator != 1 or (p * dp).denominator != 1:
            return 0
        return self.coeffs.get((int(q * dq), int(t * dt), int(p * dp)), 0)

    def p_support(self) -> tuple[Optional[Fraction], Optional[Fraction]]:
        """Lower and upper bounds of the true p-support (None for infinite or unknown)."""
        dp = self.denoms[2]
        if self.coeffs:
            lo_s = Fraction(min(k[2] for k in self.coeffs), dp)
            hi_s = Fraction(max(k[2] for k in self.coeffs), dp)
        else:
            lo_s = hi_s = None
        if self.pmin is None:
            lo = lo_s
            if self.pmax is not None:
                lo = self.pmax if lo is None else min(lo, self.pmax)
        else:
            lo = _NEG_INF
        if self.pmax is None:
            hi = hi_s
            if self.pmin is not None:
                hi = self.pmin if hi is None else max(hi, self.pmin)
        else:
            hi = _POS_INF
        return lo, hi

    # ------------------------------------------------------------------
    # denominator handling
    # ------------------------------------------------------------------

    def with_denoms(self, denoms: tuple[int, int, int]) -> "TriSeries":
        """Re-express over finer denominators (each must be a multiple of the current one)."""
        if tuple(denoms) == self.denoms:
            return self
        f = []
        for new, old in zip(denoms, self.denoms):
            if new % old:
                raise ValueError(f"denominator {new} is not a multiple of {old}")
            f.append(new // old)
        fq, ft, fp = f
        coeffs = {(a * fq, b * ft, c * fp): v for (a, b, c), v in self.coeffs.items()}
        return self._replace(coeffs=coeffs, denoms=tuple(denoms))

    def reduced(self) -> "TriSeries":
        """Shrink each denominator to the smallest one compatible with the stored exponents."""
        g = list(self.denoms)
        for (a, b, c) in self.coeffs:
            g[0] = gcd(g[0], a)
            g[1] = gcd(g[1], b)
            g[2] = gcd(g[2], c)
            if g == [1, 1, 1]:
                return self
        if g == [1, 1, 1]:
            return self
        gq, gt, gp = g
        coeffs = {(a // gq, b // gt, c // gp): v for (a, b, c), v in self.coeffs.items()}
        dens = (self.denoms[0] // gq, self.denoms[1] // gt, self.denoms[2] // gp)
        return self._replace(coeffs=coeffs, denoms=dens)

    def _replace(self, **kw) -> "TriSeries":
        fields = dict(
            coeffs=self.coeffs,
            denoms=self.denoms,
            qmax=self.qmax,
            tmax=self.tmax,
            pmin=self.pmin,
            pmax=self.pmax,
            qlo=self.qlo,
            tlo=self.tlo,
        )
        trusted = kw.pop("_trusted", True)
        fields.update(kw)
        return TriSeries(
            fields["coeffs"],
            fields["denoms"],
            fields["qmax"],
            fields["tmax"],
            fields["pmin"],
            fields["pmax"],
            fields["qlo"],
            fields["tlo"],
            _trusted=trusted,
        )

    # ------------------------------------------------------------------
    # truncation
    # ------------------------------------------------------------------

    def truncate(self, qmax=None, tmax=None, pmin=None, pmax=None) -> "TriSeries":
        """Restrict the validity region (arguments that would widen it are ignored)."""
        nq = _min_up(self.qmax, _opt_frac(qmax))
        nt = _min_up(self.tmax, _opt_frac(tmax))
        npl = _max_down(self.pmin, _opt_frac(pmin))
        nph = _min_up(self.pmax, _opt_frac(pmax))
        if (nq, nt, npl, nph) == (self.qmax, self.tmax, self.pmin, self.pmax):
            return self
        return TriSeries(self.coeffs, self.denoms, nq, nt, npl, nph, self.qlo, self.tlo)

    # ------------------------------------------------------------------
    # ring operations
    # ------------------------------------------------------------------

    def _common(self, other: "TriSeries") -> tuple["TriSeries", "TriSeries"]:
        dens = tuple(_lcm(a, b) for a, b in zip(self.denoms, other.denoms))
        return self.with_denoms(dens), other.with_denoms(dens)

    def __add__(self, other):
        if not isinstance(other, TriSeries):
            other = TriSeries.constant(other)
        a, b = self._common(other)
        coeffs = dict(a.coeffs)
        for k, v in b.coeffs.items():
            coeffs[k] = coeffs.get(k, 0) + v
        return TriSeries(
            coeffs,
            a.denoms,
            _min_up(a.qmax, b.qmax),
            _min_up(a.tmax, b.tmax),
            _max_down(a.pmin, b.pmin),
            _min_up(a.pmax, b.pmax),
            _min_lo(a.qlo, b.qlo),
            _min_lo(a.tlo, b.tlo),
        ).reduced()

    __radd__ = __add__

    def __neg__(self):
        return self._replace(coeffs={k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        if not isinstance(other, TriSeries):
            other = TriSeries.constant(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "TriSeries":
        if not c:
            return TriSeries({}, self.denoms, self.qmax, self.tmax, self.pmin, self.pmax, self.qlo, self.tlo)
        return self._replace(coeffs={k: normalize(v * c) for k, v in self.coeffs.items()})

    @classmethod
    def constant(cls, c) -> "TriSeries":
        return cls({(0, 0, 0): c}, qlo=0, tlo=0)

    def __mul__(self, other):
        if isinstance(other, TriSeries):
            return series_mul(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, other):
        if isinstance(other, TriSeries):
            return series_mul(self, series_invert(other))
        return self.scale(Fraction(1) / Fraction(other)) if not isinstance(other, Cyclotomic) else self.scale(1 / other)

    def __pow__(self, k: int) -> "TriSeries":
        if k < 0:
            raise ValueError("use series_invert for negative powers")
        result = TriSeries.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # ------------------------------------------------------------------
    # comparisons
    # ------------------------------------------------------------------

    def first_difference(self, other: "TriSeries", qmax=None, tmax=None, pmin=None, pmax=None):
        """First monomial (by exponent order) where the two series disagree on their common region.

        Returns ``None`` when they agree.  The region is the intersection of
        both validity regions and the optional explicit limits.
        """
        a, b = self._common(other)
        qm = _min_up(a.qmax, b.qmax, _opt_frac(qmax))
        tm = _min_up(a.tmax, b.tmax, _opt_frac(tmax))
        pl = _max_down(a.pmin, b.pmin, _opt_frac(pmin))
        ph = _min_up(a.pmax, b.pmax, _opt_frac(pmax))
        dq, dt, dp = a.denoms

        def inside(k):
            if qm is not None and Fraction(k[0], dq) > qm:
                return False
            if tm is not None and Fraction(k[1], dt) > tm:
                return False
            if pl is not None and Fraction(k[2], dp) < pl:
                return False
            if ph is not None and Fraction(k[2], dp) > ph:
                return False
            return True

        keys = sorted(set(a.coeffs) | set(b.coeffs))
        for k in keys:
            if not inside(k):
                continue
            if a.coeffs.get(k, 0) != b.coeffs.get(k, 0):
                return (Fraction(k[0], dq), Fraction(k[1], dt), Fraction(k[2], dp))
        return None

    def agrees_with(self, other: "TriSeries", **region) -> bool:
        return self.first_difference(other, **region) is None

    def covers(self, qmax=None, tmax=None, pmin=None, pmax=None) -> bool:
        """True when the validity region contains the requested box."""
        if qmax is not None and self.qmax is not None and self.qmax < qmax:
            return False
        if tmax is not None and self.tmax is not None and self.tmax < tmax:
            return False
        if self.pmin is not None and (pmin is None or self.pmin > pmin):
            return False
        if self.pmax is not None and (pmax is None or self.pmax < pmax):
            return False
        return True

    # ------------------------------------------------------------------
    # rendering and serialization
    # ------------------------------------------------------------------

    def sorted_terms(self) -> list[tuple[Fraction, Fraction, Fraction, object]]:
        dq, dt, dp = self.denoms
        return [
            (Fraction(a, dq), Fraction(b, dt), Fraction(c, dp), v) for (a, b, c), v in sorted(self.coeffs.items())
        ]

    def to_text(self) -> str:
        parts = []
        for a, b, c, v in self.sorted_terms():
            mono = []
            for name, e in (("q", a), ("t", b), ("p", c)):
                if e == 0:
                    continue
                mono.append(name if e == 1 else f"{name}^{_fmt_exp(e)}")
            coef = render_scalar(v)
            if not mono:
                parts.append(coef)
            elif coef == "1":
                parts.append("*".join(mono))
            elif coef == "-1":
                parts.append("-" + "*".join(mono))
            else:
                parts.append(f"({coef})*" + "*".join(mono) if " " in coef else f"{coef}*" + "*".join(mono))
        body = " + ".join(parts) if parts else "0"
        return body.replace("+ -", "- ")

    def __str__(self) -> str:
        return self.to_text()

    def to_json_obj(self) -> dict:
        def b(x):
            return None if x is None else _fmt_exp(x)

        return {
            "denoms": list(self.denoms),
            "bounds": {
                "qmax": b(self.qmax),
                "tmax": b(self.tmax),
                "pmin": b(self.pmin),
                "pmax": b(self.pmax),
                "qlo": b(self.qlo),
                "tlo": b(self.tlo),
            },
            "coeffs": [[a, bb, c, render_scalar(v)] for (a, bb, c), v in sorted(self.coeffs.items())],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), separators=(",", ":"))

    @classmethod
    def from_json_obj(cls, obj: dict) -> "TriSeries":
        bounds = obj.get("bounds", {})

        def b(key):
            v = bounds.get(key)
            return None if v is None else Fraction(v)

        coeffs = {(int(a), int(bb), int(c)): parse_scalar(v) for a, bb, c, v in obj["coeffs"]}
        return cls(
            coeffs,
            tuple(obj["denoms"]),
            b("qmax"),
            b("tmax"),
            b("pmin"),
            b("pmax"),
            b("qlo"),
            b("tlo"),
        )

    @classmethod
    def from_json(cls, text: str) -> "TriSeries":
        return cls.from_json_obj(json.loads(text))

    def identical(self, other: "TriSeries") -> bool:
        """Bit-for-bit equality of representation (used for serialization round trips)."""
        return self.to_json_obj() == other.to_json_obj()


def _min_lo(x: Bound, y: Bound) -> Bound:
    return _min_up(x, y)


def _fmt_exp(e: Fraction) -> str:
    e = _frac(e)
    return str(e.numerator) if e.denominator == 1 else f"{e.numerator}/{e.denominator}"


# ---------------------------------------------------------------------------
# one-dimensional p-rows with windows
# ---------------------------------------------------------------------------
#
# A row is a dict {scaled p exponent: coefficient} together with a window
# (lo, hi) in scaled units, None meaning exact in that direction.


def _row_support(row: dict, lo, hi):
    if lo is None:
        s_lo = min(row) if row else None
        if hi is not None:
            s_lo = hi if s_lo is None else min(s_lo, hi)
    else:
        s_lo = _NEG_INF
    if hi is None:
        s_hi = max(row) if row else None
        if lo is not None:
            s_hi = lo if s_hi is None else max(s_hi, lo)
    else:
        s_hi = _POS_INF
    return s_lo, s_hi


def _window_product(lo_a, hi_a, sa, lo_b, hi_b, sb):
    """Window of exactness for a product of two windowed p-rows (scaled units).

    ``sa``/``sb`` are (support_lo, support_hi) pairs.  A support bound of None
    denotes an empty (identically zero) operand.
    """
    sa_lo, sa_hi = sa
    sb_lo, sb_hi = sb
    if (sa_lo is None and sa_hi is None) or (sb_lo is None and sb_hi is None):
        return "zero"
    hi_terms = []
    for h, s in ((hi_a, sb_lo), (hi_b, sa_lo)):
        if h is None:
            continue
        if s is _NEG_INF:
            raise WindowError("product has no exact p-coefficients: unknown tails meet on both sides")
        hi_terms.append(h + s)
    lo_terms = []
    for l, s in ((lo_a, sb_hi), (lo_b, sa_hi)):
        if l is None:
            continue
        if s is _POS_INF:
            raise WindowError("product has no exact p-coefficients: unknown tails meet on both sides")
        lo_terms.append(l + s)
    hi = min(hi_terms) if hi_terms else None
    lo = max(lo_terms) if lo_terms else None
    if lo is not None and hi is not None and lo > hi:
        raise WindowError("product has an empty p-window")
    return lo, hi


def _row_mul(a: dict, b: dict, lo=None, hi=None) -> dict:
    """Plain convolution of two p-rows, keeping exponents inside [lo, hi]."""
    out: dict = {}
    if len(a) < len(b):
        a, b = b, a
    items_b = list(b.items())
    for i, x in a.items():
        for j, y in items_b:
            k = i + j
            if (lo is not None and k < lo) or (hi is not None and k > hi):
                continue
            out[k] = out.get(k, 0) + x * y
    return out


# ---------------------------------------------------------------------------
# products
# ---------------------------------------------------------------------------


def _group_layers(s: TriSeries) -> dict:
    layers: dict = {}
    for (a, b, c), v in s.coeffs.items():
        layers.setdefault((a, b), {})[c] = v
    return layers


def series_mul(a: TriSeries, b: TriSeries) -> TriSeries:
    """Exact product on the largest region where both factors determine it."""
    a, b = a._common(b)
    dq, dt, dp = a.denoms
    qmax = _min_up(_add_up(a.qmax, b.qlo), _add_up(b.qmax, a.qlo))
    tmax = _min_up(_add_up(a.tmax, b.tlo), _add_up(b.tmax, a.tlo))
    qlo = _add_up(a.qlo, b.qlo)
    tlo = _add_up(a.tlo, b.tlo)
    if not a.coeffs or not b.coeffs:
        return TriSeries({}, a.denoms, qmax, tmax, None, None, qlo, tlo)

    def scaled(x):
        return None if x is None else x * dp

    sa = tuple(x if x in (_NEG_INF, _POS_INF) or x is None else x * dp for x in a.p_support())
    sb = tuple(x if x in (_NEG_INF, _POS_INF) or x is None else x * dp for x in b.p_support())
    win = _window_product(scaled(a.pmin), scaled(a.pmax), sa, scaled(b.pmin), scaled(b.pmax), sb)
    if win == "zero":
        return TriSeries({}, a.denoms, qmax, tmax, None, None, qlo, tlo)
    lo, hi = win
    # shrink the stored range to what matters
    qm = None if qmax is None else qmax * dq
    tm = None if tmax is None else tmax * dt
    la = _group_layers(a)
    lb = _group_layers(b)
    out: dict = {}
    for (qa, ta), ra in la.items():
        for (qb, tb), rb in lb.items():
            q = qa + qb
            if qm is not None and q > qm:
                continue
            t = ta + tb
            if tm is not None and t > tm:
                continue
            prod = _row_mul(ra, rb, _ceil(lo), _floor(hi))
            for k, v in prod.items():
                key = (q, t, k)
                out[key] = out.get(key, 0) + v
    return TriSeries(
        out,
        a.denoms,
        qmax,
        tmax,
        None if lo is None else Fraction(lo) / dp,
        None if hi is None else Fraction(hi) / dp,
        qlo,
        tlo,
    ).reduced()


def _ceil(x):
    if x is None:
        return None
    x = _frac(x)
    return -((-x.numerator) // x.denominator)


def _floor(x):
    if x is None:
        return None
    x = _frac(x)
    return x.numerator // x.denominator


def series_product(factors: Iterable[TriSeries]) -> TriSeries:
    result = TriSeries.one()
    for f in factors:
        result = series_mul(result, f)
    return result


# ---------------------------------------------------------------------------
# inversion
# ---------------------------------------------------------------------------


def _invert_p_leading(row: dict, hi, cap: int) -> tuple[dict, int]:
    """Invert a Laurent polynomial (exact downward) as a power series in p.

    ``row`` holds scaled exponents, ``hi`` is the row window top (None if the
    row is an exact polynomial) and ``cap`` the largest exponent to produce.
    Returns (inverse row, inverse window top).
    """
    if not row:
        raise NonInvertibleError("leading coefficient is zero")
    m = min(row)
    lead = row[m]
    # the unit part l(p) = sum row[m+i] p^i; its inverse g satisfies g_0 = 1/lead,
    # g_i = -(1/lead) sum_{k>=1} l_k g_{i-k}
    known_deg = None if hi is None else hi - m
    deg = cap + m
    if known_deg is not None:
        deg = min(deg, known_deg)
    if deg < 0:
        return {}, cap if known_deg is None else min(cap, hi - 2 * m)
    inv_lead = 1 / Fraction(lead) if not isinstance(lead, Cyclotomic) else lead.inverse()
    inv_lead = normalize(inv_lead)
    ell = {k - m: v for k, v in row.items() if k - m <= deg}
    ell_items = sorted((k, v) for k, v in ell.items() if k >= 1)
    g = [0] * (deg + 1)
    g[0] = inv_lead
    for i in range(1, deg + 1):
        s = 0
        for k, v in ell_items:
            if k > i:
                break
            gi = g[i - k]
            if gi:
                s = s + v * gi
        g[i] = normalize(-s * inv_lead) if s else 0
    out = {i - m: c for i, c in enumerate(g) if c}
    top = deg - m
    return out, top


def series_invert(a: TriSeries, pmax=None) -> TriSeries:
    """Multiplicative inverse of a series of the form monomial * unit.

    The unit's lowest (q, t) layer must be a p-Laurent polynomial known
    downward; it is inverted as a power series in p.  ``pmax`` caps the
    p-exponents produced when the result has unbounded p-support; without it
    the cap defaults to the input's own window top or to a small multiple of
    its p-extent.
    """
    if not a.coeffs:
        raise NonInvertibleError("cannot invert the zero series")
    if a.pmin is not None:
        raise NonInvertibleError("lowest p-coefficient of the leading layer is not known")
    dq, dt, dp = a.denoms
    layers = _group_layers(a)
    q0 = min(k[0] for k in layers)
    t0 = min(k[1] for k in layers)
    if (q0, t0) not in layers:
        raise NonInvertibleError("series has no single leading (q, t) monomial")
    if a.qlo is not None and Fraction(q0, dq) > a.qlo:
        # the stored minimum must be the true one
        if a.pmax is not None:
            raise NonInvertibleError("leading q-order is not certified by the p-window")
    if a.tlo is not None and Fraction(t0, dt) > a.tlo:
        if a.pmax is not None:
            raise NonInvertibleError("leading t-order is not certified by the p-window")
    unit = {(q - q0, t - t0): row for (q, t), row in layers.items()}
    uq = None if a.qmax is None else _floor(a.qmax * dq) - q0
    ut = None if a.tmax is None else _floor(a.tmax * dt) - t0
    if uq is None and len(set(k[0] for k in unit)) > 1:
        raise NonInvertibleError("inverse of a non-monomial needs a q-truncation")
    if ut is None and len(set(k[1] for k in unit)) > 1:
        raise NonInvertibleError("inverse of a non-monomial needs a t-truncation")
    if uq is None:
        uq = 0
    if ut is None:
        ut = 0
    hi_in = None if a.pmax is None else _floor(a.pmax * dp)
    if pmax is not None:
        target = _floor(_frac(pmax) * dp)
    elif hi_in is not None:
        target = hi_in
    else:
        spread = max(max(r) for r in unit.values()) - min(min(r) for r in unit.values())
        target = 2 * max(spread, dp) + 2 * dp
    cap = target
    for _ in range(6):
        rows, top = _invert_layers(unit, hi_in, uq, ut, cap)
        if top is None or top >= target:
            break
        cap += target - top
    coeffs = {}
    for (dq_, dt_), row in rows.items():
        for k, v in row.items():
            if top is not None and k > top:
                continue
            coeffs[(dq_ - q0, dt_ - t0, k)] = v
    qmax = None if a.qmax is None else Fraction(uq - q0, dq)
    tmax = None if a.tmax is None else Fraction(ut - t0, dt)
    return TriSeries(
        coeffs,
        a.denoms,
        qmax,
        tmax,
        None,
        None if top is None else Fraction(top, dp),
        Fraction(-q0, dq),
        Fraction(-t0, dt),
    ).reduced()


def _invert_layers(unit: dict, hi_in, uq: int, ut: int, cap: int):
    lead = unit[(0, 0)]
    inv_l, top_l = _invert_p_leading(lead, hi_in, cap)
    tops = {}
    rows = {(0, 0): inv_l}
    tops[(0, 0)] = top_l
    others = sorted(k for k in unit if k != (0, 0))
    order = sorted((i, j) for i in range(uq + 1) for j in range(ut + 1) if (i, j) != (0, 0))
    inv_support = _row_support(inv_l, None, top_l)
    overall = top_l
    for alpha in order:
        acc: dict = {}
        acc_hi = None
        any_term = False
        for beta in others:
            if beta[0] > alpha[0] or beta[1] > alpha[1]:
                continue
            prev = (alpha[0] - beta[0], alpha[1] - beta[1])
            v = rows.get(prev)
            if v is None:
                continue
            u = unit[beta]
            v_hi = tops[prev]
            w = _window_product(None, hi_in, _row_support(u, None, hi_in), None, v_hi, _row_support(v, None, v_hi))
            if w == "zero":
                continue
            _, whi = w
            prod = _row_mul(u, v, None, whi)
            for k, c in prod.items():
                acc[k] = acc.get(k, 0) + c
            acc_hi = whi if acc_hi is None else (acc_hi if whi is None else min(acc_hi, whi))
            any_term = True
        if not any_term:
            continue
        acc = {k: c for k, c in acc.items() if c and (acc_hi is None or k <= acc_hi)}
        w = _window_product(None, top_l, inv_support, None, acc_hi, _row_support(acc, None, acc_hi))
        if w == "zero":
            continue
        _, whi = w
        row = _row_mul(inv_l, acc, None, whi)
        row = {k: normalize(-c) for k, c in row.items() if c}
        rows[alpha] = row
        tops[alpha] = whi
        if whi is not None:
            overall = whi if overall is None else min(overall, whi)
    return rows, overall


# ---------------------------------------------------------------------------
# monomial maps
# ---------------------------------------------------------------------------


def _map_monomials(
    a: TriSeries,
    denoms: tuple[int, int, int],
    fn: Callable[[int, int, int], tuple[int, int, int, object]],
    **bounds,
) -> TriSeries:
    coeffs: dict = {}
    for (x, y, z), v in a.coeffs.items():
        nx, ny, nz, phase = fn(x, y, z)
        c = v if phase == 1 else v * phase
        key = (nx, ny, nz)
        coeffs[key] = coeffs.get(key, 0) + c
    for d in denoms:
        if d > MAX_DENOMINATOR:
            raise DenominatorOverflowError(f"denominator {d} exceeds {MAX_DENOMINATOR}")
    return TriSeries(coeffs, denoms, **bounds).reduced()


def frac_substitute(a: TriSeries, var: str, rule: tuple[int, int, int], order: int | None = None) -> TriSeries:
    """Apply x^m -> zeta_c^(b m) x^(a m / c) to the variable ``var``.

    ``order`` fixes the cyclotomic field for the phases (defaults to the
    smallest one containing them all).
    """
    num, shift, den = rule
    if den < 1:
        raise ValueError("den must be positive")
    if var == "p":
        if num not in (1, -1) or shift != 0 or den != 1:
            raise ValueError("only p -> p^(+-1) is allowed")
        if num == 1:
            return a
        return _map_monomials(
            a,
            a.denoms,
            lambda x, y, z: (x, y, -z, 1),
            qmax=a.qmax,
            tmax=a.tmax,
            pmin=None if a.pmax is None else -a.pmax,
            pmax=None if a.pmin is None else -a.pmin,
            qlo=a.qlo,
            tlo=a.tlo,
        )
    if num < 1:
        raise ValueError("q and t substitutions need a positive multiplier")
    idx = {"q": 0, "t": 1}[var]
    d_old = a.denoms[idx]
    d_new = d_old * den
    root_order = den * d_old
    if order is None:
        g = root_order
        for k in a.coeffs:
            g = gcd(g, shift * k[idx])
        order = root_order // g
    phase_cache: dict = {}

    def phase(e: int):
        key = (shift * e) % root_order
        if key not in phase_cache:
            phase_cache[key] = root_of_unity_scalar(root_order, key, order)
        return phase_cache[key]

    denoms = list(a.denoms)
    denoms[idx] = d_new

    def scale_bound(x):
        return None if x is None else x * num / den

    if idx == 0:
        fn = lambda x, y, z: (num * x, y, z, phase(x))
        bounds = dict(qmax=scale_bound(a.qmax), tmax=a.tmax, qlo=scale_bound(a.qlo), tlo=a.tlo)
    else:
        fn = lambda x, y, z: (x, num * y, z, phase(y))
        bounds = dict(qmax=a.qmax, tmax=scale_bound(a.tmax), qlo=a.qlo, tlo=scale_bound(a.tlo))
    return _map_monomials(a, tuple(denoms), fn, pmin=a.pmin, pmax=a.pmax, **bounds)


def scale_all(a: TriSeries, k: int) -> TriSeries:
    """Monomial map q^a t^b p^c -> q^(ka) t^(kb) p^(kc)."""
    if k < 1:
        raise ValueError("scale factor must be positive")

    def s(x):
        return None if x is None else x * k

    return _map_monomials(
        a,
        a.denoms,
        lambda x, y, z: (k * x, k * y, k * z, 1),
        qmax=s(a.qmax),
        tmax=s(a.tmax),
        pmin=s(a.pmin),
        pmax=s(a.pmax),
        qlo=s(a.qlo),
        tlo=s(a.tlo),
    )


def swap_qt_scaled(a: TriSeries, N: int) -> TriSeries:
    """Monomial map q^x t^y p^z -> q^(N y) t^(x / N) p^z."""
    dq, dt, dp = a.denoms

    def s(x, f):
        return None if x is None else x * f

    return _map_monomials(
        a,
        (dt, dq * N, dp),
        lambda x, y, z: (N * y, x, z, 1),
        qmax=s(a.tmax, N),
        tmax=s(a.qmax, Fraction(1, N)),
        pmin=a.pmin,
        pmax=a.pmax,
        qlo=s(a.tlo, N),
        tlo=s(a.qlo, Fraction(1, N)),
    )


def swap_variables(a: TriSeries, first: str, second: str) -> TriSeries:
    """Exchange the roles of q and t (the only pair this is defined for)."""
    if {first, second} != {"q", "t"}:
        raise ValueError("only q and t can be exchanged")
    dq, dt, dp = a.denoms
    return _map_monomials(
        a,
        (dt, dq, dp),
        lambda x, y, z: (y, x, z, 1),
        qmax=a.tmax,
        tmax=a.qmax,
        pmin=a.pmin,
        pmax=a.pmax,
        qlo=a.tlo,
        tlo=a.qlo,
    )


def extract_coeff(a: TriSeries, var: str, exponent) -> TriSeries:
    """Coefficient of var^exponent as a series in the two remaining variables."""
    e = _frac(exponent)
    idx = {"q": 0, "t": 1}.get(var)
    if idx is None:
        raise ValueError("extraction is defined for q and t")
    d = a.denoms[idx]
    if (e * d).denominator != 1:
        raise OutOfRangeError(f"exponent {e} is not a multiple of 1/{d}")
    top = a.qmax if idx == 0 else a.tmax
    if top is not None and e > top:
        raise OutOfRangeError(f"exponent {e} exceeds the truncation {top}")
    k = int(e * d)
    coeffs = {}
    for key, v in a.coeffs.items():
        if key[idx] == k:
            nk = list(key)
            nk[idx] = 0
            coeffs[tuple(nk)] = v
    if idx == 0:
        return TriSeries(coeffs, a.denoms, None, a.tmax, a.pmin, a.pmax, 0, a.tlo).reduced()
    return TriSeries(coeffs, a.denoms, a.qmax, None, a.pmin, a.pmax, a.qlo, 0).reduced()


def shift(a: TriSeries, q=0, t=0, p=0) -> TriSeries:
    """Multiply by the monomial q^q t^t p^p."""
    return series_mul(a, TriSeries.monomial(q, t, p))


def rename_q_to_t(a: TriSeries) -> TriSeries:
    """Reinterpret a series in (q, p) as a series in (t, p)."""
    return swap_variables(a, "q", "t")


# ---------------------------------------------------------------------------
# weighted products
# ---------------------------------------------------------------------------


def weighted_product(
    factors: Mapping[tuple, int],
    qmax=None,
    tmax=None,
    pmax=None,
) -> TriSeries:
    """Exact truncation of prod (1 - q^kq t^kt p^j)^c over the given factors.

    Factors with kq = kt = 0 must have j < 0 and are multiplied in directly.
    All others are combined through the logarithmic derivative along the
    grading deg = (scaled q-exponent) + (scaled t-exponent), which keeps the
    work proportional to the size of the truncation box rather than the
    number of factors.
    """
    qmax = _opt_frac(qmax)
    tmax = _opt_frac(tmax)
    pure: list[tuple[Fraction, int]] = []
    mixed: list[tuple[Fraction, Fraction, Fraction, int]] = []
    dq = dt = dp = 1
    for key, c in factors.items():
        kq, kt, j = (_frac(x) for x in key)
        c = int(c)
        if c == 0:
            continue
        if kq < 0 or kt < 0:
            raise DivergentFactorError(f"factor {key} has a negative q or t exponent")
        if kq == 0 and kt == 0:
            if j >= 0:
                raise DivergentFactorError(f"factor {key} does not converge in the expansion region")
            pure.append((j, c))
            dp = _lcm(dp, j.denominator)
            continue
        if (qmax is not None and kq > qmax) or (tmax is not None and kt > tmax):
            continue
        mixed.append((kq, kt, j, c))
        dq = _lcm(dq, kq.denominator)
        dt = _lcm(dt, kt.denominator)
        dp = _lcm(dp, j.denominator)
    if mixed and (qmax is None or tmax is None):
        if qmax is None and any(f[0] > 0 for f in mixed):
            raise SeriesError("a q-truncation is required")
        if tmax is None and any(f[1] > 0 for f in mixed):
            raise SeriesError("a t-truncation is required")
    qs = None if qmax is None else _floor(qmax * dq)
    ts = None if tmax is None else _floor(tmax * dt)
    body = _log_exp_product(
        [(int(kq * dq), int(kt * dt), int(j * dp), c) for kq, kt, j, c in mixed],
        qs if qs is not None else 0,
        ts if ts is not None else 0,
    )
    result = TriSeries(body, (dq, dt, dp), qmax, tmax, None, None, 0, 0)
    for j, c in pure:
        base = TriSeries.p_laurent({0: 1, int(j * dp): -1}, denom=dp)
        if c > 0:
            result = series_mul(result, base**c)
        else:
            cap = pmax if pmax is not None else Fraction(-int(j * dp) * 8, dp)
            inv = series_invert(base, pmax=cap)
            result = series_mul(result, inv ** (-c))
    return result.truncate(qmax, tmax).reduced()


def _log_exp_product(factors: list[tuple[int, int, int, int]], qs: int, ts: int) -> dict:
    """Integer-exponent product prod (1 - q^a t^b p^j)^c truncated to a <= qs, b <= ts (scaled)."""
    if not factors:
        return {(0, 0, 0): 1}
    wmax = qs + ts
    # H = E log F with E the degree operator; log(1-x)^c = -c sum x^i / i
    H: dict[int, dict[tuple[int, int], dict[int, int]]] = {}
    for a, b, j, c in factors:
        w = a + b
        coef = -c * w
        i = 1
        while True:
            qa, tb = a * i, b * i
            if qa > qs or tb > ts:
                break
            layer = H.setdefault(w * i, {}).setdefault((qa, tb), {})
            layer[j * i] = layer.get(j * i, 0) + coef
            i += 1
    F: dict[int, dict[tuple[int, int], dict[int, object]]] = {0: {(0, 0): {0: 1}}}
    for w in range(1, wmax + 1):
        acc: dict[tuple[int, int], dict[int, object]] = {}
        for u, hu in H.items():
            if u > w:
                continue
            fw = F.get(w - u)
            if not fw:
                continue
            for (ha, hb), hrow in hu.items():
                for (fa, fb), frow in fw.items():
                    qa = ha + fa
                    if qa > qs:
                        continue
                    tb = hb + fb
                    if tb > ts:
                        continue
                    target = acc.setdefault((qa, tb), {})
                    for hj, hc in hrow.items():
                        for fj, fc in frow.items():
                            k = hj + fj
                            target[k] = target.get(k, 0) + hc * fc
        layer = {}
        for key, row in acc.items():
            new_row = {k: exact_div(v, w) for k, v in row.items() if v}
            if new_row:
                layer[key] = new_row
        if layer:
            F[w] = layer
    out = {}
    for layer in F.values():
        for (a, b), row in layer.items():
            for j, v in row.items():
                out[(a, b, j)] = v
    return out
