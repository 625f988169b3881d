"""Exact coefficient arithmetic.

Rationals are plain :class:`fractions.Fraction` values (or ``int`` when the
denominator is one, which keeps the hot loops on machine-friendly integers).
Elements of the cyclotomic field of order ``M`` are :class:`Cyclotomic`
instances, stored as residues modulo the ``M``-th cyclotomic polynomial.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Union

Rational = Union[int, Fraction]


class ScalarError(ValueError):
    """Base class for scalar arithmetic failures."""


class OrderMismatchError(ScalarError):
    pass


class NotRationalError(ScalarError):
    pass


def normalize(x):
    """Collapse a Fraction with denominator 1 to ``int``; pass other values through."""
    if type(x) is Fraction and x.denominator == 1:
        return x.numerator
    return x


def as_rational(x) -> Rational:
    """Coerce ints, Fractions, strings like ``"3/4"`` and rational cyclotomics to a rational."""
    if isinstance(x, Cyclotomic):
        return x.to_rational()
    if isinstance(x, bool):
        return int(x)
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return normalize(x)
    if isinstance(x, str):
        return normalize(Fraction(x))
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def render_rational(x: Rational) -> str:
    x = as_rational(x)
    if isinstance(x, int):
        return str(x)
    return f"{x.numerator}/{x.denominator}"


def exact_div(x, n: int):
    """Divide a scalar by a nonzero integer without leaving the exact world."""
    if isinstance(x, int):
        q, r = divmod(x, n)
        return q if r == 0 else Fraction(x, n)
    if isinstance(x, Fraction):
        return normalize(x / n)
    return x * Fraction(1, n)


# ---------------------------------------------------------------------------
# Cyclotomic polynomials
# ---------------------------------------------------------------------------


def _poly_divexact(num: list[int], den: list[int]) -> list[int]:
    """Exact division of integer polynomials (coefficient lists, low degree first)."""
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    lead = den[-1]
    for i in range(len(out) - 1, -1, -1):
        c = num[i + len(den) - 1]
        if c % lead:
            raise ArithmeticError("inexact polynomial division")
        c //= lead
        out[i] = c
        if c:
            for j, d in enumerate(den):
                num[i + j] -= c * d
    if any(num[: len(den) - 1]):
        raise ArithmeticError("inexact polynomial division")
    return out


@lru_cache(maxsize=None)
def cyclotomic_polynomial(m: int) -> tuple[int, ...]:
    """Coefficients (low degree first) of the m-th cyclotomic polynomial."""
    if m < 1:
        raise ValueError("cyclotomic order must be positive")
    poly = [-1] + [0] * (m - 1) + [1]
    for d in range(1, m):
        if m % d == 0:
            poly = _poly_divexact(poly, list(cyclotomic_polynomial(d)))
    return tuple(poly)


@lru_cache(maxsize=None)
def euler_phi(m: int) -> int:
    return len(cyclotomic_polynomial(m)) - 1


def _reduce(coeffs: list, m: int) -> tuple:
    """Reduce a coefficient list modulo the (monic) m-th cyclotomic polynomial."""
    phi = cyclotomic_polynomial(m)
    deg = len(phi) - 1
    coeffs = list(coeffs)
    for i in range(len(coeffs) - 1, deg - 1, -1):
        c = coeffs[i]
        if c:
            coeffs[i] = 0
            base = i - deg
            for j in range(deg):
                if phi[j]:
                    coeffs[base + j] -= c * phi[j]
    coeffs = coeffs[:deg] + [0] * max(0, deg - len(coeffs))
    return tuple(normalize(c) for c in coeffs)


class Cyclotomic:
    """An element of Q(zeta_M) written in the power basis 1, z, ..., z^(phi(M)-1)."""

    __slots__ = ("order", "coeffs")

    def __init__(self, order: int, coeffs):
        if order < 1:
            raise ValueError("order must be positive")
        self.order = order
        self.coeffs = _reduce([as_rational(c) for c in coeffs], order)

    @classmethod
    def _raw(cls, order: int, coeffs: tuple) -> "Cyclotomic":
        obj = object.__new__(cls)
        obj.order = order
        obj.coeffs = coeffs
        return obj

    @classmethod
    def embed(cls, value, order: int) -> "Cyclotomic":
        """The rational ``value`` as an element of Q(zeta_order)."""
        if isinstance(value, Cyclotomic):
            return value.lift(order)
        deg = euler_phi(order)
        return cls._raw(order, (as_rational(value),) + (0,) * (deg - 1))

    # -- structure ---------------------------------------------------------

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def to_rational(self) -> Rational:
        if not self.is_rational():
            raise NotRationalError(f"{self} is not rational")
        return self.coeffs[0]

    def lift(self, order: int) -> "Cyclotomic":
        """Embed into Q(zeta_order) via zeta_self -> zeta_order^(order/self.order)."""
        if order == self.order:
            return self
        if order % self.order:
            raise OrderMismatchError(f"cannot embed order {self.order} into order {order}")
        step = order // self.order
        poly = [0] * (step * len(self.coeffs))
        for i, c in enumerate(self.coeffs):
            poly[i * step] = c
        return Cyclotomic._raw(order, _reduce(poly, order))

    def conjugate_power(self, k: int) -> "Cyclotomic":
        """Apply the Galois-type substitution zeta -> zeta^k (k may share factors with M)."""
        m = self.order
        poly = [0] * m
        for i, c in enumerate(self.coeffs):
            poly[(i * k) % m] += c
        return Cyclotomic._raw(m, _reduce(poly, m))

    # -- arithmetic ----------------------------------------------------------

    def _coerce(self, other) -> "Cyclotomic | None":
        if isinstance(other, Cyclotomic):
            if other.order != self.order:
                raise OrderMismatchError(f"orders {self.order} and {other.order} differ")
            return other
        if isinstance(other, (int, Fraction)):
            return Cyclotomic.embed(other, self.order)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Cyclotomic._raw(
            self.order, tuple(normalize(a + b) for a, b in zip(self.coeffs, o.coeffs))
        )

    __radd__ = __add__

    def __neg__(self):
        return Cyclotomic._raw(self.order, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return Cyclotomic.embed(0, self.order)
            return Cyclotomic._raw(self.order, tuple(normalize(a * other) for a in self.coeffs))
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = self.coeffs, o.coeffs
        prod = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        prod[i + j] += x * y
        return Cyclotomic._raw(self.order, _reduce(prod, self.order))

    __rmul__ = __mul__

    def inverse(self) -> "Cyclotomic":
        """Multiplicative inverse via the extended Euclidean algorithm over Q."""
        if not self:
            raise ZeroDivisionError("inverse of zero cyclotomic")
        if self.is_rational():
            return Cyclotomic.embed(Fraction(1) / self.coeffs[0], self.order)
        _, s = _poly_xgcd(list(self.coeffs), list(cyclotomic_polynomial(self.order)))
        return Cyclotomic(self.order, s)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / Fraction(other))
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = Cyclotomic.embed(1, self.order)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __bool__(self):
        return any(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, Cyclotomic):
            if other.order != self.order:
                m = self.order * other.order // gcd(self.order, other.order)
                return self.lift(m).coeffs == other.lift(m).coeffs
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and self.coeffs[0] == other
        return NotImplemented

    def __hash__(self):
        if self.is_rational():
            return hash(self.coeffs[0])
        return hash((self.order, self.coeffs))

    def __repr__(self):
        return f"Cyclotomic({self.order}, {self})"

    def __str__(self):
        return render_cyclotomic(self)


def _poly_trim(p: list) -> list:
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_xgcd(a: list, b: list) -> tuple[list, list]:
    """Return (g, s) with s*a = g (mod b) where g is the monic gcd; used for inverses."""
    r0, r1 = _poly_trim([Fraction(x) for x in b]), _poly_trim([Fraction(x) for x in a])
    s0, s1 = [Fraction(0)], [Fraction(1)]
    while r1:
        q, r = _poly_divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, _poly_sub(s0, _poly_mul(q, s1))
    lead = r0[-1]
    return [c / lead for c in r0], [c / lead for c in s0]


def _poly_mul(a: list, b: list) -> list:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return _poly_trim(out)


def _poly_sub(a: list, b: list) -> list:
    n = max(len(a), len(b))
    out = [(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) for i in range(n)]
    return _poly_trim(out)


def _poly_divmod(a: list, b: list) -> tuple[list, list]:
    a = list(a)
    if len(a) < len(b):
        return [], _poly_trim(a)
    q = [Fraction(0)] * (len(a) - len(b) + 1)
    for i in range(len(q) - 1, -1, -1):
        c = a[i + len(b) - 1] / b[-1]
        q[i] = c
        if c:
            for j, d in enumerate(b):
                a[i + j] -= c * d
    return _poly_trim(q), _poly_trim(a[: len(b) - 1])


def root_of_unity(m: int, k: int) -> Cyclotomic:
    """zeta_m^k as an element of Q(zeta_m)."""
    if m < 1:
        raise ValueError("order must be positive")
    k %= m
    poly = [0] * (k + 1)
    poly[k] = 1
    return Cyclotomic(m, poly)


def root_of_unity_scalar(m: int, k: int, order: int | None = None):
    """zeta_m^k, returned as an int when it equals +-1 and otherwise embedded in ``order``."""
    k %= m
    if k == 0:
        return 1
    if 2 * k == m:
        return -1
    g = gcd(m, k)
    z = root_of_unity(m // g, k // g)
    if order is not None:
        z = z.lift(order)
    return z


def cyclo_arith(a: Cyclotomic, b: Cyclotomic, op: str) -> Cyclotomic:
    if not isinstance(a, Cyclotomic) or not isinstance(b, Cyclotomic):
        raise TypeError("cyclo_arith expects two Cyclotomic operands")
    if a.order != b.order:
        raise OrderMismatchError(f"orders {a.order} and {b.order} differ")
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown operation {op!r}")


def cyclo_to_rational(a) -> Rational:
    if isinstance(a, Cyclotomic):
        return a.to_rational()
    return as_rational(a)


def scalar_to_rational(x) -> Rational:
    """Like :func:`cyclo_to_rational` but accepts any exact scalar."""
    return cyclo_to_rational(x)


def render_cyclotomic(a: Cyclotomic) -> str:
    terms = []
    for i, c in enumerate(a.coeffs):
        if not c:
            continue
        coef = render_rational(c)
        if i == 0:
            terms.append(coef)
        elif i == 1:
            terms.append(f"{coef}*z")
        else:
            terms.append(f"{coef}*z^{i}")
    return " + ".join(terms) if terms else "0"


def render_scalar(x) -> str:
    """Canonical text form: ``a/b`` for rationals, ``c0 + c1*z + ...`` for cyclotomics."""
    if isinstance(x, Cyclotomic):
        if x.is_rational():
            return render_rational(x.coeffs[0])
        return f"[{x.order}] " + render_cyclotomic(x)
    return render_rational(x)


def parse_scalar(text: str):
    """Inverse of :func:`render_scalar`."""
    text = text.strip()
    if text.startswith("["):
        head, body = text[1:].split("]", 1)
        order = int(head)
        coeffs = [0] * euler_phi(order)
        for term in body.split(" + "):
            term = term.strip()
            if "*z" in term:
                c, _, power = term.partition("*z")
                exp = int(power[1:]) if power.startswith("^") else 1
                coeffs[exp] = Fraction(c)
            else:
                coeffs[0] = Fraction(term)
        return Cyclotomic(order, coeffs)
    return normalize(Fraction(text))
