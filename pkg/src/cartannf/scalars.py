"""Coefficient arithmetic: exact Gaussian rationals or tolerant floating complex.

Every zero/equality decision in the package goes through :class:`Arith` so
that exact and float sessions share one code path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Number

from gmpy2 import mpq

DEFAULT_TOL = 1e-12


class GaussianRational:
    """Complex number with rational real and imaginary parts.

    Instances with a zero imaginary part are never produced by the arithmetic
    below; such results collapse to a plain ``mpq``.
    """

    __slots__ = ("re", "im")

    def __init__(self, re, im):
        self.re = mpq(re)
        self.im = mpq(im)

    @staticmethod
    def make(re, im):
        if im == 0:
            return mpq(re)
        return GaussianRational(re, im)

    @staticmethod
    def _parts(z):
        if isinstance(z, GaussianRational):
            return z.re, z.im
        return mpq(z), mpq(0)

    def __add__(self, other):
        a, b = self._parts(other)
        return GaussianRational.make(self.re + a, self.im + b)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._parts(other)
        return GaussianRational.make(self.re - a, self.im - b)

    def __rsub__(self, other):
        a, b = self._parts(other)
        return GaussianRational.make(a - self.re, b - self.im)

    def __mul__(self, other):
        a, b = self._parts(other)
        return GaussianRational.make(self.re * a - self.im * b, self.re * b + self.im * a)

    __rmul__ = __mul__

    def __truediv__(self, other):
        a, b = self._parts(other)
        den = a * a + b * b
        if den == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return GaussianRational.make((self.re * a + self.im * b) / den, (self.im * a - self.re * b) / den)

    def __rtruediv__(self, other):
        a, b = self._parts(other)
        den = self.re * self.re + self.im * self.im
        return GaussianRational.make((a * self.re + b * self.im) / den, (b * self.re - a * self.im) / den)

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pow__(self, k: int):
        if k < 0:
            return 1 / (self ** (-k))
        out = mpq(1)
        base = self
        while k:
            if k & 1:
                out = base * out
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (GaussianRational, int, Fraction)) or type(other) is type(mpq(0)):
            a, b = self._parts(other)
            return self.re == a and self.im == b
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __abs__(self):
        return math.hypot(float(self.re), float(self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def __repr__(self):
        return f"({self.re}{'+' if self.im >= 0 else '-'}{abs(self.im)}i)"


_MPQ = type(mpq(0))


def _parse_rational(text) -> mpq:
    if isinstance(text, str):
        return mpq(text.strip())
    if isinstance(text, float):
        # decimal reading: 0.1 -> 1/10, not the binary expansion
        return mpq(Fraction(repr(text)))
    return mpq(text)


@dataclass(frozen=True)
class Arith:
    """Scalar mode shared by all series of a session.

    ``exact=True`` stores coefficients as ``mpq`` or :class:`GaussianRational`;
    ``exact=False`` stores Python ``complex`` and treats ``|z| <= tol`` as zero.
    """

    exact: bool = True
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if not self.exact and not self.tol > 0:
            raise ValueError("float mode needs a positive zero tolerance")

    @property
    def zero(self):
        return mpq(0) if self.exact else 0j

    @property
    def one(self):
        return mpq(1) if self.exact else 1 + 0j

    def coerce(self, value):
        """Convert ints, Fractions, mpq, strings ``"p/q"`` or complex to this mode."""
        if self.exact:
            if isinstance(value, GaussianRational) or type(value) is _MPQ:
                return value
            if isinstance(value, complex):
                if value.imag == 0:
                    return _parse_rational(value.real)
                return GaussianRational.make(_parse_rational(value.real), _parse_rational(value.imag))
            if isinstance(value, dict):
                return GaussianRational.make(_parse_rational(value.get("re", 0)), _parse_rational(value.get("im", 0)))
            return _parse_rational(value)
        if isinstance(value, GaussianRational):
            return complex(value)
        if isinstance(value, dict):
            return complex(float(_num(value.get("re", 0))), float(_num(value.get("im", 0))))
        if isinstance(value, str):
            return complex(float(mpq(value)))
        if type(value) is _MPQ or isinstance(value, Fraction):
            return complex(float(value))
        return complex(value)

    def is_zero(self, c) -> bool:
        if self.exact:
            return c == 0
        return abs(c) <= self.tol

    def eq(self, a, b) -> bool:
        return self.is_zero(a - b)

    def div(self, a, b):
        if self.is_zero(b):
            raise ZeroDivisionError("division by a scalar that tests as zero")
        return a / b

    def key(self, c):
        """Hashable key for grouping scalars (quantized to the tolerance in float mode)."""
        if self.exact:
            return c
        return (round(c.real / self.tol), round(c.imag / self.tol))

    def to_json(self, c):
        if self.exact:
            re, im = GaussianRational._parts(c)
            return {"re": _fmt(re), "im": _fmt(im)}
        c = complex(c)
        return {"re": c.real, "im": c.imag}

    def describe(self) -> dict:
        return {"arith": "exact" if self.exact else "float", "tol": None if self.exact else self.tol}


def _num(v):
    return mpq(v) if isinstance(v, str) else v


def _fmt(q) -> str:
    q = mpq(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def magnitude(c) -> float:
    """|c| as a float, for norms and conditioning choices."""
    if isinstance(c, Number) and not type(c) is _MPQ:
        return abs(c)
    return float(abs(c))


EXACT = Arith(True)
