"""Exact arithmetic in the field Q(sqrt2, i).

An element is stored as four rationals ``(a, b, c, d)`` meaning
``a + b*sqrt2 + (c + d*sqrt2)*i``.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Union

Rational = Union[int, Fraction]

_TUPLE_RE = re.compile(r"^\(\s*([^,()]+)\s*,\s*([^,()]+)\s*,\s*([^,()]+)\s*,\s*([^,()]+)\s*\)$")


def _sign_real(a: Fraction, b: Fraction) -> int:
    """Sign of a + b*sqrt2, decided without floating point."""
    if b == 0:
        return (a > 0) - (a < 0)
    if a == 0:
        return (b > 0) - (b < 0)
    if (a > 0) == (b > 0):
        return 1 if a > 0 else -1
    # opposite signs: compare a^2 with 2 b^2
    if a * a > 2 * b * b:
        return 1 if a > 0 else -1
    return 1 if b > 0 else -1


def _fmt(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


_ZERO = Fraction(0)


class Scalar:
    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a: Rational = 0, b: Rational = 0, c: Rational = 0, d: Rational = 0):
        object.__setattr__(self, "a", Fraction(a))
        object.__setattr__(self, "b", Fraction(b))
        object.__setattr__(self, "c", Fraction(c))
        object.__setattr__(self, "d", Fraction(d))

    def __setattr__(self, name, value):
        raise AttributeError("Scalar is immutable")

    @classmethod
    def _raw(cls, a: Fraction, b: Fraction, c: Fraction, d: Fraction) -> "Scalar":
        # components are already Fractions; skip the conversions in __init__
        x = object.__new__(cls)
        object.__setattr__(x, "a", a)
        object.__setattr__(x, "b", b)
        object.__setattr__(x, "c", c)
        object.__setattr__(x, "d", d)
        return x

    @classmethod
    def coerce(cls, x) -> "Scalar":
        if isinstance(x, Scalar):
            return x
        if isinstance(x, (int, Fraction)):
            return cls(x)
        raise TypeError(f"cannot convert {type(x).__name__} to Scalar")

    @classmethod
    def sqrt2(cls) -> "Scalar":
        return cls(0, 1)

    @classmethod
    def i(cls) -> "Scalar":
        return cls(0, 0, 1)

    @classmethod
    def parse(cls, text: str) -> "Scalar":
        m = _TUPLE_RE.match(text.strip())
        if not m:
            raise ValueError(f"malformed scalar {text!r}")
        try:
            return cls(*(Fraction(g.strip()) for g in m.groups()))
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"malformed scalar {text!r}") from exc

    def as_tuple(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.a, self.b, self.c, self.d)

    def render(self) -> str:
        return "(" + ",".join(_fmt(q) for q in self.as_tuple()) + ")"

    def __repr__(self):
        return f"Scalar{self.render()}"

    def __str__(self):
        return self.render()

    def __hash__(self):
        return hash(self.as_tuple())

    def __eq__(self, other):
        try:
            other = Scalar.coerce(other)
        except TypeError:
            return NotImplemented
        return self.as_tuple() == other.as_tuple()

    def __bool__(self):
        return any(self.as_tuple())

    def __neg__(self):
        return Scalar._raw(-self.a, -self.b, -self.c, -self.d)

    def __add__(self, other):
        o = Scalar.coerce(other)
        return Scalar._raw(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-Scalar.coerce(other))

    def __rsub__(self, other):
        return Scalar.coerce(other) - self

    def __mul__(self, other):
        o = Scalar.coerce(other)
        if not (self.c or self.d or o.c or o.d):
            return Scalar._raw(self.a * o.a + 2 * self.b * o.b, self.a * o.b + self.b * o.a, _ZERO, _ZERO)
        # real and imaginary parts are elements of Q(sqrt2): (x0 + x1 r)
        def rmul(x0, x1, y0, y1):
            return x0 * y0 + 2 * x1 * y1, x0 * y1 + x1 * y0

        re1 = rmul(self.a, self.b, o.a, o.b)
        re2 = rmul(self.c, self.d, o.c, o.d)
        im1 = rmul(self.a, self.b, o.c, o.d)
        im2 = rmul(self.c, self.d, o.a, o.b)
        return Scalar._raw(re1[0] - re2[0], re1[1] - re2[1], im1[0] + im2[0], im1[1] + im2[1])

    __rmul__ = __mul__

    def conjugate(self) -> "Scalar":
        """Complex conjugation (sqrt2 fixed)."""
        return Scalar(self.a, self.b, -self.c, -self.d)

    def sqrt2_conjugate(self) -> "Scalar":
        return Scalar(self.a, -self.b, self.c, -self.d)

    def inverse(self) -> "Scalar":
        if not self:
            raise ZeroDivisionError("inverse of zero Scalar")
        if not (self.c or self.d):
            q = self.a * self.a - 2 * self.b * self.b
            return Scalar._raw(self.a / q, -self.b / q, _ZERO, _ZERO)
        # z * conj(z) is real in Q(sqrt2); then multiply by its sqrt2-conjugate
        n = self * self.conjugate()
        n2 = n * n.sqrt2_conjugate()
        q = n2.a
        return self.conjugate() * n.sqrt2_conjugate() * Scalar(1 / q)

    def __truediv__(self, other):
        return self * Scalar.coerce(other).inverse()

    def __rtruediv__(self, other):
        return Scalar.coerce(other) * self.inverse()

    def is_real(self) -> bool:
        return self.c == 0 and self.d == 0

    def is_rational(self) -> bool:
        return self.b == 0 and self.c == 0 and self.d == 0

    def real_sign(self) -> int:
        """Sign of a real Scalar; raises for non-real values."""
        if not self.is_real():
            raise ValueError("sign of a non-real Scalar")
        return _sign_real(self.a, self.b)

    def is_positive_real(self) -> bool:
        return self.is_real() and _sign_real(self.a, self.b) > 0

    def is_negative_real(self) -> bool:
        return self.is_real() and _sign_real(self.a, self.b) < 0


ZERO = Scalar(0)
ONE = Scalar(1)


def classify(x: Scalar) -> str:
    """nodal / real_saddle / complex_saddle; invalid for 0 and positive rationals."""
    if not x.is_real():
        return "complex_saddle"
    s = x.real_sign()
    if s < 0:
        return "real_saddle"
    if s == 0 or x.is_rational():
        return "invalid"
    return "nodal"


def is_valid_final_index(x: Scalar) -> bool:
    return classify(x) != "invalid"
