"""Exact scalar arithmetic: rational parsing and quadratic field extensions.

All algebraic identities in this package are checked with zero rounding
error, so the building blocks here work over ``fractions.Fraction``.
``QuadExt`` implements arithmetic in Q(sqrt(d)) for a fixed squarefree
integer d >= 2, which is enough to store fixed-point coordinates whose
entries involve a single quadratic surd.
"""

from __future__ import annotations

from fractions import Fraction
from math import isqrt

__all__ = [
    "parse_rational",
    "squarefree_decompose",
    "exact_sqrt",
    "QuadExt",
    "is_exact_scalar",
    "exact_str",
]


def parse_rational(text):
    """Parse ``p/q``, integer, or decimal strings into a Fraction."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    s = str(text).strip()
    if "/" in s:
        num, den = s.split("/", 1)
        return Fraction(int(num.strip()), int(den.strip()))
    return Fraction(s)


def squarefree_decompose(n):
    """Write n >= 1 as s*s*d with d squarefree; return (s, d)."""
    if n < 1:
        raise ValueError("need a positive integer")
    s, d, p = 1, 1, 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            s *= p ** (e // 2)
            if e % 2:
                d *= p
        p += 1 if p == 2 else 2
    return s, d * n


def exact_sqrt(value):
    """Exact square root of a non-negative Fraction or int.

    Returns a Fraction when the root is rational, otherwise a QuadExt.
    """
    q = value if isinstance(value, Fraction) else Fraction(value)
    if q < 0:
        raise ValueError("square root of a negative rational")
    if q == 0:
        return Fraction(0)
    # sqrt(a/b) = sqrt(a*b)/b
    s, d = squarefree_decompose(q.numerator * q.denominator)
    coeff = Fraction(s, q.denominator)
    if d == 1:
        return coeff
    return QuadExt(0, coeff, d)


def _collapse(a, b, d):
    return a if b == 0 else QuadExt(a, b, d)


class QuadExt:
    """A number a + b*sqrt(d) with rational a, b and fixed squarefree d >= 2.

    Arithmetic with Fraction and int operands stays exact.  Operations that
    would leave the field (mixing distinct d with both surd parts nonzero)
    raise TypeError.  Results with vanishing surd part collapse to Fraction.
    """

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b, d):
        self.a = a if isinstance(a, Fraction) else Fraction(a)
        self.b = b if isinstance(b, Fraction) else Fraction(b)
        self.d = int(d)
        if self.d < 2:
            raise ValueError("d must be a squarefree integer >= 2")

    def _split(self, other):
        """Return (a, b) parts of the operand inside this field, or None."""
        if isinstance(other, QuadExt):
            if other.d == self.d:
                return other.a, other.b
            if other.b == 0:
                return other.a, Fraction(0)
            return None
        if isinstance(other, (int, Fraction)):
            return Fraction(other), Fraction(0)
        return None

    def __add__(self, other):
        if isinstance(other, float):
            return float(self) + other
        parts = self._split(other)
        if parts is None:
            return NotImplemented
        oa, ob = parts
        return _collapse(self.a + oa, self.b + ob, self.d)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, float):
            return float(self) - other
        parts = self._split(other)
        if parts is None:
            return NotImplemented
        oa, ob = parts
        return _collapse(self.a - oa, self.b - ob, self.d)

    def __rsub__(self, other):
        if isinstance(other, float):
            return other - float(self)
        parts = self._split(other)
        if parts is None:
            return NotImplemented
        oa, ob = parts
        return _collapse(oa - self.a, ob - self.b, self.d)

    def __mul__(self, other):
        if isinstance(other, float):
            return float(self) * other
        parts = self._split(other)
        if parts is None:
            return NotImplemented
        oa, ob = parts
        return _collapse(self.a * oa + self.b * ob * self.d,
                         self.a * ob + self.b * oa, self.d)

    __rmul__ = __mul__

    def _inverse(self):
        norm = self.a * self.a - self.b * self.b * self.d
        if norm == 0:
            raise ZeroDivisionError("division by zero element")
        return QuadExt(self.a / norm, -self.b / norm, self.d)

    def __truediv__(self, other):
        if isinstance(other, float):
            return float(self) / other
        parts = self._split(other)
        if parts is None:
            return NotImplemented
        oa, ob = parts
        if ob == 0:
            if oa == 0:
                raise ZeroDivisionError("division by zero")
            return _collapse(self.a / oa, self.b / oa, self.d)
        return self * QuadExt(oa, ob, self.d)._inverse()

    def __rtruediv__(self, other):
        if isinstance(other, float):
            return other / float(self)
        parts = self._split(other)
        if parts is None:
            return NotImplemented
        oa, ob = parts
        return _collapse(oa, ob, self.d) * self._inverse() \
            if ob != 0 else self._inverse() * oa

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        out = Fraction(1)
        for _ in range(n):
            out = self * out
        return out

    def __neg__(self):
        return QuadExt(-self.a, -self.b, self.d)

    def __pos__(self):
        return self

    def __eq__(self, other):
        parts = self._split(other)
        if parts is None:
            if isinstance(other, float):
                return float(self) == other
            return NotImplemented
        oa, ob = parts
        return self.a == oa and self.b == ob

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __bool__(self):
        return self.a != 0 or self.b != 0

    def __float__(self):
        return float(self.a) + float(self.b) * float(self.d) ** 0.5

    def __abs__(self):
        return self if float(self) >= 0 else -self

    def __lt__(self, other):
        if isinstance(other, (int, Fraction, float, QuadExt)):
            return float(self) < float(other)
        return NotImplemented

    def __le__(self, other):
        if isinstance(other, (int, Fraction, float, QuadExt)):
            return float(self) <= float(other)
        return NotImplemented

    def __gt__(self, other):
        if isinstance(other, (int, Fraction, float, QuadExt)):
            return float(self) > float(other)
        return NotImplemented

    def __ge__(self, other):
        if isinstance(other, (int, Fraction, float, QuadExt)):
            return float(self) >= float(other)
        return NotImplemented

    def __repr__(self):
        return f"QuadExt({self.a!r}, {self.b!r}, {self.d})"

    def __str__(self):
        surd = _format_surd(self.b, self.d)
        if self.a == 0:
            return surd
        sign = "+" if self.b > 0 else "-"
        mag = _format_surd(abs(self.b), self.d)
        return f"{self.a} {sign} {mag}"


def _format_surd(b, d):
    num, den = b.numerator, b.denominator
    if num == 1:
        head = f"sqrt({d})"
    elif num == -1:
        head = f"-sqrt({d})"
    else:
        head = f"{num}*sqrt({d})"
    return head if den == 1 else f"{head}/{den}"


def is_exact_scalar(value):
    """True for int, Fraction, and QuadExt values."""
    return isinstance(value, (int, Fraction, QuadExt))


def exact_str(value):
    """Canonical string form: '114/5', '3', 'sqrt(10)/12', or a float repr."""
    if isinstance(value, (Fraction, int, QuadExt)):
        return str(value)
    return repr(float(value))
