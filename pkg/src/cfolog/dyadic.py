"""Exact dyadic rationals in [0, 1] and dyadic intervals.

Every truth value and every probability handled by the library is a
:class:`Dyadic`, i.e. a number ``k / 2**n`` held as a pair of Python ints.
No floating point is involved anywhere on these paths, so comparisons such as
``value <= k/2**n`` are exact.
"""

from __future__ import annotations

import re
from fractions import Fraction

__all__ = [
    "Dyadic",
    "DyadicInterval",
    "ZERO",
    "ONE",
    "HALF",
    "truncated_sub",
    "negate",
    "halve",
    "dmin",
    "dmax",
    "interval_op",
    "parse_dyadic",
]


def _canon(num: int, exp: int) -> tuple[int, int]:
    if num == 0:
        return 0, 0
    if exp:
        tz = (num & -num).bit_length() - 1
        if tz:
            tz = min(tz, exp)
            num >>= tz
            exp -= tz
    return num, exp


class Dyadic:
    """The number ``numerator / 2**exponent``, kept in canonical form.

    Canonical form means the numerator is odd unless the exponent is 0, so two
    equal values always carry identical fields and ``==`` is structural.
    """

    __slots__ = ("numerator", "exponent")

    def __init__(self, numerator: int, exponent: int = 0):
        if exponent < 0:
            raise ValueError("exponent must be non-negative")
        if numerator < 0 or numerator > (1 << exponent):
            raise ValueError(f"{numerator}/2^{exponent} lies outside [0, 1]")
        num, exp = _canon(numerator, exponent)
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "exponent", exp)

    @classmethod
    def _raw(cls, num: int, exp: int) -> "Dyadic":
        # trusted constructor: caller guarantees range, canonicalisation done here
        self = object.__new__(cls)
        num, exp = _canon(num, exp)
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "exponent", exp)
        return self

    @classmethod
    def from_fraction(cls, value: Fraction | int) -> "Dyadic":
        value = Fraction(value)
        den = value.denominator
        if den & (den - 1):
            raise ValueError(f"{value} is not dyadic")
        return cls(value.numerator, den.bit_length() - 1)

    def __setattr__(self, name, value):
        raise AttributeError("Dyadic is immutable")

    def __reduce__(self):
        return (Dyadic, (self.numerator, self.exponent))

    # -- comparisons -----------------------------------------------------
    def _key(self, other: "Dyadic") -> tuple[int, int]:
        e = max(self.exponent, other.exponent)
        return self.numerator << (e - self.exponent), other.numerator << (e - other.exponent)

    def __eq__(self, other):
        if isinstance(other, Dyadic):
            return self.numerator == other.numerator and self.exponent == other.exponent
        if isinstance(other, (int, Fraction)):
            return self.to_fraction() == other
        return NotImplemented

    def __hash__(self):
        return hash(self.to_fraction())

    def __lt__(self, other: "Dyadic") -> bool:
        a, b = self._key(other)
        return a < b

    def __le__(self, other: "Dyadic") -> bool:
        a, b = self._key(other)
        return a <= b

    def __gt__(self, other: "Dyadic") -> bool:
        a, b = self._key(other)
        return a > b

    def __ge__(self, other: "Dyadic") -> bool:
        a, b = self._key(other)
        return a >= b

    # -- arithmetic (results must stay in [0, 1]) ------------------------
    def __add__(self, other: "Dyadic") -> "Dyadic":
        e = max(self.exponent, other.exponent)
        a, b = self._key(other)
        if a + b > (1 << e):
            raise ValueError("sum leaves [0, 1]")
        return Dyadic._raw(a + b, e)

    def __sub__(self, other: "Dyadic") -> "Dyadic":
        e = max(self.exponent, other.exponent)
        a, b = self._key(other)
        if a < b:
            raise ValueError("difference is negative")
        return Dyadic._raw(a - b, e)

    def to_fraction(self) -> Fraction:
        return Fraction(self.numerator, 1 << self.exponent)

    def __float__(self) -> float:
        return self.numerator / (1 << self.exponent)

    def scaled(self, n: int) -> int:
        """Return ``self * 2**n`` if that is an integer, else raise."""
        if n < self.exponent:
            raise ValueError(f"{self} is not a multiple of 2^-{n}")
        return self.numerator << (n - self.exponent)

    def floor_to(self, n: int) -> "Dyadic":
        """Largest ``k/2**n`` that is ``<= self``."""
        if n >= self.exponent:
            return self
        return Dyadic._raw(self.numerator >> (self.exponent - n), n)

    def ceil_to(self, n: int) -> "Dyadic":
        """Smallest ``k/2**n`` that is ``>= self``."""
        if n >= self.exponent:
            return self
        shift = self.exponent - n
        return Dyadic._raw(-((-self.numerator) >> shift), n)

    def __str__(self) -> str:
        if self.exponent == 0:
            return str(self.numerator)
        return f"{self.numerator}/2^{self.exponent}"

    def __repr__(self) -> str:
        return f"Dyadic({self.numerator}, {self.exponent})"


ZERO = Dyadic(0)
ONE = Dyadic(1)
HALF = Dyadic(1, 1)

_DYADIC_RE = re.compile(r"\s*(\d+)\s*(?:/\s*(\d+)\s*(?:\^\s*(\d+))?)?\s*$")


def parse_dyadic(text: str) -> Dyadic:
    """Parse ``"k/2^n"``; ``"k/m"`` with ``m`` a power of two and bare ``0``/``1`` also work."""
    m = _DYADIC_RE.match(text)
    if not m:
        raise ValueError(f"not a dyadic literal: {text!r}")
    k = int(m.group(1))
    if m.group(2) is None:
        return Dyadic(k, 0)
    base = int(m.group(2))
    if m.group(3) is not None:
        if base != 2:
            raise ValueError(f"base must be 2 in {text!r}")
        return Dyadic(k, int(m.group(3)))
    if base <= 0 or base & (base - 1):
        raise ValueError(f"denominator of {text!r} is not a power of two")
    return Dyadic(k, base.bit_length() - 1)


def truncated_sub(a: Dyadic, b: Dyadic) -> Dyadic:
    """``max(a - b, 0)``."""
    ea, eb = a.exponent, b.exponent
    if ea >= eb:
        r = a.numerator - (b.numerator << (ea - eb))
        e = ea
    else:
        r = (a.numerator << (eb - ea)) - b.numerator
        e = eb
    if r <= 0:
        return ZERO
    return Dyadic._raw(r, e)


def negate(a: Dyadic) -> Dyadic:
    """``1 - a``."""
    return Dyadic._raw((1 << a.exponent) - a.numerator, a.exponent)


def halve(a: Dyadic) -> Dyadic:
    if a.numerator == 0:
        return ZERO
    return Dyadic._raw(a.numerator, a.exponent + 1)


def dmin(a: Dyadic, b: Dyadic) -> Dyadic:
    return a if a <= b else b


def dmax(a: Dyadic, b: Dyadic) -> Dyadic:
    return a if a >= b else b


class DyadicInterval:
    """Closed interval ``[lo, hi]`` with dyadic endpoints inside [0, 1]."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo: Dyadic, hi: Dyadic | None = None):
        if hi is None:
            hi = lo
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def __setattr__(self, name, value):
        raise AttributeError("DyadicInterval is immutable")

    @classmethod
    def full(cls) -> "DyadicInterval":
        return cls(ZERO, ONE)

    @property
    def width(self) -> Dyadic:
        return self.hi - self.lo

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, x: Dyadic) -> bool:
        return self.lo <= x <= self.hi

    def within(self, other: "DyadicInterval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def intersect(self, other: "DyadicInterval") -> "DyadicInterval":
        return DyadicInterval(dmax(self.lo, other.lo), dmin(self.hi, other.hi))

    # interval extensions; all five operations are monotone or antitone in
    # each argument, so endpoint evaluation is exact (no rounding needed)
    def __neg__(self) -> "DyadicInterval":
        return DyadicInterval(negate(self.hi), negate(self.lo))

    def truncated_sub(self, other: "DyadicInterval") -> "DyadicInterval":
        return DyadicInterval(truncated_sub(self.lo, other.hi), truncated_sub(self.hi, other.lo))

    def halve(self) -> "DyadicInterval":
        return DyadicInterval(halve(self.lo), halve(self.hi))

    def min(self, other: "DyadicInterval") -> "DyadicInterval":
        return DyadicInterval(dmin(self.lo, other.lo), dmin(self.hi, other.hi))

    def max(self, other: "DyadicInterval") -> "DyadicInterval":
        return DyadicInterval(dmax(self.lo, other.lo), dmax(self.hi, other.hi))

    def __eq__(self, other):
        if not isinstance(other, DyadicInterval):
            return NotImplemented
        return self.lo == other.lo and self.hi == other.hi

    def __hash__(self):
        return hash((self.lo, self.hi))

    def __str__(self) -> str:
        return f"[{self.lo}, {self.hi}]"

    def __repr__(self) -> str:
        return f"DyadicInterval({self.lo!r}, {self.hi!r})"


_UNARY = {"neg": DyadicInterval.__neg__, "half": DyadicInterval.halve}
_BINARY = {
    "sub": DyadicInterval.truncated_sub,
    "min": DyadicInterval.min,
    "max": DyadicInterval.max,
}


def interval_op(op: str, x: DyadicInterval, y: DyadicInterval | None = None) -> DyadicInterval:
    """Apply one of ``sub``, ``neg``, ``half``, ``min``, ``max`` to intervals."""
    if op in _UNARY:
        return _UNARY[op](x)
    if op in _BINARY:
        if y is None:
            raise TypeError(f"{op} needs two intervals")
        return _BINARY[op](x, y)
    raise ValueError(f"unknown interval operation {op!r}")
