"""Finitely supported rational vectors and exact Gram-Schmidt orthogonalisation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

__all__ = [
    "RationalVector",
    "LinearDependence",
    "IntervalVector",
    "GramSchmidtResult",
    "gram_schmidt",
    "inverse_norm_interval",
    "parse_vector",
]


class LinearDependence(ValueError):
    """The input basis is dependent; ``index`` (1-based) is the first vector in the span of its predecessors."""

    def __init__(self, index: int):
        super().__init__(f"vector {index} lies in the span of the vectors before it")
        self.index = index


class RationalVector:
    """A vector with finitely many non-zero rational coordinates."""

    __slots__ = ("_coords",)

    def __init__(self, coords: Mapping[int, Fraction | int] | Iterable[Fraction | int] = ()):
        if isinstance(coords, Mapping):
            items = coords.items()
        else:
            items = enumerate(coords)
        self._coords = {int(i): Fraction(c) for i, c in items if c != 0}
        if any(i < 0 for i in self._coords):
            raise ValueError("indices must be non-negative")

    @property
    def support(self) -> list[int]:
        return sorted(self._coords)

    def __getitem__(self, i: int) -> Fraction:
        return self._coords.get(i, Fraction(0))

    def dense(self, dim: int | None = None) -> list[Fraction]:
        if dim is None:
            dim = max(self._coords, default=-1) + 1
        return [self[i] for i in range(dim)]

    def dot(self, other: "RationalVector") -> Fraction:
        a, b = (self._coords, other._coords) if len(self._coords) <= len(other._coords) else (other._coords, self._coords)
        return sum((v * b[i] for i, v in a.items() if i in b), Fraction(0))

    def norm2(self) -> Fraction:
        return self.dot(self)

    def __add__(self, other: "RationalVector") -> "RationalVector":
        out = dict(self._coords)
        for i, v in other._coords.items():
            out[i] = out.get(i, 0) + v
        return RationalVector(out)

    def __sub__(self, other: "RationalVector") -> "RationalVector":
        return self + other * -1

    def __mul__(self, c) -> "RationalVector":
        c = Fraction(c)
        return RationalVector({i: v * c for i, v in self._coords.items()})

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not self._coords

    def __eq__(self, other):
        if not isinstance(other, RationalVector):
            return NotImplemented
        return self._coords == other._coords

    def __hash__(self):
        return hash(frozenset(self._coords.items()))

    def __str__(self) -> str:
        dim = max(self._coords, default=-1) + 1
        return "(" + ", ".join(str(c) for c in self.dense(max(dim, 1))) + ")"

    def __repr__(self) -> str:
        return f"RationalVector({self.dense()!r})"


def parse_vector(text: str) -> RationalVector:
    """``"(1, -1/2, 3)"`` or ``"1 -1/2 3"``."""
    body = text.strip().removeprefix("(").removesuffix(")")
    parts = [p for p in body.replace(",", " ").split() if p]
    if not parts:
        raise ValueError(f"empty vector literal {text!r}")
    return RationalVector([Fraction(p) for p in parts])


def inverse_norm_interval(norm2: Fraction, width: int = 20) -> tuple[Fraction, Fraction]:
    """Dyadic ``[a, b]`` around ``1/sqrt(norm2)`` with ``a^2 n <= 1 <= b^2 n`` and ``(b^2 - a^2) n <= 2^-width``."""
    if norm2 <= 0:
        raise ValueError("norm must be positive")
    p, q = norm2.numerator, norm2.denominator
    bits = 22 + max(0, p.bit_length() - q.bit_length()) // 2 + width - 20
    while True:
        # largest k with k^2 p <= 4^bits q
        k = math.isqrt(((q << (2 * bits)) // p))
        a = Fraction(k, 1 << bits)
        b = Fraction(k + 1, 1 << bits)
        if (b * b - a * a) * norm2 <= Fraction(1, 1 << width):
            return a, b
        bits += 1


@dataclass(frozen=True)
class IntervalVector:
    """Coordinatewise rational intervals, the normalised form of an exact vector."""

    lower: tuple[Fraction, ...]
    upper: tuple[Fraction, ...]
    scale: tuple[Fraction, Fraction]
    norm2: tuple[Fraction, Fraction]

    def __str__(self) -> str:
        return "(" + ", ".join(f"[{a}, {b}]" for a, b in zip(self.lower, self.upper)) + ")"


@dataclass(frozen=True)
class GramSchmidtResult:
    orthogonal: list[RationalVector]
    orthonormal: list[IntervalVector]


def gram_schmidt(basis: Sequence[RationalVector], width: int = 20) -> GramSchmidtResult:
    """Orthogonalise ``basis`` exactly; also return each vector scaled by an interval for ``1/|v|``.

    ``v_s = u_s - sum_{i<s} <u_s, v_i>/<v_i, v_i> v_i``.  The squared norm of
    each normalised vector is an interval containing 1 of width at most
    ``2^-width``.
    """
    ortho: list[RationalVector] = []
    norms: list[Fraction] = []
    for s, u in enumerate(basis, start=1):
        v = u
        for w, n2 in zip(ortho, norms):
            c = u.dot(w) / n2
            if c:
                v = v - w * c
        if v.is_zero():
            raise LinearDependence(s)
        ortho.append(v)
        norms.append(v.norm2())
    dim = max((max(v.support) + 1 for v in ortho), default=0)
    normal = []
    for v, n2 in zip(ortho, norms):
        a, b = inverse_norm_interval(n2, width)
        lo, hi = [], []
        for x in v.dense(dim):
            lo.append(min(x * a, x * b))
            hi.append(max(x * a, x * b))
        normal.append(IntervalVector(tuple(lo), tuple(hi), (a, b), (a * a * n2, b * b * n2)))
    return GramSchmidtResult(ortho, normal)
