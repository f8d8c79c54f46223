"""The dyadic measure algebra on [0, 1) and back-and-forth isomorphisms between presentations."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from ..dyadic import Dyadic

__all__ = [
    "DyadicSet",
    "parse_set",
    "Presentation",
    "IDENTITY",
    "bit_reversal",
    "finite_level",
    "PresentationNotAtomless",
    "PartialIsomorphism",
    "back_and_forth",
]


def _is_dyadic(x: Fraction) -> bool:
    d = x.denominator
    return d & (d - 1) == 0


def _exp(x: Fraction) -> int:
    return x.denominator.bit_length() - 1


class DyadicSet:
    """A finite union of half-open intervals with dyadic endpoints in [0, 1).

    Stored normalised: sorted, disjoint, and with touching intervals merged,
    so equal sets have equal representations.
    """

    __slots__ = ("intervals",)

    def __init__(self, intervals: Iterable[tuple[Fraction, Fraction]] = ()):
        pts = []
        for a, b in intervals:
            a, b = Fraction(a), Fraction(b)
            if not (0 <= a <= b <= 1):
                raise ValueError(f"[{a}, {b}) is not inside [0, 1)")
            if not (_is_dyadic(a) and _is_dyadic(b)):
                raise ValueError(f"[{a}, {b}) has non-dyadic endpoints")
            if a < b:
                pts.append((a, b))
        pts.sort()
        out: list[tuple[Fraction, Fraction]] = []
        for a, b in pts:
            if out and a <= out[-1][1]:
                if b > out[-1][1]:
                    out[-1] = (out[-1][0], b)
            else:
                out.append((a, b))
        object.__setattr__(self, "intervals", tuple(out))

    def __setattr__(self, name, value):
        raise AttributeError("DyadicSet is immutable")

    @classmethod
    def empty(cls) -> "DyadicSet":
        return cls()

    @classmethod
    def full(cls) -> "DyadicSet":
        return cls([(0, 1)])

    @classmethod
    def atom(cls, k: int, n: int) -> "DyadicSet":
        if not 0 <= k < (1 << n):
            raise ValueError("atom index out of range")
        return cls([(Fraction(k, 1 << n), Fraction(k + 1, 1 << n))])

    @classmethod
    def from_atoms(cls, atoms: Iterable[int], n: int) -> "DyadicSet":
        return cls((Fraction(k, 1 << n), Fraction(k + 1, 1 << n)) for k in atoms)

    @property
    def level(self) -> int:
        return max((max(_exp(a), _exp(b)) for a, b in self.intervals), default=0)

    def atoms(self, n: int | None = None) -> list[int]:
        """Indices of the level-``n`` atoms making up the set (``n`` at least :attr:`level`)."""
        n = self.level if n is None else n
        if n < self.level:
            raise ValueError(f"set needs level {self.level}, got {n}")
        out = []
        for a, b in self.intervals:
            out.extend(range(int(a * (1 << n)), int(b * (1 << n))))
        return out

    def measure(self) -> Dyadic:
        return Dyadic.from_fraction(sum((b - a for a, b in self.intervals), Fraction(0)))

    def complement(self) -> "DyadicSet":
        out, cur = [], Fraction(0)
        for a, b in self.intervals:
            if a > cur:
                out.append((cur, a))
            cur = b
        if cur < 1:
            out.append((cur, Fraction(1)))
        return DyadicSet(out)

    def __or__(self, other: "DyadicSet") -> "DyadicSet":
        return DyadicSet(self.intervals + other.intervals)

    def __and__(self, other: "DyadicSet") -> "DyadicSet":
        out = []
        i = j = 0
        A, B = self.intervals, other.intervals
        while i < len(A) and j < len(B):
            a = max(A[i][0], B[j][0])
            b = min(A[i][1], B[j][1])
            if a < b:
                out.append((a, b))
            if A[i][1] <= B[j][1]:
                i += 1
            else:
                j += 1
        return DyadicSet(out)

    def __sub__(self, other: "DyadicSet") -> "DyadicSet":
        return self & other.complement()

    def __xor__(self, other: "DyadicSet") -> "DyadicSet":
        return (self - other) | (other - self)

    def __invert__(self) -> "DyadicSet":
        return self.complement()

    def distance(self, other: "DyadicSet") -> Dyadic:
        return (self ^ other).measure()

    def issubset(self, other: "DyadicSet") -> bool:
        return not (self - other).intervals

    def __bool__(self) -> bool:
        return bool(self.intervals)

    def __eq__(self, other):
        if not isinstance(other, DyadicSet):
            return NotImplemented
        return self.intervals == other.intervals

    def __hash__(self):
        return hash(self.intervals)

    def __str__(self) -> str:
        if not self.intervals:
            return "empty"
        return " | ".join(f"[{a},{b})" for a, b in self.intervals)

    def __repr__(self) -> str:
        return f"DyadicSet({str(self)!r})"


_IV_RE = re.compile(r"\[\s*([0-9/^]+)\s*,\s*([0-9/^]+)\s*\)")


def _frac(text: str) -> Fraction:
    if "^" in text:
        num, _, rest = text.partition("/")
        base, _, exp = rest.partition("^")
        if base != "2":
            raise ValueError(f"bad dyadic {text!r}")
        return Fraction(int(num), 1 << int(exp))
    return Fraction(text)


def parse_set(text: str) -> DyadicSet:
    """``"[0,1/2) | [3/4,1)"``; ``"empty"`` is the empty set."""
    text = text.strip()
    if text in ("empty", "{}", ""):
        return DyadicSet()
    parts = [p.strip() for p in re.split(r"\||\bu\b|∪", text)]
    ivs = []
    for p in parts:
        m = _IV_RE.fullmatch(p)
        if not m:
            raise ValueError(f"not an interval: {p!r}")
        ivs.append((_frac(m.group(1)), _frac(m.group(2))))
    return DyadicSet(ivs)


# --------------------------------------------------------------------------
# presentations
# --------------------------------------------------------------------------


class PresentationNotAtomless(ValueError):
    pass


def _leftmost(b: DyadicSet, m: Fraction) -> DyadicSet:
    """The leftmost part of ``b`` with measure exactly ``m``."""
    out, need = [], m
    for a, c in b.intervals:
        if need <= 0:
            break
        take = min(c - a, need)
        out.append((a, a + take))
        need -= take
    if need > 0:
        raise ValueError("requested measure exceeds the element")
    return DyadicSet(out)


@dataclass(frozen=True)
class Presentation:
    """A coding of the dyadic measure algebra.

    Codes are :class:`DyadicSet` values; Boolean operations and measure are
    the set ones (the coding map is an automorphism), while ``split(b, m)``
    is the presentation's own procedure for finding a sub-element of ``b`` of
    measure ``m``.  ``decode`` maps a code to the standard set it denotes.
    """

    name: str
    split: Callable[[DyadicSet, Fraction], DyadicSet]
    decode: Callable[[DyadicSet], DyadicSet] = lambda x: x
    encode: Callable[[DyadicSet], DyadicSet] = lambda x: x


IDENTITY = Presentation("identity", _leftmost)


def _reverse_bits(k: int, n: int) -> int:
    return int(format(k, f"0{n}b")[::-1], 2) if n else 0


def _permute(x: DyadicSet, n: int) -> DyadicSet:
    # reverse the first n binary digits of every point, keep the rest
    lvl = max(n, x.level)
    rest = lvl - n
    atoms = []
    for k in x.atoms(lvl):
        hi, lo = k >> rest, k & ((1 << rest) - 1)
        atoms.append((_reverse_bits(hi, n) << rest) | lo)
    return DyadicSet.from_atoms(atoms, lvl)


def bit_reversal(n: int) -> Presentation:
    """Codes are images under reversal of the first ``n`` binary digits (an involution)."""

    def enc(x):
        return _permute(x, n)

    def split(b, m):
        return enc(_leftmost(enc(b), m))

    return Presentation(f"bit-reversal-{n}", split, enc, enc)


def finite_level(n: int) -> Presentation:
    """The finite algebra of level-``n`` sets; it has atoms, so splitting can fail."""

    def split(b, m):
        if b.level > n:
            raise PresentationNotAtomless(f"{b} is not a level-{n} element")
        if Fraction(m) * (1 << n) % 1:
            raise PresentationNotAtomless(f"no element of measure {m} at level {n}")
        return _leftmost(b, Fraction(m))

    return Presentation(f"level-{n}", split)


# --------------------------------------------------------------------------
# back and forth
# --------------------------------------------------------------------------


@dataclass
class PartialIsomorphism:
    """Paired partitions of unity ``left[i] <-> right[i]`` with equal measures.

    The map sends any union of left atoms to the union of the matching right
    atoms; it is defined exactly on the subalgebra the left atoms generate.
    """

    source: Presentation
    target: Presentation
    left: list[DyadicSet] = field(default_factory=lambda: [DyadicSet.full()])
    right: list[DyadicSet] = field(default_factory=lambda: [DyadicSet.full()])
    history: list[tuple[str, DyadicSet, DyadicSet]] = field(default_factory=list)

    def _refine(self, x: DyadicSet, forth: bool) -> DyadicSet:
        own, other = (self.left, self.right) if forth else (self.right, self.left)
        splitter = self.target.split if forth else self.source.split
        new_own, new_other, image = [], [], DyadicSet()
        for a, b in zip(own, other):
            inside = a & x
            m = inside.measure().to_fraction()
            part = splitter(b, m)
            if part.measure() != inside.measure() or not part.issubset(b):
                raise PresentationNotAtomless(f"split of {b} at {m} returned {part}")
            image = image | part
            for ao, bo in ((inside, part), (a - x, b - part)):
                if ao:
                    new_own.append(ao)
                    new_other.append(bo)
        if forth:
            self.left, self.right = new_own, new_other
        else:
            self.right, self.left = new_own, new_other
        return image

    def forth(self, x: DyadicSet) -> DyadicSet:
        y = self._refine(x, True)
        self.history.append(("forth", x, y))
        return y

    def back(self, y: DyadicSet) -> DyadicSet:
        x = self._refine(y, False)
        self.history.append(("back", y, x))
        return x

    def _lookup(self, x: DyadicSet, own, other) -> DyadicSet:
        out = DyadicSet()
        covered = DyadicSet()
        for a, b in zip(own, other):
            inter = a & x
            if not inter:
                continue
            if inter != a:
                raise KeyError(f"{x} is outside the domain of the partial map")
            out = out | b
            covered = covered | a
        if covered != x:
            raise KeyError(f"{x} is outside the domain of the partial map")
        return out

    def __call__(self, x: DyadicSet) -> DyadicSet:
        return self._lookup(x, self.left, self.right)

    def inverse(self, y: DyadicSet) -> DyadicSet:
        return self._lookup(y, self.right, self.left)

    def domain_atoms(self) -> list[DyadicSet]:
        return list(self.left)

    def check(self) -> None:
        total_l = sum((a.measure().to_fraction() for a in self.left), Fraction(0))
        total_r = sum((b.measure().to_fraction() for b in self.right), Fraction(0))
        if total_l != 1 or total_r != 1:
            raise AssertionError("atoms do not partition unity")
        for a, b in zip(self.left, self.right):
            if a.measure() != b.measure():
                raise AssertionError(f"measure mismatch {a} / {b}")


def back_and_forth(
    source: Presentation,
    target: Presentation,
    forth: Sequence[DyadicSet] = (),
    back: Sequence[DyadicSet] = (),
    prior: PartialIsomorphism | None = None,
) -> PartialIsomorphism:
    """Extend ``prior`` (or the trivial map) so that every ``forth`` element is in
    its domain and every ``back`` element in its range."""
    iso = prior if prior is not None else PartialIsomorphism(source, target)
    for x in forth:
        iso.forth(x)
    for y in back:
        iso.back(y)
    return iso
