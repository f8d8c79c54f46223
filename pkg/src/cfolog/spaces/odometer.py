"""The binary odometer on dyadic sets, and stagewise orbit membership."""

from __future__ import annotations

from ..dyadic import Dyadic
from .measure import DyadicSet

__all__ = ["Odometer", "orbit_membership", "orbit_trace"]


def _rev(k: int, n: int) -> int:
    return int(format(k, f"0{n}b")[::-1], 2) if n else 0


class Odometer:
    """Add one to the binary expansion, reading its first digit as the least significant.

    On level-``n`` atoms this is the cyclic shift ``k -> rev(rev(k) + 1)``;
    the map is the same for every level, so a set finer than ``level`` is
    simply handled at its own level.
    """

    def __init__(self, level: int = 1):
        if level < 0:
            raise ValueError("level must be non-negative")
        self.level = level

    def apply(self, x: DyadicSet, power: int = 1) -> DyadicSet:
        n = max(self.level, x.level)
        if n == 0:
            return x
        size = 1 << n
        return DyadicSet.from_atoms(
            (_rev((_rev(k, n) + power) % size, n) for k in x.atoms(n)), n
        )

    __call__ = apply

    def fixed_atoms(self, power: int, level: int | None = None) -> list[int]:
        """Level-``level`` atoms mapped to themselves by the ``power``-th iterate."""
        n = self.level if level is None else level
        size = 1 << n
        return [k for k in range(size) if _rev((_rev(k, n) + power) % size, n) == k]

    def fixed_measure(self, power: int, level: int | None = None) -> Dyadic:
        n = self.level if level is None else level
        return Dyadic(len(self.fixed_atoms(power, n)), n)


def orbit_membership(A: DyadicSet, x: DyadicSet, s: int, odometer: Odometer | None = None) -> Dyadic:
    """``min_{n <= s} mu(tau^-n(x) \\ A)``: 0 once some backward iterate of ``x`` lies inside ``A``."""
    if s < 0:
        raise ValueError("s must be non-negative")
    tau = odometer or Odometer(max(A.level, x.level, 1))
    best = None
    for n in range(s + 1):
        v = (tau.apply(x, -n) - A).measure()
        if best is None or v < best:
            best = v
        if best.numerator == 0:
            break
    return best


def orbit_trace(A: DyadicSet, x: DyadicSet, s: int, odometer: Odometer | None = None) -> list[Dyadic]:
    """The values of :func:`orbit_membership` at stages ``0..s``."""
    tau = odometer or Odometer(max(A.level, x.level, 1))
    out, best = [], None
    for n in range(s + 1):
        v = (tau.apply(x, -n) - A).measure()
        best = v if best is None or v < best else best
        out.append(best)
    return out
