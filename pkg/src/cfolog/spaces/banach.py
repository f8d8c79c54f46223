"""Fixed points of contractions, with a certified residual."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, TypeVar

__all__ = ["ContractionViolated", "FixedPoint", "fixed_point", "iteration_bound"]

T = TypeVar("T")


class ContractionViolated(ArithmeticError):
    pass


@dataclass(frozen=True)
class FixedPoint:
    point: object
    iterations: int
    residual: Fraction
    initial_step: Fraction

    def __str__(self) -> str:
        return f"x* = {self.point}  (i = {self.iterations}, residual {self.residual})"


def _abs_diff(u, v) -> Fraction:
    return abs(Fraction(u) - Fraction(v))


def iteration_bound(gamma: Fraction, d0: Fraction, eps: Fraction) -> float:
    """``log_gamma(eps / d0)``: the real number the iteration count must exceed."""
    return math.log(eps / d0) / math.log(gamma)


def fixed_point(
    A: Callable[[T], T],
    gamma: Fraction,
    u0: T,
    eps: Fraction,
    metric: Callable[[T, T], Fraction] = _abs_diff,
    samples: Iterable[tuple[T, T]] = (),
) -> FixedPoint:
    """Iterate ``A`` from ``u0`` until the a-priori bound guarantees ``d(x, A(x)) < eps``.

    ``i`` is the least integer with ``gamma^i d(A(u0), u0) < eps``; the result
    is ``A^(i+1)(u0)``, and its residual is recomputed exactly before
    returning.  ``samples`` are pairs on which the Lipschitz bound is checked.
    """
    gamma, eps = Fraction(gamma), Fraction(eps)
    if not 0 <= gamma < 1:
        raise ValueError("gamma must lie in [0, 1)")
    if eps <= 0:
        raise ValueError("eps must be positive")
    for u, v in samples:
        if metric(A(u), A(v)) > gamma * metric(u, v):
            raise ContractionViolated(f"d(A({u}), A({v})) exceeds gamma * d({u}, {v})")
    u1 = A(u0)
    d0 = Fraction(metric(u1, u0))
    if d0 == 0:
        return FixedPoint(u0, 1, Fraction(0), d0)
    i = 0
    bound = d0
    while not bound < eps:
        i += 1
        bound *= gamma
    x = u1
    for _ in range(i):
        x = A(x)
    residual = Fraction(metric(x, A(x)))
    if not residual < eps:
        raise ContractionViolated(f"residual {residual} is not below {eps}")
    return FixedPoint(x, i, residual, d0)
