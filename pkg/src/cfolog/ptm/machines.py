"""Table-backed and sampled probabilistic machines, monotone approximants,
and the construction of a machine whose acceptance probabilities encode the
complement of a c.e. set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Hashable, Iterable, Iterator, NamedTuple

import numpy as np

from ..dyadic import ONE, Dyadic
from . import kernels
from .allocation import AllocationTable, accept_probability, allocate_to, mass

__all__ = [
    "OutOfFuel",
    "OutOfBits",
    "BitSource",
    "SampledMachine",
    "TableMachine",
    "ApproximantPair",
    "approximants",
    "length_lex",
    "no_derandomization_machine",
]

ACCEPT, REJECT = 0, 1


class OutOfFuel(RuntimeError):
    """The run exceeded its step budget."""


class OutOfBits(RuntimeError):
    """The run asked for more random bits than the finite source holds."""


class BitSource:
    """Random bits on demand, either from a fixed string or from a numpy generator."""

    def __init__(self, bits: str | None = None, rng: np.random.Generator | None = None):
        if (bits is None) == (rng is None):
            raise ValueError("give exactly one of bits / rng")
        self._bits = bits
        self._rng = rng
        self.read = 0

    def __call__(self) -> int:
        if self._bits is not None:
            if self.read >= len(self._bits):
                raise OutOfBits(self.read)
            b = self._bits[self.read]
            self.read += 1
            return 1 if b == "1" else 0
        self.read += 1
        return int(self._rng.integers(0, 2))


class SampledMachine:
    """A generic probabilistic program.

    ``program(x, bit, tick)`` decides input ``x``: ``bit()`` returns the next
    random bit, ``tick()`` spends one unit of fuel, and the return value is
    truthy for accept.  Each run may spend at most ``fuel`` ticks.
    """

    def __init__(self, program: Callable[[Any, Callable[[], int], Callable[[], None]], Any], fuel: int = 10_000):
        self.program = program
        self.fuel = fuel

    def run(self, x, bits: BitSource) -> int:
        spent = 0

        def tick():
            nonlocal spent
            spent += 1
            if spent > self.fuel:
                raise OutOfFuel(self.fuel)

        return ACCEPT if self.program(x, bits, tick) else REJECT

    def halts_on(self, x, sigma: str) -> int | None:
        """Outcome if the run on ``sigma`` halts having read exactly all of it."""
        src = BitSource(bits=sigma)
        try:
            out = self.run(x, src)
        except (OutOfBits, OutOfFuel):
            return None
        return out if src.read == len(sigma) else None

    def sample(self, x, n: int, seed: int | None = None) -> int:
        """Number of accepting runs among ``n`` seeded runs (fuel-outs count as rejects)."""
        rng = np.random.default_rng(seed)
        hits = 0
        for _ in range(n):
            try:
                hits += self.run(x, BitSource(rng=rng)) == ACCEPT
            except OutOfFuel:
                pass
        return hits


class TableMachine:
    """The machine described exactly by an :class:`AllocationTable`."""

    def __init__(self, table: AllocationTable):
        self.table = table

    def probability(self, key) -> tuple[Dyadic, Dyadic]:
        return accept_probability(self.table, str(key))

    def halts_on(self, key, sigma: str) -> int | None:
        e = self.table.entries.get(str(key))
        if e is None:
            return None
        if sigma in e.accept:
            return ACCEPT
        if sigma in e.reject:
            return REJECT
        return None

    def packed(self, key):
        e = self.table.entries.get(str(key))
        pairs = [] if e is None else [(s, ACCEPT) for s in e.accept] + [(s, REJECT) for s in e.reject]
        return kernels.pack(pairs)

    def outcomes(self, key, n: int, seed: int | None = None, use_numba: bool | None = None) -> np.ndarray:
        words = kernels.random_words(np.random.default_rng(seed), n)
        return kernels.classify(words, self.packed(key), use_numba)

    def sample(self, key, n: int, seed: int | None = None, use_numba: bool | None = None) -> int:
        return int(np.count_nonzero(self.outcomes(key, n, seed, use_numba) == ACCEPT))


class ApproximantPair(NamedTuple):
    lower: Dyadic
    upper: Dyadic


def length_lex(limit: int | None = None) -> Iterator[str]:
    """eps, 0, 1, 00, 01, ... (the first ``limit`` strings, or forever)."""
    n = 0
    count = 0
    while True:
        for k in range(1 << n):
            if limit is not None and count >= limit:
                return
            yield format(k, f"0{n}b") if n else ""
            count += 1
        n += 1


def approximants(machine, key, s: int) -> ApproximantPair:
    """Bounds from the first ``s`` strings in length-lexicographic order.

    The lower bound is the mass of strings on which the machine halts and
    accepts having read exactly that string; the upper bound is one minus the
    same mass for rejection.  Minimal halting strings are counted once each.
    """
    if s < 0:
        raise ValueError("s must be non-negative")
    if isinstance(machine, AllocationTable):
        machine = TableMachine(machine)
    acc: list[str] = []
    rej: list[str] = []
    for sigma in length_lex(s):
        out = machine.halts_on(key, sigma)
        if out == ACCEPT:
            acc.append(sigma)
        elif out == REJECT:
            rej.append(sigma)
    return ApproximantPair(mass(acc), ONE - mass(rej))


@dataclass
class NoDerandomization:
    table: AllocationTable
    stages: int
    enumerated: dict

    def probability(self, x) -> tuple[Dyadic, Dyadic]:
        """Exact bounds from the finite table built so far."""
        return accept_probability(self.table, str(x))

    def limit_probability(self, x) -> Dyadic:
        """Exact acceptance probability of the completed construction.

        The enumeration given to the constructor is taken to be complete, so
        an input it never lists keeps receiving one accepting string of length
        ``t + 1`` per stage forever; that tail sums to ``2^-(stages+1)``.
        """
        k = str(x)
        t = self.enumerated.get(k)
        if t is not None and t > self.stages:
            return no_derandomization_machine([(k, t)], [k], t).limit_probability(k)
        e = self.table.entry(k)
        if t is not None:
            if e.p_accept + e.p_reject != ONE:
                raise AssertionError("enumerated input left undecided mass")
            return e.p_accept
        return e.p_accept + Dyadic(1, self.stages + 1)


def no_derandomization_machine(
    enumeration: Iterable[tuple[Hashable, int]],
    inputs: Iterable[Hashable],
    stages: int,
) -> NoDerandomization:
    """Run the construction for ``stages`` stages on the given inputs.

    ``enumeration`` lists ``(x, t)``: ``x`` enters the c.e. set at stage
    ``t >= 1``.  While ``x`` is out, stage ``t`` adds one accepting and one
    rejecting string of length ``t + 1``, so the probability tends to 1/2.
    Once ``x`` is in, every undecided path accepts, fixing the probability at
    ``1 - sum_{i=2}^{t} 2^-i``.
    """
    if stages < 0:
        raise ValueError("stages must be non-negative")
    first: dict[str, int] = {}
    for x, t in enumeration:
        if t < 1:
            raise ValueError("enumeration stages start at 1")
        k = str(x)
        first[k] = min(t, first.get(k, t))
    table = AllocationTable()
    keys = [str(x) for x in inputs]
    done: set[str] = set()
    for t in range(1, stages + 1):
        for k in keys:
            if k in done:
                continue
            e = table.entry(k)
            if first.get(k, stages + 1) <= t:
                allocate_to(table, k, "A", ONE - e.p_reject, stage=t, length=t + 1)
                done.add(k)
            else:
                step = Dyadic(1, t + 1)
                allocate_to(table, k, "A", e.p_accept + step, stage=t, length=t + 1)
                allocate_to(table, k, "R", e.p_reject + step, stage=t, length=t + 1)
    for k in keys:
        table.entry(k)
    return NoDerandomization(table, stages, {k: first[k] for k in keys if k in first})
