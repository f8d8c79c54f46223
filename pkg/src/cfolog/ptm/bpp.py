"""Majority-vote amplification, and deciding separated definable sets by sampling."""

from __future__ import annotations

import itertools
import math
import zlib
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Sequence

import numpy as np

from ..dyadic import HALF, ONE, ZERO, Dyadic, DyadicInterval
from ..formulas import Formula, Signature, TruncSub, free_vars
from ..semantics import CountableStructure, evaluate
from . import kernels
from .allocation import AllocationTable, allocate_to, mass
from .machines import ACCEPT, REJECT, SampledMachine, TableMachine, approximants

__all__ = [
    "exact_majority_error",
    "hoeffding_bound",
    "trials_for",
    "AmplifiedMachine",
    "amplify",
    "bpp_to_structure",
    "table_machine_for",
    "Verdict",
    "decide_separated",
    "SeparationViolated",
]


def exact_majority_error(p: Fraction | Dyadic, m: int) -> Fraction:
    """Probability that more than half of ``m`` independent trials err, each with probability ``p``."""
    if m < 1 or m % 2 == 0:
        raise ValueError("m must be a positive odd number")
    p = p.to_fraction() if isinstance(p, Dyadic) else Fraction(p)
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    q = 1 - p
    return sum(math.comb(m, j) * p**j * q ** (m - j) for j in range(m // 2 + 1, m + 1))


def hoeffding_bound(gamma: Fraction | float, m: int) -> float:
    """``exp(-2 gamma^2 m)``: majority error when each trial errs with probability ``<= 1/2 - gamma``."""
    return math.exp(-2 * float(gamma) ** 2 * m)


def trials_for(gamma: Fraction | float, failure: float) -> int:
    """Smallest odd ``m`` whose Hoeffding bound is at most ``failure``."""
    if gamma <= 0:
        raise ValueError("separation must be positive")
    m = max(1, math.ceil(math.log(1 / failure) / (2 * float(gamma) ** 2)))
    return m if m % 2 else m + 1


class AmplifiedMachine:
    """Majority vote over ``m`` independent runs of a table-backed machine."""

    def __init__(self, base: TableMachine, m: int):
        if m < 1 or m % 2 == 0:
            raise ValueError("m must be a positive odd number")
        self.base = base
        self.m = m

    def error(self, key, correct: int) -> Fraction:
        """Exact probability that the majority disagrees with ``correct``.

        Runs still undecided by the table are counted as errors.
        """
        lo, hi = self.base.probability(key)
        p_wrong = (1 - lo.to_fraction()) if correct == ACCEPT else hi.to_fraction()
        return exact_majority_error(p_wrong, self.m)

    def product_table(self, key, limit: int = 4096) -> AllocationTable:
        """The amplified machine written out as a table.

        Each combined string is a concatenation of one halting string per
        trial; concatenations of prefix-free codes are prefix-free, so masses
        multiply exactly.
        """
        e = self.base.table.entries.get(str(key))
        strings = [] if e is None else [(s, ACCEPT) for s in e.accept] + [(s, REJECT) for s in e.reject]
        if len(strings) ** self.m > limit:
            raise ValueError("product table too large; lower m or simplify the table")
        t = AllocationTable()
        entry = t.entry(str(key))
        for combo in itertools.product(strings, repeat=self.m):
            accepts = sum(1 for _, side in combo if side == ACCEPT)
            bits = "".join(s for s, _ in combo)
            (entry.accept if 2 * accepts > self.m else entry.reject).append(bits)
        entry.accept_bound = mass(entry.accept)
        entry.reject_bound = mass(entry.reject)
        return t

    def empirical_errors(self, key, correct: int, runs: int, seed: int | None = None,
                         use_numba: bool | None = None) -> int:
        """Wrong majorities among ``runs`` seeded amplified runs."""
        rng = np.random.default_rng(seed)
        packed = self.base.packed(key)
        wrong = REJECT if correct == ACCEPT else ACCEPT
        total = 0
        block = max(1, (1 << 22) // self.m)
        done = 0
        while done < runs:
            r = min(block, runs - done)
            words = kernels.random_words(rng, r * self.m)
            total += kernels.majority_errors(words, packed, self.m, wrong, use_numba)
            done += r
        return total


def amplify(machine: TableMachine | AllocationTable, m: int) -> AmplifiedMachine:
    if isinstance(machine, AllocationTable):
        machine = TableMachine(machine)
    return AmplifiedMachine(machine, m)


def table_machine_for(values: dict[Hashable, Dyadic]) -> TableMachine:
    """A complete table machine accepting input ``x`` with probability exactly ``values[x]``.

    Strings are chosen from length 1 upward, so each side is the binary
    expansion of its mass and the table stays short.
    """
    t = AllocationTable()
    for x, v in values.items():
        k = str(x)
        allocate_to(t, k, "A", v, length=1)
        allocate_to(t, k, "R", ONE - v, length=1)
    return TableMachine(t)


# -- structures from machines ----------------------------------------------


def bpp_to_structure(
    machine: TableMachine | SampledMachine | AllocationTable,
    predicate: str = "A",
    samples: int = 4096,
    seed: int = 0,
    probe: int = 255,
) -> CountableStructure:
    """The weak structure ``(N, A)`` with discrete metric and ``A(x)`` = acceptance probability of ``x``.

    Table-backed machines give exact intervals (a point once the table is
    complete).  A sampled machine is first probed on the first ``probe``
    strings; if that settles the value it is exact, otherwise a Hoeffding
    interval at confidence ``1 - 2^-20`` around ``samples`` seeded runs is
    returned.
    """
    if isinstance(machine, AllocationTable):
        machine = TableMachine(machine)
    sig = Signature(relations={predicate: 1})

    def relation(sym, args, precision):
        if sym == sig.metric:
            return DyadicInterval(ZERO if args[0] == args[1] else ONE)
        if sym != predicate:
            raise KeyError(sym)
        (x,) = args
        if isinstance(machine, TableMachine):
            lo, hi = machine.probability(x)
            return DyadicInterval(lo, hi)
        lo, hi = approximants(machine, x, probe)
        if lo == hi:
            return DyadicInterval(lo)
        hits = machine.sample(x, samples, seed=[seed, zlib.crc32(str(x).encode())])
        radius = math.sqrt(math.log(2 * 2**20) / (2 * samples))
        n = max(precision, 16)
        est = Fraction(hits, samples)
        a = max(Fraction(0), est - Fraction(radius))
        b = min(Fraction(1), est + Fraction(radius))
        a = Dyadic.from_fraction(Fraction(math.floor(a * 2**n), 2**n))
        b = Dyadic.from_fraction(Fraction(math.ceil(b * 2**n), 2**n))
        return DyadicInterval(max(a, lo), min(b, hi)) if max(a, lo) <= min(b, hi) else DyadicInterval(a, b)

    return CountableStructure(sig, lambda stage: list(range(stage + 1)), relation)


# -- deciding separated sets -----------------------------------------------


class SeparationViolated(ValueError):
    pass


@dataclass(frozen=True)
class Verdict:
    verdict: str
    value: Dyadic
    trials: int
    accepts: int
    error_bound: float
    exact_error: Fraction

    def __str__(self) -> str:
        return (f"{self.verdict} (value {self.value}, {self.accepts}/{self.trials} accepts, "
                f"error <= {self.error_bound:.3g})")


def _nearest_sampleable(v: Dyadic) -> Dyadic:
    # move towards 1/2 if the exponent is too fine for 64-bit sampling
    if v.exponent <= kernels.MAX_BITS:
        return v
    return v.ceil_to(kernels.MAX_BITS) if v < HALF else v.floor_to(kernels.MAX_BITS)


def decide_separated(
    M,
    phi: Formula,
    psi: Formula,
    args: Sequence = (),
    gamma: Fraction | float = Fraction(1, 4),
    failure: float | None = None,
    trials: int | None = None,
    seed: int | None = None,
    variables: Sequence[str] | None = None,
    precision: int = 32,
) -> Verdict:
    """Decide whether the tuple ``args`` lies in ``A`` (low ``phi -. psi``) or ``B`` (high).

    The value ``v`` of ``phi(a) -. psi(a)`` is computed, a table machine
    accepting with probability ``v`` is built, and the majority of ``trials``
    seeded runs decides: mostly accepting means ``B``.  ``gamma`` is the
    caller's separation guarantee, ``v <= 1/2 - gamma`` or ``v >= 1/2 + gamma``.
    """
    gamma = Fraction(gamma)
    if gamma <= 0:
        raise ValueError("separation gamma must be positive")
    if gamma > Fraction(1, 2):
        raise ValueError("separation gamma cannot exceed 1/2")
    if trials is None:
        trials = trials_for(gamma, failure if failure is not None else 1e-6)
    if trials < 1 or trials % 2 == 0:
        raise ValueError("trials must be a positive odd number")
    diff = TruncSub(phi, psi)
    names = list(variables) if variables is not None else sorted(free_vars(diff))
    if len(names) != len(args):
        raise ValueError(f"expected {len(names)} arguments, got {len(args)}")
    iv = evaluate(diff, M, dict(zip(names, args)), precision)
    if not iv.is_point:
        raise ValueError(f"value not exact at precision {precision}: {iv}")
    v = _nearest_sampleable(iv.lo)
    half = Fraction(1, 2)
    vf = v.to_fraction()
    if half - gamma < vf < half + gamma:
        raise SeparationViolated(f"value {v} is within {gamma} of 1/2")
    machine = table_machine_for({"a": v})
    rng = np.random.default_rng(seed)
    outcomes = kernels.classify(kernels.random_words(rng, trials), machine.packed("a"))
    accepts = int(np.count_nonzero(outcomes == ACCEPT))
    verdict = "in B" if 2 * accepts > trials else "in A"
    p_wrong = (1 - vf) if vf >= half else vf
    return Verdict(verdict, v, trials, accepts, hoeffding_bound(half - p_wrong, trials),
                   exact_majority_error(p_wrong, trials))
