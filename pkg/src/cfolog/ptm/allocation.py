"""Prefix-allocation tables: the exact form of a probabilistic decision machine.

A machine ``G`` is described per input key by two finite sets of bit strings
``K^A`` and ``K^R``: on random bits extending a string of ``K^A`` it halts
and accepts, on bits extending a string of ``K^R`` it halts and rejects, and
on all other bits it has not halted yet.  Both sets are kept prefix-free and
their cones disjoint, so the acceptance probability is exactly the mass
``P(K^A) = sum 2**-len(s)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

from ..dyadic import ONE, ZERO, Dyadic

__all__ = [
    "InfeasibleBound",
    "PrefixComparable",
    "comparable",
    "mass",
    "in_cone",
    "free_nodes",
    "Entry",
    "AllocEvent",
    "AllocationTable",
    "accept_probability",
    "allocate_accept",
    "allocate_reject",
]


class InfeasibleBound(ValueError):
    """A requested bound contradicts the bound already allocated on the other side."""


class PrefixComparable(ValueError):
    """Two strings of a set meant to be prefix-free are comparable."""


def comparable(a: str, b: str) -> bool:
    return a.startswith(b) or b.startswith(a)


def _check_bits(s: str):
    if s.strip("01"):
        raise ValueError(f"not a bit string: {s!r}")


def mass(strings: Iterable[str]) -> Dyadic:
    """Lebesgue measure of the union of cones of a prefix-free set."""
    items = sorted(set(strings))
    for s in items:
        _check_bits(s)
    # after sorting, a prefix sits immediately before some extension of it
    for a, b in zip(items, items[1:]):
        if b.startswith(a):
            raise PrefixComparable(f"{a!r} is a prefix of {b!r}")
    if not items:
        return ZERO
    e = max(len(s) for s in items)
    return Dyadic(sum(1 << (e - len(s)) for s in items), e)


def in_cone(bits: str, strings: Iterable[str]) -> bool:
    return any(bits.startswith(s) for s in strings)


class _Trie:
    __slots__ = ("children", "terminal")

    def __init__(self):
        self.children: dict[str, _Trie] = {}
        self.terminal = False


def _build_trie(strings: Iterable[str]) -> _Trie:
    root = _Trie()
    for s in strings:
        node = root
        for ch in s:
            node = node.children.setdefault(ch, _Trie())
        node.terminal = True
    return root


def free_nodes(blocked: Iterable[str], length: int) -> Iterator[str]:
    """Strings of ``length`` whose cone misses every cone of ``blocked``, leftmost first.

    A node is free when it neither extends nor is extended by a blocked string.
    """

    def walk(node: _Trie | None, prefix: str) -> Iterator[str]:
        if node is not None and node.terminal:
            return
        if len(prefix) == length:
            if node is None or not node.children:
                yield prefix
            return
        if node is None:
            # whole subtree is free: count through it in binary order
            rest = length - len(prefix)
            for k in range(1 << rest):
                yield prefix + format(k, f"0{rest}b")
            return
        for ch in "01":
            yield from walk(node.children.get(ch), prefix + ch)

    yield from walk(_build_trie(blocked), "")


@dataclass
class Entry:
    accept: list[str] = field(default_factory=list)
    reject: list[str] = field(default_factory=list)
    accept_bound: Dyadic = ZERO
    reject_bound: Dyadic = ZERO

    @property
    def p_accept(self) -> Dyadic:
        return mass(self.accept)

    @property
    def p_reject(self) -> Dyadic:
        return mass(self.reject)

    def outcome(self, bits: str) -> int | None:
        """0 = accept, 1 = reject, None = not halted on this finite prefix."""
        if in_cone(bits, self.accept):
            return 0
        if in_cone(bits, self.reject):
            return 1
        return None


@dataclass(frozen=True)
class AllocEvent:
    stage: int
    side: str
    key: str
    strings: tuple[str, ...]
    mass: Dyadic

    def line(self) -> str:
        shown = ",".join(self.strings) if self.strings else "-"
        return f"{self.stage} | ALLOC {self.side} {self.key} {shown} {self.mass}"


class AllocationTable:
    """``K^A`` / ``K^R`` per key, plus a log of every allocation step."""

    def __init__(self):
        self.entries: dict[str, Entry] = {}
        self.log: list[AllocEvent] = []

    def entry(self, key: str) -> Entry:
        return self.entries.setdefault(key, Entry())

    def keys(self) -> list[str]:
        return list(self.entries)

    def __contains__(self, key: str) -> bool:
        return key in self.entries

    def check_invariants(self) -> None:
        for key, e in self.entries.items():
            pa, pr = mass(e.accept), mass(e.reject)
            for a in e.accept:
                for r in e.reject:
                    if comparable(a, r):
                        raise AssertionError(f"{key}: cones of {a} and {r} overlap")
            if pa.to_fraction() + pr.to_fraction() > 1:
                raise AssertionError(f"{key}: P(K^A) + P(K^R) > 1")
            if e.accept_bound.to_fraction() + e.reject_bound.to_fraction() > 1:
                raise AssertionError(f"{key}: accept and reject bounds sum above 1")

    # -- serialisation -----------------------------------------------------
    def to_json(self) -> str:
        doc = {
            "format": "cfolog-allocation",
            "version": 1,
            "entries": {
                k: {"accept": e.accept, "reject": e.reject} for k, e in self.entries.items()
            },
            "log": [
                {"stage": ev.stage, "side": ev.side, "key": ev.key, "strings": list(ev.strings),
                 "mass": str(ev.mass)}
                for ev in self.log
            ],
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "AllocationTable":
        from ..dyadic import parse_dyadic

        doc = json.loads(text)
        if doc.get("format") != "cfolog-allocation":
            raise ValueError("not an allocation table document")
        if doc.get("version") != 1:
            raise ValueError(f"unsupported table version {doc.get('version')}")
        t = cls()
        for k, body in doc["entries"].items():
            e = t.entry(k)
            e.accept = list(body["accept"])
            e.reject = list(body["reject"])
            e.accept_bound = mass(e.accept)
            e.reject_bound = mass(e.reject)
        for ev in doc.get("log", []):
            t.log.append(AllocEvent(ev["stage"], ev["side"], ev["key"], tuple(ev["strings"]),
                                    parse_dyadic(ev["mass"])))
        t.check_invariants()
        return t


def accept_probability(table: AllocationTable, key: str) -> tuple[Dyadic, Dyadic]:
    """``(P(K^A), 1 - P(K^R))``: exact bounds on the limit acceptance probability."""
    e = table.entries.get(key)
    if e is None:
        return ZERO, ONE
    return e.p_accept, ONE - e.p_reject


def _fill(own: list[str], other: list[str], target: Dyadic, length: int) -> list[str]:
    """Strings to add to ``own`` so that its mass becomes exactly ``target``.

    Length-``length`` nodes outside both cones are taken leftmost first; if
    they run out, or the remaining deficit is finer than ``2**-length``, the
    search continues with longer strings.
    """
    deficit = target.to_fraction() - mass(own).to_fraction()
    added: list[str] = []
    ell = length
    while deficit > 0:
        want = int(deficit * (1 << ell))
        if want:
            blocked = own + other + added
            got = []
            for s in free_nodes(blocked, ell):
                got.append(s)
                if len(got) == want:
                    break
            added.extend(got)
            deficit -= Fraction(len(got), 1 << ell)
        ell += 1
        if ell > 4096:
            raise AssertionError("allocation failed to converge")
    return added


def _allocate(table, key, side, target, length, stage):
    if length < 0:
        raise ValueError("length must be non-negative")
    e = table.entry(key)
    own_bound = e.accept_bound if side == "A" else e.reject_bound
    other_bound = e.reject_bound if side == "A" else e.accept_bound
    if target.to_fraction() + other_bound.to_fraction() > 1:
        raise InfeasibleBound(
            f"{key}: {'accept' if side == 'A' else 'reject'} bound {target} "
            f"conflicts with opposite bound {other_bound}"
        )
    own = e.accept if side == "A" else e.reject
    other = e.reject if side == "A" else e.accept
    if mass(own) >= target:
        if target > own_bound:
            _set_bound(e, side, target)
        return []
    added = _fill(own, other, target, length)
    own.extend(added)
    _set_bound(e, side, target)
    table.log.append(AllocEvent(stage, side, key, tuple(added), mass(own)))
    return added


def _set_bound(e: Entry, side: str, target: Dyadic):
    if side == "A":
        e.accept_bound = max(e.accept_bound, target)
    else:
        e.reject_bound = max(e.reject_bound, target)


def allocate_accept(table: AllocationTable, key: str, k: int, n: int, stage: int = 0) -> list[str]:
    """Ensure ``P(K^A) >= 1 - k/2**n``; returns the strings added (empty for a no-op)."""
    if not 0 <= k <= (1 << n):
        raise ValueError("need 0 <= k <= 2^n")
    return _allocate(table, key, "A", Dyadic((1 << n) - k, n), n, stage)


def allocate_reject(table: AllocationTable, key: str, k: int, n: int, stage: int = 0) -> list[str]:
    """Ensure ``P(K^R) >= k/2**n``; returns the strings added (empty for a no-op)."""
    if not 0 <= k <= (1 << n):
        raise ValueError("need 0 <= k <= 2^n")
    return _allocate(table, key, "R", Dyadic(k, n), n, stage)


def allocate_to(table: AllocationTable, key: str, side: str, target: Dyadic, stage: int = 0,
                length: int | None = None) -> list[str]:
    """Raise the accept (``side="A"``) or reject mass to ``target`` using strings of
    length ``target.exponent`` (or ``length``) first."""
    if side not in ("A", "R"):
        raise ValueError("side must be 'A' or 'R'")
    n = target.exponent if length is None else length
    return _allocate(table, key, side, target, n, stage)
