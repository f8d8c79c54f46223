import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from cfolog.dyadic import ONE, ZERO, Dyadic
from cfolog.ptm.allocation import (
    AllocationTable,
    InfeasibleBound,
    PrefixComparable,
    accept_probability,
    allocate_accept,
    allocate_reject,
    allocate_to,
    comparable,
    free_nodes,
    in_cone,
    mass,
)

from _reference import frac


def brute_mass(strings, depth=10):
    """Fraction of all length-``depth`` strings lying in the union of cones."""
    hits = sum(1 for k in range(2 ** depth) if in_cone(format(k, f"0{depth}b"), strings))
    return Fraction(hits, 2 ** depth)


@pytest.mark.parametrize("strings,want", [(["00", "01"], Dyadic(1, 1)), ([""], ONE), ([], ZERO)])
def test_mass_examples(strings, want):
    assert mass(strings) == want


def test_mass_rejects_comparable():
    with pytest.raises(PrefixComparable):
        mass(["0", "01"])
    with pytest.raises(ValueError):
        mass(["0", "2"])


def test_accept_probability_examples():
    t = AllocationTable()
    e = t.entry("phi")
    e.accept, e.reject = ["0"], ["10"]
    assert accept_probability(t, "phi") == (Dyadic(1, 1), Dyadic(3, 2))
    assert accept_probability(AllocationTable(), "phi") == (ZERO, ONE)
    t.entry("psi").accept = ["0", "1"]
    assert accept_probability(t, "psi") == (ONE, ONE)


def test_allocation_examples():
    t = AllocationTable()
    added = allocate_accept(t, "phi", 3, 2)
    assert added == ["00"] and t.entry("phi").p_accept == Dyadic(1, 2)
    added = allocate_reject(t, "phi", 2, 2)
    assert added == ["01", "10"] and t.entry("phi").p_reject == Dyadic(1, 1)
    t.check_invariants()
    full = AllocationTable()
    allocate_accept(full, "phi", 0, 3)
    assert full.entry("phi").accept == [format(k, "03b") for k in range(8)]
    assert full.entry("phi").p_accept == ONE


def test_noop_when_target_met():
    t = AllocationTable()
    allocate_accept(t, "phi", 2, 2)
    n = len(t.log)
    assert allocate_accept(t, "phi", 3, 2) == []
    assert allocate_accept(t, "phi", 2, 2) == []
    assert len(t.log) == n


def test_infeasible_rejected_before_mutation():
    t = AllocationTable()
    allocate_accept(t, "phi", 1, 2)  # accept mass 3/4
    before = t.to_json()
    with pytest.raises(InfeasibleBound):
        allocate_reject(t, "phi", 2, 2)  # reject 1/2, total 5/4
    assert t.to_json() == before


def test_top_up_with_longer_strings():
    t = AllocationTable()
    allocate_to(t, "phi", "A", Dyadic(5, 4), length=1)
    e = t.entry("phi")
    assert e.accept == ["00", "0100"]
    assert e.p_accept == Dyadic(5, 4)
    allocate_to(t, "phi", "R", Dyadic(11, 4), length=1)
    assert e.p_reject == Dyadic(11, 4)
    assert e.p_accept + e.p_reject == ONE


def test_leftmost_free_nodes():
    assert list(free_nodes(["0"], 2)) == ["10", "11"]
    assert list(free_nodes(["01", "1"], 2)) == ["00"]
    assert list(free_nodes([], 0)) == [""]
    assert list(free_nodes([""], 3)) == []


def test_json_round_trip():
    t = AllocationTable()
    allocate_accept(t, "a", 3, 3, stage=1)
    allocate_reject(t, "a", 1, 2, stage=2)
    allocate_accept(t, "b", 0, 1, stage=2)
    u = AllocationTable.from_json(t.to_json())
    assert u.to_json() == t.to_json()
    assert [ev.line() for ev in u.log] == [ev.line() for ev in t.log]
    with pytest.raises(ValueError):
        AllocationTable.from_json('{"format": "other"}')


def test_event_line_format():
    t = AllocationTable()
    allocate_accept(t, "P(c)", 3, 2, stage=4)
    assert t.log[0].line() == "4 | ALLOC A P(c) 00 1/2^2"


def test_comparable():
    assert comparable("0", "01") and comparable("01", "0") and comparable("", "1")
    assert not comparable("00", "01")


@st.composite
def schedules(draw):
    v = Fraction(draw(st.integers(0, 256)), 256)
    steps = draw(st.lists(st.tuples(st.sampled_from("AR"), st.integers(0, 8)), max_size=12))
    return v, steps


def run_schedule(v, steps, final=8):
    """Apply bounds consistent with the value ``v``; returns the table."""
    t = AllocationTable()
    for side, n in list(steps) + [("A", final), ("R", final)]:
        scale = 2 ** n
        if side == "A":
            k = math.ceil((1 - v) * scale)  # accept target 1 - k/2^n <= v
            allocate_accept(t, "phi", k, n)
        else:
            k = math.floor((1 - v) * scale)  # reject target k/2^n <= 1 - v
            allocate_reject(t, "phi", k, n)
        t.check_invariants()
        e = t.entry("phi")
        assert frac(e.accept_bound) + frac(e.reject_bound) <= 1
    return t


@given(schedules())
@settings(max_examples=300, deadline=None)
def test_feasible_schedules_keep_invariants(schedule):
    v, steps = schedule
    t = run_schedule(v, steps)
    e = t.entry("phi")
    lo, hi = accept_probability(t, "phi")
    assert frac(lo) <= v <= frac(hi)
    assert frac(hi) - frac(lo) <= Fraction(1, 2 ** 8)
    assert brute_mass(e.accept, 12) == frac(e.p_accept)
    assert brute_mass(e.reject, 12) == frac(e.p_reject)
