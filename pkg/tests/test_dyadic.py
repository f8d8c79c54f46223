import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from cfolog.dyadic import (
    ONE,
    ZERO,
    Dyadic,
    DyadicInterval,
    halve,
    interval_op,
    negate,
    parse_dyadic,
    truncated_sub,
)

from _reference import frac, rng


def D(text):
    return parse_dyadic(text)


@st.composite
def dyadics(draw, max_exp=12):
    n = draw(st.integers(0, max_exp))
    return Dyadic(draw(st.integers(0, 2 ** n)), n)


@st.composite
def intervals(draw):
    a, b = draw(dyadics()), draw(dyadics())
    return DyadicInterval(min(a, b), max(a, b))


@pytest.mark.parametrize("a,b,want", [("3/4", "1/2", "1/4"), ("1/2", "3/4", "0"), ("1", "0", "1")])
def test_truncated_sub_examples(a, b, want):
    assert truncated_sub(D(a), D(b)) == D(want)


@pytest.mark.parametrize("a,want", [("0", "1"), ("3/8", "5/8"), ("1", "0")])
def test_negate_examples(a, want):
    assert negate(D(a)) == D(want)


@pytest.mark.parametrize("a,want", [("1", "1/2"), ("1/4", "1/8"), ("0", "0")])
def test_halve_examples(a, want):
    assert halve(D(a)) == D(want)


def test_interval_examples():
    half, quarter = DyadicInterval(D("1/2")), DyadicInterval(D("1/4"))
    assert interval_op("sub", half, quarter) == quarter
    assert interval_op("neg", DyadicInterval(D("1/4"), D("1/2"))) == DyadicInterval(D("1/2"), D("3/4"))
    full = DyadicInterval.full()
    assert interval_op("sub", full, full) == full


def test_canonical_form():
    assert Dyadic(2, 2) == Dyadic(1, 1)
    assert (Dyadic(2, 2).numerator, Dyadic(2, 2).exponent) == (1, 1)
    assert (Dyadic(0, 5).numerator, Dyadic(0, 5).exponent) == (0, 0)
    assert (Dyadic(8, 3).numerator, Dyadic(8, 3).exponent) == (1, 0)
    assert hash(Dyadic(4, 4)) == hash(Dyadic(1, 2))


@pytest.mark.parametrize("num,exp", [(-1, 0), (3, 1), (1, -1)])
def test_out_of_range_rejected(num, exp):
    with pytest.raises(ValueError):
        Dyadic(num, exp)


@pytest.mark.parametrize("text", ["3/2^2", "3/4", "1", "0", " 5 / 2 ^ 3 "])
def test_parse_round_trip(text):
    d = parse_dyadic(text)
    assert parse_dyadic(str(d)) == d


@pytest.mark.parametrize("text", ["3/3", "1/2^x", "-1/2", "5/4", "a"])
def test_parse_rejects(text):
    with pytest.raises(ValueError):
        parse_dyadic(text)


def test_truncated_sub_laws_exhaustive():
    grid = [Dyadic(k, n) for n in range(6) for k in range(2 ** n + 1)]
    for a, b in itertools.product(grid, repeat=2):
        r = truncated_sub(a, b)
        assert r + b >= a
        assert r <= a
        assert frac(r) == max(frac(a) - frac(b), 0)


def test_truncated_sub_laws_exponent_8():
    grid = [Dyadic(k, 8) for k in range(257)]
    for a in grid:
        for b in grid[::3]:
            r = truncated_sub(a, b)
            assert r + b >= a and r <= a


@given(dyadics())
def test_negate_involution_and_halve(a):
    assert negate(negate(a)) == a
    assert halve(a) <= a
    assert ZERO <= negate(a) <= ONE
    assert frac(halve(a)) == frac(a) / 2


@given(dyadics(), dyadics())
def test_order_matches_fractions(a, b):
    assert (a < b) == (frac(a) < frac(b))
    assert (a == b) == (frac(a) == frac(b))


@given(dyadics(), st.integers(0, 14))
def test_rounding(a, n):
    lo, hi = a.floor_to(n), a.ceil_to(n)
    assert lo <= a <= hi
    assert frac(hi) - frac(lo) <= Fraction(1, 2 ** n)
    assert lo.exponent <= n and hi.exponent <= n


@given(intervals(), intervals(), st.sampled_from(["sub", "min", "max"]))
def test_binary_interval_width(x, y, op):
    r = interval_op(op, x, y)
    assert frac(r.width) <= frac(x.width) + frac(y.width)


def _point_op(op, a, b=None):
    return {
        "sub": lambda: max(a - b, 0),
        "min": lambda: min(a, b),
        "max": lambda: max(a, b),
        "neg": lambda: 1 - a,
        "half": lambda: a / 2,
    }[op]()


def _inside(gen, iv):
    lo, hi = frac(iv.lo), frac(iv.hi)
    return lo + (hi - lo) * Fraction(int(gen.integers(65)), 64)


def test_interval_extension_conservative():
    gen = rng(7)
    ops = ["sub", "min", "max", "neg", "half"]
    for i in range(10_000):
        e = int(gen.integers(1, 9))
        a, b = sorted(int(v) for v in gen.integers(0, 2 ** e + 1, 2))
        c, d = sorted(int(v) for v in gen.integers(0, 2 ** e + 1, 2))
        x = DyadicInterval(Dyadic(a, e), Dyadic(b, e))
        y = DyadicInterval(Dyadic(c, e), Dyadic(d, e))
        op = ops[i % len(ops)]
        r = interval_op(op, x, y) if op in ("sub", "min", "max") else interval_op(op, x)
        p, q = _inside(gen, x), _inside(gen, y)
        v = _point_op(op, p, q) if op in ("sub", "min", "max") else _point_op(op, p)
        assert frac(r.lo) <= v <= frac(r.hi)


def test_interval_errors():
    with pytest.raises(ValueError):
        DyadicInterval(ONE, ZERO)
    with pytest.raises(TypeError):
        interval_op("sub", DyadicInterval.full())
    with pytest.raises(ValueError):
        interval_op("mul", DyadicInterval.full(), DyadicInterval.full())
