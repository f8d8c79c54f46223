"""Acceptance criteria, one test each.

Every test prints a single ``PASS`` or ``FAIL`` line with the measured
quantity before asserting, so ``pytest -v`` output doubles as a report.
Run standalone with ``python tests/test_acceptance.py``.
"""

import itertools
import math
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from cfolog import axioms as ax
from cfolog.dyadic import Dyadic
from cfolog.formulas import Atomic, Func, Signature, Sup, Var, abs_diff, conj, disj, parse
from cfolog.henkin import EvaluatorOracle, run_construction
from cfolog.ptm import (
    AllocationTable,
    TableMachine,
    accept_probability,
    allocate_accept,
    allocate_reject,
    amplify,
    approximants,
    exact_majority_error,
    no_derandomization_machine,
    table_machine_for,
)
from cfolog.semantics import FiniteStructure, value
from cfolog.spaces import (
    IDENTITY,
    DyadicSet,
    RationalVector,
    back_and_forth,
    bit_reversal,
    fixed_point,
    gram_schmidt,
    iteration_bound,
)

from _reference import SENTENCE_SUITE, frac, naive_value, random_basis_rows, random_formula, random_structure, span_residual

F = Fraction


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        assert ok, detail

    return emit


# 1 -------------------------------------------------------------------------


def test_c01_evaluator_matches_brute_force(report):
    gen = np.random.default_rng(101)
    start = time.perf_counter()
    pairs = mismatches = 0
    while pairs < 10_000:
        M = random_structure(gen, int(gen.integers(1, 5)), int(gen.integers(0, 5)))
        phi = random_formula(gen, 4)
        for v in ("x", "y"):
            phi = Sup(v, phi)
        pairs += 1
        mismatches += frac(value(phi, M)) != naive_value(phi, M)
    elapsed = time.perf_counter() - start
    report(1, mismatches == 0 and elapsed < 60,
           f"{pairs} pairs, {mismatches} mismatches, {elapsed:.1f}s (limit 60s)")


# 2 -------------------------------------------------------------------------

p, q, r = Atomic("p"), Atomic("q"), Atomic("r")


def _grid_assignments(names, exponent):
    grid = ax.dyadic_grid(exponent)
    return [dict(zip(names, vals)) for vals in itertools.product(grid, repeat=len(names))]


def test_c02_axiom_instances_vanish(report):
    rows = {}
    for schema, pool in (("A1", [p, q]), ("A2", [p, q, r]), ("A3", [p, q]), ("A4", [p, q]), ("A5", [p]), ("A6", [p])):
        inst = [i for i in ax.instantiate(schema, pool=pool) if len(set(i.params)) == len(pool)]
        names = [a.symbol for a in pool]
        rows.update(ax.check_validity(inst, assignments=_grid_assignments(names, 6)))

    qsig = Signature({"P": 1, "R": 2}, {"c": 0})
    pool = [parse(t, qsig) for t in ("P(x)", "R(x, y)", "sup y. R(x, y)", "P(c) -. P(x)", "1/2 ~P(x)", "P(y)", "3/2^2")]
    fo = (ax.instantiate("A7", pool=pool) + ax.instantiate("A8", pool=pool, terms=[Var("y"), Func("c", ()), Var("z")])
          + ax.instantiate("A9", pool=pool))
    metric = [i for s in ("A10", "A11", "A12") for i in ax.instantiate(s, qsig)]
    small_sig = Signature({"P": 1}, {"c": 0})
    small = [i for i in fo if "R" not in str(i)]
    family = [M for size in (1, 2) for M in ax.structure_family(small_sig, size, 3 if size == 1 else 2)]
    rows_family = ax.check_validity(small, family)
    gen = np.random.default_rng(202)
    randoms = [ax.random_structure(qsig, int(gen.integers(1, 5)), int(gen.integers(0, 4)), gen, metric="random")
               for _ in range(1000)]
    rows.update(ax.check_validity(fo + metric, randoms))

    csig = Signature({"P": 1, "R": 2}, {"f": 1})
    cont_rows = {"A13": 0, "A14": 0}
    cont_checked = 0
    for _ in range(1000):
        M = ax.tightest_moduli(ax.random_structure(csig, int(gen.integers(2, 4)), 2, gen, metric="random"), 2)
        inst = ax.instantiate("A13", M.signature, grid=ax.dyadic_grid(2)) + ax.instantiate("A14", M.signature, grid=ax.dyadic_grid(2))
        for name, row in ax.check_validity(inst, [M]).items():
            cont_rows[name] = max(cont_rows[name], frac(row.max_value))
            cont_checked += row.checked
    worst = {name: row.max_value for name, row in rows.items()}
    ok = (all(row.sound for row in rows.values()) and all(row.sound for row in rows_family.values())
          and set(worst) >= {f"A{i}" for i in range(1, 13)} and cont_rows == {"A13": 0, "A14": 0})
    bad = [n for n, row in list(rows.items()) + list(rows_family.items()) if not row.sound]
    report(2, ok, f"A1-A12 max 0 on grid/family/1000 random ({len(family)} family structures); "
                  f"A13/A14 max {cont_rows} over {cont_checked} evaluations; unsound: {bad or 'none'}")


# 3 -------------------------------------------------------------------------


def test_c03_connectives_on_exponent_6_grid(report):
    grid = ax.dyadic_grid(6)
    forms = {"min": conj(p, q), "max": disj(p, q), "absdiff": abs_diff(p, q)}
    want = {"min": min, "max": max, "absdiff": lambda a, b: abs(a - b)}
    bad = 0
    for a, b in itertools.product(grid, repeat=2):
        v = ax.extend_assignment({"p": a, "q": b})
        fa, fb = frac(a), frac(b)
        for name, phi in forms.items():
            bad += frac(v(phi)) != want[name](fa, fb)
    report(3, bad == 0, f"{len(grid) ** 2} grid pairs x 3 connectives, {bad} mismatches")


# 4 -------------------------------------------------------------------------


def test_c04_allocation_schedules(report):
    gen = np.random.default_rng(404)
    final = 8
    start = time.perf_counter()
    failures = []
    for trial in range(10_000):
        v = F(int(gen.integers(0, 257)), 256)
        steps = [("AR"[int(gen.integers(2))], int(gen.integers(0, 9))) for _ in range(int(gen.integers(0, 12)))]
        t = AllocationTable()
        for side, n in steps + [("A", final), ("R", final)]:
            scale = 2 ** n
            if side == "A":
                k1 = math.ceil((1 - v) * scale)
                allocate_accept(t, "phi", k1, n)
            else:
                k = math.floor((1 - v) * scale)
                allocate_reject(t, "phi", k, n)
            e = t.entry("phi")
            # accept bound 1 - k1/2^n plus reject bound k/2^n stays <= 1
            if frac(e.accept_bound) + frac(e.reject_bound) > 1:
                failures.append((trial, "bound sum"))
        e = t.entry("phi")
        strings = e.accept + e.reject
        if any(a != b and (a.startswith(b) or b.startswith(a)) for a, b in itertools.combinations(strings, 2)):
            failures.append((trial, "cones overlap"))
        if frac(e.p_accept) + frac(e.p_reject) > 1:
            failures.append((trial, "total mass"))
        lo, hi = accept_probability(t, "phi")
        if not (frac(lo) <= v <= frac(hi) and frac(hi) - frac(lo) <= F(1, 2 ** final)):
            failures.append((trial, "final mass"))
    elapsed = time.perf_counter() - start
    report(4, not failures and elapsed < 60,
           f"10000 schedules, {len(failures)} violations {failures[:3]}, {elapsed:.1f}s (limit 60s)")


# 5 and 12 -----------------------------------------------------------------

HSIG = Signature({"P": 1, "R": 2}, {"a": 0, "b": 0, "c": 0})


def _completeness_structures():
    gen = np.random.default_rng(505)
    out = []
    for size in (2, 3, 4, 3, 4):
        universe = list(range(size))
        consts = {c: {(): int(gen.integers(size))} for c in ("a", "b", "c")}
        P = {(i,): Dyadic(int(gen.integers(0, 9)), 3) for i in universe}
        R = {(i, j): Dyadic(int(gen.integers(0, 9)), 3) for i in universe for j in universe}
        out.append(FiniteStructure(HSIG, universe, consts, {"P": P, "R": R}))
    return out


def _run_completeness():
    phis = [parse(t, HSIG) for t in SENTENCE_SUITE]
    results = []
    for M in _completeness_structures():
        res = run_construction(EvaluatorOracle(M), 6, phis)
        results.append((M, res))
    return phis, results


_first_run = {}


def test_c05_effective_completeness(report):
    start = time.perf_counter()
    phis, results = _run_completeness()
    elapsed = time.perf_counter() - start
    _first_run["traces"] = [res.trace_text() for _, res in results]
    worst = F(0)
    misses = []
    for idx, (M, res) in enumerate(results):
        for phi in phis:
            lo, hi = (frac(x) for x in res.acceptance(phi))
            v = naive_value(phi, M)
            worst = max(worst, hi - lo)
            if not (lo <= v <= hi and hi - lo <= F(1, 64)) or res.budget_exhausted:
                misses.append((idx, str(phi)))
    report(5, not misses and elapsed < 300,
           f"5 structures x {len(phis)} sentences at stage 6, widest interval {worst}, "
           f"{len(misses)} outside 2^-6 {misses[:3]}, {elapsed:.1f}s (limit 300s)")


def test_c12_determinism(report):
    if "traces" not in _first_run:
        _first_run["traces"] = [res.trace_text() for _, res in _run_completeness()[1]]
    again = [res.trace_text() for _, res in _run_completeness()[1]]
    same = again == _first_run["traces"]
    size = sum(len(t.encode()) for t in again)
    report(12, same, f"second run of criterion 5 byte-identical: {same} ({size} trace bytes)")


# 6 -------------------------------------------------------------------------


def test_c06_no_derandomization(report):
    schedule = [(f"x{t}", t) for t in range(2, 11)]
    never = ["y0", "y1", "y2"]
    nd = no_derandomization_machine(schedule, [x for x, _ in schedule] + never, stages=12)
    wrong = []
    for x, t in schedule:
        want = 1 - sum(F(1, 2 ** i) for i in range(2, t + 1))
        if frac(nd.limit_probability(x)) != want:
            wrong.append(x)
    for y in never:
        if frac(nd.limit_probability(y)) != F(1, 2):
            wrong.append(y)
    nd.table.check_invariants()
    report(6, not wrong, f"t = 2..10 and {len(never)} never-enumerated inputs, wrong: {wrong or 'none'}")


# 7 -------------------------------------------------------------------------


def _random_table(gen):
    v = F(int(gen.integers(0, 257)), 256)
    t = AllocationTable()
    for n in sorted(int(gen.integers(1, 9)) for _ in range(3)) + [8]:
        scale = 2 ** n
        allocate_accept(t, "phi", math.ceil((1 - v) * scale), n)
        allocate_reject(t, "phi", math.floor((1 - v) * scale), n)
    return t


def test_c07_approximants(report):
    gen = np.random.default_rng(707)
    bad, stages_needed = 0, 0
    for _ in range(100):
        t = _random_table(gen)
        lo, hi = (frac(x) for x in TableMachine(t).probability("phi"))
        e = t.entry("phi")
        longest = max(len(s) for s in e.accept + e.reject)
        budget = 2 ** (longest + 1) - 1  # every string of length <= longest
        prev = (F(0), F(1))
        reached = None
        for s in range(0, budget + 1, 7):
            f, g = (frac(x) for x in approximants(t, "phi", s))
            if not (f <= lo <= hi <= g and prev[0] <= f and g <= prev[1]):
                bad += 1
            if reached is None and g - f <= F(1, 256):
                reached = s
            prev = (f, g)
        f, g = (frac(x) for x in approximants(t, "phi", budget))
        if g - f > F(1, 256) or (f, g) != (lo, hi):
            bad += 1
        stages_needed = max(stages_needed, reached if reached is not None else budget)
    report(7, bad == 0, f"100 tables, {bad} violations, gap <= 2^-8 by stage {stages_needed} (bound 2^9-1)")


# 8 -------------------------------------------------------------------------


def test_c08_gram_schmidt(report):
    gen = np.random.default_rng(808)
    bad = 0
    for _ in range(100):
        dim = int(gen.integers(1, 6))
        basis = [RationalVector(row) for row in random_basis_rows(gen, dim)]
        res = gram_schmidt(basis, width=20)
        vs = res.orthogonal
        bad += any(vs[i].dot(vs[j]) != 0 for i, j in itertools.combinations(range(dim), 2))
        bad += any(not span_residual(basis[k], vs[: k + 1]).is_zero() for k in range(dim))
        for iv in res.orthonormal:
            lo, hi = iv.norm2
            bad += not (lo <= 1 <= hi and hi - lo <= F(1, 2 ** 20))
    report(8, bad == 0, f"100 random bases of dimension <= 5, {bad} violations")


# 9 -------------------------------------------------------------------------


def test_c09_fixed_point(report):
    gamma = F(1, 2)
    bad = []
    cases = 0
    for c in (F(0), F(1, 8), F(1, 4), F(3, 8), F(1, 2)):
        A = lambda x, c=c: x / 2 + c  # noqa: E731
        for u0 in (F(0), F(1)):
            for k in range(11):
                eps = F(1, 2 ** k)
                fp = fixed_point(A, gamma, u0, eps)
                cases += 1
                if not abs(A(fp.point) - fp.point) < eps:
                    bad.append((c, u0, k, "residual"))
                if fp.initial_step:
                    bound = iteration_bound(gamma, fp.initial_step, eps)
                    least = max(0, math.floor(bound) + 1)  # least i with d0 * gamma^i < eps
                    if not least <= fp.iterations <= least + 1:
                        bad.append((c, u0, k, fp.iterations, bound))
    report(9, not bad, f"{cases} cases of x/2 + c, {len(bad)} violations {bad[:3]}")


# 10 ------------------------------------------------------------------------


def test_c10_back_and_forth(report):
    gen = np.random.default_rng(1010)
    bad = 0
    for trial in range(50):
        n = int(gen.integers(1, 5))

        def rand_set():
            return DyadicSet.from_atoms([k for k in range(1 << n) if gen.integers(2)], n)

        forth = [rand_set() for _ in range(int(gen.integers(1, 4)))]
        back = [rand_set() for _ in range(int(gen.integers(0, 3)))]
        target = bit_reversal(int(gen.integers(1, 5))) if trial % 2 else IDENTITY
        iso = back_and_forth(IDENTITY, target, forth, back)
        iso.check()
        elems = forth + [iso.inverse(y) for y in back]
        for y in back:
            bad += iso(iso.inverse(y)) != y
        for x in elems:
            bad += iso(x).measure() != x.measure()
        for x, y in itertools.product(elems, repeat=2):
            bad += iso(x & y) != (iso(x) & iso(y))
            bad += iso(x | y) != (iso(x) | iso(y))
            bad += iso(~x) != ~iso(x)
    report(10, bad == 0, f"50 request sets over identity and bit-reversal targets, {bad} violations")


# 11 ------------------------------------------------------------------------


def test_c11_bpp_amplification(report):
    base = table_machine_for({"x": Dyadic(3, 2)})  # correct answer accept, per-trial error 1/4
    amp3 = amplify(base, 3)
    exact = amp3.error("x", 0)
    runs = 100_000
    errs = amp3.empirical_errors("x", 0, runs, seed=11)
    p_err = 5 / 32
    sigma = math.sqrt(p_err * (1 - p_err) / runs)
    within = abs(errs / runs - p_err) <= 3 * sigma
    amp101 = amplify(base, 101)
    errs101 = amp101.empirical_errors("x", 0, runs, seed=12)
    chernoff = math.exp(-101 / 8)
    ok = (exact == F(5, 32) == exact_majority_error(F(1, 4), 3) and within
          and errs101 / runs <= 1e-3 and amp101.error("x", 0) <= chernoff)
    report(11, ok, f"m=3 exact error {exact}, sampled {errs}/{runs} (3 sigma = {3 * sigma:.5f}); "
                   f"m=101 sampled {errs101}/{runs} <= 1e-3, bound exp(-101/8) = {chernoff:.2e}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
