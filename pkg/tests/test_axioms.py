import itertools

import numpy as np
import pytest

from cfolog.axioms import (
    AxiomInstance,
    MissingSymbol,
    check_validity,
    dyadic_grid,
    extend_assignment,
    format_report,
    instantiate,
    random_structure,
    structure_family,
    tightest_moduli,
    universal_max,
)
from cfolog.dyadic import ONE, ZERO, Dyadic
from cfolog.formulas import Atomic, Func, Modulus, Signature, TruncSub, Var, parse
from cfolog.semantics import FiniteStructure, modulus_violations

from _reference import frac

p, q, r = Atomic("p"), Atomic("q"), Atomic("r")


def test_extend_assignment_examples():
    v = extend_assignment({"p": Dyadic(1, 1)})
    assert v(parse("~p")) == Dyadic(1, 1)
    assert v(parse("1/2 p")) == Dyadic(1, 2)
    v = extend_assignment({"p": Dyadic(3, 2), "q": Dyadic(1, 2)})
    assert v(parse("p -. q")) == Dyadic(1, 1)
    with pytest.raises(MissingSymbol):
        v(parse("r"))
    with pytest.raises(TypeError):
        v(parse("sup x. p"))


def test_instantiate_examples():
    sig = Signature({"P": 1, "Q": 1}, {"c": 0})
    a, b = parse("P(c)", sig), parse("Q(c)", sig)
    inst = instantiate("A1", pool=[a, b])
    assert inst[1].formula == TruncSub(TruncSub(a, b), a)
    assert [i.formula for i in instantiate("A10", sig)] == [Atomic("d", (Var("x"), Var("x")))]


def test_a13_instance_shape():
    mod = Modulus(((Dyadic(1, 1), Dyadic(1, 2)), (ONE, ONE)))
    sig = Signature({"P": 1}, {"f": 1}, moduli={("f", 0): mod})
    inst = instantiate("A13", sig, grid=dyadic_grid(3))
    want = (Dyadic(1, 1), Dyadic(3, 2), Dyadic(1, 3))
    assert any(i.params[0] == "f" and i.params[2:] == want for i in inst)
    for i in inst:
        _, _, eps, rr, qq = i.params
        assert rr > eps and qq < mod(eps)


def test_instantiate_deterministic_and_unknown():
    pool = [p, q]
    assert instantiate("A2", pool=pool) == instantiate("A2", pool=pool)
    assert len(instantiate("A2", pool=pool)) == 8
    with pytest.raises(ValueError):
        instantiate("A99", pool=pool)
    with pytest.raises(ValueError):
        instantiate("A1", pool=[])
    with pytest.raises(ValueError):
        instantiate("A11")


def test_a8_skips_capture():
    sig = Signature({"R": 2})
    phi = parse("sup y. R(x, y)", sig)
    out = instantiate("A8", pool=[phi], terms=[Var("y"), Var("z")])
    assert len(out) == 1


def test_a9_needs_closed_in_x():
    out = instantiate("A9", pool=[parse("P(x)"), parse("P(y)")])
    assert len(out) == 1


def _assignments(symbols, exponent):
    grid = dyadic_grid(exponent)
    for vals in itertools.product(grid, repeat=len(symbols)):
        yield dict(zip(symbols, vals))


@pytest.mark.parametrize("schema,pool", [("A1", [p, q]), ("A3", [p, q]), ("A4", [p, q]), ("A5", [p]), ("A6", [p])])
def test_propositional_schemata_exponent_6(schema, pool):
    inst = [i for i in instantiate(schema, pool=pool) if len(set(i.params)) == len(pool)]
    rows = check_validity(inst, assignments=_assignments([a.symbol for a in pool], 6))
    assert rows[schema].sound
    assert rows[schema].checked == len(inst) * 65 ** len(pool)


def test_a2_exponent_4():
    inst = [i for i in instantiate("A2", pool=[p, q, r]) if len(set(i.params)) == 3]
    rows = check_validity(inst, assignments=_assignments(["p", "q", "r"], 4))
    assert rows["A2"].sound


def test_broken_schema_reported():
    broken = AxiomInstance("bad", TruncSub(p, q))
    rows = check_validity([broken], assignments=_assignments(["p", "q"], 2))
    assert rows["bad"].max_value == ONE
    assert not rows["bad"].sound
    assert "bad" in rows["bad"].worst
    assert "bad" in format_report(rows)


QSIG = Signature({"P": 1, "R": 2}, {"c": 0})


def _quantifier_pool():
    texts = ["P(x)", "R(x, y)", "sup y. R(x, y)", "P(c) -. P(x)", "1/2 ~P(x)", "P(y)", "3/2^2"]
    return [parse(t, QSIG) for t in texts]


def test_quantifier_schemata_family():
    pool = _quantifier_pool()
    inst = (
        instantiate("A7", pool=pool)
        + instantiate("A8", pool=pool, terms=[Var("y"), Func("c", ()), Var("z")])
        + instantiate("A9", pool=pool)
    )
    sig = Signature({"P": 1}, {"c": 0})
    small = [i for i in inst if "R" not in str(i)]
    rows = check_validity(small, structure_family(sig, 2, 2))
    assert all(rows[s].sound for s in ("A7", "A8", "A9"))
    gen = np.random.default_rng(1)
    structs = [random_structure(QSIG, int(gen.integers(1, 5)), 3, gen) for _ in range(60)]
    rows = check_validity(inst, structs)
    assert all(rows[s].sound for s in ("A7", "A8", "A9"))


def test_metric_schemata_need_pseudometric():
    inst = [i for s in ("A10", "A11", "A12") for i in instantiate(s, QSIG)]
    gen = np.random.default_rng(2)
    structs = [random_structure(QSIG, int(gen.integers(1, 5)), 3, gen, metric="random") for _ in range(50)]
    rows = check_validity(inst, structs)
    assert all(rows[s].sound for s in ("A10", "A11", "A12"))
    bad_d = {(a, b): (ZERO if a == b else ONE) for a in range(3) for b in range(3)}
    bad_d[0, 1] = Dyadic(1, 2)
    bad = FiniteStructure(QSIG, [0, 1, 2], {"c": {(): 0}},
                          {"P": {(i,): ZERO for i in range(3)},
                           "R": {(i, j): ZERO for i in range(3) for j in range(3)}, "d": bad_d})
    rows = check_validity(inst, [bad])
    assert not rows["A11"].sound


def test_continuity_schemata_on_honouring_structures():
    sig = Signature({"P": 1, "R": 2}, {"f": 1})
    gen = np.random.default_rng(4)
    for _ in range(30):
        M = tightest_moduli(random_structure(sig, int(gen.integers(2, 4)), 2, gen, metric="random"), 2)
        assert modulus_violations(M) == []
        inst = instantiate("A13", M.signature, grid=dyadic_grid(2)) + instantiate("A14", M.signature, grid=dyadic_grid(2))
        rows = check_validity(inst, [M])
        assert rows["A13"].sound and rows["A14"].sound


def test_continuity_schema_detects_dishonest_modulus():
    mod = Modulus(((ONE, ONE),))
    sig = Signature({"P": 1}, moduli={("P", 0): mod})
    d = {(0, 0): ZERO, (1, 1): ZERO, (0, 1): Dyadic(1, 2), (1, 0): Dyadic(1, 2)}
    M = FiniteStructure(sig, [0, 1], {}, {"P": {(0,): ZERO, (1,): ONE}, "d": d})
    rows = check_validity(instantiate("A14", sig, grid=dyadic_grid(2)), [M])
    assert not rows["A14"].sound


def test_universal_max():
    sig = Signature({"P": 1})
    M = FiniteStructure(sig, [0, 1], {}, {"P": {(0,): Dyadic(1, 2), (1,): Dyadic(3, 2)}})
    assert universal_max(parse("P(x)"), M) == Dyadic(3, 2)
    assert frac(universal_max(parse("P(x) -. P(y)"), M)) == frac(Dyadic(1, 1))


def test_structure_family_size():
    sig = Signature({"P": 1}, {"c": 0})
    assert sum(1 for _ in structure_family(sig, 2, 1)) == 2 * 3 ** 2
