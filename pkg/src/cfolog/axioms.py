"""Axiom schemata A1-A14, propositional truth assignments, validity reports.

Propositional symbols are 0-ary relation symbols, so propositional formulas
are ordinary :mod:`cfolog.formulas` trees without terms or quantifiers.
Instances of A13/A14 carry their dyadic parameters ``q`` and ``r`` as literal
atoms.  No proof system is implemented: "valid" below always means
"evaluates to 0 everywhere it was checked".
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .dyadic import ONE as ONE_, ZERO, Dyadic, halve, negate, truncated_sub
from .formulas import (
    Atomic,
    CaptureViolation,
    Formula,
    Func,
    Half,
    Neg,
    Signature,
    Sup,
    Term,
    TruncSub,
    Var,
    _literal_of,
    conj,
    free_vars,
    literal,
    render,
    substitute,
)
from .semantics import FiniteStructure, _value

__all__ = [
    "MissingSymbol",
    "extend_assignment",
    "AxiomInstance",
    "SCHEMAS",
    "instantiate",
    "ValidityRow",
    "check_validity",
    "universal_max",
    "dyadic_grid",
    "format_report",
    "random_structure",
    "structure_family",
    "tightest_moduli",
]


class MissingSymbol(KeyError):
    pass


def extend_assignment(v0: Mapping[str, Dyadic]) -> Callable[[Formula], Dyadic]:
    """The unique truth assignment extending ``v0`` to all propositional formulas."""
    v0 = dict(v0)

    def v(phi: Formula) -> Dyadic:
        tp = type(phi)
        if tp is Atomic:
            if phi.args:
                raise TypeError("propositional formulas have no terms")
            lit = _literal_of(phi.symbol)
            if lit is not None:
                return lit
            try:
                return v0[phi.symbol]
            except KeyError:
                raise MissingSymbol(phi.symbol) from None
        if tp is TruncSub:
            return truncated_sub(v(phi.left), v(phi.right))
        if tp is Neg:
            return negate(v(phi.body))
        if tp is Half:
            return halve(v(phi.body))
        raise TypeError("propositional formulas have no quantifiers")

    return v


def dyadic_grid(exponent: int) -> list[Dyadic]:
    return [Dyadic(k, exponent) for k in range((1 << exponent) + 1)]


@dataclass(frozen=True)
class AxiomInstance:
    schema: str
    formula: Formula
    params: tuple = field(default=(), compare=False)

    def __str__(self) -> str:
        return f"{self.schema}: {render(self.formula)}"


def _sub(a, b):
    return TruncSub(a, b)


def _a1(phi, psi):
    return _sub(_sub(phi, psi), phi)


def _a2(chi, phi, psi):
    return _sub(_sub(_sub(chi, phi), _sub(chi, psi)), _sub(psi, phi))


def _a3(phi, psi):
    return _sub(_sub(phi, _sub(phi, psi)), _sub(psi, _sub(psi, phi)))


def _a4(phi, psi):
    return _sub(_sub(phi, psi), _sub(Neg(psi), Neg(phi)))


def _a5(phi):
    return _sub(Half(phi), _sub(phi, Half(phi)))


def _a6(phi):
    return _sub(_sub(phi, Half(phi)), Half(phi))


def _a7(x, psi, phi):
    return _sub(_sub(Sup(x, psi), Sup(x, phi)), Sup(x, _sub(psi, phi)))


def _a8(x, phi, t):
    return _sub(substitute(phi, t, x), Sup(x, phi))


def _a9(x, phi):
    if x in free_vars(phi):
        raise ValueError("A9 needs x not free in phi")
    return _sub(Sup(x, phi), phi)


# arity of each propositional / quantifier schema in formula-pool slots
SCHEMAS = {
    "A1": 2, "A2": 3, "A3": 2, "A4": 2, "A5": 1, "A6": 1,
    "A7": 2, "A8": 1, "A9": 1, "A10": 0, "A11": 0, "A12": 0, "A13": 0, "A14": 0,
}
_PROP = {"A1": _a1, "A2": _a2, "A3": _a3, "A4": _a4, "A5": _a5, "A6": _a6}


def _metric_instances(schema: str, d: str) -> list[AxiomInstance]:
    x, y, z = Var("x"), Var("y"), Var("z")
    if schema == "A10":
        f = Atomic(d, (x, x))
    elif schema == "A11":
        f = _sub(Atomic(d, (x, y)), Atomic(d, (y, x)))
    else:
        f = _sub(_sub(Atomic(d, (x, z)), Atomic(d, (x, y))), Atomic(d, (y, z)))
    return [AxiomInstance(schema, f)]


def _continuity_instances(schema: str, signature: Signature, grid: Sequence[Dyadic]) -> list[AxiomInstance]:
    d = signature.metric
    z, w = Var("z"), Var("w")
    out = []
    symbols = signature.functions if schema == "A13" else signature.relations
    for sym in sorted(symbols):
        arity = symbols[sym]
        for i in range(arity):
            others = [Var(f"u{j}") for j in range(arity - 1)]
            left = tuple(others[:i]) + (z,) + tuple(others[i:])
            right = tuple(others[:i]) + (w,) + tuple(others[i:])
            mod = signature.moduli[sym, i]
            for eps in grid:
                if eps == ZERO:
                    continue
                delta = mod(eps)
                for r in grid:
                    if not r > eps:
                        continue
                    for q in grid:
                        if not q < delta:
                            continue
                        near = _sub(literal(q), Atomic(d, (z, w)))
                        if schema == "A13":
                            far = _sub(Atomic(d, (Func(sym, left), Func(sym, right))), literal(r))
                        else:
                            far = _sub(_sub(Atomic(sym, left), Atomic(sym, right)), literal(r))
                        out.append(AxiomInstance(schema, conj(near, far), (sym, i, eps, r, q)))
    return out


def instantiate(
    schema: str,
    signature: Signature | None = None,
    pool: Sequence[Formula] = (),
    grid: Sequence[Dyadic] = (),
    terms: Sequence[Term] = (),
    var: str = "x",
) -> list[AxiomInstance]:
    """All instances of ``schema`` drawn from ``pool`` / ``terms`` / ``grid``, in a fixed order.

    A1-A6 use ordered tuples from ``pool``.  A7 uses pairs from ``pool`` with
    the quantified variable ``var``; A8 pairs each pool formula with each
    term (capturing combinations are skipped, as the side condition demands);
    A9 uses the pool formulas in which ``var`` is not free.  A10-A12 need the
    signature's metric symbol; A13/A14 range over the signature's function /
    relation symbols and the ``(eps, r, q)`` triples from ``grid`` with
    ``r > eps`` and ``q < delta(eps)``.
    """
    if schema not in SCHEMAS:
        raise ValueError(f"unknown schema {schema!r}")
    if schema in _PROP:
        k = SCHEMAS[schema]
        if not pool:
            raise ValueError("formula pool is empty")
        return [
            AxiomInstance(schema, _PROP[schema](*combo), combo)
            for combo in itertools.product(pool, repeat=k)
        ]
    if schema == "A7":
        return [AxiomInstance(schema, _a7(var, a, b), (a, b)) for a, b in itertools.product(pool, repeat=2)]
    if schema == "A8":
        out = []
        for phi, t in itertools.product(pool, terms):
            try:
                out.append(AxiomInstance(schema, _a8(var, phi, t), (phi, t)))
            except CaptureViolation:
                continue
        return out
    if schema == "A9":
        return [AxiomInstance(schema, _a9(var, phi), (phi,)) for phi in pool if var not in free_vars(phi)]
    if signature is None:
        raise ValueError(f"{schema} needs a signature")
    if schema in ("A10", "A11", "A12"):
        return _metric_instances(schema, signature.metric)
    return _continuity_instances(schema, signature, grid)


# --------------------------------------------------------------------------
# checking
# --------------------------------------------------------------------------


def universal_max(phi: Formula, M: FiniteStructure) -> Dyadic:
    """Maximum value of ``phi`` over every assignment of its free variables."""
    fv = sorted(free_vars(phi))
    best = ZERO
    for combo in itertools.product(M.universe, repeat=len(fv)):
        v = _value(phi, M, dict(zip(fv, combo)))
        if v > best:
            best = v
    return best


@dataclass
class ValidityRow:
    schema: str
    instances: int = 0
    checked: int = 0
    max_value: Dyadic = ZERO
    worst: str | None = None

    @property
    def sound(self) -> bool:
        return self.max_value == ZERO

    def __str__(self) -> str:
        return f"{self.schema:<6} {self.instances:>10} {self.checked:>12} {str(self.max_value):>10}"


def check_validity(
    instances: Iterable[AxiomInstance],
    structures: Iterable[FiniteStructure] = (),
    assignments: Iterable[Mapping[str, Dyadic]] = (),
) -> dict[str, ValidityRow]:
    """Per-schema number of evaluations and largest value observed.

    Propositional instances are checked against ``assignments``; instances
    containing terms or quantifiers against every assignment in every
    structure.  A sound schema reports a maximum of 0.
    """
    instances = list(instances)
    structures = list(structures)
    assignments = list(assignments)
    rows: dict[str, ValidityRow] = {}
    evaluators = [extend_assignment(v0) for v0 in assignments]
    for inst in instances:
        row = rows.setdefault(inst.schema, ValidityRow(inst.schema))
        row.instances += 1
        if _is_propositional(inst.formula) and evaluators:
            for v in evaluators:
                val = v(inst.formula)
                row.checked += 1
                if val > row.max_value:
                    row.max_value, row.worst = val, str(inst)
        else:
            for M in structures:
                val = universal_max(inst.formula, M)
                row.checked += 1
                if val > row.max_value:
                    row.max_value, row.worst = val, str(inst)
    return rows


def _is_propositional(phi: Formula) -> bool:
    tp = type(phi)
    if tp is Atomic:
        return not phi.args
    if tp is Sup:
        return False
    if tp is TruncSub:
        return _is_propositional(phi.left) and _is_propositional(phi.right)
    return _is_propositional(phi.body)


def format_report(rows: Mapping[str, ValidityRow]) -> str:
    lines = [f"{'schema':<6} {'instances':>10} {'evaluations':>12} {'max':>10}"]
    order = sorted(rows, key=lambda s: int(s[1:]) if s[1:].isdigit() else 99)
    lines.extend(str(rows[s]) for s in order)
    return "\n".join(lines)


# --------------------------------------------------------------------------
# structure families for the checks
# --------------------------------------------------------------------------


def random_structure(signature: Signature, size: int, exponent: int, rng, metric: str = "discrete") -> FiniteStructure:
    """Random finite structure on ``0..size-1`` with relation values on the ``2^-exponent`` grid.

    ``metric="random"`` draws a genuine metric: distances ``1/2 + k/2^(exponent+1)``
    for distinct points, which satisfy the triangle inequality automatically.
    """
    universe = list(range(size))
    top = 1 << exponent
    functions = {
        f: {args: int(rng.integers(size)) for args in itertools.product(universe, repeat=n)}
        for f, n in signature.functions.items()
    }
    relations = {}
    for r, n in signature.relations.items():
        if r == signature.metric:
            continue
        relations[r] = {
            args: Dyadic(int(rng.integers(top + 1)), exponent)
            for args in itertools.product(universe, repeat=n)
        }
    if metric == "random":
        half = 1 << exponent
        d = {}
        for a in universe:
            d[a, a] = ZERO
            for b in universe:
                if a < b:
                    v = Dyadic(half + int(rng.integers(half + 1)), exponent + 1)
                    d[a, b] = d[b, a] = v
        relations[signature.metric] = d
    elif metric != "discrete":
        raise ValueError("metric must be 'discrete' or 'random'")
    return FiniteStructure(signature, universe, functions, relations)


def structure_family(signature: Signature, size: int, exponent: int) -> Iterable[FiniteStructure]:
    """Every structure on ``0..size-1`` with discrete metric and values on the ``2^-exponent`` grid."""
    universe = list(range(size))
    grid = dyadic_grid(exponent)
    rel_slots = [
        (r, args)
        for r, n in sorted(signature.relations.items())
        if r != signature.metric
        for args in itertools.product(universe, repeat=n)
    ]
    fun_slots = [
        (f, args)
        for f, n in sorted(signature.functions.items())
        for args in itertools.product(universe, repeat=n)
    ]
    for fvals in itertools.product(universe, repeat=len(fun_slots)):
        functions: dict = {f: {} for f in signature.functions}
        for (f, args), v in zip(fun_slots, fvals):
            functions[f][args] = v
        for rvals in itertools.product(grid, repeat=len(rel_slots)):
            relations: dict = {r: {} for r in signature.relations if r != signature.metric}
            for (r, args), v in zip(rel_slots, rvals):
                relations[r][args] = v
            yield FiniteStructure(signature, universe, functions, relations)


def tightest_moduli(M: FiniteStructure, exponent: int) -> FiniteStructure:
    """``M`` with every modulus replaced by the best staircase it honours on the ``2^-exponent`` grid.

    For the step ending at breakpoint ``eps_j`` the delta is the least
    distance between argument tuples (differing in one place) whose outputs
    differ by more than ``eps_{j-1}``; 1 when there are none.  Needs a genuine metric so that this is positive.
    """
    from .formulas import Modulus

    sig = M.signature
    d = M.relations[sig.metric]
    moduli = {}
    symbols = [(s, n, True) for s, n in sig.relations.items() if s != sig.metric]
    symbols += [(s, n, False) for s, n in sig.functions.items()]
    for sym, n, is_rel in symbols:
        for i in range(n):
            steps = []
            prev = ZERO
            for eps in dyadic_grid(exponent)[1:]:
                delta = ONE_
                for args in itertools.product(M.universe, repeat=n):
                    for w in M.universe:
                        if w == args[i]:
                            continue
                        other = args[:i] + (w,) + args[i + 1:]
                        if is_rel:
                            gap = abs(M.relations[sym][args].to_fraction() - M.relations[sym][other].to_fraction())
                        else:
                            gap = d[M.functions[sym][args], M.functions[sym][other]].to_fraction()
                        if gap > prev.to_fraction():
                            dist = d[args[i], w]
                            if dist.numerator == 0:
                                raise ValueError("pseudo-metric: a zero distance separates different outputs")
                            if dist < delta:
                                delta = dist
                steps.append((eps, delta))
                prev = eps
            moduli[sym, i] = Modulus(tuple(steps))
    new_sig = Signature(
        {k: v for k, v in sig.relations.items()}, dict(sig.functions), moduli, sig.metric
    )
    return FiniteStructure(new_sig, M.universe, M.functions, M.relations)
