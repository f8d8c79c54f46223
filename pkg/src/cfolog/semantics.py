"""Pre-structures and the value semantics of continuous formulas.

Two kinds of structure are provided:

* :class:`FiniteStructure` -- finite universe, function tables and exact
  dyadic relation tables.  :func:`value` computes formula values exactly.
* :class:`CountableStructure` -- a universe given by a stage-indexed
  enumerator and relations returning dyadic intervals at a requested
  precision.  :func:`evaluate` returns sound interval bounds; a ``sup`` over
  an open enumeration only yields a lower bound (the upper end stays 1)
  unless the structure declares a witness prefix for that quantifier.
"""

from __future__ import annotations

import itertools
import re
from typing import Callable, Hashable, Iterable, Mapping, NamedTuple, Sequence

from .dyadic import (
    ONE,
    ZERO,
    Dyadic,
    DyadicInterval,
    halve,
    negate,
    truncated_sub,
)
from .formulas import (
    Atomic,
    Formula,
    Half,
    Neg,
    Signature,
    Sup,
    Term,
    TruncSub,
    Var,
    _literal_of,
    enumerate_sentences,
    free_vars,
    render,
)

__all__ = [
    "UnboundVariable",
    "NotExact",
    "Structure",
    "FiniteStructure",
    "CountableStructure",
    "eval_term",
    "value",
    "evaluate",
    "evaluate_marked",
    "Satisfaction",
    "satisfies",
    "atomic_diagram",
    "elementary_diagram",
    "metric_violations",
    "modulus_violations",
]

Element = Hashable


class UnboundVariable(KeyError):
    pass


class NotExact(ValueError):
    """Exact evaluation requested on a structure that only offers approximations."""


class Structure:
    """Interface shared by finite and enumerated pre-structures."""

    signature: Signature
    is_finite: bool = False

    def elements(self, stage: int | None = None) -> Sequence[Element]:
        raise NotImplementedError

    def apply(self, symbol: str, args: tuple) -> Element:
        raise NotImplementedError

    def relation(self, symbol: str, args: tuple, precision: int) -> DyadicInterval:
        raise NotImplementedError

    def witness_prefix(self, phi: Sup) -> int | None:
        """Length of an element prefix on which ``sup`` of ``phi`` is attained, if declared."""
        return None


class FiniteStructure(Structure):
    """Finite pre-structure with dyadic-valued relations.

    ``functions[f]`` and ``relations[P]`` map argument tuples to elements and
    :class:`Dyadic` values respectively.  If the metric symbol is missing
    from ``relations`` the discrete metric is used.
    """

    is_finite = True

    def __init__(
        self,
        signature: Signature,
        universe: Sequence[Element],
        functions: Mapping[str, Mapping[tuple, Element]] | None = None,
        relations: Mapping[str, Mapping[tuple, Dyadic]] | None = None,
    ):
        if not universe:
            raise ValueError("universe must be non-empty")
        self.signature = signature
        self.universe = tuple(universe)
        if len(set(self.universe)) != len(self.universe):
            raise ValueError("duplicate universe elements")
        self.functions = {k: dict(v) for k, v in (functions or {}).items()}
        self.relations = {k: dict(v) for k, v in (relations or {}).items()}
        d = signature.metric
        if d not in self.relations:
            self.relations[d] = {
                (a, b): (ZERO if a == b else ONE) for a in self.universe for b in self.universe
            }
        self._check_tables()

    def _check_tables(self):
        sig = self.signature
        for f, n in sig.functions.items():
            table = self.functions.get(f)
            if table is None:
                raise ValueError(f"no interpretation for function {f!r}")
            for args in itertools.product(self.universe, repeat=n):
                if table.get(args) not in self.universe:
                    raise ValueError(f"{f}{args} undefined or outside the universe")
        for p, n in sig.relations.items():
            table = self.relations.get(p)
            if table is None:
                raise ValueError(f"no interpretation for relation {p!r}")
            for args in itertools.product(self.universe, repeat=n):
                if not isinstance(table.get(args), Dyadic):
                    raise ValueError(f"{p}{args} has no dyadic value")

    def elements(self, stage: int | None = None) -> Sequence[Element]:
        return self.universe

    def apply(self, symbol: str, args: tuple) -> Element:
        return self.functions[symbol][args]

    def relation_value(self, symbol: str, args: tuple) -> Dyadic:
        return self.relations[symbol][args]

    def relation(self, symbol: str, args: tuple, precision: int) -> DyadicInterval:
        return DyadicInterval(self.relations[symbol][args])

    def with_names(self, names: Mapping[Element, str] | None = None) -> "FiniteStructure":
        """Expansion by a constant naming each element (default: the element itself as text)."""
        if names is None:
            names = {e: _default_name(e) for e in self.universe}
        names = dict(names)
        taken = set(self.signature.relations)
        funs = dict(self.functions)
        new = []
        for e, n in names.items():
            if n in taken:
                raise ValueError(f"element name {n!r} clashes with a relation symbol")
            if n in self.signature.functions:
                if self.signature.functions[n] != 0 or funs[n][()] != e:
                    raise ValueError(f"element name {n!r} clashes with a function symbol")
                continue
            new.append(n)
            funs[n] = {(): e}
        sig = self.signature.with_constants(new)
        return FiniteStructure(sig, self.universe, funs, self.relations)


def _default_name(e: Element) -> str:
    text = re.sub(r"[^A-Za-z0-9_']", "_", str(e))
    return text if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", text) and text not in ("sup", "inf") else "e" + text


class CountableStructure(Structure):
    """Pre-structure over a countable universe presented by callables.

    ``enumerate_elements(stage)`` must return a finite prefix that grows
    (weakly) with ``stage``; ``relation(P, args, n)`` returns an interval of
    width at most ``2**-n`` around the true value.
    """

    def __init__(
        self,
        signature: Signature,
        enumerate_elements: Callable[[int], Sequence[Element]],
        relation: Callable[[str, tuple, int], DyadicInterval],
        function: Callable[[str, tuple], Element] | None = None,
        witness_prefixes: Mapping[str, int] | None = None,
        default_stage: int = 16,
    ):
        self.signature = signature
        self._enum = enumerate_elements
        self._rel = relation
        self._fun = function
        self._witness = dict(witness_prefixes or {})
        self.default_stage = default_stage

    def elements(self, stage: int | None = None) -> Sequence[Element]:
        return self._enum(self.default_stage if stage is None else stage)

    def apply(self, symbol: str, args: tuple) -> Element:
        if self._fun is None:
            raise KeyError(symbol)
        return self._fun(symbol, args)

    def relation(self, symbol: str, args: tuple, precision: int) -> DyadicInterval:
        return self._rel(symbol, args, precision)

    def witness_prefix(self, phi: Sup) -> int | None:
        key = render(phi)
        if key in self._witness:
            return self._witness[key]
        return self._witness.get("*")


# --------------------------------------------------------------------------
# evaluation
# --------------------------------------------------------------------------


def eval_term(t: Term, sigma: Mapping[str, Element], M: Structure) -> Element:
    if type(t) is Var:
        try:
            return sigma[t.name]
        except KeyError:
            raise UnboundVariable(t.name) from None
    return M.apply(t.symbol, tuple(eval_term(a, sigma, M) for a in t.args))


def value(phi: Formula, M: FiniteStructure, sigma: Mapping[str, Element] | None = None) -> Dyadic:
    """Exact value of ``phi`` in a finite structure under ``sigma``."""
    if not getattr(M, "is_finite", False):
        raise NotExact("exact values need a finite structure")
    return _value(phi, M, dict(sigma or {}))


def _value(phi, M, sigma) -> Dyadic:
    tp = type(phi)
    if tp is Atomic:
        if not phi.args:
            lit = _literal_of(phi.symbol)
            if lit is not None:
                return lit
        args = tuple(eval_term(a, sigma, M) for a in phi.args)
        return M.relations[phi.symbol][args]
    if tp is TruncSub:
        return truncated_sub(_value(phi.left, M, sigma), _value(phi.right, M, sigma))
    if tp is Neg:
        return negate(_value(phi.body, M, sigma))
    if tp is Half:
        return halve(_value(phi.body, M, sigma))
    x = phi.var
    saved = sigma.get(x, _MISSING)
    best = ZERO
    body = phi.body
    for a in M.universe:
        sigma[x] = a
        v = _value(body, M, sigma)
        if v > best:
            best = v
            if best == ONE:
                break
    if saved is _MISSING:
        del sigma[x]
    else:
        sigma[x] = saved
    return best


_MISSING = object()


def evaluate_marked(
    phi: Formula,
    M: Structure,
    sigma: Mapping[str, Element] | None = None,
    precision: int = 16,
    stage: int | None = None,
) -> tuple[DyadicInterval, bool]:
    """Interval bound for the value of ``phi`` plus an "attained" flag.

    The flag is ``False`` when some ``sup`` ranged over an open enumeration,
    in which case only the lower end of that quantifier's value is reliable.
    """
    sigma = dict(sigma or {})
    missing = free_vars(phi) - set(sigma)
    if missing:
        raise UnboundVariable(", ".join(sorted(missing)))
    if getattr(M, "is_finite", False):
        return DyadicInterval(_value(phi, M, sigma)), True
    flag = [True]
    out = _interval(phi, M, sigma, precision, stage, flag)
    return out, flag[0]


def evaluate(
    phi: Formula,
    M: Structure,
    sigma: Mapping[str, Element] | None = None,
    precision: int = 16,
    stage: int | None = None,
) -> DyadicInterval:
    return evaluate_marked(phi, M, sigma, precision, stage)[0]


def _interval(phi, M, sigma, n, stage, flag) -> DyadicInterval:
    tp = type(phi)
    if tp is Atomic:
        if not phi.args:
            lit = _literal_of(phi.symbol)
            if lit is not None:
                return DyadicInterval(lit)
        args = tuple(eval_term(a, sigma, M) for a in phi.args)
        return M.relation(phi.symbol, args, n)
    if tp is TruncSub:
        return _interval(phi.left, M, sigma, n, stage, flag).truncated_sub(
            _interval(phi.right, M, sigma, n, stage, flag)
        )
    if tp is Neg:
        return -_interval(phi.body, M, sigma, n, stage, flag)
    if tp is Half:
        return _interval(phi.body, M, sigma, n, stage, flag).halve()
    if phi.var not in free_vars(phi.body):
        # vacuous quantifier over a non-empty universe
        return _interval(phi.body, M, sigma, n, stage, flag)
    prefix = M.witness_prefix(phi)
    if prefix is not None:
        elems = M.elements(stage)
        if len(elems) < prefix:
            raise ValueError("enumeration stage shorter than the declared witness prefix")
        elems = elems[:prefix]
    else:
        elems = M.elements(stage)
        flag[0] = False
    lo = hi = ZERO
    inner = dict(sigma)
    for a in elems:
        inner[phi.var] = a
        iv = _interval(phi.body, M, inner, n, stage, flag)
        if iv.lo > lo:
            lo = iv.lo
        if iv.hi > hi:
            hi = iv.hi
    if prefix is None:
        hi = ONE
    return DyadicInterval(lo, hi)


class Satisfaction(NamedTuple):
    """``holds`` is True/False when decided; ``None`` means "value <= upper so far"."""

    holds: bool | None
    upper: Dyadic


def satisfies(M: Structure, sigma: Mapping[str, Element] | None, phi: Formula, precision: int = 16,
              stage: int | None = None) -> Satisfaction:
    iv, attained = evaluate_marked(phi, M, sigma, precision, stage)
    if iv.hi == ZERO:
        return Satisfaction(True, ZERO)
    if iv.lo > ZERO:
        return Satisfaction(False, iv.hi)
    if attained and iv.is_point:
        return Satisfaction(True, ZERO)
    return Satisfaction(None, iv.hi)


# --------------------------------------------------------------------------
# diagrams
# --------------------------------------------------------------------------


def _diagram(M: FiniteStructure, stage: int, qf: bool, names) -> list[tuple[Formula, Dyadic]]:
    named = M.with_names(names)
    out = []
    for phi in enumerate_sentences(named.signature, stage, quantifier_free=qf):
        out.append((phi, _value(phi, named, {})))
    return out


def atomic_diagram(M: FiniteStructure, stage: int,
                   names: Mapping[Element, str] | None = None) -> list[tuple[Formula, Dyadic]]:
    """First ``stage`` quantifier-free sentences over the language naming every element, with values."""
    return _diagram(M, stage, True, names)


def elementary_diagram(M: FiniteStructure, stage: int,
                       names: Mapping[Element, str] | None = None) -> list[tuple[Formula, Dyadic]]:
    return _diagram(M, stage, False, names)


# --------------------------------------------------------------------------
# structural checks
# --------------------------------------------------------------------------


def metric_violations(M: FiniteStructure) -> list[str]:
    """Pseudo-metric laws that fail in ``M`` (empty list when ``d`` is a pseudo-metric)."""
    d = M.relations[M.signature.metric]
    U = M.universe
    bad = []
    for a in U:
        if d[a, a] != ZERO:
            bad.append(f"d({a},{a}) = {d[a, a]}")
    for a, b in itertools.product(U, repeat=2):
        if d[a, b] != d[b, a]:
            bad.append(f"d({a},{b}) != d({b},{a})")
    for a, b, c in itertools.product(U, repeat=3):
        if truncated_sub(d[a, c], d[a, b]) > d[b, c]:
            bad.append(f"triangle fails at ({a},{b},{c})")
    return bad


def _position_pairs(M: FiniteStructure, arity: int, i: int) -> Iterable[tuple[tuple, tuple, Element, Element]]:
    U = M.universe
    for rest in itertools.product(U, repeat=arity - 1):
        for c, e in itertools.product(U, repeat=2):
            yield rest[:i] + (c,) + rest[i:], rest[:i] + (e,) + rest[i:], c, e


def modulus_violations(M: FiniteStructure) -> list[str]:
    """Declared moduli that ``M`` fails to honour.

    For the staircase step ``(eps_{j-1}, eps_j]`` with delta ``delta_j``, every
    argument pair at distance below ``delta_j`` must move the output by at
    most ``eps_{j-1}`` (the infimum of the step; ``eps_0 = 0``).
    """
    sig = M.signature
    d = M.relations[sig.metric]
    bad = []
    for (sym, i), mod in sig.moduli.items():
        is_rel = sym in sig.relations
        arity = sig.arity(sym)
        prev = ZERO
        for eps, delta in mod.steps:
            for left, right, c, e in _position_pairs(M, arity, i):
                if not d[c, e] < delta:
                    continue
                if is_rel:
                    a, b = M.relations[sym][left], M.relations[sym][right]
                    moved = truncated_sub(a, b) if a >= b else truncated_sub(b, a)
                else:
                    moved = d[M.functions[sym][left], M.functions[sym][right]]
                if moved > prev:
                    bad.append(f"{sym} arg {i}: d({c},{e}) < {delta} but output moves {moved} > {prev}")
            prev = eps
    return bad
