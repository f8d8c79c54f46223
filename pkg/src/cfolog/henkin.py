"""Effective model construction from a theory oracle.

Given an oracle for a complete theory ``T`` (a value query and a zero test on
sentences), :func:`run_construction` builds, stage by stage,

* Henkin witness constants with their axioms,
* a chain of decided comparisons ``phi -. psi`` between tracked sentences,
* nested dyadic bounds ``[lo_s, hi_s]`` on every tracked sentence, and
* an :class:`AllocationTable` accepting each sentence with probability
  inside those bounds,

together with a line-oriented trace of every decision and allocation.

Consequence from the chain is tested through the oracle: ``Delta |- chi``
holds when the sup-closure of ``(1/2^kappa chi) -. theta`` has value 0, where
``theta`` is the maximum of the relevant chain elements with their Henkin
constants replaced by fresh variables.  ``theta`` is 0 exactly when every
element holds; scaling ``chi`` down by ``2^-kappa`` makes the test exact as
long as a failing ``theta`` is at least ``2^-kappa``.
"""

from __future__ import annotations

import hashlib
import itertools
import subprocess
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

from .dyadic import ONE, ZERO, Dyadic, DyadicInterval, parse_dyadic
from .formulas import (
    Atomic,
    Formula,
    Func,
    Half,
    Signature,
    Sup,
    Term,
    TruncSub,
    bound_vars,
    conj,
    constants,
    free_vars,
    from_godel,
    godel,
    is_sentence,
    literal,
    max_all,
    render,
    render_term,
    replace_constants,
    substitute,
    subformulas,
)
from .ptm.allocation import AllocationTable, accept_probability, allocate_to
from .semantics import FiniteStructure, value

__all__ = [
    "TheoryOracle",
    "EvaluatorOracle",
    "ProcessOracle",
    "serve_oracle",
    "OracleError",
    "HenkinConstant",
    "henkin_constant",
    "henkin_axiom",
    "LanguageLevel",
    "extend_language",
    "Construction",
    "decide_pair",
    "sentence_bounds",
    "build_machine",
    "TermModel",
    "ConstructionResult",
    "run_construction",
    "MetricReport",
    "metric_check",
]


class OracleError(RuntimeError):
    pass


# --------------------------------------------------------------------------
# oracles
# --------------------------------------------------------------------------


class TheoryOracle:
    """Decision interface for a complete theory."""

    queries = 0

    def value_query(self, phi: Formula, n: int) -> DyadicInterval:
        raise NotImplementedError

    def zero_test(self, phi: Formula) -> bool:
        raise NotImplementedError


class EvaluatorOracle(TheoryOracle):
    """The complete theory of a finite structure, answered by exact evaluation."""

    def __init__(self, structure: FiniteStructure):
        self.structure = structure
        self.signature = structure.signature
        self.queries = 0

    def _check(self, phi: Formula):
        if not is_sentence(phi):
            raise OracleError(f"not a sentence: {render(phi)}")
        unknown = constants(phi) - set(self.signature.functions)
        if unknown:
            raise OracleError(f"symbols outside the theory's language: {', '.join(sorted(unknown))}")

    def value_query(self, phi: Formula, n: int) -> DyadicInterval:
        self._check(phi)
        self.queries += 1
        return DyadicInterval(value(phi, self.structure))

    def zero_test(self, phi: Formula) -> bool:
        self._check(phi)
        self.queries += 1
        return value(phi, self.structure) == ZERO


class ProcessOracle(TheoryOracle):
    """Talks to an external oracle process over stdin/stdout.

    Requests are ``VALUE <code> <n>`` (reply ``lo hi``) and ``ZERO <code>``
    (reply ``1`` or ``0``), where ``<code>`` is the sentence's Goedel number.
    """

    def __init__(self, argv: Sequence[str]):
        self.proc = subprocess.Popen(
            list(argv), stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True, bufsize=1
        )
        self.queries = 0

    def _ask(self, line: str) -> str:
        if self.proc.poll() is not None:
            raise OracleError("oracle process has exited")
        self.proc.stdin.write(line + "\n")
        self.proc.stdin.flush()
        reply = self.proc.stdout.readline()
        if not reply:
            raise OracleError("oracle process closed its output")
        reply = reply.strip()
        if reply.startswith("ERR"):
            raise OracleError(reply[3:].strip() or "oracle error")
        self.queries += 1
        return reply

    def value_query(self, phi: Formula, n: int) -> DyadicInterval:
        parts = self._ask(f"VALUE {godel(phi)} {n}").split()
        if len(parts) != 2:
            raise OracleError(f"malformed VALUE reply: {parts!r}")
        return DyadicInterval(parse_dyadic(parts[0]), parse_dyadic(parts[1]))

    def zero_test(self, phi: Formula) -> bool:
        reply = self._ask(f"ZERO {godel(phi)}")
        if reply not in ("0", "1"):
            raise OracleError(f"malformed ZERO reply: {reply!r}")
        return reply == "1"

    def close(self):
        if self.proc.poll() is None:
            self.proc.stdin.close()
            self.proc.wait(timeout=10)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def serve_oracle(oracle: TheoryOracle, signature: Signature, lines: Iterable[str], out) -> None:
    """Answer the line protocol of :class:`ProcessOracle` from ``lines`` onto ``out``."""
    for raw in lines:
        raw = raw.strip()
        if not raw:
            continue
        parts = raw.split()
        try:
            if parts[0] == "VALUE" and len(parts) == 3:
                iv = oracle.value_query(from_godel(int(parts[1]), signature), int(parts[2]))
                out.write(f"{iv.lo} {iv.hi}\n")
            elif parts[0] == "ZERO" and len(parts) == 2:
                out.write("1\n" if oracle.zero_test(from_godel(int(parts[1]), signature)) else "0\n")
            else:
                out.write("ERR unknown request\n")
        except Exception as exc:  # reported to the client, the server keeps running
            out.write(f"ERR {type(exc).__name__}: {exc}\n")
        out.flush()


# --------------------------------------------------------------------------
# Henkin constants
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class HenkinConstant:
    name: str
    formula: Formula
    var: str
    p: Dyadic
    q: Dyadic
    level: int

    @property
    def term(self) -> Func:
        return Func(self.name, ())


def _level(phi: Formula, registry: Mapping[str, HenkinConstant]) -> int:
    return max((registry[c].level for c in constants(phi) if c in registry), default=0)


def henkin_constant(
    phi: Formula, x: str, p: Dyadic, q: Dyadic, registry: dict[str, HenkinConstant] | None = None
) -> HenkinConstant:
    """The witness constant indexed by ``(phi, x, p, q)``; the same index always gives the same name."""
    if not p < q:
        raise ValueError(f"need p < q, got p={p}, q={q}")
    digest = hashlib.sha1(f"{render(phi)}|{x}|{p}|{q}".encode()).hexdigest()[:12]
    name = f"h{digest}"
    if registry is not None and name in registry:
        return registry[name]
    c = HenkinConstant(name, phi, x, p, q, 1 + _level(phi, registry or {}))
    if registry is not None:
        registry[name] = c
    return c


def henkin_axiom(
    phi: Formula, x: str, p: Dyadic, q: Dyadic, registry: dict[str, HenkinConstant] | None = None
) -> Formula:
    """``(sup_x phi -. q) /\\ (p -. phi[c/x])`` for the witness constant ``c`` of the index."""
    c = henkin_constant(phi, x, p, q, registry)
    return conj(TruncSub(Sup(x, phi), literal(q)), TruncSub(literal(p), substitute(phi, c.term, x)))


@dataclass
class LanguageLevel:
    """Constants of level ``n``: one per (formula of lower level, variable, dyadic p < q of exponent <= n).

    They are produced on demand by :meth:`constants` since there are
    infinitely many formulas at every level.
    """

    n: int
    registry: dict[str, HenkinConstant]

    def constants(self, formulas: Iterable[tuple[Formula, str]]) -> Iterator[HenkinConstant]:
        if self.n == 0:
            return
        grid = [Dyadic(k, self.n) for k in range((1 << self.n) + 1)]
        for phi, x in formulas:
            if _level(phi, self.registry) >= self.n:
                continue
            for i, p in enumerate(grid):
                for q in grid[i + 1:]:
                    yield henkin_constant(phi, x, p, q, self.registry)


def extend_language(n: int, registry: dict[str, HenkinConstant] | None = None) -> LanguageLevel:
    if n < 0:
        raise ValueError("level must be non-negative")
    return LanguageLevel(n, registry if registry is not None else {})


# --------------------------------------------------------------------------
# the construction state
# --------------------------------------------------------------------------


def _key(phi: Formula) -> str:
    return render(phi)


class BudgetExhausted(RuntimeError):
    pass


@dataclass
class Construction:
    """Mutable state of one construction run."""

    oracle: TheoryOracle
    kappa: int = 24
    pair_constant_limit: int = 1
    witness_levels: int = 1
    query_budget: int | None = None
    registry: dict[str, HenkinConstant] = field(default_factory=dict)
    delta: list[Formula] = field(default_factory=list)
    decided: dict[tuple[str, str], Formula] = field(default_factory=dict)
    pool: list[Formula] = field(default_factory=list)
    bounds: dict[str, list[tuple[int, Dyadic, Dyadic]]] = field(default_factory=dict)
    trace: list[str] = field(default_factory=list)
    stage: int = 0
    queries: int = 0
    _pool_keys: set = field(default_factory=set)
    _witnessed: dict = field(default_factory=dict)

    # -- bookkeeping ------------------------------------------------------
    def track(self, phi: Formula) -> None:
        if not is_sentence(phi):
            raise ValueError(f"not a sentence: {render(phi)}")
        k = _key(phi)
        if k not in self._pool_keys:
            self._pool_keys.add(k)
            self.pool.append(phi)

    def log(self, line: str) -> None:
        self.trace.append(f"{self.stage} | {line}")

    def henkin_names(self, phi: Formula) -> frozenset[str]:
        return frozenset(c for c in constants(phi) if c in self.registry)

    def current_bounds(self, phi: Formula) -> tuple[Dyadic, Dyadic]:
        hist = self.bounds.get(_key(phi))
        return (hist[-1][1], hist[-1][2]) if hist else (ZERO, ONE)

    def add_delta(self, phi: Formula, tag: str = "DELTA") -> None:
        self.delta.append(phi)
        self.log(f"{tag} {render(phi)}")

    # -- consequence -------------------------------------------------------
    def _zero(self, phi: Formula) -> bool:
        if self.query_budget is not None and self.queries >= self.query_budget:
            raise BudgetExhausted(self.queries)
        self.queries += 1
        return self.oracle.zero_test(phi)

    def _conditions(self, names: frozenset[str]) -> list[Formula]:
        """Chain elements sharing Henkin constants, transitively, with ``names``."""
        if not names:
            return []
        comp = set(names)
        chosen: list[int] = []
        remaining = [(i, self.henkin_names(d)) for i, d in enumerate(self.delta)]
        remaining = [(i, cs) for i, cs in remaining if cs]
        grown = True
        while grown:
            grown = False
            rest = []
            for i, cs in remaining:
                if cs & comp:
                    comp |= cs
                    chosen.append(i)
                    grown = True
                else:
                    rest.append((i, cs))
            remaining = rest
        return [self.delta[i] for i in sorted(chosen)]

    def entails(self, chi: Formula) -> bool:
        """Whether every model of ``T`` plus the chain gives ``chi`` the value 0."""
        names = self.henkin_names(chi)
        conds = self._conditions(names)
        if not names:
            return self._zero(chi)
        allnames = set(names)
        for d in conds:
            allnames |= self.henkin_names(d)
        taken = set()
        for f in [chi, *conds]:
            taken |= bound_vars(f) | free_vars(f)
        mapping = {}
        i = 0
        for c in sorted(allnames):
            while f"hv{i}" in taken:
                i += 1
            mapping[c] = f"hv{i}"
            i += 1
        body = replace_constants(chi, mapping)
        if conds:
            for _ in range(self.kappa):
                body = Half(body)
            body = TruncSub(body, replace_constants(max_all(conds), mapping))
        for v in sorted(mapping.values(), reverse=True):
            body = Sup(v, body)
        return self._zero(body)


def decide_pair(psi: Formula, phi: Formula, state: Construction) -> Formula:
    """Commit ``psi -. phi`` if the chain entails it, else ``phi -. psi``; returns the committed sentence."""
    k = (_key(psi), _key(phi))
    if k in state.decided:
        return state.decided[k]
    if (k[1], k[0]) in state.decided:
        return state.decided[(k[1], k[0])]
    first = TruncSub(psi, phi)
    chosen = first if state.entails(first) else TruncSub(phi, psi)
    state.decided[k] = chosen
    state.add_delta(chosen)
    return chosen


def sentence_bounds(phi: Formula, state: Construction, s: int) -> tuple[Dyadic, Dyadic]:
    """Tightest ``k/2^s`` bounds on ``phi`` that the chain entails, intersected with earlier bounds."""
    if s <= 0:
        return ZERO, ONE
    prev_lo, prev_hi = state.current_bounds(phi)
    lo_k = prev_lo.floor_to(s).scaled(s)
    hi_k = prev_hi.ceil_to(s).scaled(s)
    # hi: least k with phi <= k/2^s (k = hi_k is known to hold)
    a, b = lo_k, hi_k
    while a < b:
        mid = (a + b) // 2
        if state.entails(TruncSub(phi, literal(Dyadic(mid, s)))):
            b = mid
        else:
            a = mid + 1
    hi = b
    # lo: greatest k with k/2^s <= phi
    a, b = lo_k, hi
    while a < b:
        mid = (a + b + 1) // 2
        if state.entails(TruncSub(literal(Dyadic(mid, s)), phi)):
            a = mid
        else:
            b = mid - 1
    lo = a
    return max(prev_lo, Dyadic(lo, s)), min(prev_hi, Dyadic(hi, s))


def _record_bounds(state: Construction, phi: Formula, s: int) -> tuple[Dyadic, Dyadic]:
    lo, hi = sentence_bounds(phi, state, s)
    hist = state.bounds.setdefault(_key(phi), [])
    if not hist or (hist[-1][1], hist[-1][2]) != (lo, hi):
        state.log(f"BOUND {render(phi)} {lo} {hi}")
    hist.append((s, lo, hi))
    return lo, hi


def _allocate_bounds(table: AllocationTable, key: str, lo: Dyadic, hi: Dyadic, stage: int) -> None:
    allocate_to(table, key, "A", lo, stage=stage)
    allocate_to(table, key, "R", ONE - hi, stage=stage)


def build_machine(phi: Formula, state: Construction, n: int) -> AllocationTable:
    """Table for ``phi`` fed with its bound history, refined until the width is at most ``2^-n``."""
    key = _key(phi)
    state.track(phi)
    hist = state.bounds.setdefault(key, [])
    s = hist[-1][0] if hist else 0
    while True:
        lo, hi = state.current_bounds(phi)
        if (hi - lo) <= Dyadic(1, n) or s >= n:
            break
        s += 1
        lo, hi = sentence_bounds(phi, state, s)
        hist.append((s, lo, hi))
    table = AllocationTable()
    for stage, lo, hi in hist:
        _allocate_bounds(table, key, lo, hi, stage)
    return table


# --------------------------------------------------------------------------
# stages
# --------------------------------------------------------------------------


def _closed_sups(phi: Formula) -> Iterator[Sup]:
    for f in subformulas(phi):
        if type(f) is Sup and is_sentence(f):
            yield f


def _make_witnesses(state: Construction, s: int) -> None:
    step = Dyadic(1, s)
    targets: list[Sup] = []
    seen = set()
    for phi in list(state.pool):
        for sup in _closed_sups(phi):
            k = _key(sup)
            if k in seen:
                continue
            seen.add(k)
            if _level(sup, state.registry) < state.witness_levels:
                targets.append(sup)
    for sup in targets:
        lo, _ = state.current_bounds(sup)
        if _key(sup) not in state.bounds:
            continue
        last = state._witnessed.get(_key(sup))
        if last is not None and not lo > last:
            continue
        if lo < step + step:
            continue
        q = lo - step
        p = q - step
        axiom = henkin_axiom(sup.body, sup.var, p, q, state.registry)
        c = henkin_constant(sup.body, sup.var, p, q, state.registry)
        state._witnessed[_key(sup)] = lo
        state.add_delta(axiom, tag=f"HENKIN {c.name}")
        state.track(substitute(sup.body, c.term, sup.var))


def _pairs(state: Construction) -> Iterator[tuple[Formula, Formula]]:
    pool = state.pool
    for i in range(len(pool)):
        for j in range(i + 1, len(pool)):
            names = state.henkin_names(pool[i]) | state.henkin_names(pool[j])
            if len(names) <= state.pair_constant_limit:
                yield pool[i], pool[j]


@dataclass
class TermModel:
    """Closed terms over the Henkin constants, with the value bounds reached so far."""

    universe: list[Term]
    bounds: dict[str, tuple[Dyadic, Dyadic]]
    constants: dict[str, HenkinConstant]

    def value(self, phi: Formula) -> tuple[Dyadic, Dyadic]:
        return self.bounds.get(_key(phi), (ZERO, ONE))


@dataclass
class ConstructionResult:
    model: TermModel
    tables: AllocationTable
    trace: list[str]
    budget_exhausted: bool
    state: Construction

    def trace_text(self) -> str:
        return "".join(line + "\n" for line in self.trace)

    def acceptance(self, phi: Formula) -> tuple[Dyadic, Dyadic]:
        return accept_probability(self.tables, _key(phi))


def closed_terms(signature: Signature, extra: Sequence[str] = (), depth: int = 1) -> list[Term]:
    """Closed terms of nesting depth at most ``depth`` from constants and function symbols."""
    level = [Func(c, ()) for c in sorted(signature.constants) + list(extra)]
    seen = {render_term(t) for t in level}
    out = list(level)
    for _ in range(depth):
        new = []
        for f, k in sorted(signature.functions.items()):
            if k == 0:
                continue
            for args in itertools.product(out, repeat=k):
                t = Func(f, tuple(args))
                key = render_term(t)
                if key not in seen:
                    seen.add(key)
                    new.append(t)
        out.extend(new)
    return out


def run_construction(
    oracle: TheoryOracle,
    stages: int,
    sentences: Sequence[Formula],
    signature: Signature | None = None,
    kappa: int = 24,
    witness_levels: int = 1,
    pair_constant_limit: int = 1,
    query_budget: int | None = None,
) -> ConstructionResult:
    """Run ``stages`` rounds of: witnesses, pair decisions, bound refinement, allocation."""
    state = Construction(oracle, kappa=kappa, pair_constant_limit=pair_constant_limit,
                         witness_levels=witness_levels, query_budget=query_budget)
    for phi in sentences:
        state.track(phi)
    listed = [_key(phi) for phi in state.pool]
    tables = AllocationTable()
    for k in listed:
        tables.entry(k)
    exhausted = False
    try:
        for s in range(1, stages + 1):
            state.stage = s
            _make_witnesses(state, s)
            for psi, phi in _pairs(state):
                decide_pair(psi, phi, state)
            for phi in list(state.pool):
                _record_bounds(state, phi, s)
                for sup in _closed_sups(phi):
                    if _level(sup, state.registry) < state.witness_levels and _key(sup) not in state._pool_keys:
                        _record_bounds(state, sup, s)
            start = len(tables.log)
            for phi in state.pool:
                k = _key(phi)
                if k not in listed:
                    continue
                lo, hi = state.current_bounds(phi)
                _allocate_bounds(tables, k, lo, hi, s)
            for ev in tables.log[start:]:
                state.trace.append(ev.line())
    except BudgetExhausted:
        exhausted = True
        state.log("BUDGET exhausted")
    base = signature or getattr(oracle, "signature", None)
    universe = closed_terms(base, sorted(state.registry)) if base is not None else [
        c.term for c in state.registry.values()
    ]
    model = TermModel(
        universe,
        {k: (h[-1][1], h[-1][2]) for k, h in state.bounds.items() if h},
        dict(state.registry),
    )
    return ConstructionResult(model, tables, state.trace, exhausted, state)


# --------------------------------------------------------------------------
# metric check
# --------------------------------------------------------------------------


@dataclass
class MetricReport:
    verdict: str
    zero_pairs: list[tuple[str, str]]
    classes: list[list[str]]

    def __str__(self) -> str:
        lines = [self.verdict]
        for a, b in self.zero_pairs:
            lines.append(f"d({a}, {b}) = 0")
        if self.verdict != "metric":
            for cls in self.classes:
                lines.append("class " + " ".join(cls))
        return "\n".join(lines)


def metric_check(state: Construction, signature: Signature, terms: Sequence[Term] | None = None,
                 include_henkin: bool = False) -> MetricReport:
    """Which distinct closed terms the theory puts at distance 0, and the resulting quotient."""
    if terms is None:
        extra = sorted(state.registry) if include_henkin else []
        terms = closed_terms(signature, extra, depth=0)
    names = [render_term(t) for t in terms]
    parent = list(range(len(terms)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    zero = []
    for i in range(len(terms)):
        for j in range(i + 1, len(terms)):
            if names[i] == names[j]:
                continue
            if state.entails(Atomic(signature.metric, (terms[i], terms[j]))):
                zero.append((names[i], names[j]))
                parent[find(j)] = find(i)
    groups: dict[int, list[str]] = {}
    for i, n in enumerate(names):
        groups.setdefault(find(i), []).append(n)
    return MetricReport("pseudo-metric" if zero else "metric", zero, list(groups.values()))
