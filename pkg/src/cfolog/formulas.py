"""Signatures, terms and formulas of continuous first-order logic.

Formulas are built from five primitives: atomic formulas, truncated
subtraction ``-.``, negation ``~``, halving ``1/2`` and ``sup``.  ``inf``,
``/\\`` (min), ``\\/`` (max) and ``|a - b|`` are expanded into primitives at
construction time, so every consumer only ever sees the five node types.

Dyadic constants are 0-ary relation symbols whose name is the literal itself
(``Atomic("3/2^2", ())``); :func:`literal` builds them and
:func:`literal_value` recognises them.

Concrete ASCII grammar (binders extend as far right as possible)::

    formula  := disj
    disj     := conj ('\\/' conj)*
    conj     := diff ('/\\' diff)*
    diff     := unary ('-.' unary)*
    unary    := '~' unary | '1/2' unary | ('sup'|'inf') VAR '.' formula
              | '|' formula '-' formula '|' | '(' formula ')' | atom
    atom     := NAME ['(' term (',' term)* ')'] | DYADIC
    term     := NAME ['(' term (',' term)* ')']
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Mapping, Sequence

from .dyadic import ONE, Dyadic, parse_dyadic

__all__ = [
    "Modulus",
    "Signature",
    "Var",
    "Func",
    "Term",
    "Atomic",
    "TruncSub",
    "Neg",
    "Half",
    "Sup",
    "Formula",
    "ParseError",
    "CaptureViolation",
    "literal",
    "literal_value",
    "conj",
    "disj",
    "inf",
    "abs_diff",
    "max_all",
    "derived",
    "parse",
    "parse_term",
    "render",
    "render_term",
    "free_vars",
    "term_vars",
    "bound_vars",
    "constants",
    "substitute",
    "replace_constants",
    "is_sentence",
    "quantifier_free",
    "subformulas",
    "depth",
    "godel",
    "from_godel",
    "sentence_stream",
    "enumerate_sentences",
]


# --------------------------------------------------------------------------
# signatures
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Modulus:
    """Dyadic staircase for a modulus of uniform continuity.

    ``steps`` is a tuple of ``(eps, delta)`` breakpoints sorted by ``eps``;
    ``self(eps)`` is the ``delta`` of the smallest breakpoint ``eps' >= eps``.
    The last breakpoint must be ``eps = 1`` so the function is total on (0, 1].
    """

    steps: tuple[tuple[Dyadic, Dyadic], ...]

    def __post_init__(self):
        steps = tuple(sorted(self.steps, key=lambda s: s[0]))
        if not steps:
            raise ValueError("modulus needs at least one breakpoint")
        for eps, delta in steps:
            if eps.numerator == 0 or delta.numerator == 0:
                raise ValueError("modulus breakpoints must lie in (0, 1]")
        if steps[-1][0] != ONE:
            raise ValueError("largest modulus breakpoint must be eps = 1")
        if len({e for e, _ in steps}) != len(steps):
            raise ValueError("duplicate modulus breakpoint")
        object.__setattr__(self, "steps", steps)

    def __call__(self, eps: Dyadic) -> Dyadic:
        if eps.numerator == 0 or eps > ONE:
            raise ValueError("modulus is defined on (0, 1]")
        for e, delta in self.steps:
            if e >= eps:
                return delta
        raise AssertionError("unreachable: last breakpoint is 1")

    @classmethod
    def constant(cls, delta: Dyadic) -> "Modulus":
        return cls(((ONE, delta),))


@dataclass(frozen=True)
class Signature:
    """Relation and function symbols with arities, moduli and the metric ``d``."""

    relations: Mapping[str, int]
    functions: Mapping[str, int] = field(default_factory=dict)
    moduli: Mapping[tuple[str, int], Modulus] = field(default_factory=dict)
    metric: str = "d"

    def __post_init__(self):
        rel = dict(self.relations)
        fun = dict(self.functions)
        rel.setdefault(self.metric, 2)
        if rel[self.metric] != 2:
            raise ValueError("the metric symbol must be binary")
        clash = set(rel) & set(fun)
        if clash:
            raise ValueError(f"symbols used as both relation and function: {sorted(clash)}")
        for name in list(rel) + list(fun):
            if not _NAME_RE.fullmatch(name) or name in _KEYWORDS:
                raise ValueError(f"bad symbol name {name!r}")
        moduli = dict(self.moduli)
        for sym, arity in itertools.chain(rel.items(), fun.items()):
            for i in range(arity):
                # a missing modulus means "no continuity promise beyond the trivial one"
                moduli.setdefault((sym, i), Modulus.constant(Dyadic(1, 64)))
        object.__setattr__(self, "relations", rel)
        object.__setattr__(self, "functions", fun)
        object.__setattr__(self, "moduli", moduli)

    def __hash__(self):
        return hash((tuple(sorted(self.relations.items())), tuple(sorted(self.functions.items()))))

    @property
    def constants(self) -> list[str]:
        return [f for f, n in self.functions.items() if n == 0]

    def arity(self, symbol: str) -> int:
        if symbol in self.relations:
            return self.relations[symbol]
        return self.functions[symbol]

    def with_constants(self, names: Sequence[str]) -> "Signature":
        fun = dict(self.functions)
        for n in names:
            if n in self.relations or fun.get(n, 0) != 0:
                raise ValueError(f"constant {n!r} clashes with the signature")
            fun[n] = 0
        return Signature(self.relations, fun, self.moduli, self.metric)


# --------------------------------------------------------------------------
# terms and formulas
# --------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Var:
    name: str


@dataclass(frozen=True, slots=True)
class Func:
    symbol: str
    args: tuple = ()


Term = Var | Func


@dataclass(frozen=True, slots=True)
class Atomic:
    symbol: str
    args: tuple = ()


@dataclass(frozen=True, slots=True)
class TruncSub:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Neg:
    body: "Formula"


@dataclass(frozen=True, slots=True)
class Half:
    body: "Formula"


@dataclass(frozen=True, slots=True)
class Sup:
    var: str
    body: "Formula"


Formula = Atomic | TruncSub | Neg | Half | Sup


class ParseError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class CaptureViolation(ValueError):
    """A variable of the substituted term would be captured by a quantifier."""


def literal(value: Dyadic) -> Atomic:
    return Atomic(str(value), ())


@lru_cache(maxsize=4096)
def _literal_of(symbol: str) -> Dyadic | None:
    if symbol[:1].isdigit():
        return parse_dyadic(symbol)
    return None


def literal_value(phi) -> Dyadic | None:
    """Value of a dyadic-literal atom, or ``None`` for anything else."""
    if type(phi) is Atomic and not phi.args:
        return _literal_of(phi.symbol)
    return None


# derived connectives ------------------------------------------------------


def conj(a: Formula, b: Formula) -> Formula:
    """``a /\\ b := a -. (a -. b)``, value ``min(a, b)``."""
    return TruncSub(a, TruncSub(a, b))


def disj(a: Formula, b: Formula) -> Formula:
    """``a \\/ b := ~(~a /\\ ~b)``, value ``max(a, b)``."""
    return Neg(conj(Neg(a), Neg(b)))


def inf(var: str, body: Formula) -> Formula:
    return Neg(Sup(var, Neg(body)))


def abs_diff(a: Formula, b: Formula) -> Formula:
    return disj(TruncSub(a, b), TruncSub(b, a))


def max_all(items: Sequence[Formula]) -> Formula:
    """Maximum of ``items`` with each accumulated operand appearing once.

    ``max(acc, e) = ~(~e -. (acc -. e))``, which keeps the expansion linear in
    ``len(items)`` where nesting :func:`disj` would double it at every step.
    """
    if not items:
        return literal(Dyadic(0))
    acc = items[0]
    for e in items[1:]:
        acc = Neg(TruncSub(Neg(e), TruncSub(acc, e)))
    return acc


_DERIVED = {"and": conj, "or": disj, "absdiff": abs_diff}


def derived(phi: Formula, psi: Formula, connective: str) -> Formula:
    try:
        return _DERIVED[connective](phi, psi)
    except KeyError:
        raise ValueError(f"unknown connective {connective!r}") from None


# --------------------------------------------------------------------------
# rendering
# --------------------------------------------------------------------------


def render_term(t: Term) -> str:
    if type(t) is Var:
        return t.name
    if not t.args:
        return t.symbol
    return f"{t.symbol}({', '.join(render_term(a) for a in t.args)})"


def _wrap(phi: Formula) -> str:
    s = render(phi)
    if type(phi) in (TruncSub, Sup):
        return f"({s})"
    return s


def render(phi: Formula) -> str:
    """ASCII rendering that :func:`parse` reads back to the same tree."""
    tp = type(phi)
    if tp is Atomic:
        if not phi.args:
            return phi.symbol
        return f"{phi.symbol}({', '.join(render_term(a) for a in phi.args)})"
    if tp is TruncSub:
        return f"{_wrap(phi.left)} -. {_wrap(phi.right)}"
    if tp is Neg:
        return f"~{_wrap(phi.body)}"
    if tp is Half:
        return f"1/2 {_wrap(phi.body)}"
    if tp is Sup:
        return f"sup {phi.var}. {render(phi.body)}"
    raise TypeError(f"not a formula: {phi!r}")


# --------------------------------------------------------------------------
# parsing
# --------------------------------------------------------------------------

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")
_KEYWORDS = {"sup", "inf"}
_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<dyadic>\d+\s*/\s*2\s*\^\s*\d+)
  | (?P<half>1\s*/\s*2)
  | (?P<num>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op>-\.|/\\|\\/|[~().,|\-])
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), pos))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, signature: Signature | None):
        self.toks = _tokenize(text)
        self.i = 0
        self.sig = signature
        self.text = text

    def peek(self, k: int = 0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, pos = self.peek()
        if text != value or kind == "eof":
            found = "end of input" if kind == "eof" else repr(text)
            raise ParseError(f"expected {value!r}, found {found}", pos)
        return self.take()

    def formula(self) -> Formula:
        left = self.conj()
        while self.peek()[1] == "\\/":
            self.take()
            left = disj(left, self.conj())
        return left

    def conj(self) -> Formula:
        left = self.diff()
        while self.peek()[1] == "/\\":
            self.take()
            left = conj(left, self.diff())
        return left

    def diff(self) -> Formula:
        left = self.unary()
        while self.peek()[1] == "-.":
            self.take()
            left = TruncSub(left, self.unary())
        return left

    def unary(self) -> Formula:
        kind, text, pos = self.peek()
        if text == "~":
            self.take()
            return Neg(self.unary())
        if kind == "half":
            self.take()
            return Half(self.unary())
        if kind == "name" and text in _KEYWORDS:
            self.take()
            vk, var, vpos = self.take()
            if vk != "name" or var in _KEYWORDS:
                raise ParseError("expected a variable after quantifier", vpos)
            self.expect(".")
            body = self.formula()
            return Sup(var, body) if text == "sup" else inf(var, body)
        if text == "|":
            self.take()
            a = self.formula()
            self.expect("-")
            b = self.formula()
            self.expect("|")
            return abs_diff(a, b)
        if text == "(":
            self.take()
            inner = self.formula()
            self.expect(")")
            return inner
        if kind in ("dyadic", "num"):
            self.take()
            try:
                return literal(parse_dyadic(text))
            except ValueError as exc:
                raise ParseError(str(exc), pos) from None
        if kind == "name":
            self.take()
            if self.sig is not None and text not in self.sig.relations:
                raise ParseError(f"unknown relation symbol {text!r}", pos)
            args = self.arglist() if self.peek()[1] == "(" else ()
            self._check_arity(text, len(args), pos, relation=True)
            return Atomic(text, args)
        found = "end of input" if kind == "eof" else repr(text)
        raise ParseError(f"expected a formula, found {found}", pos)

    def arglist(self) -> tuple:
        self.expect("(")
        args = [self.term()]
        while self.peek()[1] == ",":
            self.take()
            args.append(self.term())
        self.expect(")")
        return tuple(args)

    def term(self) -> Term:
        kind, text, pos = self.take()
        if kind != "name" or text in _KEYWORDS:
            found = "end of input" if kind == "eof" else repr(text)
            raise ParseError(f"expected a term, found {found}", pos)
        if self.peek()[1] == "(":
            args = self.arglist()
            self._check_arity(text, len(args), pos, relation=False)
            return Func(text, args)
        if self.sig is not None and self.sig.functions.get(text) == 0:
            return Func(text, ())
        return Var(text)

    def _check_arity(self, sym: str, n: int, pos: int, relation: bool):
        if self.sig is None:
            return
        table = self.sig.relations if relation else self.sig.functions
        if sym not in table:
            raise ParseError(f"unknown function symbol {sym!r}", pos)
        if table[sym] != n:
            raise ParseError(f"{sym!r} expects {table[sym]} arguments, got {n}", pos)


def parse(text: str, signature: Signature | None = None) -> Formula:
    """Parse ``text``; with a signature, bare names of 0-ary functions become constants."""
    p = _Parser(text, signature)
    phi = p.formula()
    kind, tok, pos = p.peek()
    if kind != "eof":
        raise ParseError(f"unexpected {tok!r}", pos)
    return phi


def parse_term(text: str, signature: Signature | None = None) -> Term:
    p = _Parser(text, signature)
    t = p.term()
    kind, tok, pos = p.peek()
    if kind != "eof":
        raise ParseError(f"unexpected {tok!r}", pos)
    return t


# --------------------------------------------------------------------------
# variables, substitution
# --------------------------------------------------------------------------


def term_vars(t: Term) -> frozenset[str]:
    if type(t) is Var:
        return frozenset((t.name,))
    out = frozenset()
    for a in t.args:
        out |= term_vars(a)
    return out


def _term_consts(t: Term) -> frozenset[str]:
    if type(t) is Var:
        return frozenset()
    out = frozenset((t.symbol,)) if not t.args else frozenset()
    for a in t.args:
        out |= _term_consts(a)
    return out


@lru_cache(maxsize=65536)
def free_vars(phi: Formula) -> frozenset[str]:
    tp = type(phi)
    if tp is Atomic:
        out = frozenset()
        for a in phi.args:
            out |= term_vars(a)
        return out
    if tp is TruncSub:
        return free_vars(phi.left) | free_vars(phi.right)
    if tp is Sup:
        return free_vars(phi.body) - {phi.var}
    return free_vars(phi.body)


def bound_vars(phi: Formula) -> frozenset[str]:
    tp = type(phi)
    if tp is Atomic:
        return frozenset()
    if tp is TruncSub:
        return bound_vars(phi.left) | bound_vars(phi.right)
    if tp is Sup:
        return bound_vars(phi.body) | {phi.var}
    return bound_vars(phi.body)


@lru_cache(maxsize=65536)
def constants(phi: Formula) -> frozenset[str]:
    """Names of 0-ary function symbols occurring in ``phi``."""
    tp = type(phi)
    if tp is Atomic:
        out = frozenset()
        for a in phi.args:
            out |= _term_consts(a)
        return out
    if tp is TruncSub:
        return constants(phi.left) | constants(phi.right)
    return constants(phi.body)


def is_sentence(phi: Formula) -> bool:
    return not free_vars(phi)


def quantifier_free(phi: Formula) -> bool:
    tp = type(phi)
    if tp is Atomic:
        return True
    if tp is Sup:
        return False
    if tp is TruncSub:
        return quantifier_free(phi.left) and quantifier_free(phi.right)
    return quantifier_free(phi.body)


def subformulas(phi: Formula) -> Iterator[Formula]:
    yield phi
    tp = type(phi)
    if tp is TruncSub:
        yield from subformulas(phi.left)
        yield from subformulas(phi.right)
    elif tp is not Atomic:
        yield from subformulas(phi.body)


def depth(phi: Formula) -> int:
    tp = type(phi)
    if tp is Atomic:
        return 0
    if tp is TruncSub:
        return 1 + max(depth(phi.left), depth(phi.right))
    return 1 + depth(phi.body)


def _subst_term(t: Term, mapping: Mapping[str, Term]) -> Term:
    if type(t) is Var:
        return mapping.get(t.name, t)
    if not t.args:
        return t
    return Func(t.symbol, tuple(_subst_term(a, mapping) for a in t.args))


def substitute(phi: Formula, t: Term, x: str) -> Formula:
    """``phi[t/x]``: replace free occurrences of ``x`` by ``t``.

    Raises :class:`CaptureViolation` if a free occurrence of ``x`` sits under
    a quantifier binding a variable of ``t``.  No renaming is attempted.
    """
    tv = term_vars(t)

    def go(f: Formula, bound: frozenset[str]) -> Formula:
        if x not in free_vars(f):
            return f
        tp = type(f)
        if tp is Atomic:
            hit = bound & tv
            if hit:
                raise CaptureViolation(
                    f"substituting {render_term(t)} for {x} captures {sorted(hit)}"
                )
            return Atomic(f.symbol, tuple(_subst_term(a, {x: t}) for a in f.args))
        if tp is TruncSub:
            return TruncSub(go(f.left, bound), go(f.right, bound))
        if tp is Neg:
            return Neg(go(f.body, bound))
        if tp is Half:
            return Half(go(f.body, bound))
        return Sup(f.var, go(f.body, bound | {f.var}))

    return go(phi, frozenset())


def replace_constants(phi: Formula, mapping: Mapping[str, str]) -> Formula:
    """Replace the named constants by variables (``mapping``: constant -> variable)."""
    if not mapping:
        return phi

    def term(t: Term) -> Term:
        if type(t) is Var:
            return t
        if not t.args:
            return Var(mapping[t.symbol]) if t.symbol in mapping else t
        return Func(t.symbol, tuple(term(a) for a in t.args))

    def go(f: Formula) -> Formula:
        tp = type(f)
        if tp is Atomic:
            return Atomic(f.symbol, tuple(term(a) for a in f.args)) if f.args else f
        if tp is TruncSub:
            return TruncSub(go(f.left), go(f.right))
        if tp is Neg:
            return Neg(go(f.body))
        if tp is Half:
            return Half(go(f.body))
        if f.var in mapping.values():
            raise CaptureViolation(f"variable {f.var} is already bound")
        return Sup(f.var, go(f.body))

    return go(phi)


# --------------------------------------------------------------------------
# Goedel numbering and enumeration
# --------------------------------------------------------------------------


def godel(phi: Formula) -> int:
    """Natural-number code of ``phi``: its rendering read as a big-endian byte string."""
    return int.from_bytes(b"\x01" + render(phi).encode("utf-8"), "big")


def from_godel(code: int, signature: Signature | None = None) -> Formula:
    raw = code.to_bytes((code.bit_length() + 7) // 8, "big")
    if not raw or raw[0] != 1:
        raise ValueError(f"{code} is not a formula code")
    return parse(raw[1:].decode("utf-8"), signature)


def _compositions(n: int, k: int) -> Iterator[tuple[int, ...]]:
    if k == 0:
        if n == 0:
            yield ()
        return
    for first in range(1, n - k + 2):
        for rest in _compositions(n - first, k - 1):
            yield (first,) + rest


class _Enumerator:
    """Size-graded generation of terms and formulas over a fixed signature."""

    def __init__(self, sig: Signature, quantifier_free: bool):
        self.sig = sig
        self.qf = quantifier_free
        self.rels = sorted(sig.relations.items())
        self.funs = sorted((f, n) for f, n in sig.functions.items() if n > 0)
        self.consts = sorted(sig.constants)
        self._terms: dict = {}
        self._forms: dict = {}

    def terms(self, size: int, scope: tuple[str, ...]) -> tuple:
        key = (size, scope)
        if key not in self._terms:
            out: list = []
            if size == 1:
                out.extend(Var(v) for v in scope)
                out.extend(Func(c, ()) for c in self.consts)
            else:
                for f, n in self.funs:
                    for parts in _compositions(size - 1, n):
                        pools = [self.terms(p, scope) for p in parts]
                        out.extend(Func(f, args) for args in itertools.product(*pools))
            self._terms[key] = tuple(out)
        return self._terms[key]

    def formulas(self, size: int, scope: tuple[str, ...]) -> tuple:
        key = (size, scope)
        if key in self._forms:
            return self._forms[key]
        out: list = []
        # dyadic literals k/2^n occupy size n + 1
        n = size - 1
        if n == 0:
            out.extend(literal(Dyadic(k)) for k in (0, 1))
        else:
            out.extend(literal(Dyadic(k, n)) for k in range(1, 1 << n, 2))
        for p, arity in self.rels:
            if arity == 0:
                if size == 1:
                    out.append(Atomic(p, ()))
                continue
            for parts in _compositions(size - 1, arity):
                pools = [self.terms(q, scope) for q in parts]
                out.extend(Atomic(p, args) for args in itertools.product(*pools))
        if size >= 2:
            for body in self.formulas(size - 1, scope):
                out.append(Neg(body))
            for body in self.formulas(size - 1, scope):
                out.append(Half(body))
            if not self.qf:
                var = f"x{len(scope)}"
                for body in self.formulas(size - 1, scope + (var,)):
                    out.append(Sup(var, body))
        if size >= 3:
            for a in range(1, size - 1):
                left = self.formulas(a, scope)
                right = self.formulas(size - 1 - a, scope)
                out.extend(TruncSub(l, r) for l in left for r in right)
        self._forms[key] = tuple(out)
        return self._forms[key]


def sentence_stream(signature: Signature, quantifier_free: bool = False) -> Iterator[Formula]:
    """Every sentence over ``signature`` (bound variables named ``x0, x1, ...``), by size."""
    gen = _Enumerator(signature, quantifier_free)
    for size in itertools.count(1):
        yield from gen.formulas(size, ())


def enumerate_sentences(signature: Signature, stage: int, quantifier_free: bool = False) -> list[Formula]:
    """The first ``stage`` sentences of :func:`sentence_stream`; prefix-monotone in ``stage``."""
    if stage < 0:
        raise ValueError("stage must be non-negative")
    return list(itertools.islice(sentence_stream(signature, quantifier_free), stage))
