"""Reference implementations used as oracles by the tests.

Nothing here calls into the library's evaluator or arithmetic: values are
plain :class:`fractions.Fraction` and formulas are walked by node type.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from cfolog.dyadic import Dyadic
from cfolog.formulas import Atomic, Func, Half, Neg, Signature, Sup, TruncSub, Var
from cfolog.semantics import FiniteStructure


def frac(d) -> Fraction:
    return Fraction(d.numerator, 2 ** d.exponent)


def literal_fraction(symbol: str) -> Fraction | None:
    if not symbol[:1].isdigit():
        return None
    num, _, rest = symbol.partition("/")
    if not rest:
        return Fraction(int(num))
    base, _, exp = rest.partition("^")
    assert base == "2"
    return Fraction(int(num), 2 ** int(exp))


def naive_term(t, env, M):
    if isinstance(t, Var):
        return env[t.name]
    args = tuple(naive_term(a, env, M) for a in t.args)
    return M.functions[t.symbol][args]


def naive_value(phi, M, env=None) -> Fraction:
    """Textbook recursion over the five node types, exact over Fractions."""
    env = dict(env or {})
    if isinstance(phi, Atomic):
        lit = literal_fraction(phi.symbol) if not phi.args else None
        if lit is not None:
            return lit
        args = tuple(naive_term(a, env, M) for a in phi.args)
        return frac(M.relations[phi.symbol][args])
    if isinstance(phi, TruncSub):
        return max(naive_value(phi.left, M, env) - naive_value(phi.right, M, env), Fraction(0))
    if isinstance(phi, Neg):
        return 1 - naive_value(phi.body, M, env)
    if isinstance(phi, Half):
        return naive_value(phi.body, M, env) / 2
    if isinstance(phi, Sup):
        vals = []
        for a in M.universe:
            env[phi.var] = a
            vals.append(naive_value(phi.body, M, env))
        return max(vals)
    raise TypeError(phi)


SIG = Signature({"P": 1, "R": 2}, {"f": 1, "c": 0})
VARS = ("x", "y")


def random_term(rng, scope, depth=2):
    choices = ["c"] + list(scope)
    if depth > 0:
        choices.append("f")
    pick = choices[int(rng.integers(len(choices)))]
    if pick == "c":
        return Func("c", ())
    if pick == "f":
        return Func("f", (random_term(rng, scope, depth - 1),))
    return Var(pick)


def random_formula(rng, depth, scope=(), exponent=4):
    """Random formula of depth at most ``depth`` whose free variables lie in ``scope``."""
    kind = int(rng.integers(7 if depth > 0 else 3))
    if kind == 0:
        return Atomic(str(Dyadic(int(rng.integers(2 ** exponent + 1)), exponent)), ())
    if kind == 1:
        return Atomic("P", (random_term(rng, scope),))
    if kind == 2:
        return Atomic(rng.choice(["R", "d"]).item(), (random_term(rng, scope), random_term(rng, scope)))
    if kind == 3:
        return TruncSub(random_formula(rng, depth - 1, scope, exponent), random_formula(rng, depth - 1, scope, exponent))
    if kind == 4:
        return Neg(random_formula(rng, depth - 1, scope, exponent))
    if kind == 5:
        return Half(random_formula(rng, depth - 1, scope, exponent))
    v = VARS[int(rng.integers(len(VARS)))]
    return Sup(v, random_formula(rng, depth - 1, tuple(sorted(set(scope) | {v})), exponent))


def random_pseudometric(rng, universe, exponent):
    """Distances from a random 1-dimensional embedding, so the triangle law holds."""
    top = 2 ** exponent
    pos = {a: int(rng.integers(top + 1)) for a in universe}
    return {(a, b): Dyadic(abs(pos[a] - pos[b]), exponent) for a in universe for b in universe}


def random_structure(rng, size, exponent, sig=SIG):
    universe = list(range(size))
    top = 2 ** exponent
    functions = {
        f: {args: int(rng.integers(size)) for args in itertools.product(universe, repeat=n)}
        for f, n in sig.functions.items()
    }
    relations = {
        r: {args: Dyadic(int(rng.integers(top + 1)), exponent) for args in itertools.product(universe, repeat=n)}
        for r, n in sig.relations.items()
        if r != sig.metric
    }
    relations[sig.metric] = random_pseudometric(rng, universe, exponent)
    return FiniteStructure(sig, universe, functions, relations)


def rng(seed):
    return np.random.default_rng(seed)


SENTENCE_SUITE = [
    "P(a)", "P(b)", "P(c)", "R(a, b)", "R(b, a)", "d(a, b)", "~P(c)", "1/2 P(b)",
    "P(a) -. P(c)", "sup x. P(x)", "inf x. P(x)", "sup x. R(x, a)", "sup x. sup y. R(x, y)",
    "sup x. (P(x) -. P(a))", "inf x. sup y. R(x, y)", "|P(a) - P(b)|", "P(a) /\\ P(b)",
    "sup x. (1/2 P(x) \\/ R(a, x))", "inf x. d(x, a)", "sup x. (R(x, b) -. P(x))",
]


def rank(rows) -> int:
    """Rank of a list of Fraction rows by Gaussian elimination."""
    m = [list(r) for r in rows]
    if not m:
        return 0
    rk = 0
    for col in range(len(m[0])):
        piv = next((i for i in range(rk, len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[rk], m[piv] = m[piv], m[rk]
        for i in range(len(m)):
            if i != rk and m[i][col] != 0:
                f = m[i][col] / m[rk][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[rk])]
        rk += 1
    return rk


def random_basis_rows(gen, dim):
    """``dim`` linearly independent rows of small rationals."""
    while True:
        rows = [[Fraction(int(gen.integers(-5, 6)), int(gen.integers(1, 5))) for _ in range(dim)] for _ in range(dim)]
        if rank(rows) == dim:
            return rows


def span_residual(target, vecs):
    """``target`` minus its projection on the mutually orthogonal ``vecs``; zero iff in their span."""
    residual = target
    for v in vecs:
        residual = residual - v * (target.dot(v) / v.norm2())
    return residual
