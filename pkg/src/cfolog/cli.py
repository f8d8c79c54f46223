"""Command-line interface.

Exit status: 0 on success, 1 on a domain error (bad formula, infeasible
bound, dependent basis, ...), 2 on a usage error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import axioms as ax
from .dyadic import parse_dyadic
from .formulas import Atomic, Func, ParseError, Signature, Var, parse, render
from .henkin import EvaluatorOracle, OracleError, metric_check, run_construction, serve_oracle
from .io import FormatError, load_structure, read_sentences
from .ptm.allocation import AllocationTable, InfeasibleBound, allocate_accept, allocate_reject, accept_probability
from .semantics import atomic_diagram, elementary_diagram, value

DOMAIN_ERRORS = (ValueError, KeyError, ArithmeticError, OracleError, FileNotFoundError)


class UsageError(Exception):
    pass


# -- helpers ------------------------------------------------------------------


def _assignments(items: Sequence[str]) -> dict[str, str]:
    out = {}
    for item in items or ():
        name, sep, elem = item.partition("=")
        if not sep or not name or not elem:
            raise UsageError(f"--assign expects VAR=ELEMENT, got {item!r}")
        out[name.strip()] = elem.strip()
    return out


# -- subcommands --------------------------------------------------------------


def cmd_eval(args) -> int:
    M = load_structure(args.structure)
    phi = parse(args.formula, M.signature)
    sigma = _assignments(args.assign)
    unknown = set(sigma.values()) - set(M.universe)
    if unknown:
        raise ValueError(f"not elements of the structure: {', '.join(sorted(unknown))}")
    print(value(phi, M, sigma))
    return 0


def _prop_pool(atoms: Sequence[str]):
    return [Atomic(a, ()) for a in atoms]


def cmd_axioms_check(args) -> int:
    grid = ax.dyadic_grid(args.exponent)
    atoms = ["p", "q", "r"]
    pool = _prop_pool(atoms)
    assignments = [dict(zip(atoms, vals)) for vals in itertools.product(grid, repeat=3)]
    instances = []
    for schema in ("A1", "A2", "A3", "A4", "A5", "A6"):
        instances += ax.instantiate(schema, pool=pool)
    rows = ax.check_validity(instances, assignments=assignments)
    structures = [load_structure(p) for p in args.structure or ()]
    if structures:
        sig = structures[0].signature
        if any(M.signature != sig for M in structures):
            raise ValueError("all structures must share one signature")
        fo_pool = _first_order_pool(sig)
        terms = [Var("y")] + [Func(c, ()) for c in sorted(sig.constants)]
        fo = []
        for schema in ("A7", "A8", "A9"):
            fo += ax.instantiate(schema, sig, pool=fo_pool, terms=terms)
        for schema in ("A10", "A11", "A12"):
            fo += ax.instantiate(schema, sig)
        for schema in ("A13", "A14"):
            fo += ax.instantiate(schema, sig, grid=ax.dyadic_grid(min(args.exponent, 3)))
        rows.update(ax.check_validity(fo, structures))
    print(ax.format_report(rows))
    return 0 if all(r.sound for r in rows.values()) else 1


def _first_order_pool(sig: Signature):
    x, y = Var("x"), Var("y")
    out = []
    for r, n in sorted(sig.relations.items()):
        if r == sig.metric:
            continue
        if n == 1:
            out += [Atomic(r, (x,)), Atomic(r, (y,))]
        elif n == 2:
            out += [Atomic(r, (x, y))]
        elif n == 0:
            out.append(Atomic(r, ()))
    return out[:4] or [Atomic(sig.metric, (x, y))]


def cmd_diagram(args) -> int:
    M = load_structure(args.structure)
    fn = elementary_diagram if args.elementary else atomic_diagram
    for phi, v in fn(M, args.stage):
        print(f"{render(phi)}\t{v}")
    return 0


def cmd_trace_allocation(args) -> int:
    if args.table:
        table = AllocationTable.from_json(Path(args.table).read_text())
    else:
        table = AllocationTable()
        for stage, step in enumerate(args.step or (), start=1):
            side, k, n = _parse_step(step)
            if side == "A":
                allocate_accept(table, args.key, k, n, stage=stage)
            else:
                allocate_reject(table, args.key, k, n, stage=stage)
    for ev in table.log:
        print(ev.line())
    for key in table.keys():
        lo, hi = accept_probability(table, key)
        print(f"# {key}: P(K^A) = {lo}, 1 - P(K^R) = {hi}")
    if args.out:
        Path(args.out).write_text(table.to_json() + "\n")
    return 0


def _parse_step(text: str) -> tuple[str, int, int]:
    parts = text.split(",")
    if len(parts) != 3 or parts[0] not in ("A", "R"):
        raise UsageError(f"--step expects A,k,n or R,k,n; got {text!r}")
    try:
        return parts[0], int(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"--step expects integers, got {text!r}") from None


def cmd_build_model(args) -> int:
    M = load_structure(args.theory)
    sentences = read_sentences(args.sentences, M.signature)
    oracle = EvaluatorOracle(M)
    result = run_construction(oracle, args.stages, sentences, kappa=args.kappa,
                              witness_levels=args.witness_levels)
    print(f"{'sentence':<40} {'lo':>10} {'hi':>10} {'P(K^A)':>10} {'1-P(K^R)':>10}")
    for phi in sentences:
        lo, hi = result.model.value(phi)
        a, b = result.acceptance(phi)
        print(f"{render(phi):<40} {str(lo):>10} {str(hi):>10} {str(a):>10} {str(b):>10}")
    if args.metric:
        print(metric_check(result.state, M.signature))
    if result.budget_exhausted:
        print("budget exhausted; bounds are partial")
    text = result.trace_text()
    if args.trace:
        Path(args.trace).write_text(text)
    if args.table:
        Path(args.table).write_text(result.tables.to_json() + "\n")
    return 0


def cmd_gram_schmidt(args) -> int:
    from .spaces.hilbert import gram_schmidt, parse_vector

    basis = [parse_vector(v) for v in args.vector]
    dim = max(len(v.dense()) for v in basis)
    res = gram_schmidt(basis, width=args.width)
    for i, (v, w) in enumerate(zip(res.orthogonal, res.orthonormal), start=1):
        lo, hi = w.norm2
        print(f"v{i} = ({', '.join(map(str, v.dense(dim)))})  |v|^2 = {v.norm2()}  normalised |.|^2 in [{float(lo):.9f}, {float(hi):.9f}]")
    return 0


def cmd_fixedpoint(args) -> int:
    from .spaces.banach import fixed_point

    slope, offset = Fraction(args.slope), Fraction(args.offset)
    gamma = abs(slope) if args.gamma is None else Fraction(args.gamma)
    res = fixed_point(lambda x: slope * x + offset, gamma, Fraction(args.u0), Fraction(args.eps))
    print(res)
    return 0


def _presentation(text: str):
    from .spaces.measure import IDENTITY, bit_reversal, finite_level

    name, _, arg = text.partition(":")
    if name == "identity":
        return IDENTITY
    if name == "bitrev":
        return bit_reversal(int(arg or 3))
    if name == "level":
        return finite_level(int(arg or 3))
    raise UsageError(f"unknown presentation {text!r} (identity, bitrev:N, level:N)")


def cmd_measure_iso(args) -> int:
    from .spaces.measure import back_and_forth, parse_set

    iso = back_and_forth(
        _presentation(args.source), _presentation(args.target),
        forth=[parse_set(s) for s in args.forth or ()],
        back=[parse_set(s) for s in args.back or ()],
    )
    iso.check()
    for kind, x, y in iso.history:
        arrow = "->" if kind == "forth" else "<-"
        print(f"{kind:<5} {x} {arrow} {y}  (measure {x.measure()})")
    for a, b in zip(iso.left, iso.right):
        print(f"atom  {a}  ~  {b}")
    return 0


def cmd_odometer_orbit(args) -> int:
    from .spaces.measure import parse_set
    from .spaces.odometer import Odometer, orbit_trace

    A, x = parse_set(args.set), parse_set(args.element)
    tau = Odometer(args.level if args.level is not None else max(A.level, x.level, 1))
    for s, v in enumerate(orbit_trace(A, x, args.stages, tau)):
        print(f"{s}\t{v}")
    return 0


def cmd_bpp_demo(args) -> int:
    import math

    from .ptm.bpp import amplify, exact_majority_error, hoeffding_bound, table_machine_for
    from .ptm.machines import REJECT

    p = parse_dyadic(args.error)
    if args.trials % 2 == 0:
        raise UsageError("--trials must be odd")
    # correct answer "reject"; each trial wrongly accepts with probability p
    amp = amplify(table_machine_for({"x": p}), args.trials)
    exact = amp.error("x", REJECT)
    check = exact_majority_error(p, args.trials)
    wrong = amp.empirical_errors("x", REJECT, args.runs, seed=args.seed)
    rate = wrong / args.runs
    sigma = math.sqrt(float(exact) * (1 - float(exact)) / args.runs)
    print(f"per-trial error      {p}")
    print(f"trials               {args.trials}")
    print(f"exact majority error {exact} ({float(exact):.6g})")
    print(f"binomial check       {'ok' if exact == check else 'MISMATCH'}")
    print(f"sampled error        {wrong}/{args.runs} = {rate:.6g}  (3 sigma = {3 * sigma:.3g})")
    gamma = Fraction(1, 2) - p.to_fraction()
    if gamma > 0:
        print(f"hoeffding bound      {hoeffding_bound(gamma, args.trials):.6g}")
    return 0


def cmd_oracle_serve(args) -> int:
    M = load_structure(args.theory)
    serve_oracle(EvaluatorOracle(M), M.signature, sys.stdin, sys.stdout)
    return 0


# -- parser -------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cfolog", description="Continuous first-order logic toolkit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("eval", help="exact value of a formula in a finite structure")
    e.add_argument("--structure", required=True)
    e.add_argument("--formula", required=True)
    e.add_argument("--assign", action="append", metavar="VAR=ELEMENT")
    e.set_defaults(func=cmd_eval)

    a = sub.add_parser("axioms-check", help="validity report for the axiom schemata")
    a.add_argument("--exponent", type=int, default=2)
    a.add_argument("--structure", action="append", help="structure file for A7-A14 (repeatable)")
    a.set_defaults(func=cmd_axioms_check)

    d = sub.add_parser("diagram", help="atomic or elementary diagram up to a stage")
    d.add_argument("--structure", required=True)
    d.add_argument("--stage", type=int, default=3)
    d.add_argument("--elementary", action="store_true")
    d.set_defaults(func=cmd_diagram)

    t = sub.add_parser("trace-allocation", help="apply bound steps to a table and print the stage log")
    t.add_argument("--key", default="phi")
    t.add_argument("--step", action="append", metavar="A|R,k,n")
    t.add_argument("--table", help="print the log of an existing table file instead")
    t.add_argument("--out", help="write the resulting table as JSON")
    t.set_defaults(func=cmd_trace_allocation)

    b = sub.add_parser("build-model", help="run the model construction against a finite structure's theory")
    b.add_argument("--theory", required=True, help="structure file whose complete theory is the oracle")
    b.add_argument("--stages", type=int, required=True)
    b.add_argument("--sentences", required=True)
    b.add_argument("--trace")
    b.add_argument("--table")
    b.add_argument("--kappa", type=int, default=24)
    b.add_argument("--witness-levels", type=int, default=1)
    b.add_argument("--metric", action="store_true", help="also report the metric check")
    b.set_defaults(func=cmd_build_model)

    h = sub.add_parser("hilbert", help="rational pre-Hilbert space tools")
    hs = h.add_subparsers(dest="hcmd", required=True, parser_class=_Parser)
    g = hs.add_parser("gram-schmidt")
    g.add_argument("--vector", action="append", required=True, metavar='"(a, b, ...)"')
    g.add_argument("--width", type=int, default=20)
    g.set_defaults(func=cmd_gram_schmidt)

    f = sub.add_parser("fixedpoint", help="fixed point of x -> slope*x + offset")
    f.add_argument("--slope", required=True)
    f.add_argument("--offset", default="0")
    f.add_argument("--gamma")
    f.add_argument("--u0", required=True)
    f.add_argument("--eps", required=True)
    f.set_defaults(func=cmd_fixedpoint)

    m = sub.add_parser("measure", help="dyadic measure algebra tools")
    ms = m.add_subparsers(dest="mcmd", required=True, parser_class=_Parser)
    i = ms.add_parser("iso")
    i.add_argument("--source", default="identity")
    i.add_argument("--target", default="bitrev:3")
    i.add_argument("--forth", action="append")
    i.add_argument("--back", action="append")
    i.set_defaults(func=cmd_measure_iso)

    o = sub.add_parser("odometer", help="odometer tools")
    os_ = o.add_subparsers(dest="ocmd", required=True, parser_class=_Parser)
    ob = os_.add_parser("orbit")
    ob.add_argument("--set", required=True)
    ob.add_argument("--element", required=True)
    ob.add_argument("--stages", type=int, default=4)
    ob.add_argument("--level", type=int)
    ob.set_defaults(func=cmd_odometer_orbit)

    bp = sub.add_parser("bpp", help="amplification experiments")
    bs = bp.add_subparsers(dest="bcmd", required=True, parser_class=_Parser)
    demo = bs.add_parser("demo")
    demo.add_argument("--seed", type=int, required=True)
    demo.add_argument("--error", default="1/2^2", help="per-trial error, a dyadic")
    demo.add_argument("--trials", type=int, default=3)
    demo.add_argument("--runs", type=int, default=100_000)
    demo.set_defaults(func=cmd_bpp_demo)

    sv = sub.add_parser("oracle-serve", help="answer VALUE/ZERO requests on stdin for a structure's theory")
    sv.add_argument("--theory", required=True)
    sv.set_defaults(func=cmd_oracle_serve)
    return p


def _check_ranges(args) -> None:
    for name in ("stages", "stage", "runs"):
        v = getattr(args, name, None)
        if v is not None and v < 0:
            raise UsageError(f"--{name} must be non-negative")
    for name in ("exponent", "width", "trials"):
        v = getattr(args, name, None)
        if v is not None and v < 1:
            raise UsageError(f"--{name} must be at least 1")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _check_ranges(args)
        return args.func(args)
    except UsageError as exc:
        print(f"cfolog: usage error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (ParseError, FormatError, InfeasibleBound, json.JSONDecodeError) as exc:
        print(f"cfolog: error: {exc}", file=sys.stderr)
        return 1
    except DOMAIN_ERRORS as exc:
        print(f"cfolog: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
