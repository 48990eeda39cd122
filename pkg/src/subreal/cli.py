"""Command-line front end.

Exit codes: 0 success, 1 parse error, 2 unbound variable, 3 budget
exhausted, 4 missing modulus.  ``check`` exits 5 when it finds violations.
"""
from __future__ import annotations

import argparse
import math
import re
import sys
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from fractions import Fraction
from pathlib import Path

from . import base as B
from . import elementary as EL
from . import reference as R
from . import systems as S
from . import translations as T
from . import witnesses as W
from .names import format_rational, name_of_rational, parse_rational
from .sexpr import SexprError, read

OK, PARSE, UNBOUND, BUDGET, MODULUS, VIOLATIONS = 0, 1, 2, 3, 4, 5


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# -- argument handling -----------------------------------------------------

def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _natural(text: str) -> int:
    if not text.isdigit():
        raise argparse.ArgumentTypeError(f"expected a natural number, got {text!r}")
    return int(text)


def _format(text: str) -> tuple[str, int]:
    if text == "rational":
        return "rational", 0
    if text.startswith("decimal:") and text[8:].isdigit():
        return "decimal", int(text[8:])
    raise argparse.ArgumentTypeError("format must be rational or decimal:D")


def _common(suppress: bool) -> argparse.ArgumentParser:
    # The flags are accepted before or after the subcommand; the subcommand
    # copy suppresses defaults so it only overrides what was actually given.
    def dflt(value):
        return argparse.SUPPRESS if suppress else value

    p = argparse.ArgumentParser(add_help=False)
    prec = p.add_mutually_exclusive_group()
    prec.add_argument("--t", type=_natural, default=dflt(None), help="precision index: error below 1/(t+1)")
    prec.add_argument("--eps", type=_rational, default=dflt(None),
                      help="error bound; uses the least t with 1/(t+1) <= eps")
    p.add_argument("--budget", type=_natural, default=dflt(S.DEFAULT_BUDGET))
    p.add_argument("--seed", type=_natural, default=dflt(0))
    p.add_argument("--format", type=_format, default=dflt(("rational", 0)), dest="fmt")
    p.add_argument("--trace", action="store_true", default=dflt(False))
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common(suppress=True)
    parser = argparse.ArgumentParser(prog="subreal", description=__doc__.splitlines()[0],
                                     parents=[_common(suppress=False)])
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("eval", parents=[common], help="evaluate an expression to precision t")
    ev.add_argument("expr")
    ev.add_argument("--var", action="append", default=[], metavar="NAME=Q")

    tr = sub.add_parser("translate", parents=[common], help="translate systems and witnesses")
    tr.add_argument("direction", choices=("cond-to-tz", "tz-to-cond", "unif-to-tz", "tz-to-unif",
                                          "unif-to-cond", "normalize"))
    tr.add_argument("input", help="file, builtin:NAME or expr:TEXT")
    tr.add_argument("output")

    bd = sub.add_parser("bound", parents=[common], help="effective search bound T at a point")
    bd.add_argument("system", help="file, builtin:NAME or expr:TEXT")
    bd.add_argument("--point", type=_rational, action="append", required=True)

    ck = sub.add_parser("check", parents=[common], help="sample a TZ-style witness at a point")
    ck.add_argument("witness", help="file or builtin:NAME")
    ck.add_argument("--point", type=_rational, action="append", required=True)
    ck.add_argument("--t-max", type=_natural, default=50)
    ck.add_argument("--samples", type=_natural, default=200)
    target = ck.add_mutually_exclusive_group()
    target.add_argument("--expect", type=_rational, help="exact value at the point")
    target.add_argument("--function", choices=sorted(EL.BUILTINS),
                        help="builtin whose value at the point is the target")
    ck.add_argument("--replay", default=None, help="replay file written when violations are found")

    pb = sub.add_parser("parse-base", parents=[common], help="validate a base-function term")
    pb.add_argument("term", help="s-expression, or @FILE")
    pb.add_argument("--args", default=None, help="comma-separated naturals to evaluate at")
    return parser


def _precision(args) -> int:
    if args.eps is not None and args.t is not None:
        raise CliError(PARSE, "--t and --eps are mutually exclusive")
    if args.eps is not None:
        if args.eps <= 0:
            raise CliError(PARSE, "--eps must be positive")
        return max(math.ceil(1 / args.eps) - 1, 0)
    return 9 if args.t is None else args.t


def _render(value: Fraction, t: int, fmt) -> str:
    bound = f"1/{t + 1}"
    if fmt[0] == "rational":
        return f"{format_rational(value)} (± {bound})"
    digits = fmt[1]
    with localcontext() as ctx:
        ctx.prec = max(50, digits + len(str(abs(value.numerator))) + 10)
        q = Decimal(value.numerator) / Decimal(value.denominator)
        shown = q.quantize(Decimal(1).scaleb(-digits), rounding=ROUND_HALF_EVEN)
    exact = "" if Fraction(shown) == value else f", rounded to {digits} digits"
    return f"{shown} (± {bound}{exact})"


# -- inputs ----------------------------------------------------------------

def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(PARSE, f"cannot read {path}: {exc.strerror}") from None


def _load_any(source: str):
    if source.startswith("builtin:"):
        name = source[8:]
        if name == "identity-tz":
            return EL.identity_tz_witness()
        if name == "reciprocal-tz":
            return EL.reciprocal_tz_witness()
        try:
            canon = EL.canonical_op(name)
        except KeyError as exc:
            raise CliError(PARSE, str(exc.args[0])) from None
        if canon in EL.UNIFORM_BUILDERS:
            return EL.builtin_uniform(canon)
        return EL.builtin_system(canon)
    if source.startswith("expr:"):
        try:
            return EL.compile_expression(source[5:])
        except EL.ExpressionError as exc:
            raise CliError(PARSE, f"parse error: {exc}") from None
    text = _read_text(source)
    try:
        form = read(text)
        head = form.head() if hasattr(form, "head") else None
        if head in ("tz-conditional", "tz-uniform"):
            return W.from_form(form, text)
        return S.from_form(form, text)
    except (SexprError, B.ArityError, KeyError) as exc:
        raise CliError(PARSE, f"parse error in {source}: {exc}") from None


def _want(obj, kinds, source: str):
    if not isinstance(obj, kinds):
        names = " or ".join(k.__name__ for k in kinds)
        raise CliError(PARSE, f"{source}: expected {names}, got {type(obj).__name__}")
    return obj


def _as_conditional(obj):
    return S.uniform_to_conditional(obj) if isinstance(obj, S.UniformSystem) else obj


# -- subcommands -----------------------------------------------------------

def cmd_eval(args, out) -> int:
    t = _precision(args)
    try:
        expr = EL.parse_expression(args.expr)
    except EL.ExpressionError as exc:
        raise CliError(PARSE, f"parse error: {exc}") from None
    bindings: dict[str, Fraction] = {}
    for item in args.var:
        name, sep, value = item.partition("=")
        if not sep or not name.strip():
            raise CliError(PARSE, f"--var expects NAME=Q, got {item!r}")
        try:
            bindings[name.strip()] = parse_rational(value)
        except ValueError as exc:
            raise CliError(PARSE, str(exc)) from None
    missing = [v for v in EL.free_variables(expr) if v not in bindings]
    if missing:
        raise CliError(UNBOUND, f"unbound variable {missing[0]!r}")
    variables = list(bindings)
    names = [name_of_rational(bindings[v]) for v in variables] or [name_of_rational(0)]
    system = EL.compile_expression(expr, variables)
    try:
        if args.trace:
            for line in EL.trace_expression(expr, variables, names, t, args.budget):
                print(line, file=out)
        approx = S.eval_conditional(system, names, t, args.budget)
    except S.BudgetExhausted as exc:
        raise CliError(BUDGET, f"{exc}; expression {args.expr!r}") from None
    print(_render(approx.value, t, args.fmt), file=out)
    return OK


_DIRECTIONS = {
    "cond-to-tz": ((S.ConditionalSystem, S.UniformSystem),
                   lambda x: T.operators_to_tz_conditional(_as_conditional(x))),
    "tz-to-cond": ((W.TZConditionalWitness,), T.tz_to_operators_conditional),
    "unif-to-tz": ((S.UniformSystem,), T.operators_to_tz_uniform),
    "tz-to-unif": ((W.TZUniformWitness,), T.tz_to_operators_uniform),
    "unif-to-cond": ((S.UniformSystem,), S.uniform_to_conditional),
    "normalize": ((S.ConditionalSystem, S.UniformSystem),
                  lambda x: T.normalize_system(_as_conditional(x))),
}


def cmd_translate(args, out) -> int:
    kinds, run = _DIRECTIONS[args.direction]
    obj = _want(_load_any(args.input), kinds, args.input)
    try:
        result = run(obj)
    except T.MissingModulus as exc:
        raise CliError(MODULUS, f"missing modulus: {exc}") from None
    is_witness = isinstance(result, (W.TZConditionalWitness, W.TZUniformWitness))
    text = W.dumps(result) if is_witness else S.dumps(result)
    Path(args.output).write_text(text, encoding="utf-8")
    sidecar = Path(str(args.output) + ".provenance.json")
    sidecar.write_text(T.provenance_json(result), encoding="utf-8")
    print(f"wrote {args.output} ({type(result).__name__})", file=out)
    print(f"wrote {sidecar}", file=out)
    return OK


def cmd_bound(args, out) -> int:
    obj = _want(_load_any(args.system), (S.ConditionalSystem, S.UniformSystem), args.system)
    system = _as_conditional(obj)
    if len(args.point) != system.k:
        raise CliError(PARSE, f"system has arity {system.k} but {len(args.point)} --point values were given")
    if not system.label.startswith("K-normalized"):
        print("note: T is computed over special names; it bounds the K-normalized system "
              "over all names", file=out)
    try:
        result = T.compute_search_bound(system, args.point, args.budget)
    except S.BudgetExhausted as exc:
        raise CliError(BUDGET, str(exc)) from None
    print(f"T = {result.T}", file=out)
    print(f"depth = {result.depth}", file=out)
    print(f"branches = {result.branches}", file=out)
    return OK


_EXACT = {
    "identity": lambda x: x,
    "negate": lambda x: -x,
    "abs": abs,
    "reciprocal": lambda x: 1 / x,
    "add": lambda x, y: x + y,
    "mul": lambda x, y: x * y,
}


def _target(args, point):
    if args.expect is not None:
        return W.Target(exact=args.expect)
    if args.function is None:
        raise CliError(PARSE, "check needs --expect Q or --function NAME")
    fn = args.function
    try:
        if fn in _EXACT:
            return W.Target(exact=_EXACT[fn](*point))
        return W.Target(enclose=R.enclosure_of(fn, *point))
    except (ZeroDivisionError, ValueError, TypeError):
        raise CliError(PARSE, f"{fn} is not defined at the given point") from None


def cmd_check(args, out) -> int:
    obj = _load_any(args.witness)
    if isinstance(obj, (S.ConditionalSystem, S.UniformSystem)):
        try:
            obj = T.operators_to_tz_conditional(_as_conditional(obj))
        except T.MissingModulus as exc:
            raise CliError(MODULUS, f"missing modulus: {exc}") from None
    w = _want(obj, (W.TZConditionalWitness,), args.witness)
    if len(args.point) != w.k:
        raise CliError(PARSE, f"witness has arity {w.k} but {len(args.point)} --point values were given")
    target = _target(args, args.point)
    report = W.check_tz_conditional_at_point(w, args.point, target, args.t_max, args.samples,
                                             args.seed)
    for line in report.lines():
        print(line, file=out)
    if report.violations:
        path = args.replay or f"replay-seed{args.seed}.json"
        report.write_replay(path)
        print(f"replay written to {path}", file=out)
        return VIOLATIONS
    return OK


def cmd_parse_base(args, out) -> int:
    text = _read_text(args.term[1:]) if args.term.startswith("@") else args.term
    try:
        f = B.parse_base_function(text)
    except (SexprError, B.ArityError) as exc:
        raise CliError(PARSE, f"parse error: {exc}") from None
    print(f"arity = {f.arity}", file=out)
    print(f"term = {B.to_sexpr(f)}", file=out)
    if args.args is not None:
        try:
            values = [int(v) for v in args.args.split(",") if v.strip()]
        except ValueError:
            raise CliError(PARSE, f"--args expects naturals, got {args.args!r}") from None
        if any(v < 0 for v in values):
            raise CliError(PARSE, "--args expects naturals")
        try:
            print(f"value = {B.eval_base(f, values)}", file=out)
            print(f"majorant = {B.majorant_eval(f, values)}", file=out)
        except B.ArityError as exc:
            raise CliError(PARSE, str(exc)) from None
        except B.MissingMajorant as exc:
            raise CliError(MODULUS, str(exc)) from None
    return OK


_NEGATIVE = re.compile(r"^-\d+(/\d+|\.\d*)?$")


def _join_negative_values(argv: list[str]) -> list[str]:
    """argparse reads ``--point -3/4`` as two options; glue such values on."""
    out: list[str] = []
    for tok in argv:
        if out and _NEGATIVE.match(tok) and out[-1].startswith("--") and "=" not in out[-1]:
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


COMMANDS = {"eval": cmd_eval, "translate": cmd_translate, "bound": cmd_bound,
            "check": cmd_check, "parse-base": cmd_parse_base}


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(_join_negative_values(list(sys.argv[1:] if argv is None else argv)))
    except SystemExit as exc:
        return PARSE if exc.code else OK
    try:
        return COMMANDS[args.command](args, out)
    except CliError as exc:
        print(f"error: {exc}", file=err)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
