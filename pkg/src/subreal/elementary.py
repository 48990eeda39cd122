"""Builtin computing systems for the elementary functions and the
expression layer composing them.

Output convention for every builtin: H is the identity operator, so the
value at precision t is m/(t+1) with m = F - G.  Each kernel produces the
nearest such m to an estimate of the value whose error is well below
1/(2(t+1)); arguments are read at indices chosen so the propagated
argument error stays below the remaining slack.

Index and parameter choices (n is the read index, s the parameter):

============  ==========  ====================================  ======================
builtin       kind        accept s iff                          read at n + 1 =
============  ==========  ====================================  ======================
identity      uniform                                           t + 1
negate        uniform                                           t + 1
abs           uniform                                           2(t + 1)
add           uniform                                           4(t + 1)
mul           uniform                                           2(t + 1)(B1 + B2 + 1)
sin, cos      uniform                                           4(t + 1)
reciprocal    cond.       |f(s) - g(s)|(s+1) >= 2(h(s)+1)       4(s + 1)^2 (t + 1)
ln            cond.       (f(s) -. g(s))(s+1) >= 2(h(s)+1)      8(s + 1)(t + 1)
exp           cond.       3^C <= s + 1                          12(s + 1)(t + 1)
sqrt          cond.       4(s+1) g(4s+3) <= 4(s+1) f(4s+3)       16 (t + 1)^2
                          + h(4s+3)
============  ==========  ====================================  ======================

B_i = floor(max(f_i(0), g_i(0)) / (h_i(0)+1)) + 2 bounds |xi_i|, and
C = floor((f(0) -. g(0)) / (h(0)+1)) + 2 exceeds xi.
"""
from __future__ import annotations

import math
import re
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import isqrt
from typing import Sequence

import mpmath

from . import base as B
from . import operators as O
from .base import Native, register_family, register_native
from .names import RealName, monus, round_half_up
from .operators import Apply, Base, OperatorTerm, X
from .systems import (ConditionalSystem, UniformSystem, compose_conditional,
                      find_parameter, uniform_to_conditional)
from .witnesses import TZConditionalWitness


# -- small term helpers ----------------------------------------------------

def affine(a: int, b: int) -> B.BaseFunction:
    """x -> a x + b as a term."""
    f = B.Subst(B.MUL, (B.Const(a), B.Proj(1, 1))) if a != 1 else B.Proj(1, 1)
    for _ in range(b):
        f = B.succ_of(f)
    return f


_ZERO1 = B.zero(1)


def _zero_node(arg: O.OpNode = X) -> O.OpNode:
    return Base(_ZERO1, (arg,))


def _reads(k: int, at: O.OpNode, first: int = 1) -> tuple:
    return tuple(Apply(j, at) for j in range(first, first + 3 * k))


def _value(p: int, q: int, r: int) -> Fraction:
    return Fraction(p - q, r + 1)


# -- rigorous rounding of transcendental values ----------------------------

_IV = mpmath.iv


def _iv_rational(x: Fraction):
    return _IV.mpf(x.numerator) / _IV.mpf(x.denominator)


def _floor_raw(raw) -> int | None:
    """floor of a raw mpf tuple (sign, man, exp, bc); None for inf/nan."""
    if raw in (mpmath.libmp.finf, mpmath.libmp.fninf, mpmath.libmp.fnan):
        return None
    sign, man, exp, _ = raw
    man = -int(man) if sign else int(man)
    return man << exp if exp >= 0 else man >> -exp


_IV_LOCK = threading.Lock()


def _round_scaled(fn, x: Fraction, scale: int) -> int:
    """round_half_up(scale * fn(x)) using interval enclosures.

    The precision grows until the enclosure of scale * fn(x) + 1/2 lies
    between two consecutive integers.  Past a cap the midpoint is used,
    which is still within 1/2 + 2**-cap of the true value.
    """
    prec = 64 + scale.bit_length() + max(x.numerator.bit_length(), x.denominator.bit_length())
    cap = 1 << 14
    with _IV_LOCK:
        saved = _IV.prec
        try:
            while True:
                _IV.prec = prec
                y = fn(_iv_rational(x)) * scale + _IV.mpf(0.5)
                lo, hi = (_floor_raw(v) for v in y._mpi_)
                if lo is not None and lo == hi:
                    return lo
                if prec >= cap:
                    return _floor_raw(y.mid._mpi_[0])
                prec *= 2
        finally:
            _IV.prec = saved


def _split(m: int) -> tuple[int, int]:
    return (m, 0) if m >= 0 else (0, -m)


def _signed_pair(name: str, arity: int, kernel, major, provenance: str):
    """Register natives name.pos and name.neg from a signed kernel."""
    cached = lru_cache(maxsize=8192)(kernel)
    pos = register_native(Native(f"{name}.pos", arity, lambda *a: _split(cached(*a))[0],
                                 major, provenance + " (positive part)"))
    neg = register_native(Native(f"{name}.neg", arity, lambda *a: _split(cached(*a))[1],
                                 major, provenance + " (negative part)"))
    return pos, neg


def _gate(name: str, arity: int, accept, provenance: str) -> Native:
    return register_native(Native(name, arity, lambda *a: 0 if accept(*a) else 1,
                                  lambda *a: 1, provenance))


# -- kernels ---------------------------------------------------------------

def _abs_kernel(p, q, r, t):
    return round_half_up(abs(_value(p, q, r)) * (t + 1))


def _add_kernel(p1, q1, r1, p2, q2, r2, t):
    return round_half_up((_value(p1, q1, r1) + _value(p2, q2, r2)) * (t + 1))


def _mul_kernel(p1, q1, r1, p2, q2, r2, t):
    return round_half_up(_value(p1, q1, r1) * _value(p2, q2, r2) * (t + 1))


def _mul_index(p1, q1, r1, p2, q2, r2, t):
    b1 = max(p1, q1) // (r1 + 1) + 2
    b2 = max(p2, q2) // (r2 + 1) + 2
    return 2 * (t + 1) * (b1 + b2 + 1) - 1


def _recip_kernel(p, q, r, t):
    if p == q:
        return 0
    return round_half_up(Fraction((t + 1) * (r + 1), p - q))


def _recip_accept(p, q, r, s):
    return abs(p - q) * (s + 1) >= 2 * (r + 1)


def _ln_accept(p, q, r, s):
    return monus(p, q) * (s + 1) >= 2 * (r + 1)


def _ln_kernel(p, q, r, t):
    if p <= q:
        return 0
    return _round_scaled(_IV.log, _value(p, q, r), t + 1)


def _exp_accept(p0, q0, r0, s):
    c = monus(p0, q0) // (r0 + 1) + 2
    power = 1
    for _ in range(c):
        power *= 3
        if power > s + 1:
            return False
    return True


def _exp_kernel(p, q, r, s, t):
    clamp = 3 * (s + 1) * (t + 1)
    a = _value(p, q, r)
    if a > 3 * (s + 1):
        return clamp
    return min(_round_scaled(_IV.exp, a, t + 1), clamp)


def _sqrt_accept(p, q, r, s):
    return 4 * (s + 1) * q <= 4 * (s + 1) * p + r


def _sqrt_kernel(p, q, r, t):
    if p <= q:
        return 0
    scaled = (p - q) * (t + 1) ** 2          # X * (r + 1) with X = (t+1)^2 a
    return (isqrt(4 * scaled // (r + 1)) + 1) // 2


def _sin_kernel(p, q, r, t):
    return _round_scaled(_IV.sin, _value(p, q, r), t + 1)


def _cos_kernel(p, q, r, t):
    return _round_scaled(_IV.cos, _value(p, q, r), t + 1)


ABS = _signed_pair("abs", 4, _abs_kernel, lambda p, q, r, t: (t + 1) * (p + q) + 1,
                   "nearest m to (t+1)|a|")
ADD = _signed_pair("add", 7, _add_kernel,
                   lambda p1, q1, r1, p2, q2, r2, t: (t + 1) * (p1 + q1 + p2 + q2) + 1,
                   "nearest m to (t+1)(a1 + a2)")
MUL = _signed_pair("mul", 7, _mul_kernel,
                   lambda p1, q1, r1, p2, q2, r2, t: (t + 1) * (p1 + q1) * (p2 + q2) + 1,
                   "nearest m to (t+1) a1 a2")
MUL_INDEX = register_native(Native(
    "mul.index", 7, _mul_index,
    lambda p1, q1, r1, p2, q2, r2, t: 2 * (t + 1) * (p1 + q1 + p2 + q2 + 5),
    "2(t+1)(B1+B2+1) - 1 with B_i = floor(max(p_i,q_i)/(r_i+1)) + 2 from index-0 reads"))
RECIP = _signed_pair("recip", 4, _recip_kernel, lambda p, q, r, t: (t + 1) * (r + 1) + 1,
                     "nearest m to (t+1)/a, 0 when a = 0")
RECIP_GATE = _gate("recip.gate", 4, _recip_accept, "0 iff |p-q|(s+1) >= 2(r+1)")
RECIP_INDEX = register_native(Native(
    "recip.index", 2, lambda s, t: 4 * (s + 1) ** 2 * (t + 1) - 1,
    lambda s, t: 4 * (s + 1) ** 2 * (t + 1), "4(s+1)^2(t+1) - 1"))
LN = _signed_pair("ln", 4, _ln_kernel, lambda p, q, r, t: (t + 1) * (p + r + 2) + 1,
                  "nearest m to (t+1) ln a, 0 when a <= 0")
LN_GATE = _gate("ln.gate", 4, _ln_accept, "0 iff (p -. q)(s+1) >= 2(r+1)")
LN_INDEX = register_native(Native(
    "ln.index", 2, lambda s, t: 8 * (s + 1) * (t + 1) - 1,
    lambda s, t: 8 * (s + 1) * (t + 1), "8(s+1)(t+1) - 1"))
EXP = _signed_pair("exp", 5, _exp_kernel, lambda p, q, r, s, t: 3 * (s + 1) * (t + 1) + 1,
                   "nearest m to (t+1) e^a, clamped to 3(s+1)(t+1)")
EXP_GATE = _gate("exp.gate", 4, _exp_accept,
                 "0 iff 3^C <= s+1 with C = floor((p -. q)/(r+1)) + 2")
EXP_INDEX = register_native(Native(
    "exp.index", 2, lambda s, t: 12 * (s + 1) * (t + 1) - 1,
    lambda s, t: 12 * (s + 1) * (t + 1), "12(s+1)(t+1) - 1"))
SQRT = _signed_pair("sqrt", 4, _sqrt_kernel, lambda p, q, r, t: (t + 1) * (p + 1) + 1,
                    "nearest m to (t+1) sqrt(max(a, 0))")
SQRT_GATE = _gate("sqrt.gate", 4, _sqrt_accept, "0 iff 4(s+1)q <= 4(s+1)p + r")
SQRT_INDEX = register_native(Native(
    "sqrt.index", 1, lambda t: 16 * (t + 1) ** 2 - 1, lambda t: 16 * (t + 1) ** 2,
    "16(t+1)^2 - 1"))
SIN = _signed_pair("sin", 4, _sin_kernel, lambda p, q, r, t: t + 2, "nearest m to (t+1) sin a")
COS = _signed_pair("cos", 4, _cos_kernel, lambda p, q, r, t: t + 2, "nearest m to (t+1) cos a")


def _rational_family(sign: str):
    def build(arg: str) -> Native:
        c = Fraction(arg)

        def fn(t):
            m = round_half_up(c * (t + 1))
            return _split(m)[0 if sign == "+" else 1]

        bound = math.ceil(abs(c)) + 1
        return Native(f"rat{sign}[{arg}]", 1, fn, lambda t: bound * (t + 1),
                      f"{'positive' if sign == '+' else 'negative'} part of the nearest m to (t+1)*{arg}")
    return build


register_family("rat+", _rational_family("+"))
register_family("rat-", _rational_family("-"))


# -- systems ---------------------------------------------------------------

def _triple(pos: Native, neg: Native | None, args: tuple, k: int, extra: int = 0) -> tuple:
    arity = 3 * k + extra
    F = OperatorTerm(arity, Base(pos, args))
    G = OperatorTerm(arity, Base(neg, args) if neg is not None else _zero_node())
    H = OperatorTerm(arity, X)
    return F, G, H


def projection_uniform(i: int, k: int, label: str = "") -> UniformSystem:
    base = 3 * (i - 1)
    F, G, H = (OperatorTerm(3 * k, Apply(base + c, X)) for c in (1, 2, 3))
    return UniformSystem(k, F, G, H, label=label or (f"x{i}" if k > 1 else "identity"))


def constant_uniform(value, k: int = 1) -> UniformSystem:
    value = Fraction(value)
    arg = str(value)
    pos, neg = B.lookup_native(f"rat+[{arg}]"), B.lookup_native(f"rat-[{arg}]")
    F, G = (OperatorTerm(3 * k, Base(f, (X,))) for f in (pos, neg))
    return UniformSystem(k, F, G, OperatorTerm(3 * k, X), label=arg)


def _negate_uniform() -> UniformSystem:
    F, G, H = (OperatorTerm(3, Apply(c, X)) for c in (2, 1, 3))
    return UniformSystem(1, F, G, H, label="negate")


def _abs_uniform() -> UniformSystem:
    n = Base(affine(2, 1), (X,))
    return UniformSystem(1, *_triple(ABS[0], None, _reads(1, n) + (X,), 1), label="abs")


def _add_uniform() -> UniformSystem:
    n = Base(affine(4, 3), (X,))
    return UniformSystem(2, *_triple(*ADD, _reads(2, n) + (X,), 2), label="add")


def _mul_uniform() -> UniformSystem:
    n = Base(MUL_INDEX, _reads(2, _zero_node()) + (X,))
    return UniformSystem(2, *_triple(*MUL, _reads(2, n) + (X,), 2), label="mul")


def _trig_uniform(pair, label: str) -> UniformSystem:
    n = Base(affine(4, 3), (X,))
    return UniformSystem(1, *_triple(*pair, _reads(1, n) + (X,), 1), label=label)


def _conditional(label: str, gate: Native, gate_at: O.OpNode, kernel, index_args, extra_args=(),
                 signed: bool = True) -> ConditionalSystem:
    E = OperatorTerm(3, Base(gate, _reads(1, gate_at) + (X,)))
    s = Apply(4, X)
    n = index_args(s)
    args = _reads(1, n) + tuple(a(s) for a in extra_args) + (X,)
    pos, neg = kernel
    F, G, H = _triple(pos, neg if signed else None, args, 1, extra=1)
    return ConditionalSystem(1, E, F, G, H, label=label)


def _reciprocal() -> ConditionalSystem:
    return _conditional("reciprocal", RECIP_GATE, X, RECIP,
                        lambda s: Base(RECIP_INDEX, (s, X)))


def _ln() -> ConditionalSystem:
    return _conditional("ln", LN_GATE, X, LN, lambda s: Base(LN_INDEX, (s, X)))


def _exp() -> ConditionalSystem:
    E = OperatorTerm(3, Base(EXP_GATE, _reads(1, _zero_node()) + (X,)))
    s = Apply(4, X)
    n = Base(EXP_INDEX, (s, X))
    args = _reads(1, n) + (s, X)
    F, G, H = _triple(EXP[0], None, args, 1, extra=1)
    return ConditionalSystem(1, E, F, G, H, label="exp")


def _sqrt() -> ConditionalSystem:
    return _conditional("sqrt", SQRT_GATE, Base(affine(4, 3), (X,)), SQRT,
                        lambda s: Base(SQRT_INDEX, (X,)), signed=False)


UNIFORM_BUILDERS = {
    "identity": lambda: projection_uniform(1, 1),
    "negate": _negate_uniform,
    "abs": _abs_uniform,
    "add": _add_uniform,
    "mul": _mul_uniform,
    "sin": lambda: _trig_uniform(SIN, "sin"),
    "cos": lambda: _trig_uniform(COS, "cos"),
}
CONDITIONAL_BUILDERS = {
    "reciprocal": _reciprocal,
    "ln": _ln,
    "exp": _exp,
    "sqrt": _sqrt,
}
ALIASES = {"neg": "negate", "recip": "reciprocal", "id": "identity", "x": "identity"}
ARITY = {"add": 2, "mul": 2}


def canonical_op(name: str) -> str:
    name = ALIASES.get(name, name)
    if name not in UNIFORM_BUILDERS and name not in CONDITIONAL_BUILDERS:
        raise KeyError(f"unknown builtin {name!r}")
    return name


@lru_cache(maxsize=None)
def builtin_uniform(name: str) -> UniformSystem:
    name = canonical_op(name)
    if name not in UNIFORM_BUILDERS:
        raise KeyError(f"{name} is not uniformly computable on its whole domain; use builtin_system")
    return UNIFORM_BUILDERS[name]()


@lru_cache(maxsize=None)
def builtin_system(name: str) -> ConditionalSystem:
    """The conditional system for a builtin; uniform ones are lifted."""
    name = canonical_op(name)
    if name in CONDITIONAL_BUILDERS:
        return CONDITIONAL_BUILDERS[name]()
    return uniform_to_conditional(builtin_uniform(name))


BUILTINS = sorted(set(UNIFORM_BUILDERS) | set(CONDITIONAL_BUILDERS))


# -- hand-built TZ witnesses -----------------------------------------------

def _proj_of(f: B.BaseFunction, n: int, positions: Sequence[int]) -> B.BaseFunction:
    return B.Subst(f, tuple(B.Proj(n, i) for i in positions))


def identity_tz_witness() -> TZConditionalWitness:
    """d0 = 0, d(s, t) = t, e = 0, and f, g, h copy the fine approximation."""
    return TZConditionalWitness(
        1, B.zero(1), B.Proj(2, 2), B.Const(0, 4),
        B.Proj(8, 4), B.Proj(8, 5), B.Proj(8, 6), label="identity-tz")


def reciprocal_tz_witness() -> TZConditionalWitness:
    """Direct witness for 1/x: the coarse approximation at index s gates,
    the fine one at 4(s+1)^2(t+1) - 1 feeds the reciprocal kernel."""
    fine = (4, 5, 6, 8)
    return TZConditionalWitness(
        1, B.Proj(1, 1), RECIP_INDEX, RECIP_GATE,
        _proj_of(RECIP[0], 8, fine), _proj_of(RECIP[1], 8, fine), B.Proj(8, 8),
        label="reciprocal-tz")


# -- expressions -----------------------------------------------------------

class ExpressionError(ValueError):
    def __init__(self, message: str, pos: int = 0):
        super().__init__(message)
        self.pos = pos


class UnboundVariable(KeyError):
    pass


@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Ident:
    name: str


@dataclass(frozen=True)
class Call:
    fn: str
    arg: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


FUNCTIONS = ("neg", "recip", "sqrt", "exp", "ln", "sin", "cos", "abs")
_TOKEN = re.compile(r"\s*(?:(\d+\.\d*|\.\d+|\d+)|([A-Za-z_][A-Za-z_0-9]*)|(.))")


def _tokens(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        if m.group(1):
            out.append(("num", m.group(1), m.start(1)))
        elif m.group(2):
            out.append(("ident", m.group(2), m.start(2)))
        elif m.group(3):
            if m.group(3) not in "+-*/()":
                raise ExpressionError(f"unexpected character {m.group(3)!r} at offset {m.start(3)}",
                                      m.start(3))
            out.append((m.group(3), m.group(3), m.start(3)))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


def parse_expression(text: str):
    """Infix expressions with + - * /, unary minus, calls and rationals."""
    toks = _tokens(text)
    i = 0

    def peek():
        return toks[i][0]

    def take(kind):
        nonlocal i
        tok = toks[i]
        if tok[0] != kind:
            raise ExpressionError(f"expected {kind!r} at offset {tok[2]}, found {tok[1] or 'end'!r}",
                                  tok[2])
        i += 1
        return tok

    def expr():
        node = term()
        while peek() in ("+", "-"):
            op = take(peek())[0]
            node = BinOp(op, node, term())
        return node

    def term():
        node = unary()
        while peek() in ("*", "/"):
            op = take(peek())[0]
            node = BinOp(op, node, unary())
        return node

    def unary():
        if peek() == "-":
            take("-")
            return Call("neg", unary())
        if peek() == "+":
            take("+")
            return unary()
        return atom()

    def atom():
        kind, text_, pos = toks[i]
        if kind == "num":
            take("num")
            return Num(Fraction(text_))
        if kind == "ident":
            take("ident")
            if peek() == "(":
                if text_ not in FUNCTIONS:
                    raise ExpressionError(f"unknown function {text_!r} at offset {pos}", pos)
                take("(")
                arg = expr()
                take(")")
                return Call(text_, arg)
            return Ident(text_)
        if kind == "(":
            take("(")
            node = expr()
            take(")")
            return node
        raise ExpressionError(f"unexpected {text_ or 'end of input'!r} at offset {pos}", pos)

    node = expr()
    if peek() != "end":
        tok = toks[i]
        raise ExpressionError(f"trailing input at offset {tok[2]}", tok[2])
    return node


def free_variables(expr) -> list[str]:
    seen: list[str] = []

    def walk(e):
        if isinstance(e, Ident):
            if e.name not in seen:
                seen.append(e.name)
        elif isinstance(e, Call):
            walk(e.arg)
        elif isinstance(e, BinOp):
            walk(e.left)
            walk(e.right)

    walk(expr)
    return seen


def desugar(expr):
    """sub -> add/neg and div -> mul/recip."""
    if isinstance(expr, Call):
        return Call(canonical_op(expr.fn), desugar(expr.arg))
    if isinstance(expr, BinOp):
        left, right = desugar(expr.left), desugar(expr.right)
        if expr.op == "+":
            return BinOp("add", left, right)
        if expr.op == "-":
            return BinOp("add", left, Call("negate", right))
        if expr.op in ("*", "mul"):
            return BinOp("mul", left, right)
        if expr.op == "add":
            return BinOp("add", left, right)
        return BinOp("mul", left, Call("reciprocal", right))
    return expr


def compile_expression(expr, variables: Sequence[str] | None = None) -> ConditionalSystem:
    """Nested compose_conditional over the builtins.

    The system's arity is the number of ``variables`` (at least one; an
    expression without variables gets an unused argument).
    """
    if isinstance(expr, str):
        expr = parse_expression(expr)
    variables = list(variables if variables is not None else free_variables(expr))
    for name in free_variables(expr):
        if name not in variables:
            raise UnboundVariable(name)
    k = max(1, len(variables))
    cache: dict = {}

    def build(e) -> ConditionalSystem:
        if e in cache:
            return cache[e]
        if isinstance(e, Num):
            out = uniform_to_conditional(constant_uniform(e.value, k))
        elif isinstance(e, Ident):
            out = uniform_to_conditional(projection_uniform(variables.index(e.name) + 1, k, e.name))
        elif isinstance(e, Call):
            out = compose_conditional(builtin_system(e.fn), [build(e.arg)])
        else:
            out = compose_conditional(builtin_system(e.op), [build(e.left), build(e.right)])
        cache[e] = out
        return out

    return build(desugar(expr))


# -- tracing ---------------------------------------------------------------

class _Probe:
    """Wraps a name and records the largest index read."""

    def __init__(self, name: RealName):
        self.name = name
        self.top = -1

    def oracles(self):
        def wrap(f):
            def read(n):
                if n > self.top:
                    self.top = n
                return f(n)
            return O.FunctionOracle(read)
        return [wrap(self.name.f), wrap(self.name.g), wrap(self.name.h)]


@dataclass
class TraceLine:
    node: str
    s: int
    d0: int
    d: int

    def __str__(self):
        return f"node={self.node} s={self.s} d0={self.d0} d={self.d}"


def trace_expression(expr, variables: Sequence[str], names: Sequence[RealName], t: int,
                     budget: int) -> list[TraceLine]:
    """Per subexpression: its least parameter s, and the largest argument
    index read while checking s (d0) and while producing precision t (d)."""
    if isinstance(expr, str):
        expr = parse_expression(expr)
    expr = desugar(expr)
    lines: list[TraceLine] = []
    counter = [0]

    def visit(e, path):
        node_id = f"{counter[0]}:{_describe(e)}"
        counter[0] += 1
        sys = compile_expression(e, variables)
        s = find_parameter(sys, names, budget)
        probes = [_Probe(n) for n in names]
        orc = [o for p in probes for o in p.oracles()]
        O.eval_operator(sys.E, orc, s)
        d0 = max(p.top for p in probes)
        probes = [_Probe(n) for n in names]
        orc = [o for p in probes for o in p.oracles()] + [O.FunctionOracle(lambda x: s)]
        for term in (sys.F, sys.G, sys.H):
            O.eval_operator(term, orc, t)
        d = max(p.top for p in probes)
        lines.append(TraceLine(node_id, s, max(d0, 0), max(d, 0)))
        if isinstance(e, Call):
            visit(e.arg, path + (0,))
        elif isinstance(e, BinOp):
            visit(e.left, path + (0,))
            visit(e.right, path + (1,))

    visit(expr, ())
    return lines


def _describe(e) -> str:
    if isinstance(e, Num):
        return str(e.value)
    if isinstance(e, Ident):
        return e.name
    if isinstance(e, Call):
        return e.fn
    return e.op
