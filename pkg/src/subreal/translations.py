"""Translations between operator systems and TZ-style witnesses.

* ``tz_to_operators_conditional`` / ``tz_to_operators_uniform`` read the
  names at the indices the witness asks for and apply its functions.
* ``operators_to_tz_conditional`` normalizes through K and builds the
  tables u, v, v', d0, w, w', d together with b, e, f, g, h.
* ``operators_to_tz_uniform`` is the parameter-free analogue.
* ``compute_search_bound`` explores special-name prefixes at a rational
  point and returns a uniform bound T on the least accepted parameter.

Emitted witness components are natives whose names carry a fingerprint
of the source system, so equal sources give equal component names.
"""
from __future__ import annotations

import json
import math
from collections import OrderedDict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from . import base as B
from . import operators as O
from .base import MissingMajorant, Native, lookup_native, register_native
from .library import max_n
from .names import EHELP, ehelp, enumerate_special_prefix
from .operators import Apply, Base, FunctionOracle, OperatorTerm, X
from .systems import BudgetExhausted, ConditionalSystem, UniformSystem
from .witnesses import TZConditionalWitness, TZUniformWitness


class MissingModulus(ValueError):
    """An operator term contains a native without a declared majorant."""


class SlackViolation(AssertionError):
    pass


_TWO_X_PLUS_1 = B.succ_of(B.Subst(B.MUL, (B.Const(2), B.Proj(1, 1))))
_ZERO1 = B.zero(1)


def _at_zero() -> O.OpNode:
    return Base(_ZERO1, (X,))


# -- normalization ---------------------------------------------------------

def _k_renderer(k: int):
    """Oracle renderers replacing each name (f, g, h) by (K(f,g,h), K(g,f,h), id)."""
    memo: dict[tuple[int, int], O.OpNode] = {}

    def render(j: int, a: O.OpNode) -> O.OpNode:
        if j > 3 * k:
            return Apply(j, a)
        i, c = divmod(j - 1, 3)
        if c == 2:
            return a
        key = (j, id(a))
        hit = memo.get(key)
        if hit is None:
            at = Base(_TWO_X_PLUS_1, (a,))
            f, g, h = (Apply(3 * i + m, at) for m in (1, 2, 3))
            hit = Base(EHELP, (f, g, h, a) if c == 0 else (g, f, h, a))
            memo[key] = hit
        return hit

    return render


def _normalize_term(term: OperatorTerm, k: int) -> OperatorTerm:
    render = _k_renderer(k)
    return OperatorTerm(term.arity, O.rewrite(term.root, X, render))


def normalize_system(sys: ConditionalSystem) -> ConditionalSystem:
    """Precompose every term with K on each name triple."""
    k = sys.k
    E, F, G, H = (_normalize_term(t, k) for t in sys.terms())
    label = f"K-normalized {sys.label}" if sys.label else "K-normalized"
    return ConditionalSystem(k, E, F, G, H, label=label, domain_hint=sys.domain_hint)


def _check_moduli(*terms: OperatorTerm) -> list[OperatorTerm]:
    try:
        return [O.modulus_operator(t) for t in terms]
    except MissingMajorant as exc:
        raise MissingModulus(str(exc)) from None


# -- shared helpers --------------------------------------------------------

def _native(name: str, arity: int, fn, majorant, provenance: str) -> Native:
    try:
        return lookup_native(name)
    except KeyError:
        return register_native(Native(name, arity, fn, majorant, provenance))


class _LRU:
    def __init__(self, size: int = 4096):
        self.size = size
        self.data: OrderedDict = OrderedDict()

    def get(self, key, compute):
        try:
            self.data.move_to_end(key)
            return self.data[key]
        except KeyError:
            value = compute()
            self.data[key] = value
            if len(self.data) > self.size:
                self.data.popitem(last=False)
            return value


def _ehelp_oracles(pqr: Sequence[int]) -> list[FunctionOracle]:
    """(lambda x.ehelp(p,q,r,x), lambda x.ehelp(q,p,r,x), id) per coordinate."""
    out = []
    for i in range(0, len(pqr), 3):
        p, q, r = pqr[i:i + 3]
        out.append(FunctionOracle(lambda x, p=p, q=q, r=r: ehelp(p, q, r, x)))
        out.append(FunctionOracle(lambda x, p=p, q=q, r=r: ehelp(q, p, r, x)))
        out.append(FunctionOracle(lambda x: x))
    return out


def _piecewise_oracles(coarse: Sequence[int], fine: Sequence[int], cut: int) -> list[FunctionOracle]:
    """Names using ``coarse`` data at x <= cut and ``fine`` data beyond."""
    out = []
    for i in range(0, len(coarse), 3):
        p0, q0, r0 = coarse[i:i + 3]
        p1, q1, r1 = fine[i:i + 3]

        def f(x, p0=p0, q0=q0, r0=r0, p1=p1, q1=q1, r1=r1):
            return ehelp(p0, q0, r0, x) if x <= cut else ehelp(p1, q1, r1, x)

        def g(x, p0=p0, q0=q0, r0=r0, p1=p1, q1=q1, r1=r1):
            return ehelp(q0, p0, r0, x) if x <= cut else ehelp(q1, p1, r1, x)

        out.extend((FunctionOracle(f), FunctionOracle(g), FunctionOracle(lambda x: x)))
    return out


def _data_majorant(values: Sequence[int]) -> Callable[[int], int]:
    """Monotone bound for ehelp-built oracles from the (p, q, r) data."""
    total = sum(values[i] + values[i + 1] for i in range(0, len(values), 3))
    return lambda x: max((x + 1) * (total + 1) + 1, x)


# -- conditional: operators to witness -------------------------------------

class TranslationTables:
    """u, v, v', d0, w, w', d for a normalized conditional system."""

    def __init__(self, sys: ConditionalSystem):
        self.sys = sys
        self.omega_E, self.omega_F, self.omega_G, self.omega_H = _check_moduli(*sys.terms())
        self._v: dict[tuple[int, int], int] = {}
        self._vp: dict[int, int] = {}
        self._w: dict[tuple[int, int], int] = {}
        self.touched: set[tuple[int, int | None]] = set()

    @staticmethod
    def u(x: int, s: int) -> int:
        return (s + 2) * (x + 1)

    def _u_oracle(self, s: int) -> FunctionOracle:
        return FunctionOracle(lambda x: (s + 2) * (x + 1))

    def v(self, s: int, y: int) -> int:
        key = (s, y)
        if key not in self._v:
            self._v[key] = O.eval_operator(self.omega_E, [self._u_oracle(s)], y)
        return self._v[key]

    def v_prime(self, s: int) -> int:
        if s not in self._vp:
            self._vp[s] = max(self.v(s, y) for y in range(s + 1))
        return self._vp[s]

    def d0(self, s: int) -> int:
        vp = self.v_prime(s)
        out = 6 * vp + 5
        if out < 2 * vp + 1:
            raise SlackViolation(f"d0({s}) = {out} < 2v'({s}) + 1")
        self.touched.add((s, None))
        return out

    def w(self, s: int, t: int) -> int:
        key = (s, t)
        if key not in self._w:
            g = self._u_oracle(s)
            self._w[key] = max(O.eval_operator(om, [g], t)
                               for om in (self.omega_F, self.omega_G, self.omega_H))
        return self._w[key]

    def w_prime(self, s: int, t: int) -> int:
        return max(self.v_prime(s), self.w(s, t))

    def d(self, s: int, t: int) -> int:
        wp = self.w_prime(s, t)
        out = 6 * wp + 5
        vp = self.v_prime(s)
        if out < 6 * vp + 5 or out < 2 * wp + 1:
            raise SlackViolation(f"d({s},{t}) = {out} violates d >= 6v'+5 or d >= 2w'+1")
        self.touched.add((s, t))
        return out


PROVENANCE = {
    "u": "u(x,s) = (s+2)(x+1)",
    "v": "v(s,y) = Omega_E(lambda x.u(x,s))(y)",
    "v'": "v'(s) = max_{y<=s} v(s,y)",
    "d0": "d0(s) = 6v'(s) + 5",
    "w": "w(s,t) = max(Omega_F, Omega_G, Omega_H)(lambda x.u(x,s))(t)",
    "w'": "w'(s,t) = max(v'(s), w(s,t))",
    "d": "d(s,t) = 6w'(s,t) + 5",
    "b": "b(p0,q0,r0,s) = mu_{x<=s}[E(f0,g0,id)(x) = 0]",
    "e": "e(p0,q0,r0,s) = min_{x<=s} E(f0,g0,id)(x)",
    "f": "f(p0,q0,r0,p,q,r,s,t) = F(f1,g1,id,lambda x.b(p0,q0,r0,s))(t)",
    "g": "g(...) = G(f1,g1,id,lambda x.b(p0,q0,r0,s))(t)",
    "h": "h(...) = H(f1,g1,id,lambda x.b(p0,q0,r0,s))(t)",
    "f0": "f0 = lambda x.ehelp(p0,q0,r0,x), g0 = lambda x.ehelp(q0,p0,r0,x)",
    "f1": "f1(x) = ehelp(p0,q0,r0,x) if x <= v'(s) else ehelp(p,q,r,x); g1 mirrored",
    "normalize": "E', F', G', H' take (K(f,g,h), K(g,f,h), id) in place of each name",
}

_CONDITIONAL_CACHE: dict[str, TZConditionalWitness] = {}
_TABLES: dict[str, TranslationTables] = {}


def operators_to_tz_conditional(sys: ConditionalSystem) -> TZConditionalWitness:
    """Witness (d0, d, e, f, g, h) built from the K-normalized system."""
    _check_moduli(*sys.terms())
    tag = O.fingerprint(*sys.terms())
    hit = _CONDITIONAL_CACHE.get(tag)
    if hit is not None:
        return hit
    norm = normalize_system(sys)
    tables = TranslationTables(norm)
    k = sys.k
    n3 = 3 * k
    lru = _LRU()

    def E_values(coarse: tuple, s: int) -> list[int]:
        def compute():
            orc = _ehelp_oracles(coarse)
            out = []
            for x in range(s + 1):
                value = O.eval_operator(norm.E, orc, x)
                out.append(value)
                if value == 0:
                    break       # b and e are both settled by the first zero
            return out
        return lru.get(("E", coarse, s), compute)

    def b(*args):
        coarse, s = args[:n3], args[n3]
        vals = E_values(tuple(coarse), s)
        return len(vals) - 1 if vals[-1] == 0 else s + 1

    def e(*args):
        coarse, s = args[:n3], args[n3]
        return min(E_values(tuple(coarse), s))

    def e_major(*args):
        coarse = args[:n3]
        return O.term_bound(norm.E, _data_majorant(coarse), 0)

    def output(term: OperatorTerm):
        def fn(*args):
            coarse, fine, s, t = args[:n3], args[n3:2 * n3], args[2 * n3], args[2 * n3 + 1]
            cut = tables.v_prime(s)
            orc = _piecewise_oracles(coarse, fine, cut)
            param = b(*coarse, s)
            orc.append(FunctionOracle(lambda x: param))
            return O.eval_operator(term, orc, t)

        def major(*args):
            s, t = args[2 * n3], args[2 * n3 + 1]
            data = _data_majorant(list(args[:n3]) + list(args[n3:2 * n3]))
            return O.term_bound(term, lambda x: max(data(x), s + 1), t)

        return fn, major

    name = lambda part: f"ct.{part}@{tag}"
    d0 = _native(name("d0"), 1, tables.d0, tables.d0, PROVENANCE["d0"])
    d = _native(name("d"), 2, tables.d, tables.d, PROVENANCE["d"])
    _native(name("b"), n3 + 1, b, lambda *a: a[-1] + 1, PROVENANCE["b"])
    e_fn = _native(name("e"), n3 + 1, e, e_major, PROVENANCE["e"])
    parts = {}
    for key, term in (("f", norm.F), ("g", norm.G), ("h", norm.H)):
        fn, major = output(term)
        parts[key] = _native(name(key), 2 * n3 + 2, fn, major, PROVENANCE[key])
    label = f"tz({sys.label})" if sys.label else "tz"
    w = TZConditionalWitness(k, d0, d, e_fn, parts["f"], parts["g"], parts["h"],
                             label=label, source=sys)
    _CONDITIONAL_CACHE[tag] = w
    _TABLES[tag] = tables
    return w


def tables_of(w: TZConditionalWitness) -> TranslationTables | None:
    """Tables behind a translated witness (None for hand-built ones)."""
    name = getattr(w.d0, "name", "")
    return _TABLES.get(name.partition("@")[2]) if "@" in name else None


# -- conditional: witness to operators -------------------------------------

def _coarse_max(k: int, extra: O.OpNode) -> O.OpNode:
    z = _at_zero()
    parts = []
    for i in range(k):
        parts.extend((Apply(3 * i + 1, z), Apply(3 * i + 2, z)))
    parts.append(extra)
    return Base(max_n(len(parts)), tuple(parts))


def _reads(k: int, at: O.OpNode) -> list[O.OpNode]:
    return [Apply(j, at) for j in range(1, 3 * k + 1)]


def tz_to_operators_conditional(w: TZConditionalWitness) -> ConditionalSystem:
    """E(fs)(s') = e(reads at d0(s), s) with s = max(f_i(0), g_i(0), s');
    F, G, H read at d0(s) and d(s, t) where s uses a(t) in place of s'."""
    k = w.k
    s_e = _coarse_max(k, X)
    E = OperatorTerm(3 * k, Base(w.e, tuple(_reads(k, Base(w.d0, (s_e,)))) + (s_e,)))
    s_f = _coarse_max(k, Apply(3 * k + 1, X))
    coarse = _reads(k, Base(w.d0, (s_f,)))
    fine = _reads(k, Base(w.d, (s_f, X)))
    args = tuple(coarse + fine) + (s_f, X)
    F, G, H = (OperatorTerm(3 * k + 1, Base(fn, args)) for fn in (w.f, w.g, w.h))
    label = f"ops({w.label})" if w.label else "ops"
    return ConditionalSystem(k, E, F, G, H, label=label, source=w if w.source is not None else None)


# -- uniform direction -----------------------------------------------------

_UNIFORM_CACHE: dict[str, TZUniformWitness] = {}


def operators_to_tz_uniform(sys: UniformSystem) -> TZUniformWitness:
    """d(t) = 2 max_i Omega_i(lambda x.(t+2)(x+1))(t) + 1; f, g, h apply F, G, H
    to the ehelp-names of the approximations."""
    omegas = _check_moduli(sys.F, sys.G, sys.H)
    tag = O.fingerprint(sys.F, sys.G, sys.H)
    hit = _UNIFORM_CACHE.get(tag)
    if hit is not None:
        return hit
    k, n3 = sys.k, 3 * sys.k
    w_cache: dict[int, int] = {}

    def d(t):
        if t not in w_cache:
            g = FunctionOracle(lambda x: (t + 2) * (x + 1))
            w_cache[t] = max(O.eval_operator(om, [g], t) for om in omegas)
        return 2 * w_cache[t] + 1

    def output(term):
        def fn(*args):
            return O.eval_operator(term, _ehelp_oracles(args[:n3]), args[n3])

        def major(*args):
            return O.term_bound(term, _data_majorant(args[:n3]), args[n3])

        return fn, major

    name = lambda part: f"ut.{part}@{tag}"
    d_fn = _native(name("d"), 1, d, d, "d(t) = 2 max(Omega_F, Omega_G, Omega_H)(lambda x.(t+2)(x+1))(t) + 1")
    parts = {}
    for key, term in (("f", sys.F), ("g", sys.G), ("h", sys.H)):
        fn, major = output(term)
        parts[key] = _native(name(key), n3 + 1, fn, major,
                             f"{key}(p,q,r,t) = {key.upper()}(ehelp(p,q,r,.), ehelp(q,p,r,.), id)(t)")
    label = f"tz({sys.label})" if sys.label else "tz"
    w = TZUniformWitness(k, d_fn, parts["f"], parts["g"], parts["h"], label=label, source=sys)
    _UNIFORM_CACHE[tag] = w
    return w


def tz_to_operators_uniform(w: TZUniformWitness) -> UniformSystem:
    """F(fs)(t) = f(reads at d(t'), t') with t' = max(t, f_i(0), g_i(0))."""
    k = w.k
    t1 = _coarse_max(k, X)
    args = tuple(_reads(k, Base(w.d, (t1,)))) + (t1,)
    F, G, H = (OperatorTerm(3 * k, Base(fn, args)) for fn in (w.f, w.g, w.h))
    label = f"ops({w.label})" if w.label else "ops"
    return UniformSystem(k, F, G, H, label=label, source=w if w.source is not None else None)


# -- provenance ------------------------------------------------------------

def provenance(obj) -> dict:
    """Component name -> formula text for a translated witness or system."""
    out: dict[str, str] = {}
    if isinstance(obj, (TZConditionalWitness, TZUniformWitness)):
        slots = ("d0", "d", "e", "f", "g", "h") if isinstance(obj, TZConditionalWitness) else ("d", "f", "g", "h")
        for slot in slots:
            fn = getattr(obj, slot)
            out[slot] = getattr(fn, "provenance", "") or B.to_sexpr(fn)
        if isinstance(obj, TZConditionalWitness) and obj.source is not None:
            for key in ("u", "v", "v'", "w", "w'", "b", "f0", "f1", "normalize"):
                out["table " + key] = PROVENANCE[key]
    else:
        terms = obj.terms() if isinstance(obj, ConditionalSystem) else (obj.F, obj.G, obj.H)
        for term in terms:
            for node in O.nodes(term.root):
                if isinstance(node, Base) and isinstance(node.f, Native):
                    out[node.f.name] = node.f.provenance
    return dict(sorted(out.items()))


def provenance_json(obj) -> str:
    return json.dumps(provenance(obj), indent=2, sort_keys=True) + "\n"


# -- effective search bound ------------------------------------------------

@dataclass
class SearchBound:
    T: int
    depth: int
    certificate: dict = field(default_factory=dict)
    branches: int = 0


class _Deeper(Exception):
    pass


def compute_search_bound(sys: ConditionalSystem, xis: Sequence, budget: int = 2 ** 16,
                         max_depth: int = 64) -> SearchBound:
    """Bound T on the least accepted s over all special names of ``xis``.

    The tree of special-name prefixes is explored depth first in
    lexicographic order.  At a node of depth z the parameters s are
    scanned upward; s is decided at the node when the modulus of E at s,
    for majorant lambda x.(c+2)(x+1) with c >= max |xi_i|, is below z, and
    then every special name extending the prefix gives E the same value.
    A decided zero closes the branch; an undecided s splits the node.
    """
    xis = [Fraction(x) for x in xis]
    k = sys.k
    if len(xis) != k:
        raise ValueError(f"system of arity {k} given a point of dimension {len(xis)}")
    c = max((math.ceil(abs(x)) for x in xis), default=0)
    majorant = lambda x: (c + 2) * (x + 1)
    levels: list[list[tuple]] = []

    def level(n):
        while len(levels) <= n:
            levels.append(sorted(enumerate_special_prefix(xis, len(levels))))
        return levels[n]

    result = SearchBound(T=0, depth=0)
    work = 0
    stack: list[tuple[tuple, int]] = [((), 0)]
    while stack:
        prefix, s = stack.pop()
        depth = len(prefix)
        result.depth = max(result.depth, depth)
        oracles = []
        for i in range(k):
            for comp in (0, 1):
                def f(n, i=i, comp=comp, prefix=prefix):
                    if n >= len(prefix):
                        raise _Deeper
                    return prefix[n][2 * i + comp]
                oracles.append(f)
            oracles.append(lambda n: n)
        while True:
            work += 1
            if s > budget or work > budget:
                raise BudgetExhausted(budget, sys.label or "search bound")
            if O.modulus(sys.E, majorant, s) >= depth:
                if depth >= max_depth:
                    raise BudgetExhausted(budget, f"{sys.label or 'search bound'} (depth {max_depth})")
                children = level(depth)
                for nxt in reversed(children):
                    stack.append((prefix + (nxt,), s))
                break
            if O.eval_operator(sys.E, oracles, s) == 0:
                result.certificate[prefix] = s
                result.branches += 1
                result.T = max(result.T, s)
                break
            s += 1
    return result
