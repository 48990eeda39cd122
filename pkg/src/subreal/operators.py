"""Substitutional operator terms over unary function oracles.

A term is built from the numeric variable ``x``, oracle applications
``f_k(...)`` and base functions.  Terms are immutable DAGs: composition
shares subterms instead of copying them, and every traversal here is
memoized by node identity so shared subterms are visited once.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable, Sequence

from . import base as B
from .base import ArityError, BaseFunction
from .sexpr import Atom, SexprError, SList, read


class OpNode:
    __slots__ = ()
    children: tuple = ()


@dataclass(frozen=True, eq=True)
class Var(OpNode):
    @property
    def children(self):
        return ()


@dataclass(frozen=True, eq=False)
class Apply(OpNode):
    k: int
    arg: OpNode

    @property
    def children(self):
        return (self.arg,)


@dataclass(frozen=True, eq=False)
class Base(OpNode):
    f: BaseFunction
    args: tuple

    @property
    def children(self):
        return self.args


X = Var()


def ap(k: int, arg: OpNode = X) -> Apply:
    return Apply(k, arg)


def bf(f: BaseFunction, *args: OpNode) -> Base:
    return Base(f, tuple(args))


def nodes(root: OpNode) -> list[OpNode]:
    """Distinct nodes of the DAG, children before parents."""
    seen: set[int] = set()
    order: list[OpNode] = []
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for c in reversed(node.children):
            if id(c) not in seen:
                stack.append((c, False))
    return order


@dataclass(frozen=True, eq=False)
class OperatorTerm:
    """An n-operator given by a term; ``arity`` is the number of oracles."""

    arity: int
    root: OpNode

    def __post_init__(self):
        for node in nodes(self.root):
            if isinstance(node, Apply):
                if not 1 <= node.k <= self.arity:
                    raise ArityError(f"apply index {node.k} outside 1..{self.arity}")
            elif isinstance(node, Base):
                if len(node.args) != node.f.arity:
                    raise ArityError(
                        f"base node {B.to_sexpr(node.f)} has arity {node.f.arity} "
                        f"but {len(node.args)} arguments")
            elif not isinstance(node, Var):
                raise TypeError(f"not an operator node: {node!r}")

    def __call__(self, oracles: Sequence[Callable[[int], int]], x: int) -> int:
        return eval_operator(self, oracles, x)

    def __str__(self):
        return to_sexpr(self)

    def size(self) -> int:
        return len(nodes(self.root))


class FunctionOracle:
    """A total unary function on naturals, memoized.

    ``majorant`` is an optional monotone upper bound used by modulus
    computations.
    """

    def __init__(self, fn: Callable[[int], int], majorant: Callable[[int], int] | None = None,
                 name: str = ""):
        self.fn = fn
        self.majorant = majorant
        self.name = name or getattr(fn, "__name__", "oracle")
        self._memo: dict[int, int] = {}
        self._lock = threading.Lock()

    def __call__(self, n: int) -> int:
        try:
            return self._memo[n]
        except KeyError:
            value = self.fn(n)
            if value < 0:
                raise ValueError(f"oracle {self.name} returned negative value {value} at {n}")
            with self._lock:
                self._memo[n] = value
            return value

    def __repr__(self):
        return f"FunctionOracle({self.name})"


def _walk(root: OpNode, visit) -> dict[int, int]:
    """Post-order evaluation of ``visit(node, child_values)`` over the DAG."""
    memo: dict[int, int] = {}
    stack = [root]
    while stack:
        node = stack[-1]
        if id(node) in memo:
            stack.pop()
            continue
        pending = [c for c in node.children if id(c) not in memo]
        if pending:
            stack.extend(pending)
            continue
        memo[id(node)] = visit(node, [memo[id(c)] for c in node.children])
        stack.pop()
    return memo


def eval_operator(term: OperatorTerm, oracles: Sequence[Callable[[int], int]], x: int) -> int:
    """Value of ``term`` applied to ``oracles`` at ``x``."""
    if len(oracles) != term.arity:
        raise ArityError(f"term of arity {term.arity} given {len(oracles)} oracles")

    def visit(node, vals):
        if isinstance(node, Base):
            return node.f._eval(tuple(vals))
        if isinstance(node, Apply):
            return oracles[node.k - 1](vals[0])
        return x

    return _walk(term.root, visit)[id(term.root)]


def _bounds(term: OperatorTerm, g: Callable[[int], int], x: int) -> tuple[int, int]:
    """(root bound, largest oracle query bound) under monotone majorant ``g``."""
    queried: list[tuple[int, int]] = []
    reach = [0]

    def visit(node, vals):
        if isinstance(node, Base):
            return node.f._major(tuple(vals))
        if isinstance(node, Apply):
            arg = vals[0]
            if arg > reach[0]:
                reach[0] = arg
            value = g(arg)
            queried.append((arg, value))
            return value
        return x

    root = _walk(term.root, visit)[id(term.root)]
    queried.sort()
    for (a, ga), (b, gb) in zip(queried, queried[1:]):
        if gb < ga:
            raise ValueError(f"majorant is not monotone: g({a}) = {ga} > g({b}) = {gb}")
    return root, reach[0]


def modulus(term: OperatorTerm, g: Callable[[int], int], x: int) -> int:
    """A point z such that oracles majorized by ``g`` and agreeing on 0..z
    give the same value of ``term`` at ``x``.

    Every oracle is replaced by ``g`` and every base function by its
    majorant; z is the largest resulting bound on an oracle argument.
    """
    return _bounds(term, g, x)[1]


def term_bound(term: OperatorTerm, g: Callable[[int], int], x: int) -> int:
    """Upper bound on ``term`` at ``x`` over all oracles majorized by ``g``."""
    return _bounds(term, g, x)[0]


# -- rewriting -------------------------------------------------------------

def rewrite(root: OpNode, var: OpNode, apply: Callable[[int, OpNode], OpNode]) -> OpNode:
    """Replace the variable by ``var`` and each ``Apply(k, a)`` by ``apply(k, a')``
    where ``a'`` is the rewritten argument.  Sharing is preserved."""
    out: dict[int, OpNode] = {}
    for node in nodes(root):
        if isinstance(node, Var):
            new = var
        elif isinstance(node, Apply):
            new = apply(node.k, out[id(node.arg)])
        else:
            args = tuple(out[id(a)] for a in node.args)
            new = node if all(a is b for a, b in zip(args, node.args)) else Base(node.f, args)
        out[id(node)] = new
    return out[id(root)]


def instantiate(term: OperatorTerm, arg: OpNode, oracles: Sequence[Callable[[OpNode], OpNode]] | None = None) -> OpNode:
    """The root of ``term`` with its variable bound to ``arg``; oracle k is
    rendered by ``oracles[k-1](a)`` (default: a plain Apply)."""
    if oracles is None:
        return rewrite(term.root, arg, Apply)
    return rewrite(term.root, arg, lambda k, a: oracles[k - 1](a))


def compose_operators(outer: OperatorTerm, inners: Sequence[OperatorTerm]) -> OperatorTerm:
    """H(fs) = outer(inner_1(fs), ..., inner_k(fs))."""
    if len(inners) != outer.arity:
        raise ArityError(f"outer operator of arity {outer.arity} given {len(inners)} inners")
    arities = {t.arity for t in inners}
    if len(arities) > 1:
        raise ArityError(f"inner operators disagree on arity {sorted(arities)}")
    n = arities.pop() if arities else 0
    memo: dict[tuple[int, int], OpNode] = {}

    def expand(k, a):
        key = (k, id(a))
        if key not in memo:
            memo[key] = rewrite(inners[k - 1].root, a, Apply)
        return memo[key]

    return OperatorTerm(n, rewrite(outer.root, X, expand))


def reindex(term: OperatorTerm, arity: int, mapping: Callable[[int], OpNode | int] | None = None) -> OperatorTerm:
    """Move ``term`` to a larger oracle tuple (extra oracles ignored)."""
    if mapping is None:
        return OperatorTerm(arity, term.root)

    def apply(k, a):
        target = mapping(k)
        return Apply(target, a) if isinstance(target, int) else target(a)

    return OperatorTerm(arity, rewrite(term.root, X, apply))


# -- the modulus as an operator --------------------------------------------

_MAJ_CACHE: dict[int, BaseFunction] = {}


def _majorant_fn(f: BaseFunction) -> BaseFunction:
    key = id(f)
    hit = _MAJ_CACHE.get(key)
    if hit is None or hit[0] is not f:
        hit = (f, B.majorant_function(f))
        _MAJ_CACHE[key] = hit
    return hit[1]


def modulus_operator(term: OperatorTerm) -> OperatorTerm:
    """A 1-operator Omega with Omega(g)(x) == modulus(term, g, x)."""
    out: dict[int, OpNode] = {}
    query_args: list[OpNode] = []
    for node in nodes(term.root):
        if isinstance(node, Var):
            new = X
        elif isinstance(node, Apply):
            arg = out[id(node.arg)]
            query_args.append(arg)
            new = Apply(1, arg)
        else:
            new = Base(_majorant_fn(node.f), tuple(out[id(a)] for a in node.args))
        out[id(node)] = new
    if not query_args:
        root = Base(B.zero(1), (X,))
    elif len(query_args) == 1:
        root = query_args[0]
    else:
        from .library import max_n
        root = Base(max_n(len(query_args)), tuple(query_args))
    return OperatorTerm(1, root)


# -- serialization ---------------------------------------------------------

def to_sexpr(term: OperatorTerm | OpNode) -> str:
    root = term.root if isinstance(term, OperatorTerm) else term
    cache: dict[int, str] = {}
    for node in nodes(root):
        if isinstance(node, Var):
            s = "x"
        elif isinstance(node, Apply):
            s = f"(apply {node.k} {cache[id(node.arg)]})"
        else:
            parts = [B.to_sexpr(node.f)] + [cache[id(a)] for a in node.args]
            s = "(base " + " ".join(parts) + ")"
        cache[id(node)] = s
    return cache[id(root)]


def node_from_sexpr(form, text: str = "", natives: dict | None = None) -> OpNode:
    if isinstance(form, Atom):
        if form.text == "x":
            return X
        raise SexprError(f"unexpected atom {form.text!r} in operator term", form.pos, text)
    head = form.head()
    if head == "apply":
        if len(form) != 3 or not isinstance(form[1], Atom) or not form[1].text.isdigit():
            raise SexprError("expected (apply K opterm)", form.pos, text)
        return Apply(int(form[1].text), node_from_sexpr(form[2], text, natives))
    if head == "base":
        if len(form) < 2:
            raise SexprError("expected (base BASEFN opterm*)", form.pos, text)
        f = B.from_sexpr(form[1], text, natives)
        args = tuple(node_from_sexpr(a, text, natives) for a in form.items[2:])
        if len(args) != f.arity:
            raise ArityError(f"base node {B.to_sexpr(f)} has arity {f.arity} but "
                             f"{len(args)} arguments (at offset {form.pos})")
        return Base(f, args)
    raise SexprError("expected x, (apply ...) or (base ...)", form.pos, text)


def term_from_sexpr(form, arity: int | None = None, text: str = "",
                    natives: dict | None = None) -> OperatorTerm:
    root = node_from_sexpr(form, text, natives)
    if arity is None:
        arity = max((n.k for n in nodes(root) if isinstance(n, Apply)), default=0)
    return OperatorTerm(arity, root)


def parse_operator_term(text: str, arity: int | None = None, natives: dict | None = None) -> OperatorTerm:
    return term_from_sexpr(read(text), arity, text, natives)


def fingerprint(*terms: OperatorTerm) -> str:
    """Stable digest of the terms' structure, linear in DAG size."""
    import hashlib
    digest = hashlib.sha256()
    for term in terms:
        memo: dict[int, str] = {}
        for node in nodes(term.root):
            if isinstance(node, Var):
                h = "x"
            elif isinstance(node, Apply):
                h = f"a{node.k}:{memo[id(node.arg)]}"
            else:
                h = B.to_sexpr(node.f) + "|" + ",".join(memo[id(a)] for a in node.args)
            memo[id(node)] = hashlib.sha256(h.encode()).hexdigest()[:20]
        digest.update(f"{term.arity}:{memo[id(term.root)]};".encode())
    return digest.hexdigest()[:12]
