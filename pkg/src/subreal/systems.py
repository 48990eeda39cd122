"""Uniform and conditional computing systems.

A uniform system (F, G, H) turns names of the arguments into a name of the
value.  A conditional system adds a gate E: the name of the value is
produced by (F, G, H) with the extra argument fixed to the constant
function s-hat, for any s with E(names)(s) = 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

from . import base as B
from . import operators as O
from .base import ArityError, Native
from .library import max_n, tuple_proj
from .names import RationalApprox, RealName, constant_oracle
from .operators import Apply, Base, OperatorTerm, X
from .sexpr import Atom, SexprError, decode_label, encode_label, keyword_slots, read

DEFAULT_BUDGET = 2 ** 16


class BudgetExhausted(RuntimeError):
    """No parameter s <= budget satisfied the gate.

    Either the budget is too small or the arguments lie outside the
    domain; the two cannot be told apart.
    """

    def __init__(self, budget: int, where: str = ""):
        self.budget = budget
        self.where = where
        at = f" at {where}" if where else ""
        super().__init__(f"budget exhausted{at}: no s in 0..{budget} satisfies E(...)(s) = 0")


@dataclass(frozen=True)
class UniformSystem:
    k: int
    F: OperatorTerm
    G: OperatorTerm
    H: OperatorTerm
    label: str = field(default="", compare=False)
    source: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        for name, term in (("F", self.F), ("G", self.G), ("H", self.H)):
            if term.arity != 3 * self.k:
                raise ArityError(f"uniform system {name} must be a {3 * self.k}-operator, "
                                 f"got arity {term.arity}")


@dataclass(frozen=True)
class ConditionalSystem:
    k: int
    E: OperatorTerm
    F: OperatorTerm
    G: OperatorTerm
    H: OperatorTerm
    label: str = field(default="", compare=False)
    domain_hint: Callable | None = field(default=None, compare=False, repr=False)
    source: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.E.arity != 3 * self.k:
            raise ArityError(f"conditional system E must be a {3 * self.k}-operator, "
                             f"got arity {self.E.arity}")
        for name, term in (("F", self.F), ("G", self.G), ("H", self.H)):
            if term.arity != 3 * self.k + 1:
                raise ArityError(f"conditional system {name} must be a {3 * self.k + 1}-operator, "
                                 f"got arity {term.arity}")

    def terms(self):
        return self.E, self.F, self.G, self.H


def _oracles(names: Sequence[RealName], k: int) -> list:
    if len(names) != k:
        raise ArityError(f"system of arity {k} given {len(names)} names")
    out = []
    for name in names:
        out.extend(name.oracles())
    return out


def eval_uniform(sys: UniformSystem, names: Sequence[RealName], t: int) -> RationalApprox:
    """(F(...)(t), G(...)(t), H(...)(t)).  Unvalidated outside the domain."""
    orc = _oracles(names, sys.k)
    return RationalApprox(O.eval_operator(sys.F, orc, t), O.eval_operator(sys.G, orc, t),
                          O.eval_operator(sys.H, orc, t))


def find_parameter(sys: ConditionalSystem, names: Sequence[RealName],
                   budget: int = DEFAULT_BUDGET) -> int:
    """Least s <= budget with E(names)(s) = 0."""
    orc = _oracles(names, sys.k)
    for s in range(budget + 1):
        if O.eval_operator(sys.E, orc, s) == 0:
            return s
    raise BudgetExhausted(budget, sys.label)


def eval_with_parameter(sys: ConditionalSystem, names: Sequence[RealName], t: int,
                        s: int) -> RationalApprox:
    """F/G/H at t with the extra argument fixed to s-hat (s is not checked)."""
    orc = _oracles(names, sys.k) + [constant_oracle(s)]
    return RationalApprox(O.eval_operator(sys.F, orc, t), O.eval_operator(sys.G, orc, t),
                          O.eval_operator(sys.H, orc, t))


def eval_conditional(sys: ConditionalSystem, names: Sequence[RealName], t: int,
                     budget: int = DEFAULT_BUDGET, s: int | None = None) -> RationalApprox:
    if s is None:
        s = find_parameter(sys, names, budget)
    return eval_with_parameter(sys, names, t, s)


def uniform_to_conditional(sys: UniformSystem) -> ConditionalSystem:
    """E = id, and F, G, H ignore the extra argument."""
    n = 3 * sys.k
    return ConditionalSystem(
        sys.k, OperatorTerm(n, X), O.reindex(sys.F, n + 1), O.reindex(sys.G, n + 1),
        O.reindex(sys.H, n + 1), label=sys.label)


def is_parameter_free(sys: ConditionalSystem) -> bool:
    """True for lifted uniform systems: E is the identity operator and
    F, G, H never read the extra argument."""
    if sys.E.root != X:
        return False
    last = 3 * sys.k + 1
    return not any(isinstance(node, Apply) and node.k == last
                   for term in (sys.F, sys.G, sys.H) for node in O.nodes(term.root))


def compose_conditional(outer: ConditionalSystem, inners: Sequence[ConditionalSystem],
                        label: str = "") -> ConditionalSystem:
    """Conditional system for outer(inner_1(xs), ..., inner_m(xs)).

    The parameter s is read as the tuple (s_1, ..., s_m, s_0) under
    right-nested Cantor pairing.  E(xs)(s) vanishes iff every inner gate
    E_i(xs)(s_i) vanishes and the outer gate vanishes at s_0 on the names
    (F_i, G_i, H_i)(xs, s_i-hat).  The constant functions s_i-hat are
    rendered as tuple projections of the operator's own variable (for E)
    or of the extra argument (for F, G, H), which is the pairing-threaded
    term after cancelling each unpair-of-pair.

    Parameter-free components (lifted uniform systems) only ever accept
    s_i = 0, so they get no slot: the tuple ranges over the remaining
    components, and a single remaining component uses s directly.  This
    keeps the least parameter of nested expressions from squaring at
    every level.
    """
    m = outer.k
    if len(inners) != m:
        raise ArityError(f"outer system of arity {m} given {len(inners)} inner systems")
    ks = {s.k for s in inners}
    if len(ks) != 1:
        raise ArityError(f"inner systems disagree on arity {sorted(ks)}")
    k = ks.pop()
    parts = list(inners) + [outer]          # position m is s_0
    active = [i for i, part in enumerate(parts) if not is_parameter_free(part)]
    slot = {i: j for j, i in enumerate(active, start=1)}
    count = len(active)

    def s_node(i: int, source: O.OpNode) -> O.OpNode:
        if i not in slot:
            return Base(B.zero(1), (source,))
        if count == 1:
            return source
        return Base(tuple_proj(slot[i], count), (source,))

    def build(outer_term: OperatorTerm, at: O.OpNode, param_source: O.OpNode) -> O.OpNode:
        """outer_term over the inner names, variable bound to ``at``."""
        memo: dict[tuple[int, int], O.OpNode] = {}
        s_nodes = [s_node(i, param_source) for i in range(m + 1)]

        def render(j: int, a: O.OpNode) -> O.OpNode:
            key = (j, id(a))
            hit = memo.get(key)
            if hit is None:
                if j == 3 * m + 1:          # the outer's own extra argument
                    hit = s_nodes[m]
                else:
                    i, c = divmod(j - 1, 3)
                    comp = (inners[i].F, inners[i].G, inners[i].H)[c]
                    inner_oracles = [(lambda z, q=q: Apply(q, z)) for q in range(1, 3 * k + 1)]
                    inner_oracles.append(lambda z, node=s_nodes[i]: node)
                    hit = O.instantiate(comp, a, inner_oracles)
                memo[key] = hit
            return hit

        oracles = [(lambda a, j=j: render(j, a)) for j in range(1, outer_term.arity + 1)]
        return O.instantiate(outer_term, at, oracles)

    gate_parts = [O.instantiate(inners[i].E, s_node(i, X)) for i in active if i < m]
    if m in slot:
        gate_parts.append(build(outer.E, s_node(m, X), X))
    if not gate_parts:
        gate = X
    elif len(gate_parts) == 1:
        gate = gate_parts[0]
    else:
        gate = Base(max_n(len(gate_parts)), tuple(gate_parts))
    E = OperatorTerm(3 * k, gate)
    a_read = Apply(3 * k + 1, X)
    F, G, H = (OperatorTerm(3 * k + 1, build(term, X, a_read)) for term in (outer.F, outer.G, outer.H))
    if not label:
        label = f"{outer.label or 'outer'}({', '.join(s.label or 'inner' for s in inners)})"
    return ConditionalSystem(k, E, F, G, H, label=label)


# -- serialization ---------------------------------------------------------

def dumps(sys: UniformSystem | ConditionalSystem) -> str:
    """Labeled-slot s-expression.  A ``:source`` slot carries the witness a
    translated system was built from, so its natives can be rebuilt."""
    from . import witnesses
    head = "uniform-system" if isinstance(sys, UniformSystem) else "conditional-system"
    lines = [f"({head} :k {sys.k}"]
    if sys.label:
        lines[0] += f" :label {encode_label(sys.label)}"
    terms = (("F", sys.F), ("G", sys.G), ("H", sys.H))
    if isinstance(sys, ConditionalSystem):
        terms = (("E", sys.E),) + terms
    for key, term in terms:
        lines.append(f"  :{key} {O.to_sexpr(term)}")
    if sys.source is not None:
        lines.append("  :source " + witnesses.dumps(sys.source).strip().replace("\n", "\n    "))
    return "\n".join(lines) + ")\n"


def _slot_k(slots, form, text) -> int:
    k = slots.get("k")
    if not isinstance(k, Atom) or not k.text.isdigit():
        raise SexprError("missing or invalid :k", form.pos, text)
    return int(k.text)


def from_form(form, text: str = "", natives: dict | None = None):
    head = form.head() if not isinstance(form, Atom) else None
    if head not in ("uniform-system", "conditional-system"):
        raise SexprError("expected (uniform-system ...) or (conditional-system ...)", form.pos, text)
    slots = keyword_slots(form, 1, text)
    k = _slot_k(slots, form, text)
    label = decode_label(slots["label"].text) if isinstance(slots.get("label"), Atom) else ""
    wanted = ("F", "G", "H") if head == "uniform-system" else ("E", "F", "G", "H")
    unknown = set(slots) - set(wanted) - {"k", "label", "source"}
    if unknown:
        raise SexprError(f"unknown slots {sorted(unknown)}", form.pos, text)
    source = None
    if "source" in slots:
        from . import witnesses
        source = witnesses.from_form(slots["source"], text, natives)
    terms = {}
    for key in wanted:
        if key not in slots:
            raise SexprError(f"missing :{key}", form.pos, text)
        arity = 3 * k if (head == "uniform-system" or key == "E") else 3 * k + 1
        terms[key] = O.term_from_sexpr(slots[key], arity, text, natives)
    if head == "uniform-system":
        return UniformSystem(k, terms["F"], terms["G"], terms["H"], label=label, source=source)
    return ConditionalSystem(k, terms["E"], terms["F"], terms["G"], terms["H"], label=label,
                             source=source)


def loads(text: str, natives: dict | None = None):
    return from_form(read(text), text, natives)
