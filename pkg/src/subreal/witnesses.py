"""TZ-style witnesses: finite tuples of base functions acting on rational
approximations instead of names.

A uniform witness (d, f, g, h) promises: if |xi_i| <= t + 1 and each
(p_i - q_i)/(r_i + 1) is within 1/(d(t)+1) of xi_i, then
(f, g, h)(p1, q1, r1, ..., t) is within 1/(t+1) of the value.

A conditional witness (d0, d, e, f, g, h) adds a parameter s: coarse
approximations at precision 1/(d0(s)+1) decide acceptance via e, and
fine ones at precision 1/(d(s,t)+1) feed f, g, h.
"""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from . import base as B
from .base import ArityError, BaseFunction
from .names import RationalApprox, RealName, ball_integers, format_rational
from .sexpr import Atom, SexprError, decode_label, encode_label, keyword_slots, read
from .systems import DEFAULT_BUDGET, BudgetExhausted


@dataclass(frozen=True)
class TZUniformWitness:
    k: int
    d: BaseFunction
    f: BaseFunction
    g: BaseFunction
    h: BaseFunction
    label: str = field(default="", compare=False)
    source: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.d.arity != 1:
            raise ArityError(f"tz-uniform d must be unary, got arity {self.d.arity}")
        for name in "fgh":
            if getattr(self, name).arity != 3 * self.k + 1:
                raise ArityError(f"tz-uniform {name} must have arity {3 * self.k + 1}")


@dataclass(frozen=True)
class TZConditionalWitness:
    k: int
    d0: BaseFunction
    d: BaseFunction
    e: BaseFunction
    f: BaseFunction
    g: BaseFunction
    h: BaseFunction
    label: str = field(default="", compare=False)
    source: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        want = {"d0": 1, "d": 2, "e": 3 * self.k + 1}
        for name, arity in want.items():
            if getattr(self, name).arity != arity:
                raise ArityError(f"tz-conditional {name} must have arity {arity}, "
                                 f"got {getattr(self, name).arity}")
        for name in "fgh":
            if getattr(self, name).arity != 6 * self.k + 2:
                raise ArityError(f"tz-conditional {name} must have arity {6 * self.k + 2}")


def _reads(names: Sequence[RealName], n: int) -> list[int]:
    out = []
    for name in names:
        a = name.approx(n)
        out.extend((a.p, a.q, a.r))
    return out


def _coarse_bound(names: Sequence[RealName]) -> int:
    """max over coordinates of f_i(0), g_i(0); |xi_i| is below this plus one."""
    return max((max(nm.f(0), nm.g(0)) for nm in names), default=0)


def eval_tz_uniform(w: TZUniformWitness, names: Sequence[RealName], t: int) -> RationalApprox:
    if len(names) != w.k:
        raise ArityError(f"witness of arity {w.k} given {len(names)} names")
    t1 = max(t, _coarse_bound(names))
    xs = _reads(names, w.d(t1)) + [t1]
    return RationalApprox(w.f(*xs), w.g(*xs), w.h(*xs))


@dataclass
class TZTrace:
    s: int
    d0: int
    d: int


def eval_tz_conditional_traced(w: TZConditionalWitness, names: Sequence[RealName], t: int,
                               budget: int = DEFAULT_BUDGET) -> tuple[RationalApprox, TZTrace]:
    """Scan s' = 0, 1, ..., budget with s = max(f_i(0), g_i(0), s').

    Values of s' below the coarse bound all give the same s, so each
    distinct s is tried once.
    """
    if len(names) != w.k:
        raise ArityError(f"witness of arity {w.k} given {len(names)} names")
    floor = _coarse_bound(names)
    for s in range(floor, max(floor, budget) + 1):
        n0 = w.d0(s)
        coarse = _reads(names, n0)
        if w.e(*coarse, s) == 0:
            n = w.d(s, t)
            xs = coarse + _reads(names, n) + [s, t]
            return RationalApprox(w.f(*xs), w.g(*xs), w.h(*xs)), TZTrace(s, n0, n)
    raise BudgetExhausted(budget, w.label)


def eval_tz_conditional(w: TZConditionalWitness, names: Sequence[RealName], t: int,
                        budget: int = DEFAULT_BUDGET) -> RationalApprox:
    return eval_tz_conditional_traced(w, names, t, budget)[0]


# -- adversarial checking --------------------------------------------------

S_PROBES = (0, 1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64)


class Target:
    """The true value of the function at the checked point.

    Either exact (a Fraction) or given by ``enclose(bits)`` returning
    rationals lo <= value <= hi with hi - lo <= 2**-bits.
    """

    def __init__(self, exact: Fraction | None = None,
                 enclose: Callable[[int], tuple[Fraction, Fraction]] | None = None):
        if (exact is None) == (enclose is None):
            raise ValueError("give exactly one of exact, enclose")
        self.exact = None if exact is None else Fraction(exact)
        self.enclose = enclose

    def within(self, approx: Fraction, t: int) -> bool | None:
        """Is |approx - value| < 1/(t+1)?  None if the enclosure cannot tell."""
        eps = Fraction(1, t + 1)
        if self.exact is not None:
            return abs(approx - self.exact) < eps
        bits = max(64, 2 * (t + 1).bit_length() + 32)
        for _ in range(6):
            lo, hi = self.enclose(bits)
            if approx - eps < lo and hi < approx + eps:
                return True
            if hi <= approx - eps or lo >= approx + eps:
                return False
            bits *= 2
        return None


def _sample_approx(rng: random.Random, xi: Fraction, prec: int) -> tuple[int, int, int]:
    """Random (p, q, r) with |(p-q)/(r+1) - xi| < 1/(prec+1), often near the edge."""
    base = prec + 1
    den = rng.choice((base, 2 * base, base + rng.randint(0, base), base + 1))
    ms = ball_integers(xi, Fraction(1, base), den)
    roll = rng.random()
    if roll < 0.3:
        m = ms[0]
    elif roll < 0.6:
        m = ms[-1]
    else:
        m = ms[rng.randrange(len(ms))]
    extra = rng.choice((0, 0, 1, rng.randint(0, 9)))
    return (m + extra, extra, den - 1) if m >= 0 else (extra, extra - m, den - 1)


@dataclass
class CheckReport:
    label: str
    point: tuple
    t_max: int
    samples: int
    seed: int
    checked: int = 0
    skipped: int = 0
    s0_candidate: int | None = None
    violations: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def lines(self) -> list[str]:
        pt = ", ".join(format_rational(x) for x in self.point)
        out = [f"witness: {self.label or '(unnamed)'}",
               f"point: ({pt})  t_max={self.t_max}  samples={self.samples}  seed={self.seed}"]
        if self.samples == 0:
            return out
        out.append(f"checked: {self.checked}  skipped (premise not met): {self.skipped}")
        s0 = "none found" if self.s0_candidate is None else str(self.s0_candidate)
        out.append(f"s0 candidate: {s0} (estimated from probes; eventual acceptance cannot be proved by sampling)")
        out.extend(f"note: {n}" for n in self.notes)
        for v in self.violations:
            out.append(f"violation: s={v['s']} t={v['t']} output={v['output']} "
                       f"error>={v['kind']}")
        out.append(f"{len(self.violations)} violations")
        return out

    def replay(self) -> dict:
        return {"witness": self.label, "point": [format_rational(x) for x in self.point],
                "seed": self.seed, "t_max": self.t_max, "samples": self.samples,
                "violations": self.violations}

    def write_replay(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.replay(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def check_tz_conditional_at_point(w: TZConditionalWitness, xis: Sequence, target: Target | Fraction,
                                  t_max: int = 50, samples: int = 200, seed: int = 0,
                                  s_probes: Sequence[int] = S_PROBES) -> CheckReport:
    """Sample premises of both witness conditions at a rational point.

    Accuracy: draw s, t and approximations inside the open balls; when
    e accepts and |xi_i| <= s + 1, the output must be within 1/(t+1) of the
    target.  Every failure is a violation carrying full replay data.

    Eventual acceptance: for each probe s the coarse samples should be accepted
    from some s0 on.  The smallest such probe is reported as the s0
    candidate; rejections above it are notes, not violations, because
    the witness only promises some unknown s0.
    """
    if not isinstance(target, Target):
        target = Target(exact=target)
    xis = tuple(Fraction(x) for x in xis)
    if len(xis) != w.k:
        raise ArityError(f"witness of arity {w.k} given a point of dimension {len(xis)}")
    rng = random.Random(f"check:{seed}")
    report = CheckReport(w.label, xis, t_max, samples, seed)
    if samples <= 0:
        return report

    s_floor = max((math.ceil(abs(x)) - 1 for x in xis), default=0)
    s_floor = max(s_floor, 0)
    probes = sorted({s_floor + p for p in s_probes})

    rejected_at: dict[int, int] = {}
    for s in probes:
        n0 = w.d0(s)
        for _ in range(4):
            coarse = [v for x in xis for v in _sample_approx(rng, x, n0)]
            if w.e(*coarse, s) != 0:
                rejected_at[s] = rejected_at.get(s, 0) + 1
    accepted_from = [s for i, s in enumerate(probes) if all(p not in rejected_at for p in probes[i:])]
    report.s0_candidate = accepted_from[0] if accepted_from else None
    if report.s0_candidate is None:
        report.notes.append("every probe s rejected some coarse sample; point may lie outside the domain")

    for i in range(samples):
        t = rng.randint(0, t_max)
        if i < len(probes):
            s = probes[i]
        elif report.s0_candidate is not None and rng.random() < 0.7:
            s = report.s0_candidate + rng.randint(0, 32)
        else:
            s = s_floor + rng.randint(0, 96)
        n0 = w.d0(s)
        coarse = [v for x in xis for v in _sample_approx(rng, x, n0)]
        if w.e(*coarse, s) != 0:
            report.skipped += 1
            continue
        n = w.d(s, t)
        fine = [v for x in xis for v in _sample_approx(rng, x, n)]
        xs = coarse + fine + [s, t]
        out = RationalApprox(w.f(*xs), w.g(*xs), w.h(*xs))
        report.checked += 1
        verdict = target.within(out.value, t)
        if verdict:
            continue
        kind = "1/(t+1)" if verdict is False else "undecided"
        report.violations.append({
            "s": s, "t": t, "d0": n0, "d": n, "coarse": [str(v) for v in coarse],
            "fine": [str(v) for v in fine], "output": str(out), "kind": kind})
    report.violations.sort(key=lambda v: (v["s"], v["t"], v["output"]))
    return report


# -- serialization ---------------------------------------------------------

_COND_SLOTS = ("d0", "d", "e", "f", "g", "h")
_UNIF_SLOTS = ("d", "f", "g", "h")


def dumps(w: TZUniformWitness | TZConditionalWitness) -> str:
    from . import systems
    cond = isinstance(w, TZConditionalWitness)
    head, slots = ("tz-conditional", _COND_SLOTS) if cond else ("tz-uniform", _UNIF_SLOTS)
    lines = [f"({head} :k {w.k}"]
    if w.label:
        lines[0] += f" :label {encode_label(w.label)}"
    for name in slots:
        lines.append(f"  :{name} {B.to_sexpr(getattr(w, name))}")
    if w.source is not None:
        lines.append("  :source " + systems.dumps(w.source).strip().replace("\n", "\n    "))
    return "\n".join(lines) + ")\n"


def from_form(form, text: str = "", natives: dict | None = None):
    from . import systems, translations
    head = None if isinstance(form, Atom) else form.head()
    if head not in ("tz-conditional", "tz-uniform"):
        raise SexprError("expected (tz-conditional ...) or (tz-uniform ...)", form.pos, text)
    slots = keyword_slots(form, 1, text)
    wanted = _COND_SLOTS if head == "tz-conditional" else _UNIF_SLOTS
    unknown = set(slots) - set(wanted) - {"k", "label", "source"}
    if unknown:
        raise SexprError(f"unknown slots {sorted(unknown)}", form.pos, text)
    k = slots.get("k")
    if not isinstance(k, Atom) or not k.text.isdigit():
        raise SexprError("missing or invalid :k", form.pos, text)
    k = int(k.text)
    label = decode_label(slots["label"].text) if isinstance(slots.get("label"), Atom) else ""
    source = None
    if "source" in slots:
        # rebuilding the translation re-registers its native components
        source = systems.from_form(slots["source"], text, natives)
        built = (translations.operators_to_tz_conditional(source) if head == "tz-conditional"
                 else translations.operators_to_tz_uniform(source))
    parts = {}
    for name in wanted:
        if name not in slots:
            raise SexprError(f"missing :{name}", form.pos, text)
        parts[name] = B.from_sexpr(slots[name], text, natives)
    cls = TZConditionalWitness if head == "tz-conditional" else TZUniformWitness
    return cls(k, **parts, label=label or (built.label if source is not None else ""), source=source)


def loads(text: str, natives: dict | None = None):
    return from_form(read(text), text, natives)
