"""A small total language for the base class of functions on naturals.

Terms are built from the initial functions (projections, successor,
multiplication, modified subtraction, quotient) by substitution and
bounded minimization, so every term denotes a total function of
polynomial growth.  Functions that are in the class for mathematical
reasons but have no convenient term form are ``Native``: host code plus a
declared monotone majorant.

Concrete syntax::

    term := (proj N K) | (succ) | (mul) | (monus) | (quot) | (const N [ARITY])
          | (subst term term+) | (bmin term) | (native NAME)
"""
from __future__ import annotations

import re
import threading
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .sexpr import Atom, SexprError, SList, read


class ArityError(ValueError):
    """Raised when a function is built or applied with inconsistent arity."""


class MissingMajorant(ValueError):
    """A native function was asked for a majorant it does not declare."""


ParseError = SexprError


class BaseFunction:
    """A total function N^arity -> N."""

    arity: int

    def __call__(self, *args: int) -> int:
        return eval_base(self, args)

    def _eval(self, args: tuple) -> int:  # pragma: no cover - abstract
        raise NotImplementedError

    def _major(self, args: tuple) -> int:  # pragma: no cover - abstract
        raise NotImplementedError

    @property
    def term_backed(self) -> bool:
        return True

    def __str__(self):
        return to_sexpr(self)


@dataclass(frozen=True, eq=True)
class Proj(BaseFunction):
    n: int
    k: int

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise ArityError(f"(proj {self.n} {self.k}): need 1 <= K <= N")

    @property
    def arity(self):
        return self.n

    def _eval(self, args):
        return args[self.k - 1]

    _major = _eval


@dataclass(frozen=True, eq=True)
class Succ(BaseFunction):
    arity = 1

    def _eval(self, args):
        return args[0] + 1

    _major = _eval


@dataclass(frozen=True, eq=True)
class Mul(BaseFunction):
    arity = 2

    def _eval(self, args):
        return args[0] * args[1]

    _major = _eval


@dataclass(frozen=True, eq=True)
class Monus(BaseFunction):
    arity = 2

    def _eval(self, args):
        x, y = args
        return x - y if x > y else 0

    def _major(self, args):
        return args[0]


@dataclass(frozen=True, eq=True)
class Quot(BaseFunction):
    """floor(x / (y + 1))"""

    arity = 2

    def _eval(self, args):
        return args[0] // (args[1] + 1)

    def _major(self, args):
        return args[0]


@dataclass(frozen=True, eq=True)
class Subst(BaseFunction):
    outer: BaseFunction
    inners: tuple

    def __post_init__(self):
        if not self.inners:
            raise ArityError("(subst ...) needs at least one inner function")
        if self.outer.arity != len(self.inners):
            raise ArityError(
                f"(subst ...): outer has arity {self.outer.arity} "
                f"but {len(self.inners)} inner functions were given")
        arities = {f.arity for f in self.inners}
        if len(arities) != 1:
            raise ArityError(
                f"(subst ...): inner functions disagree on arity {sorted(arities)}")

    @property
    def arity(self):
        return self.inners[0].arity

    @property
    def term_backed(self):
        return self.outer.term_backed and all(f.term_backed for f in self.inners)

    def _eval(self, args):
        return self.outer._eval(tuple(f._eval(args) for f in self.inners))

    def _major(self, args):
        return self.outer._major(tuple(f._major(args) for f in self.inners))


@dataclass(frozen=True, eq=True)
class BMin(BaseFunction):
    """g(xs, y) = least z <= y with inner(xs, z) = 0, else y + 1."""

    inner: BaseFunction

    def __post_init__(self):
        if self.inner.arity < 1:
            raise ArityError("(bmin ...) needs an inner function of arity >= 1")

    @property
    def arity(self):
        return self.inner.arity

    @property
    def term_backed(self):
        return self.inner.term_backed

    def _eval(self, args):
        xs, y = args[:-1], args[-1]
        f = self.inner._eval
        for z in range(y + 1):
            if f(xs + (z,)) == 0:
                return z
        return y + 1

    def _major(self, args):
        return args[-1] + 1


@dataclass(frozen=True, eq=True)
class Const(BaseFunction):
    """Constant function; evaluates through its derived term."""

    value: int
    n: int = 1
    expansion: BaseFunction = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.value < 0 or self.n < 1:
            raise ArityError(f"(const {self.value} {self.n}): bad constant")
        if self.expansion is None:
            object.__setattr__(self, "expansion", _const_term(self.value, self.n))

    @property
    def arity(self):
        return self.n

    def _eval(self, args):
        return self.value

    _major = _eval


class Native(BaseFunction):
    """Host-implemented function with a declared monotone majorant.

    Membership in the base class is asserted, not checked.
    """

    def __init__(self, name: str, arity: int, fn: Callable[..., int],
                 majorant: Callable[..., int] | None = None,
                 provenance: str = "", cache: bool = False):
        if arity < 1:
            raise ArityError(f"native {name}: arity must be >= 1")
        self.name = name
        self.arity = arity
        self.fn = fn
        self.majorant = majorant
        self.provenance = provenance
        self._cache = {} if cache else None
        self._lock = threading.Lock()

    @property
    def term_backed(self):
        return False

    def _eval(self, args):
        if self._cache is None:
            return self.fn(*args)
        try:
            return self._cache[args]
        except KeyError:
            value = self.fn(*args)
            with self._lock:
                self._cache[args] = value
            return value

    def _major(self, args):
        if self.majorant is None:
            raise MissingMajorant(f"native {self.name} declares no majorant")
        return self.majorant(*args)

    def __eq__(self, other):
        return isinstance(other, Native) and (self.name, self.arity) == (other.name, other.arity)

    def __hash__(self):
        return hash((self.name, self.arity))

    def __repr__(self):
        return f"Native({self.name!r}, arity={self.arity})"


SUCC, MUL, MONUS, QUOT = Succ(), Mul(), Monus(), Quot()


def _check_args(f: BaseFunction, args: Sequence[int]) -> tuple:
    args = tuple(args)
    if len(args) != f.arity:
        raise ArityError(f"{to_sexpr(f)} has arity {f.arity}, got {len(args)} arguments")
    return args


def eval_base(f: BaseFunction, args: Sequence[int]) -> int:
    """Exact value of ``f`` at ``args``."""
    return f._eval(_check_args(f, args))


def majorant_eval(f: BaseFunction, args: Sequence[int]) -> int:
    """Value of the structural monotone majorant of ``f`` at ``args``."""
    return f._major(_check_args(f, args))


# -- derived terms ---------------------------------------------------------

def proj(n: int, k: int) -> Proj:
    return Proj(n, k)


def subst(outer: BaseFunction, *inners: BaseFunction) -> Subst:
    return Subst(outer, tuple(inners))


def succ_of(f: BaseFunction) -> Subst:
    return Subst(SUCC, (f,))


def zero(n: int = 1) -> Subst:
    p = Proj(n, 1)
    return Subst(MONUS, (p, p))


def _const_term(c: int, n: int) -> BaseFunction:
    if c == 0:
        return zero(n)
    if c == 1:
        return succ_of(zero(n))
    if c == 2:
        return succ_of(succ_of(zero(n)))
    half, bit = divmod(c, 2)
    doubled = Subst(MUL, (_const_term(2, n), _const_term(half, n)))
    return succ_of(doubled) if bit else doubled


def const(c: int, n: int = 1) -> Const:
    return Const(c, n)


def _sg_not(one: BaseFunction, f: BaseFunction) -> Subst:
    return Subst(MONUS, (one, f))


def add_term() -> BaseFunction:
    """x + y as a term: least z <= (x+1)(y+1) with z >= y and z - y >= x."""
    X, Y, Z = Proj(3, 1), Proj(3, 2), Proj(3, 3)
    one = const(1, 3)
    a = Subst(MONUS, (X, Subst(MONUS, (Z, Y))))
    b = Subst(MONUS, (Y, Z))
    both = Subst(MUL, (_sg_not(one, a), _sg_not(one, b)))
    cond = _sg_not(one, both)
    x, y = Proj(2, 1), Proj(2, 2)
    bound = Subst(MUL, (succ_of(x), succ_of(y)))
    return Subst(BMin(cond), (x, y, bound))


def max2_term() -> BaseFunction:
    x, y = Proj(2, 1), Proj(2, 2)
    return Subst(add_term(), (Subst(MONUS, (x, y)), y))


def min2_term() -> BaseFunction:
    x, y = Proj(2, 1), Proj(2, 2)
    return Subst(MONUS, (x, Subst(MONUS, (x, y))))


def _lift(f: BaseFunction, n: int, positions: Sequence[int]) -> BaseFunction:
    """f applied to the given 1-based projections out of n arguments."""
    return Subst(f, tuple(Proj(n, i) for i in positions))


def bounded_max(f: BaseFunction) -> BaseFunction:
    """lambda xs y. max_{z <= y} f(xs, z), built from bounded minimization."""
    k = f.arity - 1
    xs = list(range(1, k + 1))
    one = const(1, k + 2)
    # inner(xs, m, z) = 1 - (f(xs, z) - m): zero iff f(xs, z) > m
    f_at = _lift(f, k + 2, xs + [k + 2])
    exceeds = _sg_not(one, Subst(MONUS, (f_at, Proj(k + 2, k + 1))))
    first_exceed = BMin(exceeds)                      # (xs, m, y)
    # cond(xs, y, m) = (y + 1) - first_exceed(xs, m, y): zero iff no z <= y exceeds m
    cond = Subst(MONUS, (succ_of(Proj(k + 2, k + 1)),
                         _lift(first_exceed, k + 2, xs + [k + 2, k + 1])))
    search = BMin(cond)                               # (xs, y, bound)
    bound = majorant_function(f)
    return Subst(search, tuple(Proj(k + 1, i) for i in xs + [k + 1]) + (bound,))


def bounded_min(f: BaseFunction) -> BaseFunction:
    """lambda xs y. min_{z <= y} f(xs, z), built from bounded minimization."""
    k = f.arity - 1
    xs = list(range(1, k + 1))
    f_at = _lift(f, k + 2, xs + [k + 2])
    below = Subst(MONUS, (f_at, Proj(k + 2, k + 1)))  # zero iff f(xs, z) <= m
    first_below = BMin(below)                         # (xs, m, y)
    cond = Subst(MONUS, (_lift(first_below, k + 2, xs + [k + 2, k + 1]), Proj(k + 2, k + 1)))
    search = BMin(cond)                               # (xs, y, bound)
    at_zero = Subst(f, tuple(Proj(k + 1, i) for i in xs) + (zero(k + 1),))
    return Subst(search, tuple(Proj(k + 1, i) for i in xs + [k + 1]) + (at_zero,))


def cantor_pair_term() -> BaseFunction:
    """(a + b)(a + b + 1) / 2 + b as a term."""
    a_plus_b = add_term()
    prod = Subst(MUL, (a_plus_b, succ_of(a_plus_b)))
    return Subst(add_term(), (Subst(QUOT, (prod, const(1, 2))), Proj(2, 2)))


def majorant_function(f: BaseFunction) -> BaseFunction:
    """The structural majorant of ``f`` as a function in its own right."""
    if isinstance(f, (Proj, Succ, Mul, Const)):
        return f
    if isinstance(f, (Monus, Quot)):
        return Proj(2, 1)
    if isinstance(f, Subst):
        return Subst(majorant_function(f.outer),
                     tuple(majorant_function(g) for g in f.inners))
    if isinstance(f, BMin):
        return succ_of(Proj(f.arity, f.arity))
    if isinstance(f, Native):
        if f.majorant is None:
            raise MissingMajorant(f"native {f.name} declares no majorant")
        return Native(f"{f.name}^", f.arity, f.majorant, f.majorant,
                      provenance=f"majorant of {f.name}")
    raise TypeError(f"not a base function: {f!r}")


# -- native registry -------------------------------------------------------

_REGISTRY: dict[str, Native] = {}
_FAMILIES: dict[str, Callable[[str], Native]] = {}
_FAMILY_RE = re.compile(r"^([^\[\]]+)\[(.*)\]$")
_registry_lock = threading.Lock()


def register_native(f: Native) -> Native:
    with _registry_lock:
        old = _REGISTRY.get(f.name)
        if old is not None and old is not f:
            raise ValueError(f"native {f.name} already registered")
        _REGISTRY[f.name] = f
    return f


def register_family(prefix: str, factory: Callable[[str], Native]) -> None:
    """Natives named ``prefix[arg]`` are built on demand by ``factory(arg)``."""
    _FAMILIES[prefix] = factory


def lookup_native(name: str, local: dict | None = None) -> Native:
    if local and name in local:
        return local[name]
    f = _REGISTRY.get(name)
    if f is not None:
        return f
    m = _FAMILY_RE.match(name)
    if m and m.group(1) in _FAMILIES:
        f = _FAMILIES[m.group(1)](m.group(2))
        if f.name != name:
            raise ValueError(f"family {m.group(1)} built {f.name} for {name}")
        with _registry_lock:
            return _REGISTRY.setdefault(name, f)
    raise KeyError(f"unknown native function {name!r}")


def native_names() -> list[str]:
    return sorted(_REGISTRY)


# -- parsing and printing --------------------------------------------------

def _nat(atom, text: str) -> int:
    if not isinstance(atom, Atom) or not atom.text.isdigit():
        raise ParseError("expected a natural number", atom.pos, text)
    return int(atom.text)


def from_sexpr(form, text: str = "", natives: dict | None = None) -> BaseFunction:
    if not isinstance(form, SList) or form.head() is None:
        raise ParseError("expected a base function term", form.pos, text)
    head, args = form.head(), form.items[1:]

    def want(count):
        if len(args) not in count:
            raise ParseError(f"({head} ...) takes {' or '.join(map(str, count))} arguments",
                             form.pos, text)

    try:
        if head == "proj":
            want((2,))
            return Proj(_nat(args[0], text), _nat(args[1], text))
        if head in ("succ", "mul", "monus", "quot"):
            want((0,))
            return {"succ": SUCC, "mul": MUL, "monus": MONUS, "quot": QUOT}[head]
        if head == "const":
            want((1, 2))
            n = _nat(args[1], text) if len(args) == 2 else 1
            return Const(_nat(args[0], text), n)
        if head == "subst":
            if len(args) < 2:
                raise ParseError("(subst outer inner+) needs an inner term", form.pos, text)
            parts = [from_sexpr(a, text, natives) for a in args]
            return Subst(parts[0], tuple(parts[1:]))
        if head == "bmin":
            want((1,))
            return BMin(from_sexpr(args[0], text, natives))
        if head == "native":
            want((1,))
            if not isinstance(args[0], Atom):
                raise ParseError("expected a native name", args[0].pos, text)
            try:
                return lookup_native(args[0].text, natives)
            except KeyError as exc:
                raise ParseError(str(exc.args[0]), args[0].pos, text) from None
    except ArityError as exc:
        where = ParseError("", form.pos, text)
        raise ArityError(f"{exc} (in ({head} ...) at line {where.line}, column {where.col})") from None
    raise ParseError(f"unknown base function form ({head} ...)", form.pos, text)


def parse_base_function(text: str, natives: dict | None = None) -> BaseFunction:
    """Parse the s-expression syntax into a BaseFunction."""
    return from_sexpr(read(text), text, natives)


def to_sexpr(f: BaseFunction) -> str:
    if isinstance(f, Proj):
        return f"(proj {f.n} {f.k})"
    if isinstance(f, Succ):
        return "(succ)"
    if isinstance(f, Mul):
        return "(mul)"
    if isinstance(f, Monus):
        return "(monus)"
    if isinstance(f, Quot):
        return "(quot)"
    if isinstance(f, Const):
        return f"(const {f.value})" if f.n == 1 else f"(const {f.value} {f.n})"
    if isinstance(f, Subst):
        return "(subst " + " ".join(to_sexpr(g) for g in (f.outer,) + f.inners) + ")"
    if isinstance(f, BMin):
        return f"(bmin {to_sexpr(f.inner)})"
    if isinstance(f, Native):
        return f"(native {f.name})"
    raise TypeError(f"not a base function: {f!r}")


def native(name: str, arity: int, majorant=None, provenance: str = "", cache: bool = False,
           register: bool = True):
    """Decorator building (and by default registering) a Native."""
    def wrap(fn):
        f = Native(name, arity, fn, majorant, provenance, cache)
        return register_native(f) if register else f
    return wrap


def self_majorized(name: str, arity: int, provenance: str = "", register: bool = True):
    """Decorator for natives that are monotone and hence their own majorant."""
    def wrap(fn):
        f = Native(name, arity, fn, fn, provenance)
        return register_native(f) if register else f
    return wrap
