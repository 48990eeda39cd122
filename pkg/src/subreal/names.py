"""Names of real numbers and the K normal form.

A triple (f, g, h) of unary functions names xi when
|(f(n) - g(n)) / (h(n) + 1) - xi| < 1 / (n + 1) for every n.
"""
from __future__ import annotations

import itertools
import math
import random
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .base import register_native, Native
from .operators import FunctionOracle


def monus(x: int, y: int) -> int:
    return x - y if x > y else 0


def round_half_up(x: Fraction) -> int:
    return math.floor(x + Fraction(1, 2))


@dataclass(frozen=True)
class RationalApprox:
    """(p - q) / (r + 1)."""

    p: int
    q: int
    r: int

    @property
    def value(self) -> Fraction:
        return Fraction(self.p - self.q, self.r + 1)

    def __str__(self):
        return f"{self.p}:{self.q}:{self.r}"

    @classmethod
    def parse(cls, text: str) -> "RationalApprox":
        parts = text.strip().split(":")
        if len(parts) != 3 or not all(p.isdigit() for p in parts):
            raise ValueError(f"expected p:q:r, got {text!r}")
        return cls(*(int(p) for p in parts))

    @classmethod
    def of(cls, value: Fraction, r: int) -> "RationalApprox":
        """Numerator for denominator r + 1 nearest to ``value`` (ties up)."""
        m = round_half_up(Fraction(value) * (r + 1))
        return cls(max(m, 0), max(-m, 0), r)


_RATIONAL = re.compile(r"^\s*([+-]?)(\d+)(?:/(\d+))?\s*$")
_DECIMAL = re.compile(r"^\s*([+-]?)(\d*)\.(\d+)\s*$")


def parse_rational(text: str) -> Fraction:
    """``NUM/DEN`` with optional sign, an integer, or an exact decimal."""
    m = _RATIONAL.match(text)
    if m:
        sign, num, den = m.groups()
        den = int(den) if den else 1
        if den == 0:
            raise ValueError(f"zero denominator in {text!r}")
        value = Fraction(int(num), den)
        return -value if sign == "-" else value
    m = _DECIMAL.match(text)
    if m:
        sign, whole, frac = m.groups()
        value = Fraction(int(whole or "0") * 10 ** len(frac) + int(frac), 10 ** len(frac))
        return -value if sign == "-" else value
    raise ValueError(f"not a rational number: {text!r}")


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class RealName:
    f: FunctionOracle
    g: FunctionOracle
    h: FunctionOracle

    def approx(self, n: int) -> RationalApprox:
        return RationalApprox(self.f(n), self.g(n), self.h(n))

    def oracles(self) -> tuple:
        return (self.f, self.g, self.h)

    def names_at(self, xi: Fraction, n: int) -> bool:
        return abs(self.approx(n).value - xi) < Fraction(1, n + 1)


@dataclass(frozen=True)
class SpecialName:
    """(f, g, id) with f(n) * g(n) == 0."""

    f: FunctionOracle
    g: FunctionOracle

    def as_name(self) -> RealName:
        return RealName(self.f, self.g, identity_oracle())


def validate_at(name: RealName, xi: Fraction, n_max: int) -> list[int]:
    """Indices n <= n_max at which ``name`` fails to name ``xi``."""
    xi = Fraction(xi)
    return [n for n in range(n_max + 1) if not name.names_at(xi, n)]


def ehelp(p: int, q: int, r: int, n: int) -> int:
    """floor((n + 1)(p -. q) / (r + 1) + 1/2)"""
    return (2 * (n + 1) * monus(p, q) + r + 1) // (2 * (r + 1))


EHELP = register_native(Native(
    "ehelp", 4, ehelp, lambda p, q, r, n: (n + 1) * p + 1,
    provenance="ehelp(p,q,r,n) = floor((n+1)(p-q)/(r+1) + 1/2)"))


def constant_oracle(s: int) -> FunctionOracle:
    return FunctionOracle(lambda x: s, majorant=lambda x: s, name=f"const{s}")


def identity_oracle() -> FunctionOracle:
    return FunctionOracle(lambda x: x, majorant=lambda x: x, name="id")


def apply_K(name: RealName) -> SpecialName:
    """(K(f,g,h), K(g,f,h)) with K(f,g,h)(n) = ehelp(f(2n+1), g(2n+1), h(2n+1), n)."""
    f, g, h = name.f, name.g, name.h
    return SpecialName(
        FunctionOracle(lambda n: ehelp(f(2 * n + 1), g(2 * n + 1), h(2 * n + 1), n), name="K(f,g,h)"),
        FunctionOracle(lambda n: ehelp(g(2 * n + 1), f(2 * n + 1), h(2 * n + 1), n), name="K(g,f,h)"))


def name_of_rational(value) -> RealName:
    """Canonical name: f(n) = round((n+1)|v|) on the sign side, h = id."""
    value = Fraction(value)
    mag = abs(value)
    bound = math.ceil(mag) + 1

    def side(n):
        return round_half_up((n + 1) * mag)

    def nothing(n):
        return 0

    pos, neg = (side, nothing) if value >= 0 else (nothing, side)
    label = format_rational(value)
    return RealName(FunctionOracle(pos, lambda n: (n + 1) * bound, f"f[{label}]"),
                    FunctionOracle(neg, lambda n: (n + 1) * bound, f"g[{label}]"),
                    identity_oracle())


def approx_from_name(name: RealName, n: int) -> RationalApprox:
    return name.approx(n)


def _strict_integers(lo: Fraction, hi: Fraction) -> range:
    """Integers m with lo < m < hi."""
    return range(math.floor(lo) + 1, math.ceil(hi))


def ball_integers(xi: Fraction, eps: Fraction, den: int) -> range:
    """Numerators m with |m / den - xi| < eps."""
    return _strict_integers((xi - eps) * den, (xi + eps) * den)


def enumerate_special_prefix(xis: Sequence, n: int) -> set[tuple]:
    """All (x1, y1, ..., xk, yk) with |x_i - y_i - (n+1) xi_i| < 1 and x_i y_i = 0."""
    per_coord = []
    for xi in xis:
        ms = ball_integers(Fraction(xi) * (n + 1), Fraction(1), 1)
        per_coord.append([(m, 0) if m >= 0 else (0, -m) for m in ms])
    return {tuple(itertools.chain.from_iterable(combo)) for combo in itertools.product(*per_coord)}


def random_name(xi, seed: int | str = 0, special: bool = False, boundary: float = 0.3) -> RealName:
    """A valid, deterministic, non-canonical name of the rational ``xi``.

    Each index draws its own approximation from a generator seeded by
    (seed, n).  With probability ``boundary`` the numerator sits at an
    extreme of the open ball.  ``special`` forces h = id and f(n) g(n) = 0.
    """
    xi = Fraction(xi)
    bound = math.ceil(abs(xi)) + 1
    cache: dict[int, tuple[int, int, int]] = {}

    def triple(n: int):
        hit = cache.get(n)
        if hit is not None:
            return hit
        rng = random.Random(f"{seed}:{n}")
        r = n if special else rng.randint(n, 3 * n + 2)
        ms = ball_integers(xi, Fraction(1, n + 1), r + 1)
        roll = rng.random()
        if roll < boundary / 2:
            m = ms[0]
        elif roll < boundary:
            m = ms[-1]
        else:
            m = rng.choice(ms)
        extra = 0 if special else rng.choice((0, 0, 1, 2, 3))
        out = (m + extra, extra, r) if m >= 0 else (extra, extra - m, r)
        cache[n] = out
        return out

    def maj(n):
        return bound * (3 * n + 3) + 3

    tag = f"{format_rational(xi)}#{seed}"
    h = identity_oracle() if special else FunctionOracle(lambda n: triple(n)[2], lambda n: 3 * n + 2, f"h[{tag}]")
    return RealName(FunctionOracle(lambda n: triple(n)[0], maj, f"f[{tag}]"),
                    FunctionOracle(lambda n: triple(n)[1], maj, f"g[{tag}]"), h)


def magnitude_bound(name: RealName) -> int:
    """max(f(0), g(0)) + 1, which strictly exceeds |xi| for any named xi."""
    return max(name.f(0), name.g(0)) + 1
