"""Shared generators for property tests.

Everything takes an explicit ``random.Random`` so the same code can be
driven by hypothesis (``st.randoms()``) or by a plain seeded loop.
"""
import random
from fractions import Fraction

from subreal import base as B
from subreal import operators as O
from subreal.library import max_n
from subreal.names import ball_integers

# add_term/max2_term loop up to their inputs, so they stay out of positions
# that can receive large values; min2_term is loop-free.
SMALL = [B.SUCC, B.MUL, B.MONUS, B.QUOT, B.min2_term()]


def random_base_term(rng: random.Random, depth: int, arity: int, allow_bmin: bool = True):
    """Term-backed base function; bounded minimisation only sees raw inputs
    (never the output of another function) so loops stay short."""
    if depth <= 0 or rng.random() < 0.25:
        roll = rng.random()
        if roll < 0.6:
            return B.Proj(arity, rng.randint(1, arity))
        if roll < 0.8:
            return B.Const(rng.randint(0, 5), arity)
        if arity == 1:
            return B.SUCC
        return B.Subst(rng.choice(SMALL[1:4]), (B.Proj(arity, rng.randint(1, arity)),
                                                B.Proj(arity, rng.randint(1, arity))))
    roll = rng.random()
    if allow_bmin and roll < 0.2:
        return B.BMin(random_base_term(rng, depth - 1, arity, allow_bmin=False))
    outer_arity = rng.randint(1, 3)
    outer = _outer(rng, depth - 1, outer_arity)
    inners = tuple(random_base_term(rng, depth - 1, arity, allow_bmin) for _ in range(outer.arity))
    return B.Subst(outer, inners)


def _outer(rng, depth, arity):
    if rng.random() < 0.6:
        choices = [f for f in SMALL if f.arity == arity]
        if choices:
            return rng.choice(choices)
    return random_base_term(rng, min(depth, 2), arity, allow_bmin=False)


def random_operator_node(rng: random.Random, depth: int, arity: int):
    if depth <= 0 or rng.random() < 0.2:
        return O.X
    roll = rng.random()
    if roll < 0.45:
        return O.Apply(rng.randint(1, arity), random_operator_node(rng, depth - 1, arity))
    f = rng.choice([B.SUCC, B.MUL, B.MONUS, B.QUOT, B.lookup_native("add"), max_n(2)])
    return O.Base(f, tuple(random_operator_node(rng, depth - 1, arity) for _ in range(f.arity)))


def random_operator_term(rng: random.Random, depth: int = 5, max_arity: int = 3):
    arity = rng.randint(1, max_arity)
    return O.OperatorTerm(arity, random_operator_node(rng, depth, arity))


def random_majorant(rng: random.Random):
    """A monotone g as a pair (callable, description)."""
    a, b, c = rng.randint(1, 3), rng.randint(0, 5), rng.randint(0, 1)
    return (lambda n: c * n * n + a * n + b), (a, b, c)


def random_oracle(rng_seed: str, g):
    """Deterministic oracle dominated by g."""
    def f(n):
        return random.Random(f"{rng_seed}:{n}").randint(0, g(n))
    return O.FunctionOracle(f, g)


def perturbed_oracle(base: O.FunctionOracle, above: int, seed: str, g):
    """Agrees with ``base`` up to ``above`` and is redrawn afterwards."""
    def f(n):
        if n <= above:
            return base(n)
        return random.Random(f"{seed}:alt:{n}").randint(0, g(n))
    return O.FunctionOracle(f, g)


def random_rational(rng: random.Random, lo=-10, hi=10, max_den: int = 50) -> Fraction:
    den = rng.randint(1, max_den)
    return Fraction(rng.randint(lo * den, hi * den), den)


def in_ball(xi: Fraction, n: int, num: int, r: int) -> bool:
    return abs(Fraction(num, r + 1) - xi) < Fraction(1, n + 1)


__all__ = ["random_base_term", "random_operator_term", "random_majorant", "random_oracle",
           "perturbed_oracle", "random_rational", "ball_integers", "in_ball"]
