"""Registered native helpers used by the constructions.

Each of these also has a term form in :mod:`subreal.base` (``add_term``,
``max2_term``, ``cantor_pair_term``); the natives exist because term
evaluation of addition is quadratic in its arguments.
"""
from __future__ import annotations

from functools import lru_cache
from math import isqrt

from .base import Native, lookup_native, register_family, register_native, self_majorized


def cantor_pair(a: int, b: int) -> int:
    return (a + b) * (a + b + 1) // 2 + b


def cantor_unpair(z: int) -> tuple[int, int]:
    w = (isqrt(8 * z + 1) - 1) // 2
    b = z - w * (w + 1) // 2
    return w - b, b


def tuple_encode(values) -> int:
    """Right-nested pairing: (v1, ..., vn) -> P(v1, P(v2, ... vn))."""
    values = list(values)
    code = values[-1]
    for v in reversed(values[:-1]):
        code = cantor_pair(v, code)
    return code


def tuple_decode(code: int, count: int) -> list[int]:
    out = []
    for _ in range(count - 1):
        head, code = cantor_unpair(code)
        out.append(head)
    out.append(code)
    return out


@self_majorized("add", 2, provenance="addition")
def _add(x, y):
    return x + y


@self_majorized("pair", 2, provenance="Cantor pairing")
def _pair(a, b):
    return cantor_pair(a, b)


@lru_cache(maxsize=None)
def max_n(n: int) -> Native:
    return lookup_native(f"max[{n}]")


def _max_family(arg: str) -> Native:
    n = int(arg)
    return Native(f"max[{n}]", n, lambda *xs: max(xs), lambda *xs: max(xs),
                  provenance="bounded maximum of the arguments")


def _min_family(arg: str) -> Native:
    n = int(arg)
    return Native(f"min[{n}]", n, lambda *xs: min(xs), lambda *xs: min(xs),
                  provenance="minimum of the arguments")


def _tuple_proj_family(arg: str) -> Native:
    i, count = (int(v) for v in arg.split(","))
    if not 1 <= i <= count:
        raise ValueError(f"tuple-proj[{arg}]: index out of range")
    return Native(f"tuple-proj[{i},{count}]", 1,
                  lambda z: tuple_decode(z, count)[i - 1], lambda z: z,
                  provenance=f"component {i} of a {count}-fold Cantor tuple")


def tuple_proj(i: int, count: int) -> Native:
    return lookup_native(f"tuple-proj[{i},{count}]")


register_family("max", _max_family)
register_family("min", _min_family)
register_family("tuple-proj", _tuple_proj_family)


@self_majorized("zero1", 1, provenance="constant zero")
def _zero(x):
    return 0


__all__ = ["cantor_pair", "cantor_unpair", "tuple_encode", "tuple_decode", "max_n",
           "tuple_proj", "register_native"]
