"""Reference enclosures of elementary function values at rational points.

Pure ``Fraction`` arithmetic: Taylor partial sums with explicit Lagrange
remainder bounds for exp, sin and cos, the atanh series for ln, and
integer square roots for sqrt.  Nothing here touches the operator
pipeline or the kernels in :mod:`subreal.elementary`; tests use these
functions to judge that pipeline.

Every ``*_enclosure(x, bits)`` returns rationals lo <= f(x) <= hi with
hi - lo <= 2**-bits.
"""
from __future__ import annotations

import math
from fractions import Fraction
from math import isqrt

Interval = tuple[Fraction, Fraction]


def _outward(lo: Fraction, hi: Fraction, bits: int) -> Interval:
    """Round to dyadics with denominator 2**bits, widening the interval."""
    scale = 1 << bits
    return (Fraction(math.floor(lo * scale), scale), Fraction(math.ceil(hi * scale), scale))


def _exp_small(y: Fraction, bits: int) -> Interval:
    """|y| <= 1/2.  Remainder after N terms is at most 2|y|^N / N!."""
    tol = Fraction(1, 1 << (bits + 4))
    total, term, n = Fraction(0), Fraction(1), 0
    while True:
        total += term
        n += 1
        term = term * y / n
        if 2 * abs(term) <= tol:
            rem = 2 * abs(term)
            return total - rem, total + rem


def exp_enclosure(x, bits: int = 64) -> Interval:
    x = Fraction(x)
    j = 0
    while abs(x) / (1 << j) > Fraction(1, 2):
        j += 1
    guard = bits + 8 + 2 * j + int(abs(x)).bit_length() * 2
    lo, hi = _exp_small(x / (1 << j), guard)
    lo, hi = _outward(lo, hi, guard)
    for _ in range(j):
        lo, hi = _outward(lo * lo, hi * hi, guard)
    width = hi - lo
    while width > Fraction(1, 1 << bits):
        # precision loss from squaring: retry with more guard bits
        guard *= 2
        lo, hi = _exp_small(x / (1 << j), guard)
        lo, hi = _outward(lo, hi, guard)
        for _ in range(j):
            lo, hi = _outward(lo * lo, hi * hi, guard)
        width = hi - lo
    return lo, hi


def _atanh_series(z: Fraction, bits: int) -> Interval:
    """atanh z for 0 <= z <= 1/3; tail after the z^(2N-1) term is below
    z^(2N+1) / ((2N+1)(1 - z^2))."""
    tol = Fraction(1, 1 << (bits + 4))
    total = Fraction(0)
    power = z
    n = 0
    while True:
        total += power / (2 * n + 1)
        n += 1
        power = power * z * z
        tail = power / ((2 * n + 1) * (1 - z * z))
        if tail <= tol:
            return total, total + tail


def ln2_enclosure(bits: int = 64) -> Interval:
    lo, hi = _atanh_series(Fraction(1, 3), bits + 2)
    return 2 * lo, 2 * hi


def ln_enclosure(x, bits: int = 64) -> Interval:
    """ln x = k ln 2 + 2 atanh((m-1)/(m+1)) with x = 2^k m, m in [2/3, 4/3]."""
    x = Fraction(x)
    if x <= 0:
        raise ValueError("ln of a non-positive number")
    k = 0
    m = x
    while m > Fraction(4, 3):
        m /= 2
        k += 1
    while m < Fraction(2, 3):
        m *= 2
        k -= 1
    z = (m - 1) / (m + 1)
    extra = abs(k).bit_length() + 4
    a_lo, a_hi = _atanh_series(abs(z), bits + extra)
    if z < 0:
        a_lo, a_hi = -a_hi, -a_lo
    l_lo, l_hi = ln2_enclosure(bits + extra)
    if k >= 0:
        lo, hi = k * l_lo + 2 * a_lo, k * l_hi + 2 * a_hi
    else:
        lo, hi = k * l_hi + 2 * a_lo, k * l_lo + 2 * a_hi
    return lo, hi


def _sin_cos_series(x: Fraction, bits: int, start: int) -> Interval:
    """sum of (-1)^i x^(2i+start)/(2i+start)!; Lagrange remainder |x|^n/n!."""
    tol = Fraction(1, 1 << (bits + 4))
    total = Fraction(0)
    n = start
    term = Fraction(x) ** start / math.factorial(start)
    sign = 1
    while True:
        total += sign * term
        term = term * x * x / ((n + 1) * (n + 2))
        n += 2
        sign = -sign
        if abs(term) <= tol:
            rem = abs(term)
            return total - rem, total + rem


def sin_enclosure(x, bits: int = 64) -> Interval:
    return _sin_cos_series(Fraction(x), bits, 1)


def cos_enclosure(x, bits: int = 64) -> Interval:
    return _sin_cos_series(Fraction(x), bits, 0)


def sqrt_enclosure(x, bits: int = 64) -> Interval:
    x = Fraction(x)
    if x < 0:
        raise ValueError("sqrt of a negative number")
    scale = 1 << bits
    root = isqrt(math.floor(x * scale * scale))
    return Fraction(root, scale), Fraction(root + 1, scale)


ENCLOSURES = {
    "exp": exp_enclosure,
    "ln": ln_enclosure,
    "sin": sin_enclosure,
    "cos": cos_enclosure,
    "sqrt": sqrt_enclosure,
}


def enclosure_of(fn: str, x) -> callable:
    """``bits -> (lo, hi)`` for the named function at ``x``."""
    f = ENCLOSURES[fn]
    return lambda bits: f(x, bits)


def within(approx, enclose, t: int) -> bool:
    """Decide |approx - value| < 1/(t+1) from an enclosure; raises if undecidable."""
    approx = Fraction(approx)
    eps = Fraction(1, t + 1)
    bits = 2 * (t + 1).bit_length() + 32
    for _ in range(8):
        lo, hi = enclose(bits)
        if approx - eps < lo and hi < approx + eps:
            return True
        if hi <= approx - eps or lo >= approx + eps:
            return False
        bits *= 2
    raise ArithmeticError("enclosure too coarse to decide")
