"""Exact comparisons involving rational powers.

Quantities like K^(-eps) or 4^(L/eps) are usually irrational. Everything here
either decides an inequality exactly or returns a rational bracket with a
known rounding direction.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

Number = Union[int, Fraction]

DEFAULT_PRECISION = 64


def as_fraction(x: Union[Number, str, float]) -> Fraction:
    if isinstance(x, float):
        raise TypeError("floats are not accepted where exact values are required")
    return Fraction(x)


def _log2(x: Fraction) -> float:
    return math.log2(x.numerator) - math.log2(x.denominator)


def pow_cmp(b1: Number, e1: Number, b2: Number, e2: Number) -> int:
    """Sign of b1**e1 - b2**e2 for positive bases and rational exponents."""
    b1, e1, b2, e2 = map(Fraction, (b1, e1, b2, e2))
    if b1 <= 0 or b2 <= 0:
        raise ValueError("bases must be positive")
    lhs = float(e1) * _log2(b1)
    rhs = float(e2) * _log2(b2)
    if abs(lhs - rhs) > 1e-9 * max(1.0, abs(lhs), abs(rhs)):
        return 1 if lhs > rhs else -1
    den = math.lcm(e1.denominator, e2.denominator)
    n1 = int(e1 * den)
    n2 = int(e2 * den)
    x = b1 ** n1
    y = b2 ** n2
    return (x > y) - (x < y)


def pow_le(b1: Number, e1: Number, b2: Number, e2: Number) -> bool:
    return pow_cmp(b1, e1, b2, e2) <= 0


def _iroot_ceil(num: int, den: int, k: int) -> int:
    """Smallest integer N >= 0 with N**k * den >= num."""
    if num <= 0:
        return 0
    guess = 2 ** ((math.log2(num) - math.log2(den)) / k)
    lo = max(0, int(guess) - 2)
    hi = int(guess) + 2
    while lo > 0 and lo ** k * den >= num:
        lo //= 2
    while hi ** k * den < num:
        hi *= 2
    while lo < hi:
        mid = (lo + hi) // 2
        if mid ** k * den >= num:
            hi = mid
        else:
            lo = mid + 1
    return lo


def rational_pow_upper(x: Number, e: Number, precision: int = DEFAULT_PRECISION) -> Fraction:
    """Smallest multiple of 2^-precision that is >= x**e."""
    x, e = Fraction(x), Fraction(e)
    if x <= 0:
        raise ValueError("base must be positive")
    a, b = e.numerator, e.denominator
    target = x ** a * Fraction(2) ** (precision * b)
    return Fraction(_iroot_ceil(target.numerator, target.denominator, b), 2 ** precision)


def rational_pow_lower(x: Number, e: Number, precision: int = DEFAULT_PRECISION) -> Fraction:
    """Largest multiple of 2^-precision that is <= x**e."""
    x, e = Fraction(x), Fraction(e)
    if x <= 0:
        raise ValueError("base must be positive")
    a, b = e.numerator, e.denominator
    target = x ** a * Fraction(2) ** (precision * b)
    n = _iroot_ceil(target.numerator, target.denominator, b)
    if n ** b * target.denominator > target.numerator:
        n -= 1
    return Fraction(n, 2 ** precision)


def floor_pow2(v: Number, cap: int) -> int:
    """min(floor(2**v), cap) for rational v >= 0."""
    v = Fraction(v)
    if v < 0:
        raise ValueError("exponent must be nonnegative")
    if v >= cap.bit_length() + 1:
        return cap
    a, b = v.numerator, v.denominator
    n = _iroot_ceil(2 ** a, 1, b)
    if n ** b > 2 ** a:
        n -= 1
    return min(n, cap)


def ceil_log2_pow(x: Number, e: Number) -> int:
    """Smallest integer r with 2**r >= x**e (x > 0, e rational)."""
    x, e = Fraction(x), Fraction(e)
    r = math.floor(float(e) * _log2(x)) - 1
    while pow_cmp(2, r, x, e) < 0:
        r += 1
    while pow_cmp(2, r - 1, x, e) >= 0:
        r -= 1
    return r


def ceil_fraction(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)
