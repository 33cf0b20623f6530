"""Independent reference computations used by the tests."""
from __future__ import annotations

import math
from fractions import Fraction

# y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6


def b_invariants(a1, a2, a3, a4, a6):
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    return b2, b4, b6, b8


def double_x(num: int, den: int, b) -> tuple[int, int]:
    """x(2P) from x(P) = num/den, as a reduced fraction."""
    b2, b4, b6, b8 = b
    a, d = num, den
    top = a**4 - b4 * a**2 * d**2 - 2 * b6 * a * d**3 - b8 * d**4
    bottom = d * (4 * a**3 + b2 * a**2 * d + 2 * b4 * a * d**2 + b6 * d**3)
    g = math.gcd(top, bottom)
    top, bottom = top // g, bottom // g
    if bottom < 0:
        top, bottom = -top, -bottom
    return top, bottom


def naive_x_height(num: int, den: int) -> float:
    return _log_big(max(abs(num), abs(den)))


def _log_big(m: int) -> float:
    shift = max(m.bit_length() - 900, 0)
    return math.log(m >> shift) + shift * math.log(2)


def canonical_height(x: Fraction, coeffs, steps: int = 10) -> float:
    """lim 4^-n h(x(2^n P)), with h(a/b) = log max(|a|, |b|)."""
    b = b_invariants(*coeffs)
    num, den = x.numerator, x.denominator
    value = 0.0
    for n in range(1, steps + 1):
        num, den = double_x(num, den, b)
        if den == 0:
            return 0.0  # torsion
        value = naive_x_height(num, den) / 4**n
    return value
