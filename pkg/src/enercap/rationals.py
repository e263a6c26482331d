"""Exact rational helpers shared by the energy model and the solvers.

All energies, knapsack weights, and step-function coordinates are
`fractions.Fraction`; floating point only enters through explicit
conversion of trained weights (which is exact, floats are binary
rationals).
"""

import math
from fractions import Fraction

INF = float("inf")
NEG_INF = float("-inf")


def frac(x) -> Fraction:
    """Coerce ints, Fractions, and strings like '3/4' or '0.25' to Fraction.

    Floats are converted through their decimal repr so that a config value
    written as 0.1 means 1/10, not the nearest binary float.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as a rational number")


def frac_exact(x) -> Fraction:
    """Exact conversion (binary semantics for floats, used on weight arrays)."""
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


def frac_ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def frac_floor(x: Fraction) -> int:
    return x.numerator // x.denominator


def ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def frac_gcd(values) -> Fraction:
    """gcd extended to rationals: the largest rational dividing every value.

    gcd(a/b, c/d) = gcd(a*d, c*b) / (b*d).  gcd of an empty sequence or of
    all zeros is 0.
    """
    g = Fraction(0)
    for v in values:
        v = abs(v)
        if v == 0:
            continue
        if g == 0:
            g = v
            continue
        den = g.denominator * v.denominator
        g = Fraction(math.gcd(g.numerator * v.denominator,
                              v.numerator * g.denominator), den)
    return g


def frac_str(x) -> str:
    """Compact text form for reports: integers stay bare, else 'num/den'."""
    if x == INF:
        return "inf"
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"
