"""Exhaustive reference computations for small instances.

These are the slow-but-obvious counterparts of the production solvers:
full subset enumeration for knapsack objectives and for the budget step
function, and a direct-definition (min,+)-convolution.  Everything is
exact (integer-scaled or Fraction arithmetic).
"""

import math
from fractions import Fraction

import numpy as np

from .coeffs import KnapsackInstance
from .rationals import INF


def _int_scale(fracs):
    denom = 1
    for f in fracs:
        denom = denom * f.denominator // math.gcd(denom, f.denominator)
    return [int(f * denom) for f in fracs], denom


def subset_sums(values_int) -> np.ndarray:
    """Array of all 2^n subset sums, index = bitmask (bit j = item j)."""
    sums = np.zeros(1, dtype=np.int64)
    for v in values_int:
        sums = np.concatenate([sums, sums + v])
    return sums


def enumerate_knapsack_best(inst: KnapsackInstance) -> Fraction:
    """Optimal objective by checking every subset (n <= ~20)."""
    n = len(inst)
    if n == 0:
        return Fraction(0)
    wts, wden = _int_scale(list(inst.weights))
    vals, vden = _int_scale(list(inst.values))
    cap = (inst.capacity.numerator * wden) // inst.capacity.denominator
    wsums = subset_sums(wts)
    vsums = subset_sums(vals)
    feasible = wsums <= cap
    best = int(vsums[feasible].max())
    return Fraction(best, vden)


def enumerate_budget_function(values, weights):
    """Breakpoints of x -> min subset weight with value >= x, by enumeration.

    Returns a list [(x, y)] suitable for StepFunction(points, tail=INF):
    starts at (0, 0), ends at (sum(values), min full-cover weight).
    """
    values = [Fraction(v) for v in values]
    weights = [Fraction(w) for w in weights]
    vals, vden = _int_scale(values)
    wts, wden = _int_scale(weights)
    vsums = subset_sums(vals)
    wsums = subset_sums(wts)
    order = np.lexsort((wsums, vsums))  # by value, then weight
    points = [(Fraction(0), Fraction(0))]
    best_w = None
    # scan subsets by decreasing value; running min weight gives h at each value
    pairs = []
    for idx in order[::-1]:
        v = int(vsums[idx])
        w = int(wsums[idx])
        if best_w is None or w < best_w:
            best_w = w
            pairs.append((v, w))
    # pairs: value desc, weight strictly desc; h(x) = weight of the cheapest
    # subset with value >= x
    for v, w in reversed(pairs):
        if v == 0:
            continue
        points.append((Fraction(v, vden), Fraction(w, wden)))
    # collapse duplicate weights (keep the largest value per weight level)
    collapsed = [points[0]]
    for x, y in points[1:]:
        if collapsed and collapsed[-1][1] == y:
            collapsed[-1] = (x, y)
        else:
            collapsed.append((x, y))
    return collapsed


def minplus_reference(f, g):
    """Direct-definition (min,+)-convolution of nondecreasing step functions.

    Evaluates min over f's levels of f(x') + g(x - x') at every candidate
    breakpoint sum.  Returns a new StepFunction.
    """
    from .stepfn import StepFunction

    candidates = sorted({xf + xg for xf, _ in f.points for xg, _ in g.points})
    points = []
    for x in candidates:
        points.append((x, _conv_value_at(f, g, x)))
    if f.tail == INF and g.tail == INF:
        tail = INF
    else:
        tail = min(
            f.points[0][1] + g.tail if g.tail != INF else INF,
            g.points[0][1] + f.tail if f.tail != INF else INF,
        )
    return StepFunction.make(points, tail=tail)


def _conv_value_at(f, g, x):
    best = INF
    for xf, yf in f.points:
        cand = yf + g(x - xf) if g(x - xf) != INF else INF
        best = min(best, cand)
    if f.tail != INF:
        best = min(best, f.tail + g.points[0][1])
    for xg, yg in g.points:
        cand = yg + f(x - xg) if f(x - xg) != INF else INF
        best = min(best, cand)
    if g.tail != INF:
        best = min(best, g.tail + f.points[0][1])
    return best
