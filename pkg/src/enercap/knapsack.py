"""0/1 knapsack solvers for the energy projection.

greedy_solve      profit-density scan with a hard stop at the first overflow
exact_solve_dp    exact optimum by dynamic programming over weight sums
gap_certificate   a-posteriori bound on (exact - greedy), tight enough to
                  certify optimality when the remaining budget is zero or
                  all item weights coincide
project_weights   build instance -> solve -> apply selection
"""

from dataclasses import dataclass
from fractions import Fraction

from .coeffs import KnapsackInstance, apply_selection, build_knapsack
from .rationals import INF, frac_exact, frac_gcd

MAX_DP_ITEMS = 30


class InstanceTooLargeError(ValueError):
    pass


@dataclass(frozen=True)
class Selection:
    xi: tuple            # 0/1 per item
    objective: Fraction  # <values, xi>
    load: Fraction       # <weights, xi>
    remaining: Fraction  # capacity - load

    @classmethod
    def from_xi(cls, inst: KnapsackInstance, xi) -> "Selection":
        xi = tuple(int(bool(b)) for b in xi)
        objective = sum((v for v, b in zip(inst.values, xi) if b), Fraction(0))
        load = sum((w for w, b in zip(inst.weights, xi) if b), Fraction(0))
        return cls(xi, objective, load, inst.capacity - load)

    @property
    def size(self) -> int:
        return sum(self.xi)


def profit_density(inst: KnapsackInstance) -> list:
    return [INF if w == 0 else v / w
            for v, w in zip(inst.values, inst.weights)]


def greedy_order(inst: KnapsackInstance) -> list:
    """Scan order: density desc, then weight asc, then index asc.

    Zero-weight items have infinite density and sort first.
    """
    dens = profit_density(inst)
    return sorted(range(len(inst)),
                  key=lambda j: (-dens[j], inst.weights[j], j))


def greedy_solve(inst: KnapsackInstance, stop_at_overflow: bool = True) -> Selection:
    """Density-ordered greedy; by default the scan exits at the first item
    that would overflow, without trying later (smaller) items."""
    if inst.capacity < 0:
        raise ValueError("capacity must be nonnegative")
    xi = [0] * len(inst)
    load = Fraction(0)
    for j in greedy_order(inst):
        if load + inst.weights[j] > inst.capacity:
            if stop_at_overflow:
                break
            continue
        load += inst.weights[j]
        xi[j] = 1
    return Selection.from_xi(inst, xi)


def exact_solve_dp(inst: KnapsackInstance) -> Selection:
    """Exact optimum via a sparse DP over achievable weight sums.

    Weights are scaled to integers by their common denominator; states map
    scaled weight -> (best value, smallest selection mask).  Masks use item
    0 as the most significant bit so the numeric minimum is the
    lexicographically smallest optimal selection.
    """
    n = len(inst)
    if n > MAX_DP_ITEMS:
        raise InstanceTooLargeError(
            f"exact solver limited to {MAX_DP_ITEMS} items, got {n}")
    if n == 0:
        return Selection.from_xi(inst, ())

    denom = 1
    for w in inst.weights:
        denom = denom * w.denominator // _gcd(denom, w.denominator)
    wts = [int(w * denom) for w in inst.weights]
    cap = (inst.capacity.numerator * denom) // inst.capacity.denominator

    vden = 1
    for v in inst.values:
        vden = vden * v.denominator // _gcd(vden, v.denominator)
    vals = [int(v * vden) for v in inst.values]

    states = {0: (0, 0)}  # scaled weight -> (scaled value, msb-first mask)
    for j in range(n):
        bit = 1 << (n - 1 - j)
        new_states = dict(states)
        for wsum, (val, mask) in states.items():
            nw = wsum + wts[j]
            if nw > cap:
                continue
            cand = (val + vals[j], mask | bit)
            cur = new_states.get(nw)
            if cur is None or _better(cand, cur):
                new_states[nw] = cand
        states = new_states

    best = max(states.values(), key=lambda s: (s[0], -s[1]))
    xi = [(best[1] >> (n - 1 - j)) & 1 for j in range(n)]
    return Selection.from_xi(inst, xi)


def _better(a, b) -> bool:
    """Higher value wins; equal value prefers the smaller (lexicographic) mask."""
    return a[0] > b[0] or (a[0] == b[0] and a[1] < b[1])


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def gap_certificate(inst: KnapsackInstance, greedy: Selection) -> Fraction:
    """Upper bound on exact_objective - greedy_objective.

    Top_{size+1}(density) * min(max(A) - gcd(A), remaining budget); zero
    when every item is already selected.
    """
    rank = greedy.size + 1
    if rank > len(inst):
        return Fraction(0)
    dens = sorted(profit_density(inst), reverse=True)
    top = dens[rank - 1]
    slack = min(max(inst.weights) - frac_gcd(inst.weights), greedy.remaining)
    if slack == 0:
        return Fraction(0)
    if top == INF:
        raise ValueError("rank density is infinite; zero-weight item unselected")
    return top * slack


def project_weights(z_layers, coeffs, e_budget, solver: str = "greedy",
                    epsilon=None, stop_at_overflow: bool = True):
    """Nearest weight snapshot satisfying the (dense-input bound) energy budget.

    Returns (projected layer arrays, Selection, KnapsackInstance).
    """
    inst = build_knapsack(z_layers, coeffs, e_budget)
    if solver == "greedy":
        sel = greedy_solve(inst, stop_at_overflow=stop_at_overflow)
    elif solver == "exact":
        sel = exact_solve_dp(inst)
    elif solver == "approx":
        from .approx import approx_knapsack_solve
        sel = approx_knapsack_solve(inst, frac_exact(epsilon or Fraction(1, 100)))
    else:
        raise ValueError(f"unknown solver {solver!r}")
    return apply_selection(z_layers, sel.xi), sel, inst
