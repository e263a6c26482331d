"""Nondecreasing step functions as breakpoint lists, plus the operations the
budget-bracket approximation needs: inversion, uniform (min,+)-convolution
via (max,+) on the inverse grid, and clamp-and-ceil uniformization.

Two evaluation conventions share one representation:

  side='left'   f(x) = y_i on (x_{i-1}, x_i], y_1 for x <= x_1, `tail` after
                the last breakpoint.  Budget functions (weight as a function
                of required value) live here; tail INF means "not achievable".
  side='right'  f(x) = y_i on [x_i, x_{i+1}), NEG_INF before the first
                breakpoint, and y_L from the last breakpoint on.  Inverses
                (value as a function of weight budget) live here.

invert() maps between the two and is an exact graph involution.
"""

import bisect
from dataclasses import dataclass
from fractions import Fraction

from .rationals import INF, NEG_INF, frac_ceil, frac_exact, frac_gcd


class UnitMismatchError(ValueError):
    pass


def _canonical_left(points, tail):
    pts = sorted(((frac_exact(x), y) for x, y in points),
                 key=lambda p: (p[0], p[1]))
    kept = []
    for x, y in pts:
        if kept and kept[-1][0] == x:
            continue  # duplicate x: the smaller y (first) wins
        if kept and y < kept[-1][1]:
            raise ValueError("step function must be nondecreasing")
        if kept and y == kept[-1][1]:
            kept[-1] = (x, y)  # same level extends to the larger x
        else:
            kept.append((x, y))
    while kept and kept[-1][1] == tail:
        kept.pop()
    if not kept and pts:
        kept = [(pts[0][0], tail)]  # constant function, keep an anchor
    return tuple(kept)


def _canonical_right(points):
    pts = sorted(points, key=lambda p: (p[0] if p[0] != INF else INF,))
    kept = []
    for u, v in pts:
        if kept and kept[-1][0] == u:
            kept[-1] = (u, max(kept[-1][1], v))
            continue
        if kept and v == kept[-1][1]:
            continue  # same value: the earlier u already covers [u, ...)
        kept.append((u, v))
    return tuple(kept)


@dataclass(frozen=True)
class StepFunction:
    points: tuple
    tail: object = INF
    side: str = "left"

    @classmethod
    def make(cls, points, tail=INF, side="left") -> "StepFunction":
        if side == "left":
            return cls(_canonical_left(points, tail), tail, "left")
        return cls(_canonical_right(points), tail, "right")

    def __post_init__(self):
        if self.side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")
        if not self.points:
            raise ValueError("step function needs at least one breakpoint")

    def __call__(self, x):
        xs = [p[0] for p in self.points]
        if self.side == "left":
            i = bisect.bisect_left(xs, x)
            if i == len(xs):
                return self.tail
            return self.points[i][1]
        i = bisect.bisect_right(xs, x) - 1
        if i < 0:
            return NEG_INF
        return self.points[i][1]

    @property
    def last_finite_y(self):
        ys = [y for _, y in self.points if y != INF]
        if self.tail != INF:
            ys.append(self.tail)
        return max(ys) if ys else None

    def graph_equal(self, other) -> bool:
        return (self.side == other.side and self.points == other.points
                and self.tail == other.tail)


@dataclass(frozen=True)
class UniformStepFunction(StepFunction):
    """Step function whose finite values are multiples of a common unit."""
    unit: Fraction = Fraction(1)

    def __post_init__(self):
        super().__post_init__()
        if self.unit <= 0:
            raise ValueError("unit must be positive")
        for _, y in self.points:
            if y != INF and (y / self.unit).denominator != 1:
                raise ValueError(f"value {y} is not a multiple of unit {self.unit}")
        if self.tail != INF and (self.tail / self.unit).denominator != 1:
            raise ValueError("tail is not a multiple of the unit")

    @classmethod
    def make_uniform(cls, points, unit, tail=INF) -> "UniformStepFunction":
        return cls(_canonical_left(points, tail), tail, "left", unit)

    @property
    def top_level(self) -> int:
        """Largest finite level index (value / unit)."""
        return int(self.last_finite_y / self.unit)


def invert(f: StepFunction) -> StepFunction:
    """Exact generalized inverse.

    left f:  f_inv(y) = max {x : f(x) <= y}   (a right-sided function)
    right g: g_inv(x) = min {y : g(y) >= x}   (a left-sided function)

    invert(invert(f)) reproduces f's graph exactly.
    """
    if f.side == "left":
        pts = []
        for x, y in f.points:  # canonical: one point per level, max x
            pts.append((y, x))
        if f.tail != INF:
            pts.append((f.tail, INF))
        return StepFunction.make(pts, tail=INF, side="right")
    pts = []
    tail = INF
    for u, v in f.points:
        if v == INF:
            tail = u
            break
        pts.append((v, u))
    return StepFunction.make(pts, tail=tail, side="left")


@dataclass(frozen=True)
class WeightGroup:
    """Items sharing one knapsack weight, values sorted descending."""
    weight: Fraction
    values: tuple

    def __post_init__(self):
        if self.weight <= 0:
            raise ValueError("group weight must be positive")
        vals = tuple(frac_exact(v) for v in self.values)
        if any(v < 0 for v in vals):
            raise ValueError("group values must be nonnegative")
        if any(vals[i] < vals[i + 1] for i in range(len(vals) - 1)):
            raise ValueError("group values must be sorted in descending order")
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return len(self.values)


def step_from_group(group: WeightGroup) -> UniformStepFunction:
    """Budget function of one group: taking the k best items costs k*weight.

    Breakpoints (0, 0), (v1, w), (v1+v2, 2w), ...; INF past the total value.
    """
    if not group.values:
        raise ValueError("group must contain at least one item")
    points = [(Fraction(0), Fraction(0))]
    acc = Fraction(0)
    for i, v in enumerate(group.values):
        acc += v
        points.append((acc, (i + 1) * group.weight))
    return UniformStepFunction.make_uniform(points, group.weight)


def min_with(f: StepFunction, bound) -> StepFunction:
    """Pointwise min with a constant."""
    bound = frac_exact(bound)
    pts = [(x, min(y, bound)) for x, y in f.points]
    tail = bound if f.tail == INF else min(f.tail, bound)
    if isinstance(f, UniformStepFunction):
        unit = f.unit
        if (bound / unit).denominator == 1:
            return UniformStepFunction.make_uniform(pts, unit, tail=tail)
        return StepFunction.make(pts, tail=tail)
    return StepFunction.make(pts, tail=tail)


def threshold_above(f: StepFunction, bound) -> StepFunction:
    """Values above the bound become unreachable (INF tail) instead of capped."""
    bound = frac_exact(bound)
    pts = [(x, y) for x, y in f.points if y <= bound]
    tail = f.tail if (f.tail != INF and f.tail <= bound and
                      len(pts) == len(f.points)) else INF
    if not pts:
        raise ValueError("threshold would make the function unreachable everywhere")
    if isinstance(f, UniformStepFunction):
        return UniformStepFunction.make_uniform(pts, f.unit, tail=tail)
    return StepFunction.make(pts, tail=tail)


def uniform_inverse_grid(f: UniformStepFunction, top_level: int) -> list:
    """f_inv evaluated at level*unit for level = 0..top_level."""
    inv = invert(f)
    return [inv(level * f.unit) for level in range(top_level + 1)]


def minplus_conv_uniform(f: UniformStepFunction, g: UniformStepFunction,
                         ) -> UniformStepFunction:
    """(min,+)-convolution of two same-unit uniform step functions.

    Works on the inverse side: (f (+) g)^-1(y) = max over grid splits of
    f^-1(y') + g^-1(y - y'), evaluated for y on the shared unit grid, then
    inverted back.
    """
    if not isinstance(f, UniformStepFunction) or not isinstance(g, UniformStepFunction):
        raise UnitMismatchError("uniform convolution needs uniform step functions")
    if f.unit != g.unit:
        raise UnitMismatchError(f"unit mismatch: {f.unit} vs {g.unit}")
    w = f.unit
    lf, lg = f.top_level, g.top_level
    inv_f = uniform_inverse_grid(f, lf)
    inv_g = uniform_inverse_grid(g, lg)
    grid = _maxplus_grid(inv_f, inv_g)
    return function_from_inverse_grid(grid, w)


def _maxplus_grid(inv_f: list, inv_g: list) -> list:
    """(max,+)-convolution of two inverse-value grids; NEG_INF = unreachable."""
    lf, lg = len(inv_f) - 1, len(inv_g) - 1
    out = []
    for level in range(lf + lg + 1):
        best = NEG_INF
        for a in range(max(0, level - lg), min(lf, level) + 1):
            xa, xb = inv_f[a], inv_g[level - a]
            if xa == NEG_INF or xb == NEG_INF:
                continue
            if xa == INF or xb == INF:
                best = INF
                break
            cand = xa + xb
            if best == NEG_INF or cand > best:
                best = cand
        out.append(best)
    return out


def function_from_inverse_grid(grid: list, unit: Fraction) -> UniformStepFunction:
    """Rebuild the left-sided function whose inverse takes grid[l] at l*unit."""
    points = []
    tail = INF
    for level, x in enumerate(grid):
        if x == NEG_INF:
            continue
        if x == INF:
            tail = level * unit
            break
        points.append((x, level * unit))
    if not points:
        raise ValueError("inverse grid defines no finite breakpoints")
    return UniformStepFunction.make_uniform(points, unit, tail=tail)


def clamp_ceil(f: StepFunction, b, eps, grid=None) -> UniformStepFunction:
    """Uniformize by ceiling onto a grid after capping at b.

    f'(x) = ceil(min(b, f(x)) / grid) * grid with grid defaulting to eps*b,
    so f <= f' <= min(f, b) + grid wherever f(x) <= b, and at most
    ceil(b/grid) + 1 distinct levels overall.
    """
    b = frac_exact(b)
    eps = frac_exact(eps)
    if b <= 0:
        raise ValueError("clamp bound must be positive")
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    g = frac_exact(grid) if grid is not None else eps * b

    def snap(y):
        capped = b if y == INF else min(b, y)
        return frac_ceil(capped / g) * g

    pts = [(x, snap(y)) for x, y in f.points]
    tail = snap(f.tail)
    return UniformStepFunction.make_uniform(pts, g, tail=tail)
