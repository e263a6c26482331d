"""Budget-bracket (1+eps) scheme for knapsack instances with few distinct weights.

Pipeline: split positive-weight items into groups sharing a weight; each
group's budget function is a w-uniform staircase; per budget bracket
b = 2^-i * n * max(w), clamp every group function onto a grid of at most
eps*b, merge the groups with (max,+)-convolutions on the inverse grids in
a binary tree, and discard levels above b.  Stitching the per-bracket
inverses (with a running max so the result stays monotone) yields an
under-approximation of the knapsack value function; backtracking the
convolution argmaxes recovers an explicit, always-feasible selection.

Grids snap onto the gcd of the weights whenever that keeps the level
count moderate, which makes those brackets exact rather than approximate;
otherwise the eps*b ceiling grid bounds the additive error by m*eps*b per
bracket.

merge_tree keeps the min-with-b capping at every node and is the entry
point for the additive-error contract; the bracket engine used by
approx_inverted_knapsack instead treats values above b as unreachable,
which is what makes the stitched inverse a true lower bound and the
reconstructed selections feasible (a min-capped bracket cannot tell
"costs exactly b" from "costs more than b" at its top).
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .knapsack import Selection
from .rationals import INF, frac_ceil, frac_exact, frac_floor, frac_gcd
from .stepfn import (StepFunction, UniformStepFunction, WeightGroup,
                     clamp_ceil, min_with, minplus_conv_uniform,
                     step_from_group, invert)

LEVEL_CAP = 4096  # max grid levels per bracket before falling back to eps*b
_INT64_LIMIT = 1 << 62


def merge_tree(fs, b, eps) -> StepFunction:
    """Approximate min{f1 (+) ... (+) fm, b} by clamping leaves onto a shared
    grid and convolving pairwise up a binary tree, capping at b throughout.

    Additive error is at most m * eps * b above the true capped convolution.
    Odd nodes at a tree level pass through unmerged.
    """
    fs = list(fs)
    if not fs:
        raise ValueError("merge_tree needs at least one step function")
    b = frac_exact(b)
    eps = frac_exact(eps)
    grid = pick_grid([y for f in fs for _, y in f.points], b, eps)
    cap_level = frac_ceil(b / grid) * grid  # on-grid stand-in for b inside the tree
    level = [clamp_ceil(f, b, eps, grid=grid) for f in fs]
    while len(level) > 1:
        merged = []
        for i in range(0, len(level) - 1, 2):
            conv = minplus_conv_uniform(level[i], level[i + 1])
            merged.append(min_with(conv, cap_level))
        if len(level) % 2:
            merged.append(level[-1])
        level = merged
    return min_with(level[0], b)


def pick_grid(finite_ys, b: Fraction, eps: Fraction) -> Fraction:
    """Grid unit <= eps*b, snapped to divide the y-value gcd when that keeps
    the level count under LEVEL_CAP (making the clamp lossless)."""
    target = eps * b
    g0 = frac_gcd(y for y in finite_ys if y != INF)
    if g0 > 0:
        snapped = g0 / frac_ceil(g0 / target) if g0 > target else g0
        if b / snapped <= LEVEL_CAP:
            return snapped
    return target


# ---------------------------------------------------------------------------
# bracket engine (threshold semantics, integer grids)


@dataclass
class _Leaf:
    group: int
    levels: list       # clamped level index per prefix count k (truncated)
    prefix_vals: list  # scaled value sums, same indexing


@dataclass
class _Node:
    inv: object        # best scaled value per level 0..cap
    left: object = None
    right: object = None
    leaf: object = None


@dataclass
class _Bracket:
    b: Fraction
    grid: Fraction
    cap: int           # floor(b / grid); levels above are unreachable
    exact: bool
    root: _Node
    leaves: list


class ApproxKnapsack:
    """Prepared approximation of one grouped instance.

    h_tilde_inv(y): achievable (approximate) value within weight budget y.
    h_tilde(x): approximate minimal budget for value x.
    witness(y): per-group prefix counts realizing h_tilde_inv(y).
    """

    def __init__(self, groups, eps, level_cap: int = LEVEL_CAP):
        if not groups:
            raise ValueError("need at least one weight group")
        eps = frac_exact(eps)
        if not 0 < eps <= 1:
            raise ValueError("eps must lie in (0, 1]")
        self.groups = list(groups)
        self.eps = eps
        self.level_cap = level_cap

        self._vden = 1
        for g in self.groups:
            for v in g.values:
                self._vden = self._vden * v.denominator // math.gcd(
                    self._vden, v.denominator)
        self._scaled_values = [
            [int(v * self._vden) for v in g.values] for g in self.groups]
        total = sum(sum(sv) for sv in self._scaled_values)
        self._use_numpy = total < _INT64_LIMIT

        n_items = sum(len(g) for g in self.groups)
        wmax = max(g.weight for g in self.groups)
        wmin = min(g.weight for g in self.groups)
        brackets = []
        b = n_items * wmax
        while b >= wmin:
            brackets.append(b)
            b = b / 2
        if not brackets:
            brackets.append(n_items * wmax)
        brackets.append(2 * n_items * wmax)  # headroom for near-total loads
        self.brackets = [self._build_bracket(bb) for bb in sorted(brackets)]
        self.h_tilde_inv = self._stitch()
        self.h_tilde = invert(self.h_tilde_inv)

    # -- construction -----------------------------------------------------

    def _bracket_grid(self, b: Fraction) -> tuple:
        gcd_w = frac_gcd(g.weight for g in self.groups)
        target = self.eps * b
        snapped = gcd_w / frac_ceil(gcd_w / target) if gcd_w > target else gcd_w
        if snapped > 0 and b / snapped <= self.level_cap:
            return snapped, True
        return target, False

    def _build_bracket(self, b: Fraction) -> _Bracket:
        grid, exact = self._bracket_grid(b)
        cap = frac_floor(b / grid)
        leaves = []
        nodes = []
        for gi, g in enumerate(self.groups):
            levels, vals = [0], [0]
            acc = 0
            for k in range(1, len(g) + 1):
                lvl = frac_ceil(k * g.weight / grid)
                if lvl > cap:
                    break
                acc += self._scaled_values[gi][k - 1]
                levels.append(lvl)
                vals.append(acc)
            leaf = _Leaf(gi, levels, vals)
            leaves.append(leaf)
            nodes.append(_Node(self._leaf_inv(leaf, cap), leaf=leaf))
        while len(nodes) > 1:
            merged = []
            for i in range(0, len(nodes) - 1, 2):
                a, c = nodes[i], nodes[i + 1]
                merged.append(_Node(self._maxplus(a.inv, c.inv, cap + 1),
                                    left=a, right=c))
            if len(nodes) % 2:
                merged.append(nodes[-1])
            nodes = merged
        return _Bracket(b, grid, cap, exact, nodes[0], leaves)

    def _leaf_inv(self, leaf: _Leaf, cap: int):
        inv = [0] * (cap + 1)
        k = 0
        best = 0
        for lvl in range(cap + 1):
            while k + 1 < len(leaf.levels) and leaf.levels[k + 1] <= lvl:
                k += 1
                if leaf.prefix_vals[k] > best:
                    best = leaf.prefix_vals[k]
            inv[lvl] = best
        if self._use_numpy:
            return np.asarray(inv, dtype=np.int64)
        return inv

    def _maxplus(self, a, c, out_len: int):
        if self._use_numpy:
            la, lc = len(a), len(c)
            out = np.zeros(min(la + lc - 1, out_len), dtype=np.int64)
            for i in range(min(la, len(out))):
                hi = min(len(out), i + lc)
                np.maximum(out[i:hi], a[i] + c[:hi - i], out=out[i:hi])
            return out
        la, lc = len(a), len(c)
        out = [0] * min(la + lc - 1, out_len)
        for i in range(min(la, len(out))):
            ai = a[i]
            limit = min(lc, len(out) - i)
            row = out
            for j in range(limit):
                s = ai + c[j]
                if s > row[i + j]:
                    row[i + j] = s
        return out

    # -- queries ----------------------------------------------------------

    def _bracket_value(self, br: _Bracket, y: Fraction) -> int:
        if y < 0:
            return 0
        lvl = min(br.cap, frac_floor(min(y, br.b) / br.grid))
        return int(br.root.inv[lvl])

    def value_at_budget(self, y) -> Fraction:
        y = frac_exact(y)
        best = max(self._bracket_value(br, y) for br in self.brackets)
        return Fraction(best, self._vden)

    def _stitch(self) -> StepFunction:
        """Upper envelope of all bracket inverses: a right-sided step function
        mapping weight budget to achievable scaled value."""
        cands = []
        for br in self.brackets:
            inv = br.root.inv
            prev = None
            for lvl in range(br.cap + 1):
                v = int(inv[lvl])
                if prev is None or v > prev:
                    cands.append((lvl * br.grid, v))
                    prev = v
        cands.sort(key=lambda p: (p[0], p[1]))
        points = []
        best = -1
        for y, v in cands:
            if v > best:
                best = v
                points.append((y, Fraction(v, self._vden)))
        return StepFunction.make(points, side="right")

    def witness(self, y) -> list:
        """Per-group prefix counts achieving value_at_budget(y); the true
        weight of the selection never exceeds y."""
        y = frac_exact(y)
        best_val = -1
        chosen = None
        for br in self.brackets:
            if y < 0:
                break
            lvl = min(br.cap, frac_floor(min(y, br.b) / br.grid))
            v = int(br.root.inv[lvl])
            if v > best_val:
                best_val = v
                chosen = (br, lvl)
        if chosen is None:
            return [(gi, 0) for gi in range(len(self.groups))]
        br, lvl = chosen
        while lvl > 0 and int(br.root.inv[lvl - 1]) == best_val:
            lvl -= 1  # cheapest level with the same value
        counts = dict.fromkeys(range(len(self.groups)), 0)
        self._backtrack(br.root, lvl, counts)
        return sorted(counts.items())

    def _backtrack(self, node: _Node, lvl: int, counts: dict):
        if node.leaf is not None:
            target = int(node.inv[lvl])
            leaf = node.leaf
            for k in range(len(leaf.levels)):
                if leaf.levels[k] <= lvl and leaf.prefix_vals[k] == target:
                    counts[leaf.group] = k
                    return
            raise AssertionError("leaf witness not found")
        target = int(node.inv[lvl])
        left_inv, right_inv = node.left.inv, node.right.inv
        for ll in range(min(lvl, len(left_inv) - 1) + 1):
            rl = lvl - ll
            if rl >= len(right_inv):
                continue
            if int(left_inv[ll]) + int(right_inv[rl]) == target:
                self._backtrack(node.left, ll, counts)
                self._backtrack(node.right, rl, counts)
                return
        raise AssertionError("no convolution split reproduces the node value")


def approx_inverted_knapsack(groups, eps, level_cap: int = LEVEL_CAP
                             ) -> ApproxKnapsack:
    """Prepare h_tilde / h_tilde_inv for grouped items; see ApproxKnapsack."""
    return ApproxKnapsack(groups, eps, level_cap)


def group_items(values, weights):
    """Group positive-weight items by distinct weight.

    Returns (group list, member index lists, zero-weight index list); group
    members are value-descending with index ties kept stable.
    """
    zero_idx = [j for j, w in enumerate(weights) if w == 0]
    by_weight = {}
    for j, w in enumerate(weights):
        if w != 0:
            by_weight.setdefault(w, []).append(j)
    groups, members = [], []
    for w in sorted(by_weight):
        idx = sorted(by_weight[w], key=lambda j: (-values[j], j))
        groups.append(WeightGroup(w, tuple(values[j] for j in idx)))
        members.append(idx)
    return groups, members, zero_idx


def approx_knapsack_solve(inst, eps, level_cap: int = LEVEL_CAP) -> Selection:
    """Near-optimal selection: zero-weight items are always taken, the rest
    are solved through the bracket scheme and reconstructed per group."""
    eps = frac_exact(eps)
    groups, members, zero_idx = group_items(inst.values, inst.weights)
    xi = [0] * len(inst)
    for j in zero_idx:
        xi[j] = 1
    if groups and inst.capacity > 0:
        ak = ApproxKnapsack(groups, eps, level_cap)
        for gi, count in ak.witness(inst.capacity):
            for j in members[gi][:count]:
                xi[j] = 1
    sel = Selection.from_xi(inst, xi)
    if sel.load > inst.capacity:
        raise AssertionError("approximate selection exceeded the capacity")
    return sel
