"""Linearize the energy constraint in the weight-support size and build the
equivalent 0/1 knapsack instance.

With the input side frozen (mask fixed) and compute energy taken at its
dense-input bound, a layer's energy is piecewise linear in n = ||W||_0:

    E(n) = a1 * min(k, n) + a2 * max(0, n - k) + a3 * n + a4

The min/max pair comes from weight-cache spill (CONV only, k = k_w); a3
collects every per-nonzero-weight cost; a4 the weight-independent input
side.  The projection of Z onto {E <= budget} then maximizes <Z*Z, xi>
subject to <A, xi> <= budget - sum(a4), where item j weighs a1 + a3 if
Z_j is among its layer's top-k magnitudes and a2 + a3 otherwise.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .energy import DramMode, dram_input_conv, unfold_support
from .hardware import HardwareConfig
from .layers import LayerSpec, as_support
from .rationals import ceil_div, frac_ceil, frac_exact


class InfeasibleBudgetError(ValueError):
    def __init__(self, budget, floor):
        self.budget = budget
        self.floor = floor
        super().__init__(
            f"energy budget {budget} is below the weight-independent floor "
            f"sum(a4) = {floor}; no weight support can satisfy it"
        )


@dataclass(frozen=True)
class InputStats:
    """Frozen input-side access counts of one layer."""
    x_nnz: int
    xbar_nnz: int  # im2col nonzeros; equals x_nnz for fc
    n_dram_x: int
    n_cache_x: int
    n_rf_x_const: int  # operand-read part of RF input traffic


@dataclass(frozen=True)
class LayerCoeffs:
    alpha1: Fraction
    alpha2: Fraction
    alpha3: Fraction
    alpha4: Fraction
    k: int

    def __post_init__(self):
        for name in ("alpha1", "alpha2", "alpha3", "alpha4"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.alpha1 > self.alpha2:
            raise ValueError("alpha1 <= alpha2 is required")
        if self.k < 0:
            raise ValueError("k must be nonnegative")

    def energy_at(self, n: int) -> Fraction:
        """Dense-input-bound energy of the layer at weight support size n."""
        return (self.alpha1 * min(self.k, n)
                + self.alpha2 * max(0, n - self.k)
                + self.alpha3 * n
                + self.alpha4)


def fixed_input_stats(layer: LayerSpec, x_supp, hw: HardwareConfig,
                      dram_mode: str = DramMode.DENSE_UPPER) -> InputStats:
    x = as_support(x_supp, layer.layer_id, layer.input_shape)
    x_nnz = int(x.sum())
    if layer.kind == "fc":
        folds = ceil_div(layer.d, hw.s_w)
        n_dram = folds * max(0, x_nnz - hw.k_x) + min(hw.k_x, x_nnz) + layer.d
        return InputStats(x_nnz, x_nnz, n_dram, folds * x_nnz,
                          layer.d * x_nnz)
    xbar_nnz, _ = unfold_support(x, layer)
    col_folds = ceil_div(layer.d, hw.s_w)
    n_cache = frac_ceil(Fraction(col_folds * xbar_nnz, layer.groups))
    n_rf = frac_ceil(Fraction(layer.d * xbar_nnz, layer.groups))
    n_dram = dram_input_conv(layer, x, hw, dram_mode)
    return InputStats(x_nnz, xbar_nnz, n_dram, n_cache, n_rf)


def extract_coefficients(layer: LayerSpec, hw: HardwareConfig,
                         stats: InputStats) -> LayerCoeffs:
    alpha4 = (hw.e_dram * stats.n_dram_x
              + hw.e_cache * stats.n_cache_x
              + hw.e_rf * stats.n_rf_x_const)
    if layer.kind == "fc":
        alpha3 = hw.e_mac + hw.e_dram + hw.e_cache + 3 * hw.e_rf
        return LayerCoeffs(Fraction(0), Fraction(0), alpha3, alpha4, 0)
    out_positions = layer.h_out * layer.w_out
    row_folds = ceil_div(out_positions, hw.s_h)
    alpha1 = hw.e_dram
    alpha2 = hw.e_dram * row_folds
    alpha3 = (hw.e_mac * out_positions
              + hw.e_cache * row_folds
              + 3 * hw.e_rf * out_positions)
    return LayerCoeffs(alpha1, alpha2, alpha3, alpha4, hw.k_w)


def coefficients_for_network(layers, x_supports, hw: HardwareConfig,
                             dram_mode: str = DramMode.DENSE_UPPER) -> list:
    return [
        extract_coefficients(layer, hw, fixed_input_stats(layer, xs, hw, dram_mode))
        for layer, xs in zip(layers, x_supports)
    ]


@dataclass(frozen=True)
class KnapsackInstance:
    """Flattened projection problem: maximize <values, xi> s.t. <weights, xi> <= capacity."""
    values: tuple      # Fraction, the squared weight snapshot entries
    weights: tuple     # Fraction, per Eq.-10-style top-k weighting
    capacity: Fraction
    layer_of: tuple    # item index -> layer index
    layer_sizes: tuple

    def __post_init__(self):
        if len(self.values) != len(self.weights):
            raise ValueError("values and weights must have equal length")
        if self.capacity < 0:
            raise ValueError("capacity must be nonnegative")

    def __len__(self):
        return len(self.values)


def _exact_scalar(v) -> Fraction:
    return frac_exact(v.item() if hasattr(v, "item") else v)


def top_k_indices(flat_abs, k: int):
    """Indices of the k largest magnitudes; rank ties go to lower flat index."""
    order = sorted(range(len(flat_abs)), key=lambda j: (-flat_abs[j], j))
    return set(order[:k])


def build_knapsack(z_layers, coeffs, e_budget) -> KnapsackInstance:
    """Assemble the projection knapsack from per-layer weight snapshots."""
    e_budget = frac_exact(e_budget)
    floor = sum((c.alpha4 for c in coeffs), Fraction(0))
    capacity = e_budget - floor
    if capacity < 0:
        raise InfeasibleBudgetError(e_budget, floor)

    values, weights, layer_of, sizes = [], [], [], []
    for li, (z, cf) in enumerate(zip(z_layers, coeffs)):
        flat = [_exact_scalar(v) for v in np.asarray(z).reshape(-1)]
        sizes.append(len(flat))
        in_top = top_k_indices([abs(v) for v in flat], cf.k)
        for j, zj in enumerate(flat):
            values.append(zj * zj)
            weights.append(cf.alpha1 + cf.alpha3 if j in in_top
                           else cf.alpha2 + cf.alpha3)
            layer_of.append(li)
    return KnapsackInstance(tuple(values), tuple(weights), capacity,
                            tuple(layer_of), tuple(sizes))


def apply_selection(z_layers, xi) -> list:
    """Keep selected entries of each snapshot, zero the rest."""
    out, pos = [], 0
    for z in z_layers:
        z = np.asarray(z)  # dtype preserved so exact snapshots stay exact
        take = np.asarray(xi[pos:pos + z.size], dtype=bool).reshape(z.shape)
        out.append(np.where(take, z, z * 0))
        pos += z.size
    if pos != len(xi):
        raise ValueError("selection length does not match snapshot size")
    return out
