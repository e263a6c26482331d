"""Closed-form access counts and energy for FC/CONV inference on a systolic array.

Per-layer counting conventions (all exact):

  FC (input vector x of dim c, weight matrix c x d):
    n_mac      = joint nonzeros of (x_i, W_ij) pairs
    weights    = each nonzero loaded once per memory level
    n_cache_x  = ceil(d/s_w) * ||x||_0           (one feed per column fold)
    n_dram_x   = ceil(d/s_w) * max(0, ||x||_0 - k_x) + min(k_x, ||x||_0) + d
    n_rf_x     = d*||x||_0 + 2*||W||_0           (operand reads + accumulator traffic)

  CONV (via the unfolded h'w' x cr^2 input matrix Xbar):
    n_mac      = joint nonzeros over all output windows
    n_cache_w  = ceil(h'w'/s_h) * ||W||_0
    n_rf_w     = h'w' * ||W||_0
    n_dram_w   = ceil(h'w'/s_h) * max(0, ||W||_0 - k_w) + min(k_w, ||W||_0)
    n_cache_x  = ceil( ceil(d/s_w) * ||Xbar||_0 / groups )
    n_rf_x     = ceil( d * ||Xbar||_0 / groups ) + 2*h'w'*||W||_0
    n_dram_x   = row-granularity reload model, see dram_input_conv()

Input rows stream from DRAM in chunks of rows_per_fill = floor(k_x / (c*w));
consecutive fills advance by rows_per_fill - (r - s) rows, so each fill after
the first re-reads the r - s overlap rows.  DENSE_UPPER charges the full
c*w*(r-s) elements per overlap; EXACT_SPARSE counts the actual nonzeros in
the re-read rows.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .hardware import HardwareConfig
from .layers import LayerSpec, ShapeError, as_support
from .rationals import ceil_div, frac_ceil


class DramMode:
    DENSE_UPPER = "dense_upper"
    EXACT_SPARSE = "exact_sparse"


class CacheTooSmallError(ValueError):
    """Input cache cannot hold one sliding window of rows."""


@dataclass(frozen=True)
class LayerEnergy:
    layer_id: str
    kind: str
    n_mac: int
    n_dram_w: int
    n_cache_w: int
    n_rf_w: int
    n_dram_x: int
    n_cache_x: int
    n_rf_x: int
    e_comp: Fraction
    e_data: Fraction

    @property
    def e_total(self) -> Fraction:
        return self.e_comp + self.e_data

    def counts(self) -> dict:
        return {
            "n_mac": self.n_mac,
            "n_dram_w": self.n_dram_w,
            "n_cache_w": self.n_cache_w,
            "n_rf_w": self.n_rf_w,
            "n_dram_x": self.n_dram_x,
            "n_cache_x": self.n_cache_x,
            "n_rf_x": self.n_rf_x,
        }


@dataclass(frozen=True)
class EnergyBreakdown:
    layers: tuple
    e_comp: Fraction
    e_data: Fraction

    @property
    def e_total(self) -> Fraction:
        return self.e_comp + self.e_data


def _finalize(layer, hw, kind, n_mac, n_dram_w, n_cache_w, n_rf_w,
              n_dram_x, n_cache_x, n_rf_x) -> LayerEnergy:
    e_comp = hw.e_mac * n_mac
    e_data = (hw.e_dram * (n_dram_x + n_dram_w)
              + hw.e_cache * (n_cache_x + n_cache_w)
              + hw.e_rf * (n_rf_x + n_rf_w))
    return LayerEnergy(layer.layer_id, kind, int(n_mac), int(n_dram_w),
                       int(n_cache_w), int(n_rf_w), int(n_dram_x),
                       int(n_cache_x), int(n_rf_x), e_comp, e_data)


def fc_energy(layer: LayerSpec, w_supp, x_supp, hw: HardwareConfig) -> LayerEnergy:
    """Access counts and energy of one FC layer from its sparsity patterns."""
    if layer.kind != "fc":
        raise ValueError("fc_energy requires an fc layer")
    W = as_support(w_supp, layer.layer_id, layer.weight_shape)
    x = as_support(x_supp, layer.layer_id, layer.input_shape)
    w_nnz = int(W.sum())
    x_nnz = int(x.sum())

    n_mac = int(W[x].sum())  # rows of W gated by nonzero inputs

    folds = ceil_div(layer.d, hw.s_w)
    n_cache_x = folds * x_nnz
    n_dram_x = folds * max(0, x_nnz - hw.k_x) + min(hw.k_x, x_nnz) + layer.d
    n_rf_x = layer.d * x_nnz + 2 * w_nnz

    return _finalize(layer, hw, "fc", n_mac, w_nnz, w_nnz, w_nnz,
                     n_dram_x, n_cache_x, n_rf_x)


def unfold_support(x_supp, layer: LayerSpec):
    """Nonzero count of the im2col unfolding of an input support.

    Returns (total, per_window) where per_window[y, x] is the number of
    nonzero input elements inside the receptive field of output position
    (y, x); zero padding contributes nothing.
    """
    if layer.kind != "conv":
        raise ValueError("unfold_support requires a conv layer")
    x = as_support(x_supp, layer.layer_id, layer.input_shape)
    per_window = np.zeros((layer.h_out, layer.w_out), dtype=np.int64)
    for oy in range(layer.h_out):
        for ox in range(layer.w_out):
            y0 = oy * layer.s - layer.p
            x0 = ox * layer.s - layer.p
            ys = slice(max(0, y0), min(layer.h, y0 + layer.r))
            xs = slice(max(0, x0), min(layer.w, x0 + layer.r))
            per_window[oy, ox] = int(x[:, ys, xs].sum())
    return int(per_window.sum()), per_window


def conv_mac_count(layer: LayerSpec, W, x) -> int:
    """MACs actually executed: both operands nonzero, grouped channels respected."""
    d_per_group = layer.d // layer.groups
    c_per_group = layer.c // layer.groups
    total = 0
    for g in range(layer.groups):
        xg = x[g * c_per_group:(g + 1) * c_per_group]
        # window occupancy per (local channel, ky, kx, oy, ox)
        for j in range(g * d_per_group, (g + 1) * d_per_group):
            wj = W[j]
            if not wj.any():
                continue
            for ci in range(c_per_group):
                for ky in range(layer.r):
                    for kx in range(layer.r):
                        if not wj[ci, ky, kx]:
                            continue
                        total += _window_hits(layer, xg[ci], ky, kx)
    return total


def _window_hits(layer, chan, ky, kx) -> int:
    """Count output positions whose receptive field covers a nonzero at (ky, kx)."""
    hits = 0
    for oy in range(layer.h_out):
        iy = oy * layer.s - layer.p + ky
        if iy < 0 or iy >= layer.h:
            continue
        row = chan[iy]
        for ox in range(layer.w_out):
            ix = ox * layer.s - layer.p + kx
            if 0 <= ix < layer.w and row[ix]:
                hits += 1
    return hits


def conv_rows_per_fill(layer: LayerSpec, hw: HardwareConfig) -> int:
    """Input rows the cache holds per fill; errors out if a window won't fit."""
    rows = hw.k_x // (layer.c * layer.w)
    if rows - layer.r + layer.s <= 0:
        raise CacheTooSmallError(
            f"layer {layer.layer_id!r}: input cache too small for "
            f"row-granularity model (holds {rows} rows, kernel {layer.r}, "
            f"stride {layer.s})"
        )
    return rows


def dram_input_conv(layer: LayerSpec, x, hw: HardwareConfig, mode: str) -> int:
    """DRAM traffic for a CONV input: one load per nonzero, overlap reloads,
    and the h'w'd output writeback."""
    x_nnz = int(x.sum())
    rows = conv_rows_per_fill(layer, hw)
    advance = rows - layer.r + layer.s
    n_fills = ceil_div(layer.h, advance)
    overlap_rows = max(0, layer.r - layer.s)

    if mode == DramMode.DENSE_UPPER:
        reload_count = (n_fills - 1) * layer.c * layer.w * overlap_rows
    elif mode == DramMode.EXACT_SPARSE:
        reload_count = 0
        for fill in range(1, n_fills):
            start = fill * advance
            stop = min(layer.h, start + overlap_rows)
            if start < stop:
                reload_count += int(x[:, start:stop, :].sum())
    else:
        raise ValueError(f"unknown dram mode {mode!r}")

    return x_nnz + reload_count + layer.d * layer.h_out * layer.w_out


def conv_energy(layer: LayerSpec, w_supp, x_supp, hw: HardwareConfig,
                dram_mode: str = DramMode.DENSE_UPPER) -> LayerEnergy:
    """Access counts and energy of one CONV layer from its sparsity patterns."""
    if layer.kind != "conv":
        raise ValueError("conv_energy requires a conv layer")
    W = as_support(w_supp, layer.layer_id, layer.weight_shape)
    x = as_support(x_supp, layer.layer_id, layer.input_shape)
    w_nnz = int(W.sum())
    out_positions = layer.h_out * layer.w_out

    n_mac = conv_mac_count(layer, W, x)

    row_folds = ceil_div(out_positions, hw.s_h)
    n_cache_w = row_folds * w_nnz
    n_rf_w = out_positions * w_nnz
    n_dram_w = row_folds * max(0, w_nnz - hw.k_w) + min(hw.k_w, w_nnz)

    xbar_nnz, _ = unfold_support(x, layer)
    col_folds = ceil_div(layer.d, hw.s_w)
    n_cache_x = frac_ceil(Fraction(col_folds * xbar_nnz, layer.groups))
    n_rf_x = frac_ceil(Fraction(layer.d * xbar_nnz, layer.groups)) \
        + 2 * out_positions * w_nnz
    n_dram_x = dram_input_conv(layer, x, hw, dram_mode)

    return _finalize(layer, hw, "conv", n_mac, n_dram_w, n_cache_w, n_rf_w,
                     n_dram_x, n_cache_x, n_rf_x)


def layer_energy(layer: LayerSpec, w_supp, x_supp, hw: HardwareConfig,
                 dram_mode: str = DramMode.DENSE_UPPER) -> LayerEnergy:
    if layer.kind == "fc":
        return fc_energy(layer, w_supp, x_supp, hw)
    return conv_energy(layer, w_supp, x_supp, hw, dram_mode)


def total_energy(layers, w_supports, x_supports, hw: HardwareConfig,
                 dram_mode: str = DramMode.DENSE_UPPER) -> EnergyBreakdown:
    """Network energy: sum of per-layer breakdowns, one support pair per layer."""
    layers = list(layers)
    if not (len(layers) == len(w_supports) == len(x_supports)):
        raise ValueError("need one weight and one input support per layer")
    records = []
    for i, (layer, ws, xs) in enumerate(zip(layers, w_supports, x_supports)):
        try:
            records.append(layer_energy(layer, ws, xs, hw, dram_mode))
        except (ShapeError, CacheTooSmallError, ValueError) as err:
            err.args = (f"layer index {i}: {err}",)
            raise
    e_comp = sum((r.e_comp for r in records), Fraction(0))
    e_data = sum((r.e_data for r in records), Fraction(0))
    return EnergyBreakdown(tuple(records), e_comp, e_data)
