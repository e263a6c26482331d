"""Brute-force event replay of the systolic-array execution.

Independent oracle for the closed-form counts in energy.py: instead of
arithmetic, it walks the folds, cache fills, and MAC grid one event at a
time and increments counters.  Intended for small layers only.

Replayed policies:
  * weights/inputs stream once per fold of the non-resident matrix;
  * caches pin the first k elements seen, everything else re-streams;
  * CONV inputs arrive row-granular, each fill after the first re-reads
    the r - s trailing rows of its predecessor;
  * a MAC fires only when both operands are nonzero, but the accumulator
    slot of every nonzero weight is read and written once per pass.
"""

import numpy as np

from .energy import conv_rows_per_fill, DramMode
from .hardware import HardwareConfig
from .layers import LayerSpec, as_support


def simulate_fc(layer: LayerSpec, w_supp, x_supp, hw: HardwareConfig) -> dict:
    W = as_support(w_supp, layer.layer_id, layer.weight_shape)
    x = as_support(x_supp, layer.layer_id, layer.input_shape)
    c, d = layer.c, layer.d
    n = dict.fromkeys(
        ("n_mac", "n_dram_w", "n_cache_w", "n_rf_w",
         "n_dram_x", "n_cache_x", "n_rf_x"), 0)

    # MAC grid with zero skipping
    for i in range(c):
        for j in range(d):
            if x[i] and W[i, j]:
                n["n_mac"] += 1

    # each nonzero weight streams through every level once
    for i in range(c):
        for j in range(d):
            if W[i, j]:
                n["n_dram_w"] += 1
                n["n_cache_w"] += 1
                n["n_rf_w"] += 1

    nonzero_inputs = [i for i in range(c) if x[i]]
    resident = set(nonzero_inputs[:hw.k_x])
    col_folds = list(range(0, d, hw.s_w))
    for fold_no, _ in enumerate(col_folds):
        for i in nonzero_inputs:
            n["n_cache_x"] += 1
            if fold_no == 0 or i not in resident:
                n["n_dram_x"] += 1
    for _ in range(d):  # result writeback
        n["n_dram_x"] += 1

    for _ in range(d):  # operand read per output column
        for _ in nonzero_inputs:
            n["n_rf_x"] += 1
    for i in range(c):  # accumulator read+write per nonzero weight pass
        for j in range(d):
            if W[i, j]:
                n["n_rf_x"] += 2
    return n


def _im2col_pair(layer: LayerSpec, W, x):
    """Explicit unfolded matrices: Xbar (h'w' x c r^2), Wbar (c r^2 x d)."""
    rows = []
    for oy in range(layer.h_out):
        for ox in range(layer.w_out):
            patch = np.zeros((layer.c, layer.r, layer.r), dtype=bool)
            for ci in range(layer.c):
                for ky in range(layer.r):
                    for kx in range(layer.r):
                        iy = oy * layer.s - layer.p + ky
                        ix = ox * layer.s - layer.p + kx
                        if 0 <= iy < layer.h and 0 <= ix < layer.w:
                            patch[ci, ky, kx] = x[ci, iy, ix]
            rows.append(patch.reshape(-1))
    xbar = np.array(rows, dtype=bool)
    wbar = np.stack([W[j].reshape(-1) for j in range(layer.d)], axis=1)
    return xbar, wbar


def simulate_conv(layer: LayerSpec, w_supp, x_supp, hw: HardwareConfig,
                  dram_mode: str = DramMode.DENSE_UPPER) -> dict:
    if layer.groups != 1:
        raise ValueError("event simulator covers ungrouped convolution only")
    W = as_support(w_supp, layer.layer_id, layer.weight_shape)
    x = as_support(x_supp, layer.layer_id, layer.input_shape)
    n = dict.fromkeys(
        ("n_mac", "n_dram_w", "n_cache_w", "n_rf_w",
         "n_dram_x", "n_cache_x", "n_rf_x"), 0)

    xbar, wbar = _im2col_pair(layer, W, x)
    n_rows = xbar.shape[0]  # h'w'

    # MAC grid of the unfolded product
    for t in range(n_rows):
        for j in range(layer.d):
            for u in range(xbar.shape[1]):
                if xbar[t, u] and wbar[u, j]:
                    n["n_mac"] += 1

    nonzero_weights = [(j, u) for u in range(wbar.shape[0])
                       for j in range(layer.d) if wbar[u, j]]

    # weights re-stream once per row fold of Xbar
    row_folds = list(range(0, n_rows, hw.s_h))
    resident_w = set(nonzero_weights[:hw.k_w])
    for fold_no, _ in enumerate(row_folds):
        for jw in nonzero_weights:
            n["n_cache_w"] += 1
            if fold_no == 0 or jw not in resident_w:
                n["n_dram_w"] += 1
    for t in range(n_rows):  # operand read per unfolded row
        for _ in nonzero_weights:
            n["n_rf_w"] += 1

    # inputs re-stream once per column fold of Wbar
    xbar_nonzeros = [(t, u) for t in range(n_rows)
                     for u in range(xbar.shape[1]) if xbar[t, u]]
    for _ in range(0, layer.d, hw.s_w):
        for _ in xbar_nonzeros:
            n["n_cache_x"] += 1
    for _ in range(layer.d):
        for _ in xbar_nonzeros:
            n["n_rf_x"] += 1
    for t in range(n_rows):
        for _ in nonzero_weights:
            n["n_rf_x"] += 2

    # row-granular DRAM fills for the input
    rows_per_fill = conv_rows_per_fill(layer, hw)
    advance = rows_per_fill - layer.r + layer.s
    n_fills = -((-layer.h) // advance)
    overlap = max(0, layer.r - layer.s)
    for ci in range(layer.c):  # every nonzero loads at least once
        for iy in range(layer.h):
            for ix in range(layer.w):
                if x[ci, iy, ix]:
                    n["n_dram_x"] += 1
    for fill in range(1, n_fills):
        if dram_mode == DramMode.DENSE_UPPER:
            # the formula's overlap charge assumes dense rows, unclipped
            for _ in range(layer.c * layer.w * overlap):
                n["n_dram_x"] += 1
        else:
            start = fill * advance
            for iy in range(start, min(layer.h, start + overlap)):
                for ci in range(layer.c):
                    for ix in range(layer.w):
                        if x[ci, iy, ix]:
                            n["n_dram_x"] += 1
    for _ in range(layer.d * n_rows):  # output writeback
        n["n_dram_x"] += 1
    return n


def simulate_layer(layer: LayerSpec, w_supp, x_supp, hw: HardwareConfig,
                   dram_mode: str = DramMode.DENSE_UPPER) -> dict:
    if layer.kind == "fc":
        return simulate_fc(layer, w_supp, x_supp, hw)
    return simulate_conv(layer, w_supp, x_supp, hw, dram_mode)
