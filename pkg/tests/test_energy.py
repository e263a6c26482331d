import random
from fractions import Fraction

import numpy as np
import pytest

from enercap.energy import (CacheTooSmallError, DramMode, conv_energy,
                            fc_energy, total_energy, unfold_support)
from enercap.eventsim import simulate_layer
from enercap.hardware import HardwareConfig
from enercap.layers import LayerSpec, ShapeError, dense_support

UNIT_HW = HardwareConfig(e_mac=1, e_dram=2, e_cache=1, e_rf=Fraction(1, 2),
                         s_h=2, s_w=2, k_w=2, k_x=2)
CONV_HW = HardwareConfig(e_mac=1, e_dram=2, e_cache=1, e_rf=Fraction(1, 2),
                         s_h=2, s_w=2, k_w=2, k_x=6)

FC_LAYER = LayerSpec(kind="fc", c=3, d=2, layer_id="fc0")
FC_W = np.array([[1, 1], [1, 0], [0, 1]])
CONV_LAYER = LayerSpec(kind="conv", c=1, d=1, r=2, h=3, w=3, p=0, s=1,
                       layer_id="conv0")


class TestFcEnergy:
    def test_worked_example_counts(self):
        # frozen against the event simulator below
        e = fc_energy(FC_LAYER, FC_W, [1, 1, 1], UNIT_HW)
        assert e.n_mac == 4
        assert e.n_dram_w == e.n_cache_w == e.n_rf_w == 4
        assert e.n_cache_x == 3
        assert e.n_dram_x == 5
        assert e.n_rf_x == 14

    def test_worked_example_matches_simulator(self):
        e = fc_energy(FC_LAYER, FC_W, [1, 1, 1], UNIT_HW)
        sim = simulate_layer(FC_LAYER, FC_W, [1, 1, 1], UNIT_HW)
        assert e.counts() == sim

    def test_empty_weight_support(self):
        e = fc_energy(FC_LAYER, np.zeros((3, 2)), [1, 1, 1], UNIT_HW)
        assert e.e_comp == 0
        assert e.n_dram_w == e.n_cache_w == e.n_rf_w == 0

    def test_dense_input_reaches_mac_bound(self):
        e = fc_energy(FC_LAYER, FC_W, [1, 1, 1], UNIT_HW)
        assert e.n_mac == 4  # == ||W||_0

    def test_shape_mismatch_names_layer(self):
        with pytest.raises(ShapeError, match="fc0"):
            fc_energy(FC_LAYER, np.ones((2, 2)), [1, 1, 1], UNIT_HW)


class TestConvEnergy:
    def test_worked_example_counts(self):
        e = conv_energy(CONV_LAYER, dense_support((1, 1, 2, 2)),
                        dense_support((1, 3, 3)), CONV_HW)
        assert e.n_mac == 16
        assert e.n_cache_w == 8
        assert e.n_rf_w == 16
        assert e.n_dram_w == 6
        assert e.n_cache_x == 16
        assert e.n_rf_x == 48
        assert e.n_dram_x == 19  # 9 loads + 6 overlap reloads + 4 writebacks

    def test_worked_example_matches_simulator(self):
        e = conv_energy(CONV_LAYER, dense_support((1, 1, 2, 2)),
                        dense_support((1, 3, 3)), CONV_HW)
        sim = simulate_layer(CONV_LAYER, dense_support((1, 1, 2, 2)),
                             dense_support((1, 3, 3)), CONV_HW)
        assert e.counts() == sim

    def test_zero_input(self):
        e = conv_energy(CONV_LAYER, dense_support((1, 1, 2, 2)),
                        np.zeros((1, 3, 3)), CONV_HW)
        assert e.n_mac == 0
        assert unfold_support(np.zeros((1, 3, 3)), CONV_LAYER)[0] == 0

    def test_dense_input_reaches_mac_bound(self):
        # p=0, so a dense input makes every weight fire in every window
        e = conv_energy(CONV_LAYER, dense_support((1, 1, 2, 2)),
                        dense_support((1, 3, 3)), CONV_HW)
        assert e.n_mac == CONV_LAYER.h_out * CONV_LAYER.w_out * 4

    def test_cache_too_small_is_rejected(self):
        tiny = HardwareConfig(e_mac=1, e_dram=2, e_cache=1, e_rf=1,
                              s_h=2, s_w=2, k_w=2, k_x=2)
        with pytest.raises(CacheTooSmallError, match="input cache too small"):
            conv_energy(CONV_LAYER, dense_support((1, 1, 2, 2)),
                        dense_support((1, 3, 3)), tiny)

    def test_exact_sparse_counts_overlap_nonzeros(self):
        x = np.zeros((1, 3, 3))
        x[0, 1, :] = 1  # middle row only; re-read rows are 1 and 2
        e = conv_energy(CONV_LAYER, dense_support((1, 1, 2, 2)), x, CONV_HW,
                        dram_mode=DramMode.EXACT_SPARSE)
        # 3 loads + 3 reloads (row 1 on fill 1, row 2 empty) + 4 writebacks
        assert e.n_dram_x == 3 + 3 + 4
        sim = simulate_layer(CONV_LAYER, dense_support((1, 1, 2, 2)), x,
                             CONV_HW, DramMode.EXACT_SPARSE)
        assert e.counts() == sim

    def test_grouped_conv_divides_input_reuse(self):
        layer = LayerSpec(kind="conv", c=2, d=2, r=2, h=3, w=3, p=0, s=1,
                          groups=2, layer_id="g")
        hw = HardwareConfig(e_mac=1, e_dram=2, e_cache=1, e_rf=Fraction(1, 2),
                            s_h=2, s_w=2, k_w=2, k_x=12)
        e = conv_energy(layer, dense_support((2, 1, 2, 2)),
                        dense_support((2, 3, 3)), hw)
        # ||Xbar||_0 = 32, ceil(d/s_w)=1: cache_x = ceil(1*32/2) = 16
        assert e.n_cache_x == 16
        # rf_x = ceil(2*32/2) + 2*4*8 = 32 + 64
        assert e.n_rf_x == 96
        # each weight sees both channels' windows of its own group only
        assert e.n_mac == 4 * 8


class TestUnfold:
    def test_dense_window_count(self):
        total, per_window = unfold_support(dense_support((1, 3, 3)), CONV_LAYER)
        assert total == 16
        assert per_window.tolist() == [[4, 4], [4, 4]]

    def test_corner_single_nonzero(self):
        x = np.zeros((1, 3, 3))
        x[0, 0, 0] = 1
        total, per_window = unfold_support(x, CONV_LAYER)
        assert total == 1
        assert per_window[0, 0] == 1

    def test_padding_contributes_zeros(self):
        layer = LayerSpec(kind="conv", c=1, d=1, r=3, h=2, w=2, p=1, s=1)
        total, _ = unfold_support(dense_support((1, 2, 2)), layer)
        # every input cell appears in all 4 windows of the padded plane
        assert total == 16


class TestTotalEnergy:
    def test_empty_network(self):
        bd = total_energy([], [], [], UNIT_HW)
        assert bd.e_total == 0

    def test_worked_network_totals(self):
        layers = [FC_LAYER, CONV_LAYER]
        ws = [FC_W, dense_support((1, 1, 2, 2))]
        xs = [[1, 1, 1], dense_support((1, 3, 3))]
        bd = total_energy(layers, ws, xs, CONV_HW)
        assert bd.layers[0].e_total == 38
        assert bd.layers[1].e_total == 122
        assert bd.e_total == 160

    def test_reorder_invariance(self):
        layers = [FC_LAYER, CONV_LAYER]
        ws = [FC_W, dense_support((1, 1, 2, 2))]
        xs = [[1, 1, 1], dense_support((1, 3, 3))]
        fwd = total_energy(layers, ws, xs, CONV_HW).e_total
        rev = total_energy(layers[::-1], ws[::-1], xs[::-1], CONV_HW).e_total
        assert fwd == rev

    def test_error_carries_layer_index(self):
        with pytest.raises(ShapeError, match="layer index 1"):
            total_energy([FC_LAYER, CONV_LAYER],
                         [FC_W, np.ones((9, 9))],
                         [[1, 1, 1], dense_support((1, 3, 3))], CONV_HW)


def random_fc_case(rng):
    c = rng.randint(1, 6)
    d = rng.randint(1, 6)
    layer = LayerSpec(kind="fc", c=c, d=d, layer_id="rf")
    W = (np.array([[rng.random() for _ in range(d)] for _ in range(c)]) <
         rng.uniform(0.2, 1.0))
    x = np.array([rng.random() < 0.7 for _ in range(c)])
    hw = HardwareConfig(e_mac=1, e_dram=2, e_cache=1, e_rf=Fraction(1, 2),
                        s_h=rng.randint(1, 4), s_w=rng.randint(1, 4),
                        k_w=rng.randint(1, 8), k_x=rng.randint(1, 8))
    return layer, W, x, hw


def random_conv_case(rng):
    while True:
        c = rng.randint(1, 3)
        d = rng.randint(1, 3)
        h = rng.randint(2, 8)
        w = rng.randint(2, 8)
        r = rng.randint(1, min(3, h, w))
        s = rng.randint(1, r)  # keeps the overlap model in its usual regime
        p = rng.randint(0, 1)
        layer = LayerSpec(kind="conv", c=c, d=d, r=r, h=h, w=w, p=p, s=s,
                          layer_id="rc")
        rows_needed = c * w * (r - s + 1)
        k_x = rng.randint(rows_needed, rows_needed + 2 * c * w)
        hw = HardwareConfig(e_mac=1, e_dram=2, e_cache=1, e_rf=Fraction(1, 2),
                            s_h=rng.randint(1, 4), s_w=rng.randint(1, 4),
                            k_w=rng.randint(1, 10), k_x=k_x)
        W = (np.random.default_rng(rng.getrandbits(32))
             .random(layer.weight_shape) < rng.uniform(0.2, 1.0))
        x = (np.random.default_rng(rng.getrandbits(32))
             .random(layer.input_shape) < rng.uniform(0.2, 1.0))
        return layer, W, x, hw


class TestSimulatorEquivalence:
    def test_random_fc_layers(self):
        rng = random.Random(1001)
        for _ in range(150):
            layer, W, x, hw = random_fc_case(rng)
            e = fc_energy(layer, W, x, hw)
            assert e.counts() == simulate_layer(layer, W, x, hw)

    def test_random_conv_layers_both_modes(self):
        rng = random.Random(2002)
        for _ in range(60):
            layer, W, x, hw = random_conv_case(rng)
            for mode in (DramMode.DENSE_UPPER, DramMode.EXACT_SPARSE):
                e = conv_energy(layer, W, x, hw, mode)
                assert e.counts() == simulate_layer(layer, W, x, hw, mode), \
                    (layer, mode)


class TestInvariants:
    def test_breakdown_identity(self):
        rng = random.Random(3003)
        for _ in range(40):
            layer, W, x, hw = random_fc_case(rng)
            e = fc_energy(layer, W, x, hw)
            recomputed = (hw.e_dram * (e.n_dram_x + e.n_dram_w)
                          + hw.e_cache * (e.n_cache_x + e.n_cache_w)
                          + hw.e_rf * (e.n_rf_x + e.n_rf_w))
            assert e.e_data == recomputed
            assert e.e_comp == hw.e_mac * e.n_mac

    def test_monotonicity_under_support_clearing(self):
        rng = random.Random(4004)
        for _ in range(25):
            layer, W, x, hw = random_conv_case(rng)
            for mode in (DramMode.DENSE_UPPER, DramMode.EXACT_SPARSE):
                base = conv_energy(layer, W, x, hw, mode)
                nz = np.argwhere(W)
                if len(nz):
                    W2 = W.copy()
                    W2[tuple(nz[rng.randrange(len(nz))])] = False
                    less = conv_energy(layer, W2, x, hw, mode)
                    for key, val in less.counts().items():
                        assert val <= base.counts()[key]
                    assert less.e_total <= base.e_total
                nzx = np.argwhere(x)
                if len(nzx):
                    x2 = x.copy()
                    x2[tuple(nzx[rng.randrange(len(nzx))])] = False
                    less = conv_energy(layer, W, x2, hw, mode)
                    for key, val in less.counts().items():
                        assert val <= base.counts()[key]
                    assert less.e_total <= base.e_total
