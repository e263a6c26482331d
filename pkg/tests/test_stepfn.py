import random
from fractions import Fraction

import pytest

from enercap.oracle import enumerate_budget_function, minplus_reference
from enercap.rationals import INF, NEG_INF
from enercap.stepfn import (StepFunction, UniformStepFunction, UnitMismatchError,
                            WeightGroup, clamp_ceil, invert, min_with,
                            minplus_conv_uniform, step_from_group,
                            threshold_above)

F = Fraction


def group_fn(weight, values):
    return step_from_group(WeightGroup(F(weight), tuple(F(v) for v in values)))


class TestStepFromGroup:
    def test_two_item_example(self):
        h = group_fn(2, [3, 2])
        assert h.points == ((F(0), F(0)), (F(3), F(2)), (F(5), F(4)))
        assert h(F(0)) == 0 and h(F(-1)) == 0
        assert h(F(1)) == 2 and h(F(3)) == 2
        assert h(F(4)) == 4 and h(F(5)) == 4
        assert h(F(6)) == INF

    def test_single_item(self):
        h = group_fn(1, [5])
        assert h.points == ((F(0), F(0)), (F(5), F(1)))

    def test_unit_values(self):
        h = group_fn(1, [1, 1, 1])
        assert h(F(5, 2)) == 3

    def test_matches_enumeration(self):
        rng = random.Random(3)
        for _ in range(50):
            w = F(rng.randint(1, 5), rng.randint(1, 3))
            vals = sorted((F(rng.randint(0, 9)) for _ in range(rng.randint(1, 5))),
                          reverse=True)
            h = group_fn(w, vals)
            pts = enumerate_budget_function(vals, [w] * len(vals))
            ref = StepFunction.make(pts, tail=INF)
            assert h.points == ref.points

    def test_unsorted_values_rejected(self):
        with pytest.raises(ValueError, match="descending"):
            WeightGroup(F(1), (F(1), F(2)))


class TestInvert:
    def test_inverse_of_group_example(self):
        inv = invert(group_fn(2, [3, 2]))
        assert inv(F(2)) == 3
        assert inv(F(3)) == 3
        assert inv(F(4)) == 5
        assert inv(F(100)) == 5  # everything achievable at a huge budget
        assert inv(F(0)) == 0
        assert inv(F(-1)) == NEG_INF

    def test_single_step(self):
        f = StepFunction.make([(F(0), F(0)), (F(5), F(1))])
        inv = invert(f)
        assert inv(F(1)) == 5
        assert inv(F(1, 2)) == 0

    def test_double_inversion_roundtrip(self):
        rng = random.Random(7)
        for _ in range(60):
            vals = sorted((F(rng.randint(0, 8)) for _ in range(rng.randint(1, 5))),
                          reverse=True)
            f = group_fn(rng.randint(1, 4), vals)
            again = invert(invert(f))
            assert again.points == f.points and again.tail == f.tail

    def test_roundtrip_with_finite_tail(self):
        f = min_with(group_fn(2, [3, 2]), F(2))
        again = invert(invert(f))
        assert again.points == f.points and again.tail == f.tail


class TestUniformConv:
    def test_two_single_item_groups(self):
        f = group_fn(1, [3])
        g = group_fn(1, [2])
        conv = minplus_conv_uniform(f, g)
        assert conv(F(3)) == 1
        assert conv(F(4)) == 2
        assert conv(F(5)) == 2
        assert conv(F(6)) == INF

    def test_zero_function_is_neutral(self):
        f = group_fn(1, [4, 2])
        zero = UniformStepFunction.make_uniform([(F(0), F(0))], F(1))
        conv = minplus_conv_uniform(f, zero)
        assert conv.points == f.points and conv.tail == f.tail

    def test_commutativity_random(self):
        rng = random.Random(13)
        for _ in range(40):
            w = F(rng.randint(1, 3))
            f = group_fn(w, sorted((F(rng.randint(0, 6)) for _ in range(3)),
                                   reverse=True))
            g = group_fn(w, sorted((F(rng.randint(0, 6)) for _ in range(2)),
                                   reverse=True))
            a = minplus_conv_uniform(f, g)
            b = minplus_conv_uniform(g, f)
            assert a.points == b.points and a.tail == b.tail

    def test_agrees_with_subset_enumeration(self):
        rng = random.Random(17)
        for _ in range(40):
            w = F(rng.randint(1, 3))
            v1 = sorted((F(rng.randint(0, 7)) for _ in range(rng.randint(1, 3))),
                        reverse=True)
            v2 = sorted((F(rng.randint(0, 7)) for _ in range(rng.randint(1, 3))),
                        reverse=True)
            conv = minplus_conv_uniform(group_fn(w, v1), group_fn(w, v2))
            pts = enumerate_budget_function(v1 + v2, [w] * (len(v1) + len(v2)))
            ref = StepFunction.make(pts, tail=INF)
            assert conv.points == ref.points

    def test_agrees_with_direct_reference(self):
        rng = random.Random(19)
        for _ in range(30):
            w = F(rng.randint(1, 3))
            f = group_fn(w, sorted((F(rng.randint(0, 6)) for _ in range(2)),
                                   reverse=True))
            g = group_fn(w, sorted((F(rng.randint(0, 6)) for _ in range(3)),
                                   reverse=True))
            fast = minplus_conv_uniform(f, g)
            ref = minplus_reference(f, g)
            assert fast.points == ref.points and fast.tail == ref.tail

    def test_unit_mismatch_rejected(self):
        with pytest.raises(UnitMismatchError):
            minplus_conv_uniform(group_fn(1, [2]), group_fn(2, [2]))


class TestClampCeil:
    def test_level_rounding_example(self):
        f = StepFunction.make([(F(0), F(0)), (F(1), F(3))])
        out = clamp_ceil(f, b=F(4), eps=F(1, 2))
        assert out(F(1)) == 4  # ceil(3/2)*2

    def test_exact_multiples_unchanged(self):
        f = group_fn(2, [3, 2])  # values already multiples of eps*b = 2
        out = clamp_ceil(f, b=F(4), eps=F(1, 2))
        assert out(F(3)) == f(F(3))
        assert out(F(5)) == 4  # capped at b

    def test_pointwise_sandwich(self):
        rng = random.Random(29)
        for _ in range(60):
            vals = sorted((F(rng.randint(0, 9)) for _ in range(rng.randint(1, 5))),
                          reverse=True)
            f = group_fn(F(rng.randint(1, 4), rng.randint(1, 2)), vals)
            b = F(rng.randint(1, 30), rng.randint(1, 2))
            eps = F(1, rng.randint(1, 6))
            out = clamp_ceil(f, b, eps)
            probes = [x for x, _ in f.points] + [f.points[-1][0] + 1]
            for x in probes:
                lo = min(f(x), b)
                assert lo <= out(x) <= lo + eps * b

    def test_level_count_bound(self):
        f = group_fn(F(1, 7), [9, 8, 7, 6, 5, 4, 3, 2, 1])
        eps = F(1, 5)
        out = clamp_ceil(f, b=F(2), eps=eps)
        levels = {y for _, y in out.points} | {out.tail}
        assert len(levels) <= 5 + 2  # ceil(1/eps) + 1 plus the INF-free tail


class TestThresholdAbove:
    def test_drops_unreachable_levels(self):
        f = group_fn(2, [3, 2])
        t = threshold_above(f, F(2))
        assert t(F(3)) == 2
        assert t(F(4)) == INF

    def test_keeps_everything_below(self):
        f = group_fn(2, [3, 2])
        t = threshold_above(f, F(100))
        assert t.points == f.points and t.tail == f.tail
