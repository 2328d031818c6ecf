import itertools
import math

import numpy as np
import pytest

from asplund import (
    MultichannelImage,
    ToleranceSpec,
    color_region_distance,
    d1_region,
    dinf_region,
    gray_region_distance,
    lip_mul,
    pixel_color_distance,
    tolerance_region_distance,
)
from asplund.metrics import _split_enumeration

from conftest import clamp_free_image


def img1(values):
    """Single-row image from a list of scalars (grey) or tuples (colour)."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, np.newaxis]
    return MultichannelImage(data=arr[np.newaxis, :, :])


def brute_force_tolerance(low, high, budget):
    """Exact minimum over all discard subsets of size <= budget."""
    n = len(low)
    best = math.inf
    for k in range(budget + 1):
        for gone in itertools.combinations(range(n), k):
            keep = [i for i in range(n) if i not in gone]
            best = min(
                best,
                math.log(max(high[i] for i in keep) / min(low[i] for i in keep)),
            )
    return best


class TestPixelColorDistance:
    def test_closed_form_ratios(self):
        d, bounds = pixel_color_distance(
            (128, 128, 128), (192, 224, 128), return_bounds=True
        )
        assert d == pytest.approx(math.log(3), rel=1e-12)
        assert bounds.mu == pytest.approx(1.0, rel=1e-12)
        assert bounds.lam == pytest.approx(3.0, rel=1e-12)

    def test_identical_colors(self):
        assert pixel_color_distance((10, 200, 30), (10, 200, 30)) == 0.0

    def test_homothetic_colors(self):
        probe = np.array([128.0, 64.0, 192.0])
        value = lip_mul(2.5, probe)
        assert pixel_color_distance(probe, value) == pytest.approx(0.0, abs=1e-9)

    def test_channel_mismatch(self):
        with pytest.raises(ValueError):
            pixel_color_distance((1, 2, 3), (1, 2))

    def test_symmetry(self, rng):
        a = rng.uniform(5, 171, size=(200, 3))
        b = rng.uniform(5, 171, size=(200, 3))
        for pa, pb in zip(a, b):
            assert pixel_color_distance(pa, pb) == pytest.approx(
                pixel_color_distance(pb, pa), abs=1e-9
            )


class TestGrayRegionDistance:
    def test_two_pixel_example(self):
        assert gray_region_distance(img1([192, 128]), img1([128, 128])) == pytest.approx(
            math.log(2), rel=1e-12
        )

    def test_identical(self):
        f = img1([10, 20, 30])
        assert gray_region_distance(f, f) == 0.0

    def test_homothety_zero(self, rng):
        g = clamp_free_image(rng, 4, 6, 1)
        for alpha in (0.2, 0.7, 1.8, 5.0):
            f = MultichannelImage(lip_mul(alpha, g.data))
            assert gray_region_distance(f, g) == pytest.approx(0.0, abs=1e-9)

    def test_requires_single_channel(self):
        f = MultichannelImage(np.full((2, 2, 3), 100.0))
        with pytest.raises(ValueError):
            gray_region_distance(f, f)

    def test_empty_region(self):
        f = img1([10, 20])
        with pytest.raises(ValueError):
            gray_region_distance(f, f, np.zeros((1, 2), dtype=bool))


class TestColorRegionDistance:
    def test_single_pixel_equals_pixel_distance(self, rng):
        probe = rng.uniform(5, 171, size=3)
        value = rng.uniform(5, 171, size=3)
        d_region, _ = color_region_distance(
            img1([tuple(probe)]), img1([tuple(value)])
        )
        assert d_region == pytest.approx(pixel_color_distance(probe, value), rel=1e-12)

    def test_homothety_zero(self, rng):
        f = clamp_free_image(rng, 5, 5, 3)
        g = MultichannelImage(lip_mul(1.7, f.data))
        d, _ = color_region_distance(f, g)
        assert d == pytest.approx(0.0, abs=1e-9)

    def test_ratio_multiset(self):
        # Three pixels built from a constant probe with thickness factors
        # 0.5, 1 and 2: the distance is ln(2 / 0.5).
        probe = img1([(128, 128, 128)] * 3)
        vals = [tuple(lip_mul(a, np.full(3, 128.0))) for a in (0.5, 1.0, 2.0)]
        d, bounds = color_region_distance(probe, img1(vals))
        assert d == pytest.approx(math.log(4), rel=1e-9)
        assert bounds.mu == pytest.approx(0.5, rel=1e-9)
        assert bounds.lam == pytest.approx(2.0, rel=1e-9)

    def test_swap_symmetry(self, rng):
        f = clamp_free_image(rng, 4, 4, 3)
        g = clamp_free_image(rng, 4, 4, 3)
        d_fg, _ = color_region_distance(f, g)
        d_gf, _ = color_region_distance(g, f)
        assert d_fg == pytest.approx(d_gf, abs=1e-9)

    def test_swapped_bounds_are_reciprocal(self, rng):
        f = clamp_free_image(rng, 3, 3, 3)
        g = clamp_free_image(rng, 3, 3, 3)
        _, b_fg = color_region_distance(f, g)
        _, b_gf = color_region_distance(g, f)
        assert b_gf.mu == pytest.approx(1 / b_fg.lam, rel=1e-9)
        assert b_gf.lam == pytest.approx(1 / b_fg.mu, rel=1e-9)

    def test_double_homothety_invariance(self, rng):
        f = clamp_free_image(rng, 4, 5, 3)
        g = clamp_free_image(rng, 4, 5, 3)
        d0, _ = color_region_distance(f, g)
        fa = MultichannelImage(lip_mul(0.8, f.data))
        gb = MultichannelImage(lip_mul(2.9, g.data))
        d1, _ = color_region_distance(fa, gb)
        assert d1 == pytest.approx(d0, abs=1e-9)

    def test_region_monotonicity(self, rng):
        f = clamp_free_image(rng, 6, 6, 3)
        g = clamp_free_image(rng, 6, 6, 3)
        small = np.zeros((6, 6), dtype=bool)
        small[1:3, 1:3] = True
        large = np.zeros((6, 6), dtype=bool)
        large[0:5, 0:5] = True
        d_small, _ = color_region_distance(f, g, small)
        d_large, _ = color_region_distance(f, g, large)
        assert d_large >= d_small - 1e-12

    def test_matches_naive_double_loop(self, rng):
        f = clamp_free_image(rng, 5, 7, 3)
        g = clamp_free_image(rng, 5, 7, 3)
        d, bounds = color_region_distance(f, g)
        ratios = []
        for r in range(5):
            for c in range(7):
                for ch in range(3):
                    num = -math.log(1 - g.data[r, c, ch] / 256.0)
                    den = -math.log(1 - f.data[r, c, ch] / 256.0)
                    ratios.append(num / den)
        assert bounds.lam == pytest.approx(max(ratios), rel=1e-12)
        assert bounds.mu == pytest.approx(min(ratios), rel=1e-12)
        assert d == pytest.approx(math.log(max(ratios) / min(ratios)), rel=1e-12)

    def test_channel_mismatch(self):
        f = MultichannelImage(np.full((2, 2, 3), 100.0))
        g = MultichannelImage(np.full((2, 2, 1), 100.0))
        with pytest.raises(ValueError):
            color_region_distance(f, g)


class TestAggregates:
    def test_identical_zero(self, rng):
        f = clamp_free_image(rng, 3, 3, 3)
        assert d1_region(f, f) == 0.0
        assert dinf_region(f, f) == 0.0

    def test_constructed_pixel_distances(self):
        # Pixel 0 has per-channel factors (1, 2) -> distance ln 2;
        # pixel 1 is homothetic -> distance 0.
        probe = img1([(128, 128), (100, 150)])
        v0 = (128.0, float(lip_mul(2, 128)))
        v1 = (float(lip_mul(1.5, 100)), float(lip_mul(1.5, 150)))
        f = img1([v0, v1])
        assert d1_region(probe, f) == pytest.approx(math.log(2) / 2, rel=1e-9)
        assert dinf_region(probe, f) == pytest.approx(math.log(2), rel=1e-9)

    def test_homothety_zero(self, rng):
        f = clamp_free_image(rng, 4, 4, 3)
        g = MultichannelImage(lip_mul(3.1, f.data))
        assert d1_region(f, g) == pytest.approx(0.0, abs=1e-9)
        assert dinf_region(f, g) == pytest.approx(0.0, abs=1e-9)

    def test_dinf_dominates_d1(self, rng):
        for _ in range(20):
            f = clamp_free_image(rng, 4, 4, 3)
            g = clamp_free_image(rng, 4, 4, 3)
            assert dinf_region(f, g) >= d1_region(f, g) - 1e-12

    def test_empty_region(self):
        f = img1([10, 20])
        with pytest.raises(ValueError):
            d1_region(f, f, np.zeros((1, 2), dtype=bool))


class TestToleranceSpec:
    @pytest.mark.parametrize("p", [0.0, -0.1, 1.2])
    def test_invalid_p(self, p):
        with pytest.raises(ValueError):
            ToleranceSpec(p=p)

    def test_budget_rounding(self):
        # Decimal fractions must not lose a discard to binary rounding.
        assert ToleranceSpec(p=0.8).discard_budget(10) == 2
        assert ToleranceSpec(p=0.98).discard_budget(1260) == 25
        assert ToleranceSpec(p=1.0).discard_budget(10) == 0
        assert ToleranceSpec(p=0.6).discard_budget(5) == 2


class TestToleranceRegionDistance:
    def test_discards_both_outliers(self):
        probe = img1([(128,)] * 5)
        vals = [tuple(lip_mul(a, np.full(1, 128.0))) for a in (0.5, 1, 1, 1, 4)]
        f = img1(vals)
        d, bounds, discarded = tolerance_region_distance(
            probe, f, tol=ToleranceSpec(p=0.6)
        )
        assert d == pytest.approx(0.0, abs=1e-9)
        assert bounds.mu == pytest.approx(1.0, rel=1e-9)
        assert bounds.lam == pytest.approx(1.0, rel=1e-9)
        assert {tuple(rc) for rc in discarded} == {(0, 0), (0, 4)}

    def test_no_discard(self):
        probe = img1([(128,)] * 5)
        vals = [tuple(lip_mul(a, np.full(1, 128.0))) for a in (0.5, 1, 1, 1, 4)]
        f = img1(vals)
        d, _, discarded = tolerance_region_distance(probe, f, tol=ToleranceSpec(p=1.0))
        assert d == pytest.approx(math.log(8), rel=1e-9)
        assert len(discarded) == 0

    def test_p_one_collapses_exactly(self, rng):
        f = clamp_free_image(rng, 4, 5, 3)
        g = clamp_free_image(rng, 4, 5, 3)
        d_plain, b_plain = color_region_distance(f, g)
        d_tol, b_tol, _ = tolerance_region_distance(f, g, tol=ToleranceSpec(p=1.0))
        assert d_tol == d_plain
        assert b_tol == b_plain

    def test_monotone_in_p(self, rng):
        f = clamp_free_image(rng, 4, 5, 3)
        g = clamp_free_image(rng, 4, 5, 3)
        dists = [
            tolerance_region_distance(f, g, tol=ToleranceSpec(p=p))[0]
            for p in (0.5, 0.7, 0.8, 0.9, 1.0)
        ]
        assert all(a <= b + 1e-12 for a, b in zip(dists, dists[1:]))

    def test_matches_brute_force(self, rng):
        for _ in range(60):
            n = int(rng.integers(3, 11))
            channels = int(rng.choice([1, 3]))
            f = clamp_free_image(rng, 1, n, channels)
            g = clamp_free_image(rng, 1, n, channels)
            budget = int(rng.integers(0, min(4, n)))
            p = 1.0 - (budget + 0.5) / n
            tol = ToleranceSpec(p=p)
            assert tol.discard_budget(n) == budget
            d, _, discarded = tolerance_region_distance(f, g, tol=tol)
            lf = -np.log(1 - g.data[0] / 256.0) / -np.log(1 - f.data[0] / 256.0)
            expected = brute_force_tolerance(lf.min(axis=1), lf.max(axis=1), budget)
            assert d == pytest.approx(expected, abs=1e-12)
            assert len(discarded) <= budget

    def test_pixel_extreme_on_both_sides_counted_once(self):
        # Pixel 2 is simultaneously the smallest low and the largest high;
        # it spends the budget once, so a second pixel is still discarded
        # and the full budget is used.
        low = np.array([1.0, 1.0, 0.2, 1.0])
        high = np.array([1.0, 1.0, 6.0, 1.0])
        d, mu, lam, discarded = _split_enumeration(low, high, 2)
        assert d == 0.0
        assert mu == lam == 1.0
        assert 2 in discarded and len(discarded) == 2

    def test_disjoint_sides_reach_mixed_optimum(self):
        # The best discard set mixes two low extremes with a high extreme
        # that is NOT among the smallest lows; only disjoint side
        # selection reaches it (keep pixel 3 alone).
        low = np.array([0.227, 0.1302, 0.483, 0.3974])
        high = np.array([1.1199, 30.2066, 4.4768, 1.8449])
        d, mu, lam, discarded = _split_enumeration(low, high, 3)
        assert d == pytest.approx(math.log(1.8449 / 0.3974), rel=1e-12)
        assert list(discarded) == [0, 1, 2]

    def test_budget_exhausts_region(self):
        low = np.array([1.0, 2.0])
        high = np.array([1.0, 2.0])
        with pytest.raises(ValueError):
            _split_enumeration(low, high, 2)

    def test_deterministic_tie_break(self):
        # Equal ratios everywhere: the discarded pixels are the first in
        # row-major order.
        low = np.ones(6)
        high = np.ones(6)
        _, _, _, discarded = _split_enumeration(low, high, 2)
        assert list(discarded) == [0, 1]
