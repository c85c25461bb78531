"""
Test cases for blend simulation and enhancement metrics
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add the project root to Python path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

service_dir = project_root / "contrast-enhancement-service"
sys.path.insert(0, str(service_dir))

from models.evaluator import (
    CYAN,
    LABEL_HEIGHT,
    MethodMetrics,
    MetricsReport,
    blend,
    comparison_grid,
    display_light,
    enhanced_mask,
    enhancement_percentage,
    evaluate_frame,
    merge_metrics,
    overlay_image,
    simulate_blend,
)
from utils.colorspace import delta_e, linear_to_lab, linear_to_srgb, srgb_to_linear
from utils.raster import RasterImage, RasterShapeError


def rgba(colors):
    """1xN opaque RGBA image from a list of RGB colors"""
    pixels = np.array([[(*c, 255) for c in colors]], dtype=np.uint8)
    return RasterImage(pixels)


def rgb(colors):
    return RasterImage(np.array([colors], dtype=np.uint8))


class TestBlend:
    def test_black_display_keeps_background(self):
        bg = np.array([0.2, 0.3, 0.4])
        np.testing.assert_array_equal(blend(np.zeros(3), bg), bg)

    def test_black_background_keeps_display(self):
        d = np.array([0.7, 0.1, 0.0])
        np.testing.assert_array_equal(blend(d, np.zeros(3)), d)

    def test_clamps_at_ceiling(self):
        np.testing.assert_allclose(blend([0.7, 0.0, 0.0], [0.6, 0.0, 0.0]), [1.0, 0.0, 0.0])

    def test_commutative(self):
        a, b = np.array([0.1, 0.5, 0.2]), np.array([0.3, 0.2, 0.6])
        np.testing.assert_array_equal(blend(a, b), blend(b, a))

    def test_transparent_display_shows_background(self):
        display = RasterImage(np.zeros((2, 2, 4), dtype=np.uint8))
        bg = np.full((2, 2, 3), 0.25)
        result = simulate_blend(display, bg)
        np.testing.assert_allclose(srgb_to_linear(result.rgb), bg, atol=3e-3)

    def test_size_mismatch(self):
        with pytest.raises(RasterShapeError):
            simulate_blend(rgba([(10, 10, 10)]), np.zeros((2, 2, 3)))

    def test_monotone_per_channel_below_ceiling(self):
        rng = np.random.default_rng(15)
        display = rng.uniform(0.0, 0.45, size=(5_000, 3))
        bg = rng.uniform(0.0, 0.45, size=(5_000, 3))
        step = rng.uniform(1e-4, 0.05, size=(5_000, 3))
        assert np.all(blend(display + step, bg) > blend(display, bg))
        assert np.all(blend(display, bg + step) > blend(display, bg))

    def test_simulated_blend_matches_light_sum(self):
        rng = np.random.default_rng(16)
        pixels = rng.integers(0, 256, size=(6, 7, 4), dtype=np.uint8)
        display = RasterImage(pixels)
        bg = rng.uniform(0.0, 0.6, size=(6, 7, 3))
        expected = linear_to_srgb(blend(display_light(display), bg))
        result = simulate_blend(display, bg)
        assert np.abs(result.rgb.astype(int) - expected.astype(int)).max() <= 1


class TestEnhancedMask:
    def test_unchanged_image_has_no_enhancement(self):
        original = rgba([(200, 40, 40), (20, 200, 90)])
        bg = rgb([(120, 120, 0), (0, 0, 200)])
        assert not enhanced_mask(bg, original, original).any()

    def test_hand_built_pair(self):
        bg = rgb([(128, 128, 128), (128, 128, 128)])
        original = rgba([(150, 150, 150), (250, 250, 250)])
        # Pixel 0 moves away from the gray background, pixel 1 moves toward it
        optimized = rgba([(250, 250, 250), (150, 150, 150)])
        np.testing.assert_array_equal(enhanced_mask(bg, original, optimized), [[True, False]])

    def test_sub_jnd_change_not_counted(self):
        bg = rgb([(128, 128, 128)])
        original = rgba([(200, 200, 200)])
        optimized = rgba([(201, 201, 201)])
        lab = linear_to_lab(srgb_to_linear(np.array([[200, 200, 200], [201, 201, 201]])))
        assert delta_e(lab[0], lab[1]) < 2.3
        assert not enhanced_mask(bg, original, optimized).any()

    def test_background_pixels_excluded(self):
        bg = rgb([(128, 128, 128)])
        original = RasterImage(np.array([[(150, 150, 150, 0)]], dtype=np.uint8))
        optimized = RasterImage(np.array([[(250, 250, 250, 0)]], dtype=np.uint8))
        assert not enhanced_mask(bg, original, optimized).any()

    def test_larger_jnd_is_subset(self):
        rng = np.random.default_rng(17)
        bg = RasterImage(rng.integers(0, 256, size=(20, 20, 3), dtype=np.uint8))
        original = RasterImage(rng.integers(0, 256, size=(20, 20, 3), dtype=np.uint8))
        optimized = RasterImage(rng.integers(0, 256, size=(20, 20, 3), dtype=np.uint8))
        small = enhanced_mask(bg, original, optimized, 2.3)
        large = enhanced_mask(bg, original, optimized, 30.0)
        assert np.all(small | ~large)

    def test_dimension_mismatch(self):
        with pytest.raises(RasterShapeError):
            enhanced_mask(rgb([(1, 1, 1)]), rgba([(1, 1, 1), (2, 2, 2)]), rgba([(1, 1, 1), (2, 2, 2)]))


class TestEnhancementPercentage:
    def test_empty_foreground(self):
        assert enhancement_percentage(np.zeros((2, 2), bool), np.zeros((2, 2), bool)) == 0.0

    def test_all_enhanced(self):
        assert enhancement_percentage(np.ones((3, 3), bool), np.ones((3, 3), bool)) == 100.0

    def test_three_of_four(self):
        mask = np.array([[True, True], [True, False]])
        assert enhancement_percentage(mask, np.ones((2, 2), bool)) == 75.0

    def test_translation_invariant(self):
        mask = np.zeros((6, 6), bool)
        fg = np.zeros((6, 6), bool)
        fg[1:3, 1:4] = True
        mask[1, 1:3] = True
        shifted = enhancement_percentage(np.roll(mask, (2, 1), axis=(0, 1)), np.roll(fg, (2, 1), axis=(0, 1)))
        assert shifted == enhancement_percentage(mask, fg)


class TestOverlay:
    def test_empty_mask(self):
        img = rgb([(10, 20, 30), (40, 50, 60)])
        np.testing.assert_array_equal(overlay_image(img, np.zeros((1, 2), bool)).pixels, img.pixels)

    def test_full_mask(self):
        img = RasterImage.solid(3, 2, (10, 20, 30))
        result = overlay_image(img, np.ones((2, 3), bool))
        assert np.all(result.rgb == CYAN)

    def test_checkerboard(self):
        img = RasterImage.solid(4, 4, (0, 0, 0))
        mask = (np.indices((4, 4)).sum(axis=0) % 2) == 0
        result = overlay_image(img, mask)
        assert np.all(result.rgb[mask] == CYAN)
        assert np.all(result.rgb[~mask] == 0)


class TestEvaluateFrame:
    def test_metrics(self):
        bg = rgb([(128, 128, 128), (128, 128, 128)])
        original = rgba([(150, 150, 150), (250, 250, 250)])
        optimized = rgba([(250, 250, 250), (150, 150, 150)])
        metrics = evaluate_frame("ours", bg, original, optimized)
        assert metrics.foreground_pixel_count == 2
        assert metrics.enhanced_pixel_count == 1
        assert metrics.enhanced_percent == 50.0
        assert metrics.mean_delta_e_gain == pytest.approx(0.0, abs=1e-9)
        assert metrics.mean_display_lightness == pytest.approx(metrics.original_display_lightness)

    def test_no_foreground(self):
        empty = RasterImage(np.zeros((2, 2, 4), dtype=np.uint8))
        metrics = evaluate_frame("ours", RasterImage.solid(2, 2, (9, 9, 9)), empty, empty)
        assert metrics.enhanced_percent == 0.0
        assert metrics.foreground_pixel_count == 0

    def test_merge_pools_counts(self):
        a = MethodMetrics(method="ours", enhanced_percent=50.0, foreground_pixel_count=10, enhanced_pixel_count=5, mean_delta_e_gain=1.0)
        b = MethodMetrics(method="ours", enhanced_percent=100.0, foreground_pixel_count=30, enhanced_pixel_count=30, mean_delta_e_gain=3.0)
        merged = merge_metrics([a, b])
        assert merged.foreground_pixel_count == 40
        assert merged.enhanced_percent == pytest.approx(87.5)
        assert merged.mean_delta_e_gain == pytest.approx(2.5)

    def test_report_ranking(self):
        report = MetricsReport.from_methods([
            MethodMetrics(method="opposite-hue", enhanced_percent=40.0),
            MethodMetrics(method="ours", enhanced_percent=70.0),
        ], primary="ours")
        assert report.ranking == ["ours", "opposite-hue"]
        assert report.enhanced_percent == 70.0


class TestComparisonGrid:
    def test_layout(self):
        images = [RasterImage.solid(10, 8, (255, 0, 0)), RasterImage.solid(10, 8, (0, 255, 0))]
        grid = comparison_grid(images, ["ours", "none"])
        assert (grid.width, grid.height) == (20, 8 + LABEL_HEIGHT)
        np.testing.assert_array_equal(grid.rgb[LABEL_HEIGHT:, :10], images[0].rgb)
        np.testing.assert_array_equal(grid.rgb[LABEL_HEIGHT:, 10:], images[1].rgb)

    def test_label_count_must_match(self):
        with pytest.raises(ValueError):
            comparison_grid([RasterImage.solid(2, 2, (0, 0, 0))], ["a", "b"])

    def test_sizes_must_match(self):
        with pytest.raises(RasterShapeError):
            comparison_grid([RasterImage.solid(2, 2, (0, 0, 0)), RasterImage.solid(3, 2, (0, 0, 0))], ["a", "b"])
