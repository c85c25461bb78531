"""
Test cases for the compiled color kernels
"""

import sys
from pathlib import Path

import numba
import numpy as np
import pytest

# Add the project root to Python path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

service_dir = project_root / "contrast-enhancement-service"
sys.path.insert(0, str(service_dir))

from utils.color_kernels import (
    GAMUT_TOLERANCE,
    blend_to_srgb,
    difference_maps,
    finish_colors,
    lab_from_linear,
    lab_from_srgb,
    lab_into_gamut,
    set_kernel_threads,
)
from utils.colorspace import delta_e, lab_to_scaled, linear_to_lab, linear_to_srgb, srgb_to_linear


def hue(lab):
    return np.arctan2(lab[..., 2], lab[..., 1])


class TestLabMaps:
    def test_linear_matches_vectorized(self):
        linear = np.random.default_rng(1).uniform(0.0, 1.0, size=(40, 30, 3))
        np.testing.assert_allclose(lab_from_linear(linear), linear_to_lab(linear), atol=1e-9)

    def test_srgb_matches_vectorized(self):
        rgb = np.random.default_rng(2).integers(0, 256, size=(5_000, 3), dtype=np.uint8)
        np.testing.assert_allclose(lab_from_srgb(rgb), linear_to_lab(srgb_to_linear(rgb)), atol=1e-9)

    def test_shape_kept(self):
        assert lab_from_srgb(np.zeros((4, 6, 3), dtype=np.uint8)).shape == (4, 6, 3)


class TestGamutMapping:
    def test_in_gamut_colors_pass_unchanged(self):
        linear = np.random.default_rng(3).uniform(0.0, 1.0, size=(2_000, 3))
        lab = linear_to_lab(linear)
        mapped = np.array([lab_into_gamut(*c) for c in lab])
        np.testing.assert_allclose(mapped, linear, atol=1e-9)

    @pytest.mark.parametrize("lab", [(50.0, 120.0, 0.0), (70.0, -120.0, 80.0), (30.0, 60.0, -140.0), (90.0, 0.0, -40.0)])
    def test_out_of_gamut_keeps_hue_and_lightness(self, lab):
        mapped = np.array(lab_into_gamut(*lab))
        assert np.all(mapped >= -GAMUT_TOLERANCE)
        assert np.all(mapped <= 1.0 + GAMUT_TOLERANCE)

        result = linear_to_lab(np.clip(mapped, 0.0, 1.0))
        assert result[0] == pytest.approx(lab[0], abs=1e-4)
        assert hue(result) == pytest.approx(hue(np.array(lab)), abs=1e-4)
        assert np.hypot(result[1], result[2]) < np.hypot(lab[1], lab[2])

    def test_blue_shifted_white_stays_blue(self):
        mapped = np.array(lab_into_gamut(90.0, 0.0, -30.0))
        assert linear_to_lab(np.clip(mapped, 0.0, 1.0))[2] < 0.0

    def test_lightness_clamped(self):
        np.testing.assert_allclose(lab_into_gamut(120.0, 0.0, 0.0), [1.0, 1.0, 1.0], atol=1e-9)
        np.testing.assert_allclose(lab_into_gamut(-5.0, 0.0, 0.0), [0.0, 0.0, 0.0], atol=1e-9)


class TestFinishColors:
    def test_zero_shift_reproduces_input(self):
        rgb = np.random.default_rng(4).integers(0, 256, size=(3_000, 3), dtype=np.uint8)
        raw = lab_to_scaled(lab_from_srgb(rgb))
        np.testing.assert_array_equal(finish_colors(raw, np.zeros_like(raw)), rgb)

    def test_encoding_matches_vectorized(self):
        rng = np.random.default_rng(5)
        linear = rng.uniform(0.0, 1.0, size=(3_000, 3))
        raw = lab_to_scaled(linear_to_lab(linear))
        out = finish_colors(raw, np.zeros_like(raw))
        assert np.abs(out.astype(int) - linear_to_srgb(linear).astype(int)).max() <= 1


class TestBlendAndDifferences:
    def test_blend_alpha_weights_display(self):
        rgb = np.full((2, 2, 3), 200, dtype=np.uint8)
        background = np.full((2, 2, 3), 0.1)
        alpha = np.array([[0, 255], [255, 0]], dtype=np.uint8)
        out = blend_to_srgb(rgb, alpha, background)
        np.testing.assert_array_equal(out[0, 0], linear_to_srgb(background[0, 0]))
        np.testing.assert_array_equal(out[0, 1], linear_to_srgb(srgb_to_linear(rgb[0, 1]) + 0.1))

    def test_difference_maps_match_delta_e(self):
        rng = np.random.default_rng(6)
        original = rng.integers(0, 256, size=(20, 25, 3), dtype=np.uint8)
        optimized = rng.integers(0, 256, size=(20, 25, 3), dtype=np.uint8)
        background = linear_to_lab(rng.uniform(0.0, 0.6, size=(20, 25, 3)))
        maps = difference_maps(background, original, optimized)

        lab_original = linear_to_lab(srgb_to_linear(original))
        lab_optimized = linear_to_lab(srgb_to_linear(optimized))
        np.testing.assert_allclose(maps.gained, delta_e(background, lab_optimized), atol=1e-9)
        np.testing.assert_allclose(maps.before, delta_e(background, lab_original), atol=1e-9)
        np.testing.assert_allclose(maps.changed, delta_e(lab_optimized, lab_original), atol=1e-9)
        np.testing.assert_allclose(maps.lightness, lab_optimized[..., 0], atol=1e-9)
        assert maps.original_lightness.shape == (20, 25)


class TestKernelThreads:
    def test_capped_at_pool_size(self):
        assert set_kernel_threads(10_000) == numba.config.NUMBA_NUM_THREADS
        assert set_kernel_threads(0) == 1
        assert numba.get_num_threads() == 1
