"""
Test cases for the baseline rendering methods
"""

import sys
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

# Add the project root to Python path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

service_dir = project_root / "contrast-enhancement-service"
sys.path.insert(0, str(service_dir))

from models.baselines import (
    SubtractionParams,
    complementary_shift,
    luminance_chroma_shift,
    luminance_chroma_target,
    opposite_hue_shift,
    opposite_hue_target,
    radial_chroma_shift,
    render_subtraction,
    subtraction_compensation,
)
from models.contrast_optimizer import EnhanceParams, constrained_target, decompose_shift, optimize_color
from utils.colorspace import chroma, srgb_to_linear, vector_norm
from utils.image_preprocessor import FovMapping
from utils.raster import RasterImage


def random_ball(rng, n):
    direction = rng.normal(size=(n, 3))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    return direction * rng.uniform(0.0, 1.0, size=(n, 1)) ** (1.0 / 3.0)


class TestSubtractionCompensation:
    def test_black_background_keeps_display(self):
        d = np.array([0.3, 0.6, 0.9])
        np.testing.assert_allclose(subtraction_compensation(d, np.zeros(3), SubtractionParams()), d)

    def test_published_parameters(self):
        result = subtraction_compensation([0.5, 0.5, 0.5], [1.0, 1.0, 1.0], SubtractionParams(k_v=1.0, k_b=0.4))
        np.testing.assert_allclose(result, [0.1, 0.1, 0.1], atol=1e-12)

    def test_floor_at_zero(self):
        result = subtraction_compensation([0.2, 0.2, 0.2], [1.0, 1.0, 1.0], SubtractionParams())
        np.testing.assert_array_equal(result, [0.0, 0.0, 0.0])

    def test_gain_clamped_to_gamut(self):
        result = subtraction_compensation([0.8, 0.1, 0.0], [0.0, 0.0, 0.0], SubtractionParams(k_v=2.0))
        np.testing.assert_allclose(result, [1.0, 0.2, 0.0])

    @pytest.mark.parametrize("kwargs", [{"k_v": -1.0}, {"k_b": 1.5}, {"k_b": -0.1}])
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(ValidationError):
            SubtractionParams(**kwargs)


class TestLuminanceChromaShift:
    def test_radial_redirect(self):
        shift = radial_chroma_shift([0.0, 0.2, 0.0], [0.0, 0.0, 0.1])
        np.testing.assert_allclose(np.array([0.0, 0.2, 0.0]) + shift, [0.0, 0.3, 0.0], atol=1e-12)

    def test_achromatic_falls_back_to_optimizer(self):
        D, B, p = np.array([0.3, 0.0, 0.0]), np.array([0.1, 0.4, -0.3]), EnhanceParams()
        np.testing.assert_allclose(luminance_chroma_target(D, B, p), constrained_target(D, B, p), atol=1e-12)

    def test_same_color_difference_as_optimizer(self):
        rng = np.random.default_rng(12)
        D, B = random_ball(rng, 20_000), random_ball(rng, 20_000)
        p = EnhanceParams()
        ours = vector_norm(constrained_target(D, B, p) - D)
        control = vector_norm(luminance_chroma_target(D, B, p) - D)
        np.testing.assert_allclose(control, ours, atol=1e-9)

    def test_never_reduces_chroma(self):
        rng = np.random.default_rng(13)
        D, B = random_ball(rng, 20_000), random_ball(rng, 20_000)
        target = luminance_chroma_target(D, B, EnhanceParams())
        assert np.all(chroma(target) >= chroma(D) - 1e-9)

    def test_result_in_ball(self):
        rng = np.random.default_rng(14)
        D, B = random_ball(rng, 20_000), random_ball(rng, 20_000)
        assert np.all(vector_norm(luminance_chroma_shift(D, B, EnhanceParams())) <= 1.0 + 1e-9)


class TestOppositeHueShift:
    def test_no_hue_component_matches_optimizer(self):
        D, B, p = np.array([0.1, 0.2, 0.0]), np.array([0.3, 0.4, 0.0]), EnhanceParams()
        np.testing.assert_allclose(opposite_hue_shift(D, B, p), optimize_color(D, B, p), atol=1e-12)

    def test_mirror_keeps_luminance_and_chroma(self):
        rng = np.random.default_rng(15)
        D, B = random_ball(rng, 20_000), random_ball(rng, 20_000)
        p = EnhanceParams()
        ours = constrained_target(D, B, p)
        mirror = opposite_hue_target(D, B, p)
        np.testing.assert_allclose(mirror[:, 0], ours[:, 0], atol=1e-9)
        np.testing.assert_allclose(chroma(mirror), chroma(ours), atol=1e-9)

    def test_mirror_never_farther_from_background(self):
        rng = np.random.default_rng(16)
        D, B = random_ball(rng, 20_000), random_ball(rng, 20_000)
        p = EnhanceParams()
        ours = vector_norm(constrained_target(D, B, p) - B)
        mirror = vector_norm(opposite_hue_target(D, B, p) - B)
        assert np.all(ours >= mirror - 1e-9)

    def test_hue_actually_mirrored(self):
        D, B = np.array([0.0, 0.3, 0.0]), np.array([0.0, 0.2, 0.4])
        shift = decompose_shift(D, B, EnhanceParams())
        mirror = opposite_hue_target(D, B, EnhanceParams())
        ours = constrained_target(D, B, EnhanceParams())
        assert vector_norm(shift.e_h) > 0.0
        assert mirror[2] == pytest.approx(-ours[2])


class TestComplementaryShift:
    def test_jumps_to_ideal_point(self):
        np.testing.assert_allclose(complementary_shift([0.5, 0.1, 0.0], [0.0, 0.5, 0.0], EnhanceParams()), [0.0, -1.0, 0.0])

    def test_centered_background_keeps_display(self):
        D = np.array([0.2, 0.1, 0.0])
        np.testing.assert_array_equal(complementary_shift(D, [0.0, 0.0, 0.0], EnhanceParams()), D)

    def test_zero_budget_keeps_display(self):
        D = np.array([0.2, 0.1, 0.0])
        np.testing.assert_array_equal(complementary_shift(D, [0.0, 0.5, 0.0], EnhanceParams(lambda_e=0.0)), D)


class TestRenderSubtraction:
    def test_darkens_foreground_only(self):
        pixels = np.zeros((6, 6, 4), dtype=np.uint8)
        pixels[1:4, 1:4] = (200, 180, 160, 255)
        virtual = RasterImage(pixels)
        background = RasterImage.solid(12, 12, (255, 255, 255))

        result = render_subtraction(virtual, background, FovMapping(), SubtractionParams())
        fg = pixels[..., 3] > 0
        assert np.all(srgb_to_linear(result.rgb[fg]) < srgb_to_linear(virtual.rgb[fg]))
        np.testing.assert_array_equal(result.pixels[~fg], virtual.pixels[~fg])

    def test_transparent_frame_passes_through(self):
        virtual = RasterImage(np.zeros((4, 4, 4), dtype=np.uint8))
        assert render_subtraction(virtual, RasterImage.solid(4, 4, (255, 0, 0)), FovMapping(), SubtractionParams()) is virtual
