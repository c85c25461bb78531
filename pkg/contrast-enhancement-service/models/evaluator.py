"""
Enhancement Evaluator
Simulates the additive blend seen through the headset and scores how many
foreground pixels gained a perceivable color difference from the background
"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import cv2
import numpy as np
from pydantic import BaseModel, Field

from utils.color_kernels import DifferenceMaps, blend_to_srgb, difference_maps, lab_from_srgb
from utils.colorspace import JND_LAB, clamp_to_gamut, srgb_to_linear
from utils.raster import RasterImage, RasterShapeError, foreground_mask, require_same_size

logger = logging.getLogger(__name__)

CYAN = (0, 255, 255)
LABEL_HEIGHT = 24


class DeltaEStats(BaseModel):
    mean: float = 0.0
    min: float = 0.0
    max: float = 0.0


class MethodMetrics(BaseModel):
    """Objective metrics of one rendering method over one or more frames"""
    method: str
    enhanced_percent: float = Field(default=0.0, ge=0.0, le=100.0)
    foreground_pixel_count: int = 0
    enhanced_pixel_count: int = 0
    delta_e_background: DeltaEStats = Field(default_factory=DeltaEStats)
    delta_e_change: DeltaEStats = Field(default_factory=DeltaEStats)
    mean_delta_e_gain: float = 0.0
    mean_display_lightness: float = 0.0
    original_display_lightness: float = 0.0


class MetricsReport(BaseModel):
    """Serialized result of a run: headline numbers, per-method breakdown and stage timings"""
    enhanced_percent: float = 0.0
    foreground_pixel_count: int = 0
    mean_delta_e_gain: float = 0.0
    methods: Dict[str, MethodMetrics] = Field(default_factory=dict)
    ranking: List[str] = Field(default_factory=list)
    frames: List[str] = Field(default_factory=list)
    parameters: Dict[str, object] = Field(default_factory=dict)
    timing: Dict[str, float] = Field(default_factory=dict)

    @classmethod
    def from_methods(cls, metrics: Sequence[MethodMetrics], primary: Optional[str] = None, **kwargs) -> "MetricsReport":
        """Build a report whose headline numbers come from the primary (default: first) method"""
        by_name = {m.method: m for m in metrics}
        head = by_name[primary] if primary else metrics[0]
        ranking = [m.method for m in sorted(by_name.values(), key=lambda m: -m.enhanced_percent)]
        return cls(
            enhanced_percent=head.enhanced_percent,
            foreground_pixel_count=head.foreground_pixel_count,
            mean_delta_e_gain=head.mean_delta_e_gain,
            methods=by_name,
            ranking=ranking,
            **kwargs,
        )


def blend(display, bg_attenuated) -> np.ndarray:
    """Additive optical blend l_d + l_b, clamped at the gamut ceiling"""
    return clamp_to_gamut(np.asarray(display, dtype=np.float64) + np.asarray(bg_attenuated, dtype=np.float64))


def display_light(img: RasterImage) -> np.ndarray:
    """Linear light emitted by the display; transparent pixels emit nothing"""
    light = srgb_to_linear(img.rgb)
    if img.has_alpha:
        light = light * (img.alpha.astype(np.float64) / 255.0)[..., None]
    return light


def simulate_blend(display: RasterImage, bg_frame_linear: np.ndarray) -> RasterImage:
    """Perceived image: display light over the attenuated background in the display frame"""
    if bg_frame_linear.shape[:2] != (display.height, display.width):
        raise RasterShapeError(
            f"Background frame {bg_frame_linear.shape[1]}x{bg_frame_linear.shape[0]} "
            f"does not match display {display.width}x{display.height}"
        )
    alpha = display.alpha if display.has_alpha else np.full(bg_frame_linear.shape[:2], 255, dtype=np.uint8)
    return RasterImage(blend_to_srgb(display.rgb, alpha, bg_frame_linear))


def _lab(img: RasterImage) -> np.ndarray:
    return lab_from_srgb(img.rgb)


def _difference_maps(bg_lab: np.ndarray, original: RasterImage, optimized: RasterImage) -> DifferenceMaps:
    require_same_size(original, optimized)
    if bg_lab.shape[:2] != (original.height, original.width):
        raise RasterShapeError(
            f"Background {bg_lab.shape[1]}x{bg_lab.shape[0]} does not match display {original.width}x{original.height}"
        )
    return difference_maps(bg_lab, original.rgb, optimized.rgb)


def enhanced_mask(bg: RasterImage, original: RasterImage, optimized: RasterImage, jnd_unscaled: float = JND_LAB) -> np.ndarray:
    """
    Foreground pixels whose color moved away from the background by at least a JND

    Args:
        bg: Blurred, mapped and attenuated background in the display frame
        original: Virtual image as rendered
        optimized: Display image produced by a method
        jnd_unscaled: Just noticeable difference in CIELAB units

    Returns:
        Boolean (H, W) grid, False outside the foreground
    """
    require_same_size(bg, original, optimized)
    maps = _difference_maps(_lab(bg), original, optimized)
    return foreground_mask(original) & (maps.gained > maps.before) & (maps.changed >= jnd_unscaled)


def enhancement_percentage(mask: np.ndarray, fg: np.ndarray) -> float:
    """Share of foreground pixels that are enhanced, in percent"""
    if mask.shape != fg.shape:
        raise RasterShapeError(f"Mask {mask.shape} and foreground {fg.shape} are not aligned")
    total = int(np.count_nonzero(fg))
    if total == 0:
        return 0.0
    return 100.0 * int(np.count_nonzero(mask & fg)) / total


def overlay_image(blend_img: RasterImage, mask: np.ndarray) -> RasterImage:
    """Paint enhanced pixels cyan over the blended image"""
    if mask.shape != (blend_img.height, blend_img.width):
        raise RasterShapeError(f"Mask {mask.shape} does not match image {blend_img.width}x{blend_img.height}")
    rgb = np.array(blend_img.rgb, copy=True)
    rgb[mask] = CYAN
    return blend_img.with_rgb(rgb)


def _stats(values: np.ndarray) -> DeltaEStats:
    if values.size == 0:
        return DeltaEStats()
    return DeltaEStats(mean=float(values.mean()), min=float(values.min()), max=float(values.max()))


def score_frame(
    method: str,
    bg_lab: np.ndarray,
    original: RasterImage,
    optimized: RasterImage,
    jnd_unscaled: float = JND_LAB,
) -> Tuple[np.ndarray, MethodMetrics]:
    """
    Enhanced mask and metrics of one rendered frame from a single pass of color-difference maps

    Args:
        method: Name recorded in the metrics
        bg_lab: CIELAB of the blurred, attenuated background in the display frame
        original: Virtual image as rendered
        optimized: Display image produced by the method
        jnd_unscaled: Just noticeable difference in CIELAB units
    """
    maps = _difference_maps(np.asarray(bg_lab, dtype=np.float64), original, optimized)
    gained, before, changed = maps.gained, maps.before, maps.changed
    fg = foreground_mask(original)
    mask = fg & (gained > before) & (changed >= jnd_unscaled)

    count = int(np.count_nonzero(fg))
    enhanced = int(np.count_nonzero(mask))
    if count == 0:
        return mask, MethodMetrics(method=method)

    return mask, MethodMetrics(
        method=method,
        enhanced_percent=enhancement_percentage(mask, fg),
        foreground_pixel_count=count,
        enhanced_pixel_count=enhanced,
        delta_e_background=_stats(gained[fg]),
        delta_e_change=_stats(changed[fg]),
        mean_delta_e_gain=float((gained[fg] - before[fg]).mean()),
        mean_display_lightness=float(maps.lightness[fg].mean()),
        original_display_lightness=float(maps.original_lightness[fg].mean()),
    )


def evaluate_frame(
    method: str,
    bg: RasterImage,
    original: RasterImage,
    optimized: RasterImage,
    jnd_unscaled: float = JND_LAB,
) -> MethodMetrics:
    """Score one rendered frame against the original virtual content"""
    require_same_size(bg, original, optimized)
    return score_frame(method, _lab(bg), original, optimized, jnd_unscaled)[1]


def merge_metrics(frames: Sequence[MethodMetrics]) -> MethodMetrics:
    """Pool per-frame metrics of one method, weighting means by foreground count"""
    if not frames:
        raise ValueError("No frame metrics to merge")
    total = sum(m.foreground_pixel_count for m in frames)
    if total == 0:
        return MethodMetrics(method=frames[0].method)
    scored = [m for m in frames if m.foreground_pixel_count]

    def weighted(get) -> float:
        return sum(get(m) * m.foreground_pixel_count for m in scored) / total

    def pooled(get) -> DeltaEStats:
        return DeltaEStats(
            mean=weighted(lambda m: get(m).mean),
            min=min(get(m).min for m in scored),
            max=max(get(m).max for m in scored),
        )

    enhanced = sum(m.enhanced_pixel_count for m in frames)
    return MethodMetrics(
        method=frames[0].method,
        enhanced_percent=100.0 * enhanced / total,
        foreground_pixel_count=total,
        enhanced_pixel_count=enhanced,
        delta_e_background=pooled(lambda m: m.delta_e_background),
        delta_e_change=pooled(lambda m: m.delta_e_change),
        mean_delta_e_gain=weighted(lambda m: m.mean_delta_e_gain),
        mean_display_lightness=weighted(lambda m: m.mean_display_lightness),
        original_display_lightness=weighted(lambda m: m.original_display_lightness),
    )


def comparison_grid(images: Sequence[RasterImage], labels: Sequence[str]) -> RasterImage:
    """
    Lay images side by side, each under a text label

    Args:
        images: Equally sized images, one per method
        labels: Caption per image

    Returns:
        RGB image of width sum(widths) and height image height + label strip
    """
    if not images:
        raise ValueError("comparison_grid needs at least one image")
    if len(images) != len(labels):
        raise ValueError(f"Got {len(images)} images but {len(labels)} labels")
    require_same_size(*images)

    panels = []
    for image, label in zip(images, labels):
        strip = np.zeros((LABEL_HEIGHT, image.width, 3), dtype=np.uint8)
        cv2.putText(strip, label, (4, LABEL_HEIGHT - 7), cv2.FONT_HERSHEY_SIMPLEX, 0.5, (255, 255, 255), 1, cv2.LINE_AA)
        panels.append(np.vstack([strip, np.ascontiguousarray(image.rgb)]))
    return RasterImage(np.hstack(panels))
