"""
Contrast Enhancer
Runs one frame through background preparation, display rendering for a
method, blend simulation and evaluation
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from models.baselines import (
    SubtractionParams,
    complementary_shift,
    luminance_chroma_shift,
    opposite_hue_shift,
    render_subtraction,
)
from models.contrast_optimizer import EnhanceParams, TargetFunction, enhance_frame, optimize_color
from models.evaluator import MethodMetrics, overlay_image, score_frame, simulate_blend
from utils.color_kernels import lab_from_linear, set_kernel_threads
from utils.colorspace import JND_LAB, srgb_to_linear
from utils.image_preprocessor import BlurParams, FovMapping, blur_linear, frame_sampling_maps, sample_linear_frame
from utils.raster import RasterImage

logger = logging.getLogger(__name__)

METHODS = ("ours", "subtract", "lumchroma", "opposite-hue", "complementary", "none")

TARGETS: Dict[str, TargetFunction] = {
    "ours": optimize_color,
    "lumchroma": luminance_chroma_shift,
    "opposite-hue": opposite_hue_shift,
    "complementary": complementary_shift,
}


@dataclass(frozen=True)
class PreparedBackground:
    """
    One background capture resampled into the display frame, in linear light

    The optimizer and the metrics see the blurred, attenuated background; the
    blend uses the sharp attenuated one; subtraction works on the blurred
    background before attenuation since its k_b models the lens. lab is the
    CIELAB of blurred_attenuated, shared by the optimizer and the metrics.
    """
    blurred_attenuated: np.ndarray
    attenuated: np.ndarray
    blurred: np.ndarray
    lab: np.ndarray

    @property
    def width(self) -> int:
        return int(self.blurred.shape[1])

    @property
    def height(self) -> int:
        return int(self.blurred.shape[0])


@dataclass
class EnhancementResult:
    method: str
    display: RasterImage
    blend: RasterImage
    mask: np.ndarray
    overlay: RasterImage
    metrics: MethodMetrics
    timing: Dict[str, float] = field(default_factory=dict)


def _elapsed_ms(start: float) -> float:
    return (time.perf_counter() - start) * 1000.0


class ContrastEnhancer:
    def __init__(
        self,
        params: Optional[EnhanceParams] = None,
        blur: Optional[BlurParams] = None,
        mapping: Optional[FovMapping] = None,
        attenuation: float = 0.6,
        subtraction: Optional[SubtractionParams] = None,
        jnd: float = JND_LAB,
        workers: int = 1,
    ):
        """Initialize the enhancer with its tunables; defaults are the published constants"""
        if not 0.0 <= attenuation <= 1.0:
            raise ValueError(f"attenuation must lie in [0, 1], got {attenuation}")
        if jnd < 0.0:
            raise ValueError(f"jnd must be non-negative, got {jnd}")
        self.params = params or EnhanceParams()
        self.blur = blur or BlurParams()
        self.mapping = mapping or FovMapping()
        self.attenuation = attenuation
        self.subtraction = subtraction or SubtractionParams()
        self.jnd = jnd
        self.workers = max(1, int(workers))

    def prepare_background(self, background: RasterImage, width: int, height: int) -> PreparedBackground:
        """Blur, attenuate and resample a background capture for a width x height display frame"""
        set_kernel_threads(self.workers)
        linear = srgb_to_linear(background.rgb)
        blurred = blur_linear(linear, self.blur)
        maps = frame_sampling_maps(background.width, background.height, width, height, self.mapping)
        keep = 1.0 - self.attenuation
        blurred_frame = sample_linear_frame(blurred, width, height, self.mapping, maps)
        blurred_attenuated = blurred_frame * keep
        return PreparedBackground(
            blurred_attenuated=blurred_attenuated,
            attenuated=sample_linear_frame(linear, width, height, self.mapping, maps) * keep,
            blurred=blurred_frame,
            lab=lab_from_linear(blurred_attenuated),
        )

    def render(self, method: str, virtual: RasterImage, prepared: PreparedBackground) -> RasterImage:
        """Display image a method would send to the headset"""
        if method == "none":
            return virtual
        if method == "subtract":
            return render_subtraction(
                virtual, None, self.mapping, self.subtraction, background_frame=prepared.blurred
            )
        if method not in TARGETS:
            raise ValueError(f"Unknown method '{method}'; expected one of {', '.join(METHODS)}")
        return enhance_frame(
            virtual,
            None,
            self.mapping,
            self.params,
            method=TARGETS[method],
            workers=self.workers,
            background_frame=prepared.blurred_attenuated,
            background_lab=prepared.lab,
        )

    def run(
        self,
        virtual: RasterImage,
        background: RasterImage,
        method: str = "ours",
        prepared: Optional[PreparedBackground] = None,
    ) -> EnhancementResult:
        """
        Enhance one frame and evaluate it

        Args:
            virtual: Rendered virtual image (alpha marks the foreground)
            background: Captured background, any size
            method: One of METHODS
            prepared: Background already prepared for this frame size

        Returns:
            Display image, simulated blend, enhanced mask, cyan overlay, metrics and stage timings
        """
        if method not in METHODS:
            raise ValueError(f"Unknown method '{method}'; expected one of {', '.join(METHODS)}")
        timing = {}
        set_kernel_threads(self.workers)

        start = time.perf_counter()
        if prepared is None:
            prepared = self.prepare_background(background, virtual.width, virtual.height)
        timing["preprocess"] = _elapsed_ms(start)

        start = time.perf_counter()
        display = self.render(method, virtual, prepared)
        timing["optimize"] = _elapsed_ms(start)

        start = time.perf_counter()
        blended = simulate_blend(display, prepared.attenuated)
        timing["blend"] = _elapsed_ms(start)

        start = time.perf_counter()
        mask, metrics = score_frame(method, prepared.lab, virtual, display, self.jnd)
        overlay = overlay_image(blended, mask)
        timing["evaluate"] = _elapsed_ms(start)
        timing["total"] = sum(timing.values())

        logger.info(
            f"{method}: {metrics.enhanced_percent:.2f}% of {metrics.foreground_pixel_count} foreground pixels enhanced "
            f"({timing['total']:.1f} ms)"
        )
        return EnhancementResult(
            method=method,
            display=display,
            blend=blended,
            mask=mask,
            overlay=overlay,
            metrics=metrics,
            timing=timing,
        )

    def compare(self, virtual: RasterImage, background: RasterImage, methods: Sequence[str]) -> List[EnhancementResult]:
        """Run several methods on the same frame, preparing the background once"""
        for method in methods:
            if method not in METHODS:
                raise ValueError(f"Unknown method '{method}'; expected one of {', '.join(METHODS)}")
        prepared = self.prepare_background(background, virtual.width, virtual.height)
        return [self.run(virtual, background, method, prepared=prepared) for method in methods]

    def describe(self) -> Dict[str, object]:
        """Parameters of this enhancer as plain values, for reports"""
        return {
            "lambda_e": self.params.lambda_e,
            "lambda_jnd_scaled": self.params.lambda_jnd_scaled,
            "chroma_constraint": self.params.chroma_constraint,
            "luminance_constraint": self.params.luminance_constraint,
            "jnd_constraint": self.params.jnd_constraint,
            "blur_kernel": self.blur.kernel_size,
            "blur_sigma": self.blur.sigma,
            "attenuation": self.attenuation,
            "fov": [self.mapping.s_u, self.mapping.s_v, self.mapping.b_u, self.mapping.b_v],
            "subtract_k_v": self.subtraction.k_v,
            "subtract_k_b": self.subtraction.k_b,
            "jnd": self.jnd,
        }
