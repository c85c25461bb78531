"""
Background Preprocessing Utilities
Gaussian blur, FoV calibration mapping and luminance attenuation for the
captured background before it is paired with display pixels
"""

import logging
from typing import NamedTuple, Optional, Tuple, Union

import cv2
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from utils.colorspace import linear_to_srgb, srgb_to_linear
from utils.raster import RasterImage

logger = logging.getLogger(__name__)


class BlurParams(BaseModel):
    """Gaussian filter simulating the non-focal field of the eye"""
    model_config = ConfigDict(frozen=True)

    kernel_size: int = Field(default=3, ge=1)
    sigma: float = Field(default=1.5, gt=0, allow_inf_nan=False)

    @field_validator("kernel_size")
    @classmethod
    def _kernel_must_be_odd(cls, value: int) -> int:
        if value % 2 == 0:
            raise ValueError(f"kernel_size must be odd, got {value}")
        return value


class FovMapping(BaseModel):
    """
    Affine texture-coordinate map between display frame and background capture

    The calibration is written u = s_u * i + b_u, v = s_v * j + b_v with (u, v)
    frame coordinates and (i, j) background coordinates.
    """
    model_config = ConfigDict(frozen=True)

    s_u: float = Field(default=0.65, gt=0, allow_inf_nan=False)
    s_v: float = Field(default=0.65, gt=0, allow_inf_nan=False)
    b_u: float = Field(default=0.13, allow_inf_nan=False)
    b_v: float = Field(default=0.17, allow_inf_nan=False)

    @model_validator(mode="after")
    def _must_overlap_frame(self) -> "FovMapping":
        if not (self.b_u < 1.0 and self.b_u + self.s_u > 0.0 and self.b_v < 1.0 and self.b_v + self.s_v > 0.0):
            raise ValueError(
                f"Mapped rectangle [{self.b_u}, {self.b_u + self.s_u}]x[{self.b_v}, {self.b_v + self.s_v}] "
                "does not intersect the unit square"
            )
        return self

    @classmethod
    def identity(cls) -> "FovMapping":
        return cls(s_u=1.0, s_v=1.0, b_u=0.0, b_v=0.0)

    @classmethod
    def from_tuple(cls, values: Tuple[float, float, float, float]) -> "FovMapping":
        s_u, s_v, b_u, b_v = values
        return cls(s_u=s_u, s_v=s_v, b_u=b_u, b_v=b_v)


class BackgroundCoordinate(NamedTuple):
    i: Union[float, np.ndarray]
    j: Union[float, np.ndarray]
    in_coverage: Union[bool, np.ndarray]


def gaussian_kernel_1d(kernel_size: int, sigma: float) -> np.ndarray:
    """
    Normalized 1D Gaussian weights

    The outer product of this kernel with itself equals G(x, y) sampled on the
    kernel window and normalized to sum 1.
    """
    radius = kernel_size // 2
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    weights = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return weights / weights.sum()


def blur_linear(linear: np.ndarray, p: BlurParams) -> np.ndarray:
    """Separable Gaussian convolution of a linear-light (H, W, 3) array, clamp-to-edge borders"""
    if p.kernel_size == 1:
        return np.array(linear, dtype=np.float64, copy=True)
    kernel = gaussian_kernel_1d(p.kernel_size, p.sigma)
    return cv2.sepFilter2D(
        np.ascontiguousarray(linear, dtype=np.float64),
        cv2.CV_64F,
        kernel,
        kernel,
        borderType=cv2.BORDER_REPLICATE,
    )


def gaussian_blur(img: RasterImage, p: BlurParams) -> RasterImage:
    """
    Blur the background to keep only its low-frequency color

    Args:
        img: Captured background
        p: Kernel size and sigma

    Returns:
        Blurred image; alpha, if any, is carried over untouched
    """
    if p.kernel_size == 1:
        return img
    blurred = blur_linear(srgb_to_linear(img.rgb), p)
    logger.debug(f"Blurred {img.width}x{img.height} background (kernel={p.kernel_size}, sigma={p.sigma})")
    return img.with_rgb(linear_to_srgb(blurred))


def map_background_to_frame(i, j, m: FovMapping) -> Tuple:
    """Forward calibration: background coordinates to frame coordinates"""
    return m.s_u * np.asarray(i, dtype=np.float64) + m.b_u, m.s_v * np.asarray(j, dtype=np.float64) + m.b_v


def map_frame_to_background(u, v, m: FovMapping) -> BackgroundCoordinate:
    """
    Inverse calibration: where a display-frame coordinate looks in the background

    Coordinates falling outside [0,1]^2 are reported through in_coverage; the
    caller clamps them to the nearest edge sample.
    """
    i = (np.asarray(u, dtype=np.float64) - m.b_u) / m.s_u
    j = (np.asarray(v, dtype=np.float64) - m.b_v) / m.s_v
    in_coverage = (i >= 0.0) & (i <= 1.0) & (j >= 0.0) & (j <= 1.0)
    if np.ndim(i) == 0:
        return BackgroundCoordinate(float(i), float(j), bool(in_coverage))
    return BackgroundCoordinate(i, j, in_coverage)


class SamplingMaps(NamedTuple):
    """cv2.remap pixel-coordinate maps from display pixels into a background capture"""
    map_x: np.ndarray
    map_y: np.ndarray


# cv2.remap maps must stay below SHRT_MAX columns
REMAP_ROW = 4096


def _texel_coordinate(t, size: int) -> np.ndarray:
    """Normalized coordinate, clamped to the capture, as a pixel position with texel centers on integers"""
    t = np.clip(np.asarray(t, dtype=np.float64), 0.0, 1.0)
    return np.clip(t * size - 0.5, 0.0, size - 1).astype(np.float32)


def _remap(linear: np.ndarray, maps: SamplingMaps) -> np.ndarray:
    return cv2.remap(
        np.ascontiguousarray(linear, dtype=np.float64),
        maps.map_x,
        maps.map_y,
        cv2.INTER_LINEAR,
        borderMode=cv2.BORDER_REPLICATE,
    )


def sample_bilinear(img: RasterImage, i, j) -> np.ndarray:
    """
    Bilinear lookup in linear light at normalized coordinates

    Texel centers sit at ((x + 0.5) / W, (y + 0.5) / H); i runs along the
    width and j down the rows. Interpolation positions are resolved to 1/32
    of a pixel.
    """
    linear = srgb_to_linear(img.rgb)
    height, width = linear.shape[:2]
    i, j = np.broadcast_arrays(np.asarray(i, dtype=np.float64), np.asarray(j, dtype=np.float64))
    shape = i.shape
    count = i.size
    if count == 0:
        return np.empty(shape + (3,))

    cols = min(count, REMAP_ROW)
    rows = -(-count // cols)
    pad = rows * cols - count
    map_x = np.pad(_texel_coordinate(i.reshape(-1), width), (0, pad), mode="edge").reshape(rows, cols)
    map_y = np.pad(_texel_coordinate(j.reshape(-1), height), (0, pad), mode="edge").reshape(rows, cols)
    sampled = _remap(linear, SamplingMaps(map_x, map_y)).reshape(-1, 3)[:count]
    return sampled.reshape(shape + (3,))


def frame_sampling_maps(src_width: int, src_height: int, width: int, height: int, m: FovMapping) -> SamplingMaps:
    """
    Where each display pixel center looks in a src_width x src_height capture

    The calibration is axis-aligned, so columns and rows map independently and
    are broadcast to the (height, width) maps remap expects. Pixels that fall
    outside the capture clamp to its nearest edge sample.
    """
    u = (np.arange(width, dtype=np.float64) + 0.5) / width
    v = (np.arange(height, dtype=np.float64) + 0.5) / height
    coord = map_frame_to_background(u[None, :], v[:, None], m)
    uncovered = 1.0 - float(np.mean(coord.in_coverage))
    if uncovered > 0.0:
        logger.debug(f"{uncovered:.1%} of display pixels map outside the background capture; clamping to edge")
    map_x = np.broadcast_to(_texel_coordinate(coord.i, src_width), (height, width))
    map_y = np.broadcast_to(_texel_coordinate(coord.j, src_height), (height, width))
    return SamplingMaps(np.ascontiguousarray(map_x), np.ascontiguousarray(map_y))


def sample_linear_frame(
    linear: np.ndarray,
    width: int,
    height: int,
    m: FovMapping,
    maps: Optional[SamplingMaps] = None,
) -> np.ndarray:
    """Resample a linear-light background array into the display frame; maps may be shared across calls"""
    if maps is None:
        maps = frame_sampling_maps(linear.shape[1], linear.shape[0], width, height, m)
    return _remap(linear, maps)


def sample_background_frame(img: RasterImage, width: int, height: int, m: FovMapping) -> np.ndarray:
    """
    Resample the background into the display frame

    Args:
        img: Background capture (already blurred and/or attenuated as needed)
        width: Display frame width
        height: Display frame height
        m: FoV calibration

    Returns:
        Linear-light (height, width, 3) array
    """
    return sample_linear_frame(srgb_to_linear(img.rgb), width, height, m)


def attenuate(img: RasterImage, attenuation: float) -> RasterImage:
    """
    Dim the background as seen through the translucent combiner

    Linear-light channels are multiplied by (1 - attenuation); 0.6 keeps 40%.
    """
    if not 0.0 <= attenuation <= 1.0:
        raise ValueError(f"attenuation must lie in [0, 1], got {attenuation}")
    if attenuation == 0.0:
        return img
    dimmed = srgb_to_linear(img.rgb) * (1.0 - attenuation)
    return img.with_rgb(linear_to_srgb(dimmed))
