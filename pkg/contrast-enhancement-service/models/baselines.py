"""
Baseline Methods
Reference renderings the contrast enhancement is compared against:
subtraction compensation, the two iso-color-difference hue controls and the
unconstrained complementary color
"""

import logging

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from models.contrast_optimizer import (
    EnhanceParams,
    _as_points,
    _axis,
    decompose_shift,
    ideal_point,
    settle_target,
)
from utils.colorspace import chroma, clamp_to_gamut, linear_to_srgb, srgb_to_linear, vector_norm
from utils.image_preprocessor import FovMapping, sample_background_frame
from utils.raster import RasterImage, foreground_mask

logger = logging.getLogger(__name__)


class SubtractionParams(BaseModel):
    """Display gain k_v and lens transparency k_b of the subtraction compensation"""
    model_config = ConfigDict(frozen=True)

    k_v: float = Field(default=1.0, ge=0.0, allow_inf_nan=False)
    k_b: float = Field(default=0.4, ge=0.0, le=1.0, allow_inf_nan=False)


def subtraction_compensation(d, bg, p: SubtractionParams) -> np.ndarray:
    """Per-channel max(0, k_v*d - k_b*bg) in linear light, clamped to gamut"""
    d = np.asarray(d, dtype=np.float64)
    bg = np.asarray(bg, dtype=np.float64)
    return clamp_to_gamut(np.maximum(0.0, p.k_v * d - p.k_b * bg))


def radial_chroma_shift(D, dc, epsilon: float = 1e-9) -> np.ndarray:
    """
    Redirect a chromatic shift along the chroma direction of D, keeping its length

    An achromatic D has no chroma direction; the shift is returned unchanged.
    """
    D, dc = _as_points(D, dc)
    c = chroma(D)
    chromatic = c > epsilon
    safe = np.where(chromatic, c, 1.0)
    radial = np.stack([np.zeros_like(c), D[..., 1] / safe, D[..., 2] / safe], axis=-1)
    length = vector_norm(dc)
    return np.where(chromatic[..., None], length[..., None] * radial, dc)


def luminance_chroma_target(D, B, p: EnhanceParams) -> np.ndarray:
    """Pre-JND target that raises only chroma (and luminance) by the same amount as the optimizer"""
    D, B = _as_points(D, B)
    if p.lambda_e == 0.0:
        return np.array(D, copy=True)
    shift = decompose_shift(D, B, p)
    return D + radial_chroma_shift(D, shift.dc, p.epsilon) + shift.dl[..., None] * _axis(D, 0)


def luminance_chroma_shift(D, B, p: EnhanceParams) -> np.ndarray:
    """Increase luminance and chroma only, at the optimizer's per-pixel color difference"""
    return settle_target(D, luminance_chroma_target(D, B, p), B, p)


def opposite_hue_target(D, B, p: EnhanceParams) -> np.ndarray:
    """Pre-JND target with the hue component of the shift mirrored"""
    D, B = _as_points(D, B)
    if p.lambda_e == 0.0:
        return np.array(D, copy=True)
    shift = decompose_shift(D, B, p)
    gate = shift.t_ch[..., None] if p.chroma_constraint else 1.0
    dc = gate * shift.e_ch - shift.e_h
    return D + dc + shift.dl[..., None] * _axis(D, 0)


def opposite_hue_shift(D, B, p: EnhanceParams) -> np.ndarray:
    """The only other hue shift with equal color difference, luminance and chroma"""
    return settle_target(D, opposite_hue_target(D, B, p), B, p)


def complementary_shift(D, B, p: EnhanceParams) -> np.ndarray:
    """
    Exact complementary color of the background, no constraints

    Pixels over a mid-gray background (no complementary direction) keep D.
    """
    D, B = _as_points(D, B)
    if p.lambda_e == 0.0:
        return np.array(D, copy=True)
    ideal = ideal_point(B, p.epsilon)
    return np.where(ideal.degenerate[..., None], D, ideal.point)


def render_subtraction(
    virtual: RasterImage,
    blurred_bg: RasterImage,
    mapping: FovMapping,
    p: SubtractionParams,
    background_frame=None,
) -> RasterImage:
    """
    Subtract the (unattenuated) background from every foreground pixel

    Args:
        virtual: Rendered virtual image
        blurred_bg: Blurred background capture before attenuation; k_b models the lens
        mapping: FoV calibration
        p: Subtraction parameters
        background_frame: Pre-sampled linear background in the display frame

    Returns:
        Compensated display image
    """
    fg = foreground_mask(virtual)
    if not np.any(fg):
        return virtual
    if background_frame is None:
        background_frame = sample_background_frame(blurred_bg, virtual.width, virtual.height, mapping)

    compensated = subtraction_compensation(srgb_to_linear(virtual.rgb[fg]), background_frame[fg], p)
    rgb = np.array(virtual.rgb, copy=True)
    rgb[fg] = linear_to_srgb(compensated)
    logger.debug(f"Subtraction compensation applied to {int(np.count_nonzero(fg))} pixels")
    return virtual.with_rgb(rgb)
