"""
Compiled Color Kernels
Per-pixel numba versions of the colorspace conversions and the frame passes
built on them: Lab maps, gamut mapping of shifted colors, the additive
blend and the color-difference maps of the evaluator
"""

import logging
from typing import NamedTuple

import numba
import numpy as np
from numba import njit, prange

from utils.colorspace import (
    D65_WHITE,
    LAB_AB_RANGE,
    LAB_DELTA,
    LAB_L_HALF_RANGE,
    SRGB_DECODE_LUT,
    SRGB_TO_XYZ,
    XYZ_TO_SRGB,
)

logger = logging.getLogger(__name__)

_LAB_EPSILON = LAB_DELTA ** 3
_LAB_SLOPE = 3.0 * LAB_DELTA ** 2

# Linear light this far outside [0, 1] still counts as displayable
GAMUT_TOLERANCE = 1e-9
GAMUT_BISECTIONS = 30


def set_kernel_threads(workers: int) -> int:
    """Thread count for the parallel kernels called from this thread; capped at numba's pool size"""
    threads = max(1, min(int(workers), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(threads)
    logger.debug(f"Compiled kernels run on {threads} of {numba.config.NUMBA_NUM_THREADS} threads")
    return threads


# --- Scalar conversions, one pixel at a time ---

@njit(cache=True)
def _lab_f(t):
    if t > _LAB_EPSILON:
        return np.cbrt(t)
    return t / _LAB_SLOPE + 4.0 / 29.0


@njit(cache=True)
def _lab_f_inverse(f):
    if f > LAB_DELTA:
        return f * f * f
    return _LAB_SLOPE * (f - 4.0 / 29.0)


@njit(cache=True)
def linear_to_lab_px(r, g, b):
    x = (SRGB_TO_XYZ[0, 0] * r + SRGB_TO_XYZ[0, 1] * g + SRGB_TO_XYZ[0, 2] * b) / D65_WHITE[0]
    y = (SRGB_TO_XYZ[1, 0] * r + SRGB_TO_XYZ[1, 1] * g + SRGB_TO_XYZ[1, 2] * b) / D65_WHITE[1]
    z = (SRGB_TO_XYZ[2, 0] * r + SRGB_TO_XYZ[2, 1] * g + SRGB_TO_XYZ[2, 2] * b) / D65_WHITE[2]
    fx, fy, fz = _lab_f(x), _lab_f(y), _lab_f(z)
    return 116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)


@njit(cache=True)
def lab_to_linear_px(lightness, a, b):
    """CIELAB to linear light without clamping"""
    fy = (lightness + 16.0) / 116.0
    fx = fy + a / 500.0
    fz = fy - b / 200.0
    x = _lab_f_inverse(fx) * D65_WHITE[0]
    y = _lab_f_inverse(fy) * D65_WHITE[1]
    z = _lab_f_inverse(fz) * D65_WHITE[2]
    return (
        XYZ_TO_SRGB[0, 0] * x + XYZ_TO_SRGB[0, 1] * y + XYZ_TO_SRGB[0, 2] * z,
        XYZ_TO_SRGB[1, 0] * x + XYZ_TO_SRGB[1, 1] * y + XYZ_TO_SRGB[1, 2] * z,
        XYZ_TO_SRGB[2, 0] * x + XYZ_TO_SRGB[2, 1] * y + XYZ_TO_SRGB[2, 2] * z,
    )


@njit(cache=True)
def lab_to_scaled_px(lightness, a, b):
    return lightness / LAB_L_HALF_RANGE - 1.0, a / LAB_AB_RANGE, b / LAB_AB_RANGE


@njit(cache=True)
def project_px(x, y, z):
    norm = np.sqrt(x * x + y * y + z * z)
    if norm > 1.0:
        scale = 1.0 / norm
        return x * scale, y * scale, z * scale
    return x, y, z


@njit(cache=True)
def encode_channel(v):
    """Linear light to an 8-bit sRGB code, clamped to [0, 1] and rounded to nearest"""
    if v < 0.0:
        v = 0.0
    elif v > 1.0:
        v = 1.0
    if v <= 0.0031308:
        encoded = v * 12.92
    else:
        encoded = 1.055 * v ** (1.0 / 2.4) - 0.055
    return int(np.floor(encoded * 255.0 + 0.5))


@njit(cache=True)
def in_gamut_px(r, g, b):
    low = -GAMUT_TOLERANCE
    high = 1.0 + GAMUT_TOLERANCE
    return low <= r <= high and low <= g <= high and low <= b <= high


@njit(cache=True)
def lab_into_gamut(lightness, a, b):
    """
    Linear light of a CIELAB color brought into the display gamut

    Lightness is clamped to [0, 100], then a* and b* are scaled toward the
    neutral axis by the largest factor bisection finds displayable. Hue and
    lightness are kept; colors already in gamut pass unchanged.
    """
    lightness = min(max(lightness, 0.0), 100.0)
    r, g, bl = lab_to_linear_px(lightness, a, b)
    if in_gamut_px(r, g, bl):
        return r, g, bl
    low = 0.0
    high = 1.0
    for _ in range(GAMUT_BISECTIONS):
        mid = 0.5 * (low + high)
        r, g, bl = lab_to_linear_px(lightness, a * mid, b * mid)
        if in_gamut_px(r, g, bl):
            low = mid
        else:
            high = mid
    return lab_to_linear_px(lightness, a * low, b * low)


@njit(cache=True)
def scaled_into_gamut(x, y, z):
    return lab_into_gamut((x + 1.0) * LAB_L_HALF_RANGE, y * LAB_AB_RANGE, z * LAB_AB_RANGE)


# --- Row kernels over (n, 3) arrays ---

@njit(cache=True, parallel=True)
def _linear_lab_rows(linear):
    n = linear.shape[0]
    out = np.empty((n, 3))
    for k in prange(n):
        lightness, a, b = linear_to_lab_px(linear[k, 0], linear[k, 1], linear[k, 2])
        out[k, 0] = lightness
        out[k, 1] = a
        out[k, 2] = b
    return out


@njit(cache=True, parallel=True)
def _srgb_lab_rows(rgb):
    n = rgb.shape[0]
    out = np.empty((n, 3))
    for k in prange(n):
        lightness, a, b = linear_to_lab_px(
            SRGB_DECODE_LUT[rgb[k, 0]], SRGB_DECODE_LUT[rgb[k, 1]], SRGB_DECODE_LUT[rgb[k, 2]]
        )
        out[k, 0] = lightness
        out[k, 1] = a
        out[k, 2] = b
    return out


@njit(cache=True, parallel=True)
def _finish_rows(raw, shift):
    n = raw.shape[0]
    out = np.empty((n, 3), dtype=np.uint8)
    for k in prange(n):
        r, g, b = scaled_into_gamut(raw[k, 0] + shift[k, 0], raw[k, 1] + shift[k, 1], raw[k, 2] + shift[k, 2])
        out[k, 0] = encode_channel(r)
        out[k, 1] = encode_channel(g)
        out[k, 2] = encode_channel(b)
    return out


@njit(cache=True, parallel=True)
def _blend_rows(rgb, alpha, background):
    n = rgb.shape[0]
    out = np.empty((n, 3), dtype=np.uint8)
    for k in prange(n):
        weight = alpha[k] / 255.0
        for c in range(3):
            light = SRGB_DECODE_LUT[rgb[k, c]] * weight + background[k, c]
            out[k, c] = encode_channel(light)
    return out


@njit(cache=True, parallel=True)
def _difference_rows(background_lab, original, optimized):
    n = original.shape[0]
    out = np.empty((n, 5))
    for k in prange(n):
        bl, ba, bb = background_lab[k, 0], background_lab[k, 1], background_lab[k, 2]
        dl, da, db = linear_to_lab_px(
            SRGB_DECODE_LUT[original[k, 0]], SRGB_DECODE_LUT[original[k, 1]], SRGB_DECODE_LUT[original[k, 2]]
        )
        ol, oa, ob = linear_to_lab_px(
            SRGB_DECODE_LUT[optimized[k, 0]], SRGB_DECODE_LUT[optimized[k, 1]], SRGB_DECODE_LUT[optimized[k, 2]]
        )
        out[k, 0] = np.sqrt((bl - ol) * (bl - ol) + (ba - oa) * (ba - oa) + (bb - ob) * (bb - ob))
        out[k, 1] = np.sqrt((bl - dl) * (bl - dl) + (ba - da) * (ba - da) + (bb - db) * (bb - db))
        out[k, 2] = np.sqrt((ol - dl) * (ol - dl) + (oa - da) * (oa - da) + (ob - db) * (ob - db))
        out[k, 3] = ol
        out[k, 4] = dl
    return out


# --- Array entry points ---

def _rows(values: np.ndarray, dtype) -> np.ndarray:
    return np.ascontiguousarray(values, dtype=dtype).reshape(-1, 3)


def lab_from_linear(linear) -> np.ndarray:
    """CIELAB of linear-light colors, any leading shape"""
    linear = np.asarray(linear, dtype=np.float64)
    return _linear_lab_rows(_rows(linear, np.float64)).reshape(linear.shape)


def lab_from_srgb(rgb) -> np.ndarray:
    """CIELAB of 8-bit sRGB colors, any leading shape"""
    rgb = np.asarray(rgb)
    return _srgb_lab_rows(_rows(rgb, np.uint8)).reshape(rgb.shape)


def finish_colors(raw, shift) -> np.ndarray:
    """
    Apply scaled-LAB shifts to display colors and encode the result

    Args:
        raw: Scaled LAB display colors as decoded, shape (n, 3)
        shift: Scaled LAB shift per color, shape (n, 3)

    Returns:
        8-bit sRGB (n, 3); results outside the gamut lose chroma at constant
        hue and lightness until displayable
    """
    return _finish_rows(_rows(raw, np.float64), _rows(shift, np.float64))


def blend_to_srgb(rgb, alpha, background) -> np.ndarray:
    """Alpha-weighted display light plus background light, clamped and encoded; image shape kept"""
    rgb = np.asarray(rgb)
    height_width = rgb.shape[:-1]
    weights = np.ascontiguousarray(alpha, dtype=np.uint8).reshape(-1)
    out = _blend_rows(_rows(rgb, np.uint8), weights, _rows(background, np.float64))
    return out.reshape(height_width + (3,))


class DifferenceMaps(NamedTuple):
    """Per-pixel CIE76 distances and display lightness used by the enhancement metrics"""
    gained: np.ndarray
    before: np.ndarray
    changed: np.ndarray
    lightness: np.ndarray
    original_lightness: np.ndarray


def difference_maps(background_lab, original_rgb, optimized_rgb) -> DifferenceMaps:
    """
    Color differences between background, original and optimized display colors

    Args:
        background_lab: CIELAB background in the display frame, shape (..., 3)
        original_rgb: 8-bit sRGB virtual colors, same leading shape
        optimized_rgb: 8-bit sRGB display colors, same leading shape

    Returns:
        gained = dE(bg, optimized), before = dE(bg, original),
        changed = dE(optimized, original) and both L* maps
    """
    background_lab = np.asarray(background_lab, dtype=np.float64)
    shape = background_lab.shape[:-1]
    out = _difference_rows(_rows(background_lab, np.float64), _rows(original_rgb, np.uint8), _rows(optimized_rgb, np.uint8))
    return DifferenceMaps(*(out[:, k].reshape(shape) for k in range(5)))
