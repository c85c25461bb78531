"""
Color Space Utilities
Conversions between 8-bit sRGB, linear light, CIE XYZ, CIELAB and the
scaled unit-ball LAB space the optimizer searches in
"""

import logging
from typing import Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

logger = logging.getLogger(__name__)

# Colors are arrays whose last axis holds three channels; a single color is
# shape (3,), an image is (H, W, 3).
Srgb8 = NDArray[np.uint8]
LinearRgb = NDArray[np.float64]
Lab = NDArray[np.float64]
ScaledLab = NDArray[np.float64]

# IEC 61966-2-1 sRGB primaries, D65 white, 2 degree observer
SRGB_TO_XYZ = np.array([
    [0.4124, 0.3576, 0.1805],
    [0.2126, 0.7152, 0.0722],
    [0.0193, 0.1192, 0.9505],
])
XYZ_TO_SRGB = np.linalg.inv(SRGB_TO_XYZ)

# White point taken from the matrix itself so linear (1,1,1) lands on L*=100, a*=b*=0
D65_WHITE = SRGB_TO_XYZ.sum(axis=1)

LAB_DELTA = 6.0 / 29.0

# Scaled space: L* in [0,100] -> x in [-1,1]; a*, b* divided by 128
LAB_L_HALF_RANGE = 50.0
LAB_AB_RANGE = 128.0

# Just noticeable difference in unscaled CIELAB units
JND_LAB = 2.3


def _decode_channel(v: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.where(v <= 0.04045, v / 12.92, ((v + 0.055) / 1.055) ** 2.4)


def _encode_channel(v: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.where(v <= 0.0031308, v * 12.92, 1.055 * np.power(v, 1.0 / 2.4) - 0.055)


SRGB_DECODE_LUT = _decode_channel(np.arange(256, dtype=np.float64) / 255.0)


def srgb_to_linear(c: ArrayLike) -> LinearRgb:
    """
    Decode 8-bit sRGB to linear light

    Args:
        c: Integer channel values 0-255, last axis RGB

    Returns:
        Linear-light values in [0, 1]
    """
    values = np.asarray(c)
    if values.dtype == np.uint8:
        return SRGB_DECODE_LUT[values]
    if values.size and (values.min() < 0 or values.max() > 255):
        raise ValueError("sRGB channel values must lie in 0-255")
    return SRGB_DECODE_LUT[values.astype(np.intp)]


def linear_to_srgb(c: ArrayLike) -> Srgb8:
    """
    Encode linear light to 8-bit sRGB

    Values are clamped to [0, 1] before encoding and rounded to nearest.
    """
    linear = clamp_to_gamut(c)
    encoded = _encode_channel(linear)
    return np.floor(encoded * 255.0 + 0.5).astype(np.uint8)


def clamp_to_gamut(c: ArrayLike) -> LinearRgb:
    """Channel-wise clamp of linear light to [0, 1]"""
    return np.clip(np.asarray(c, dtype=np.float64), 0.0, 1.0)


def linear_to_xyz(c: ArrayLike) -> NDArray[np.float64]:
    rgb = np.asarray(c, dtype=np.float64)
    m = SRGB_TO_XYZ
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    return np.stack([
        m[0, 0] * r + m[0, 1] * g + m[0, 2] * b,
        m[1, 0] * r + m[1, 1] * g + m[1, 2] * b,
        m[2, 0] * r + m[2, 1] * g + m[2, 2] * b,
    ], axis=-1)


def xyz_to_linear(c: ArrayLike) -> NDArray[np.float64]:
    xyz = np.asarray(c, dtype=np.float64)
    m = XYZ_TO_SRGB
    x, y, z = xyz[..., 0], xyz[..., 1], xyz[..., 2]
    return np.stack([
        m[0, 0] * x + m[0, 1] * y + m[0, 2] * z,
        m[1, 0] * x + m[1, 1] * y + m[1, 2] * z,
        m[2, 0] * x + m[2, 1] * y + m[2, 2] * z,
    ], axis=-1)


def _lab_f(t: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.where(
        t > LAB_DELTA ** 3,
        np.cbrt(t),
        t / (3.0 * LAB_DELTA ** 2) + 4.0 / 29.0,
    )


def _lab_f_inverse(f: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.where(
        f > LAB_DELTA,
        f ** 3,
        3.0 * LAB_DELTA ** 2 * (f - 4.0 / 29.0),
    )


def xyz_to_lab(c: ArrayLike) -> Lab:
    """CIE 1976 L*a*b* relative to the D65 white"""
    xyz = np.asarray(c, dtype=np.float64) / D65_WHITE
    fx, fy, fz = _lab_f(xyz[..., 0]), _lab_f(xyz[..., 1]), _lab_f(xyz[..., 2])
    return np.stack([116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)], axis=-1)


def lab_to_xyz(c: ArrayLike) -> NDArray[np.float64]:
    lab = np.asarray(c, dtype=np.float64)
    fy = (lab[..., 0] + 16.0) / 116.0
    fx = fy + lab[..., 1] / 500.0
    fz = fy - lab[..., 2] / 200.0
    xyz = np.stack([_lab_f_inverse(fx), _lab_f_inverse(fy), _lab_f_inverse(fz)], axis=-1)
    return xyz * D65_WHITE


def linear_to_lab(c: ArrayLike) -> Lab:
    """Linear-light sRGB to CIELAB"""
    return xyz_to_lab(linear_to_xyz(c))


def lab_to_linear(c: ArrayLike) -> LinearRgb:
    """CIELAB to linear-light sRGB, gamut-clamped to [0, 1]"""
    return clamp_to_gamut(xyz_to_linear(lab_to_xyz(c)))


def lab_to_scaled(c: ArrayLike) -> ScaledLab:
    """Map L* [0,100] and a*, b* [-128,128] onto [-1,1] per axis"""
    lab = np.asarray(c, dtype=np.float64)
    return np.stack([
        lab[..., 0] / LAB_L_HALF_RANGE - 1.0,
        lab[..., 1] / LAB_AB_RANGE,
        lab[..., 2] / LAB_AB_RANGE,
    ], axis=-1)


def scaled_to_lab(c: ArrayLike) -> Lab:
    scaled = np.asarray(c, dtype=np.float64)
    return np.stack([
        (scaled[..., 0] + 1.0) * LAB_L_HALF_RANGE,
        scaled[..., 1] * LAB_AB_RANGE,
        scaled[..., 2] * LAB_AB_RANGE,
    ], axis=-1)


def vector_norm(v: ArrayLike) -> NDArray[np.float64]:
    """Euclidean norm over the last axis, written out so results never depend on array length"""
    a = np.asarray(v, dtype=np.float64)
    return np.sqrt(a[..., 0] * a[..., 0] + a[..., 1] * a[..., 1] + a[..., 2] * a[..., 2])


def project_to_unit_ball(c: ArrayLike) -> ScaledLab:
    """Radially project points with norm > 1 onto the unit sphere; points inside are unchanged"""
    scaled = np.asarray(c, dtype=np.float64)
    norm = vector_norm(scaled)
    scale = np.where(norm > 1.0, 1.0 / np.where(norm > 1.0, norm, 1.0), 1.0)
    return scaled * scale[..., None]


def srgb_to_scaled(c: ArrayLike) -> ScaledLab:
    """Display color to an optimizer solution-space point inside the unit ball"""
    return project_to_unit_ball(lab_to_scaled(linear_to_lab(srgb_to_linear(c))))


def scaled_to_srgb(c: ArrayLike) -> Srgb8:
    """Scaled LAB back to a displayable 8-bit color, clamping out-of-gamut results"""
    return linear_to_srgb(lab_to_linear(scaled_to_lab(c)))


def delta_e(x: ArrayLike, y: ArrayLike) -> Union[float, NDArray[np.float64]]:
    """CIE76 color difference: Euclidean distance in L*a*b*"""
    return vector_norm(np.asarray(x, dtype=np.float64) - np.asarray(y, dtype=np.float64))


def chroma(c: ArrayLike) -> Union[float, NDArray[np.float64]]:
    """Radial distance from the achromatic axis, sqrt(y^2 + z^2)"""
    scaled = np.asarray(c, dtype=np.float64)
    return np.sqrt(scaled[..., 1] * scaled[..., 1] + scaled[..., 2] * scaled[..., 2])
