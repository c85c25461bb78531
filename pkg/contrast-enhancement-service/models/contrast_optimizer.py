"""
Contrast Optimizer
Per-pixel search for the display color that maximizes color difference from
the blurred background under the color-difference, chroma, luminance and JND
constraints, carried out in the scaled unit-ball LAB space
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from models.optimizer_kernels import BALL_TOLERANCE, enhance_rows, optimize_rows
from utils.color_kernels import finish_colors, lab_from_linear, lab_from_srgb, set_kernel_threads
from utils.colorspace import JND_LAB, LAB_AB_RANGE, lab_to_scaled, project_to_unit_ball, vector_norm
from utils.image_preprocessor import FovMapping, sample_background_frame
from utils.raster import RasterImage, RasterShapeError, foreground_mask

logger = logging.getLogger(__name__)

# Below this many foreground pixels per worker the thread pool is not worth it
MIN_CHUNK_PIXELS = 4096


class EnhanceParams(BaseModel):
    """Tunables of the enhancement, all in scaled LAB units"""
    model_config = ConfigDict(frozen=True)

    lambda_e: float = Field(default=0.4, ge=0.0, le=2.0, allow_inf_nan=False)
    lambda_jnd_scaled: float = Field(default=JND_LAB / LAB_AB_RANGE, ge=0.0, le=1.0, allow_inf_nan=False)
    epsilon: float = Field(default=1e-9, gt=0.0, allow_inf_nan=False)

    # Ablation switches; all on for the full method
    chroma_constraint: bool = True
    luminance_constraint: bool = True
    jnd_constraint: bool = True

    @classmethod
    def from_unscaled_jnd(cls, jnd: float, **kwargs) -> "EnhanceParams":
        """Build params from a JND given in unscaled LAB units"""
        return cls(lambda_jnd_scaled=jnd / LAB_AB_RANGE, **kwargs)


class IdealPoint(NamedTuple):
    point: np.ndarray
    degenerate: np.ndarray


@dataclass(frozen=True)
class ShiftDecomposition:
    """
    The pieces of one constrained shift

    e is the clamped shift DE, e_ch and e_h its chromatic-plane projection split
    along and across the chroma direction of D, t_ch the chroma gate, dc the
    chroma-constrained shift and dl the attenuated luminance shift.

    theta_ch is the angle (radians) between the chromatic projection of e and
    the chroma direction of D; where defined, t_ch is 1 exactly when it is at
    most pi/2.
    theta_l is the angle between e and +L*. Where an angle is undefined (zero
    shift, achromatic D) it is reported as pi/2.
    """
    e: np.ndarray
    e_ch: np.ndarray
    e_h: np.ndarray
    t_ch: np.ndarray
    dc: np.ndarray
    dl: np.ndarray
    theta_ch: np.ndarray
    theta_l: np.ndarray
    degenerate: np.ndarray
    achromatic: np.ndarray


TargetFunction = Callable[[np.ndarray, np.ndarray, EnhanceParams], np.ndarray]


def _as_points(*arrays):
    return np.broadcast_arrays(*(np.asarray(a, dtype=np.float64) for a in arrays))


def _axis(template: np.ndarray, index: int) -> np.ndarray:
    unit = np.zeros(template.shape, dtype=np.float64)
    unit[..., index] = 1.0
    return unit


def ideal_point(B, epsilon: float = 1e-9) -> IdealPoint:
    """
    Farthest point from B inside the unit ball, -B/|B|

    A background at the ball center has no preferred direction; the point is
    then zero and flagged degenerate.
    """
    B = np.asarray(B, dtype=np.float64)
    norm = vector_norm(B)
    degenerate = norm <= epsilon
    safe = np.where(degenerate, 1.0, norm)
    point = np.where(degenerate[..., None], 0.0, -B / safe[..., None])
    return IdealPoint(point, degenerate)


def clamp_shift(D, I, lambda_e: float, epsilon: float = 1e-9) -> np.ndarray:
    """Shift from D toward I, no longer than lambda_e"""
    D, I = _as_points(D, I)
    diff = I - D
    dist = vector_norm(diff)
    moving = dist > epsilon
    scale = np.where(moving, np.minimum(dist, lambda_e) / np.where(moving, dist, 1.0), 0.0)
    return diff * scale[..., None]


def _angle(along, length, epsilon: float) -> np.ndarray:
    defined = length > epsilon
    cos = np.where(defined, along / np.where(defined, length, 1.0), 0.0)
    return np.arccos(np.clip(cos, -1.0, 1.0))


def _chroma_split(D, DE, epsilon: float):
    """Split the chromatic part of DE along and across the chroma direction of D"""
    D, DE = _as_points(D, DE)
    cy, cz = D[..., 1], D[..., 2]
    c = np.sqrt(cy * cy + cz * cz)
    achromatic = c <= epsilon
    safe = np.where(achromatic, 1.0, c)
    uy = np.where(achromatic, 0.0, cy / safe)
    uz = np.where(achromatic, 0.0, cz / safe)

    ey, ez = DE[..., 1], DE[..., 2]
    s = ey * uy + ez * uz

    zero = np.zeros_like(s)
    e_ch = np.stack([zero, s * uy, s * uz], axis=-1)
    e_h = np.stack([zero, ey - s * uy, ez - s * uz], axis=-1)
    t_ch = np.where(s >= 0.0, 1.0, 0.0)
    return e_ch, e_h, t_ch, achromatic, s


def chroma_constrained_shift(D, DE, epsilon: float = 1e-9) -> np.ndarray:
    """
    Drop the chroma-reducing part of a shift

    DE is projected onto the a*b* plane and split into a component along the
    chroma direction of D and a hue component across it. The chroma component
    survives only when it points outward (angle to D's chroma direction at
    most 90 degrees). For an achromatic D the projection passes unmodified.
    """
    e_ch, e_h, t_ch, _, _ = _chroma_split(D, DE, epsilon)
    return t_ch[..., None] * e_ch + e_h


def luminance_constrained_shift(DE, epsilon: float = 1e-9) -> np.ndarray:
    """Luminance shift scaled by (1 - |cos theta_l|), theta_l measured from +L*"""
    DE = np.asarray(DE, dtype=np.float64)
    norm = vector_norm(DE)
    moving = norm > epsilon
    cos_l = np.where(moving, DE[..., 0] / np.where(moving, norm, 1.0), 0.0)
    return np.where(moving, (1.0 - np.abs(cos_l)) * DE[..., 0], 0.0)


def decompose_shift(D, B, p: EnhanceParams) -> ShiftDecomposition:
    """Run the color-difference, chroma and luminance steps and keep every intermediate"""
    D, B = _as_points(D, B)
    ideal = ideal_point(B, p.epsilon)
    e = clamp_shift(D, ideal.point, p.lambda_e, p.epsilon)
    e = np.where(ideal.degenerate[..., None], 0.0, e)

    e_ch, e_h, t_ch, achromatic, along = _chroma_split(D, e, p.epsilon)
    theta_ch = _angle(along, np.sqrt(e[..., 1] * e[..., 1] + e[..., 2] * e[..., 2]), p.epsilon)
    theta_l = _angle(e[..., 0], vector_norm(e), p.epsilon)
    if p.chroma_constraint:
        dc = t_ch[..., None] * e_ch + e_h
    else:
        dc = e * np.array([0.0, 1.0, 1.0])

    if p.luminance_constraint:
        dl = luminance_constrained_shift(e, p.epsilon)
    else:
        dl = np.array(e[..., 0], copy=True)

    return ShiftDecomposition(
        e=e, e_ch=e_ch, e_h=e_h, t_ch=t_ch, dc=dc, dl=dl, theta_ch=theta_ch, theta_l=theta_l,
        degenerate=ideal.degenerate, achromatic=achromatic,
    )


def constrained_target(D, B, p: EnhanceParams) -> np.ndarray:
    """P = D + DC + DL, before the JND step"""
    D, B = _as_points(D, B)
    if p.lambda_e == 0.0:
        return np.array(D, copy=True)
    shift = decompose_shift(D, B, p)
    return D + shift.dc + shift.dl[..., None] * _axis(D, 0)


def apply_jnd(D, P, B, r: float, epsilon: float = 1e-9) -> np.ndarray:
    """
    Push P out of the JND sphere of radius r around B

    P is first brought into the unit ball. When it still sits within r of B,
    the line from D through P is intersected with the sphere and the far-side
    root taken. If that root leaves the unit ball the near-side root is used,
    and if that leaves it as well the point r from B toward the ball center.
    When P coincides with D the point moves straight away from B instead
    (along +a* if D also equals B).
    """
    D, P, B = _as_points(D, P, B)
    shape = P.shape
    D, B = D.reshape(-1, 3), B.reshape(-1, 3)
    P = project_to_unit_ball(P.reshape(-1, 3))
    if r <= 0.0:
        return P.reshape(shape)

    inside = vector_norm(P - B) < r
    if not np.any(inside):
        return P.reshape(shape)

    Di, Pi, Bi = D[inside], P[inside], B[inside]
    direction = Pi - Di
    moving = vector_norm(direction) > epsilon

    w = Di - Bi
    a = direction[..., 0] * direction[..., 0] + direction[..., 1] * direction[..., 1] + direction[..., 2] * direction[..., 2]
    b = 2.0 * (direction[..., 0] * w[..., 0] + direction[..., 1] * w[..., 1] + direction[..., 2] * w[..., 2])
    c = w[..., 0] * w[..., 0] + w[..., 1] * w[..., 1] + w[..., 2] * w[..., 2] - r * r
    root = np.sqrt(np.maximum(b * b - 4.0 * a * c, 0.0))
    two_a = 2.0 * np.where(moving, a, 1.0)
    far = Di + ((-b + root) / two_a)[..., None] * direction
    near = Di + ((-b - root) / two_a)[..., None] * direction

    plus_a = _axis(Bi, 1)
    w_norm = vector_norm(w)
    away_dir = np.where((w_norm > epsilon)[..., None], w / np.where(w_norm > epsilon, w_norm, 1.0)[..., None], plus_a)
    away = Bi + r * away_dir

    b_norm = vector_norm(Bi)
    center_dir = np.where((b_norm > epsilon)[..., None], -Bi / np.where(b_norm > epsilon, b_norm, 1.0)[..., None], plus_a)
    toward_center = Bi + r * center_dir

    first = np.where(moving[..., None], far, away)
    first_ok = vector_norm(first) <= 1.0 + BALL_TOLERANCE
    near_ok = moving & (vector_norm(near) <= 1.0 + BALL_TOLERANCE)
    settled = np.where(first_ok[..., None], first, np.where(near_ok[..., None], near, toward_center))

    result = np.array(P, copy=True)
    result[inside] = project_to_unit_ball(settled)
    return result.reshape(shape)


def settle_target(D, P, B, p: EnhanceParams) -> np.ndarray:
    """Final step shared by every method: JND floor and unit-ball containment"""
    D, P, B = _as_points(D, P, B)
    if p.lambda_e == 0.0:
        return np.array(D, copy=True)
    if p.jnd_constraint:
        return apply_jnd(D, P, B, p.lambda_jnd_scaled, p.epsilon)
    return project_to_unit_ball(P)


def optimize_color(D, B, p: EnhanceParams) -> np.ndarray:
    """
    Optimal display color for display color D over background B

    Args:
        D: Scaled LAB display color(s), shape (..., 3)
        B: Scaled LAB blurred background color(s), broadcastable to D
        p: Enhancement parameters

    Returns:
        Scaled LAB point(s) P inside the unit ball
    """
    return settle_target(D, constrained_target(D, B, p), B, p)


def _run_chunked(method: TargetFunction, D: np.ndarray, B: np.ndarray, p: EnhanceParams, workers: int) -> np.ndarray:
    count = len(D)
    chunks = min(workers, max(1, count // MIN_CHUNK_PIXELS))
    if chunks <= 1:
        return method(D, B, p)

    bounds = np.linspace(0, count, chunks + 1).astype(int)
    slices = [slice(bounds[k], bounds[k + 1]) for k in range(chunks)]
    logger.debug(f"Optimizing {count} pixels in {chunks} chunks")
    with ThreadPoolExecutor(max_workers=chunks) as pool:
        parts = list(pool.map(lambda s: method(D[s], B[s], p), slices))
    return np.concatenate(parts, axis=0)


def optimize_points(D, B, p: EnhanceParams) -> np.ndarray:
    """Compiled optimize_color over (..., 3) arrays, in parallel on the kernel threads"""
    D, B = _as_points(D, B)
    P = optimize_rows(
        np.ascontiguousarray(D).reshape(-1, 3),
        np.ascontiguousarray(B).reshape(-1, 3),
        p.lambda_e, p.lambda_jnd_scaled, p.epsilon,
        p.chroma_constraint, p.luminance_constraint, p.jnd_constraint,
    )
    return P.reshape(D.shape)


def _require_display_frame(frame: np.ndarray, virtual: RasterImage) -> None:
    if frame.shape[:2] != (virtual.height, virtual.width):
        raise RasterShapeError(
            f"Background frame {frame.shape[1]}x{frame.shape[0]} "
            f"does not match virtual image {virtual.width}x{virtual.height}"
        )


def _foreground_rows(values: np.ndarray, fg: np.ndarray, full: bool) -> np.ndarray:
    if full:
        return values.reshape(-1, values.shape[-1])
    return values[fg]


def enhance_frame(
    virtual: RasterImage,
    blurred_bg: RasterImage,
    mapping: FovMapping,
    p: EnhanceParams,
    method: Optional[TargetFunction] = None,
    workers: int = 1,
    background_frame: Optional[np.ndarray] = None,
    background_lab: Optional[np.ndarray] = None,
) -> RasterImage:
    """
    Optimize the display color of every foreground pixel

    The default method runs as one compiled pass per pixel; other target
    functions run vectorized and share the compiled finishing step. A shifted
    color outside the display gamut loses chroma at constant hue and lightness.

    Args:
        virtual: Rendered virtual image
        blurred_bg: Blurred, attenuated background capture
        mapping: FoV calibration from display frame into the capture
        p: Enhancement parameters
        method: Per-pixel target function, optimize_color by default
        workers: Thread count; the result does not depend on it
        background_frame: Pre-sampled linear background in the display frame
        background_lab: CIELAB of background_frame, when already computed

    Returns:
        Display image; background pixels pass through unchanged
    """
    method = method or optimize_color
    fg = foreground_mask(virtual)
    if not np.any(fg):
        logger.debug("No foreground pixels; frame passes through")
        return virtual

    workers = max(1, int(workers))
    set_kernel_threads(workers)
    full = bool(fg.all())
    if background_lab is not None:
        _require_display_frame(background_lab, virtual)
        bg_lab_rows = _foreground_rows(background_lab, fg, full)
    else:
        if background_frame is None:
            background_frame = sample_background_frame(blurred_bg, virtual.width, virtual.height, mapping)
        _require_display_frame(background_frame, virtual)
        bg_lab_rows = lab_from_linear(_foreground_rows(background_frame, fg, full))
    rgb_rows = _foreground_rows(virtual.rgb, fg, full)

    if method is optimize_color:
        out, flags = enhance_rows(
            np.ascontiguousarray(rgb_rows), np.ascontiguousarray(bg_lab_rows),
            p.lambda_e, p.lambda_jnd_scaled, p.epsilon,
            p.chroma_constraint, p.luminance_constraint, p.jnd_constraint,
        )
        degenerate = int(np.count_nonzero(flags))
    else:
        display_raw = lab_to_scaled(lab_from_srgb(rgb_rows))
        D = project_to_unit_ball(display_raw)
        B = project_to_unit_ball(lab_to_scaled(bg_lab_rows))
        degenerate = int(np.count_nonzero(vector_norm(B) <= p.epsilon))
        P = _run_chunked(method, D, B, p, workers)
        # The shift found for the in-ball point is carried over to the original color
        out = finish_colors(display_raw, P - D)

    if degenerate:
        logger.debug(f"{degenerate} pixels sit over a mid-gray background with no complementary direction")

    if full:
        rgb = out.reshape(virtual.rgb.shape)
    else:
        rgb = np.array(virtual.rgb, copy=True)
        rgb[fg] = out
    return virtual.with_rgb(rgb)
