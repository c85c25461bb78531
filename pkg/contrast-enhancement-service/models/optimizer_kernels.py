"""
Compiled Optimizer Kernels
The per-pixel optimizer as scalar numba code, and the fused frame pass that
decodes, optimizes, maps into gamut and encodes each foreground pixel
"""

import numpy as np
from numba import njit, prange

from utils.colorspace import SRGB_DECODE_LUT
from utils.color_kernels import (
    encode_channel,
    lab_to_scaled_px,
    linear_to_lab_px,
    project_px,
    scaled_into_gamut,
)

BALL_TOLERANCE = 1e-12


@njit(cache=True)
def _norm(x, y, z):
    return np.sqrt(x * x + y * y + z * z)


@njit(cache=True)
def constrained_target_px(dx, dy, dz, bx, by, bz, lambda_e, epsilon, chroma_on, luminance_on):
    """D + DC + DL for one pixel; a background at the ball center leaves D in place"""
    nb = _norm(bx, by, bz)
    ex, ey, ez = 0.0, 0.0, 0.0
    if nb > epsilon:
        gx, gy, gz = -bx / nb - dx, -by / nb - dy, -bz / nb - dz
        dist = _norm(gx, gy, gz)
        if dist > epsilon:
            scale = min(dist, lambda_e) / dist
            ex, ey, ez = gx * scale, gy * scale, gz * scale

    if chroma_on:
        c = np.sqrt(dy * dy + dz * dz)
        uy, uz = 0.0, 0.0
        if c > epsilon:
            uy, uz = dy / c, dz / c
        s = ey * uy + ez * uz
        gate = 1.0 if s >= 0.0 else 0.0
        cy = gate * (s * uy) + (ey - s * uy)
        cz = gate * (s * uz) + (ez - s * uz)
    else:
        cy, cz = ey, ez

    if luminance_on:
        ne = _norm(ex, ey, ez)
        dl = (1.0 - abs(ex / ne)) * ex if ne > epsilon else 0.0
    else:
        dl = ex
    return dx + dl, dy + cy, dz + cz


@njit(cache=True)
def jnd_settle_px(dx, dy, dz, px, py, pz, bx, by, bz, radius, epsilon):
    """Unit-ball projection, then the JND push-out along the line from D through P"""
    px, py, pz = project_px(px, py, pz)
    if radius <= 0.0 or _norm(px - bx, py - by, pz - bz) >= radius:
        return px, py, pz

    vx, vy, vz = px - dx, py - dy, pz - dz
    moving = _norm(vx, vy, vz) > epsilon
    wx, wy, wz = dx - bx, dy - by, dz - bz
    a = vx * vx + vy * vy + vz * vz
    b = 2.0 * (vx * wx + vy * wy + vz * wz)
    c = wx * wx + wy * wy + wz * wz - radius * radius
    root = np.sqrt(max(b * b - 4.0 * a * c, 0.0))
    two_a = 2.0 * (a if moving else 1.0)
    t_far = (-b + root) / two_a
    t_near = (-b - root) / two_a

    nb = _norm(bx, by, bz)
    if nb > epsilon:
        cx, cy, cz = bx + radius * (-bx / nb), by + radius * (-by / nb), bz + radius * (-bz / nb)
    else:
        cx, cy, cz = bx, by + radius, bz

    if moving:
        fx, fy, fz = dx + t_far * vx, dy + t_far * vy, dz + t_far * vz
    else:
        nw = _norm(wx, wy, wz)
        if nw > epsilon:
            fx, fy, fz = bx + radius * (wx / nw), by + radius * (wy / nw), bz + radius * (wz / nw)
        else:
            fx, fy, fz = bx, by + radius, bz

    if _norm(fx, fy, fz) <= 1.0 + BALL_TOLERANCE:
        return project_px(fx, fy, fz)
    if moving:
        nx, ny, nz = dx + t_near * vx, dy + t_near * vy, dz + t_near * vz
        if _norm(nx, ny, nz) <= 1.0 + BALL_TOLERANCE:
            return project_px(nx, ny, nz)
    return project_px(cx, cy, cz)


@njit(cache=True)
def optimize_px(dx, dy, dz, bx, by, bz, lambda_e, radius, epsilon, chroma_on, luminance_on, jnd_on):
    if lambda_e == 0.0:
        return dx, dy, dz
    px, py, pz = constrained_target_px(dx, dy, dz, bx, by, bz, lambda_e, epsilon, chroma_on, luminance_on)
    if jnd_on:
        return jnd_settle_px(dx, dy, dz, px, py, pz, bx, by, bz, radius, epsilon)
    return project_px(px, py, pz)


@njit(cache=True, parallel=True)
def optimize_rows(D, B, lambda_e, radius, epsilon, chroma_on, luminance_on, jnd_on):
    """optimize_px over (n, 3) arrays of in-ball display and background points"""
    n = D.shape[0]
    out = np.empty((n, 3))
    for k in prange(n):
        px, py, pz = optimize_px(
            D[k, 0], D[k, 1], D[k, 2], B[k, 0], B[k, 1], B[k, 2],
            lambda_e, radius, epsilon, chroma_on, luminance_on, jnd_on,
        )
        out[k, 0] = px
        out[k, 1] = py
        out[k, 2] = pz
    return out


@njit(cache=True, parallel=True)
def enhance_rows(rgb, background_lab, lambda_e, radius, epsilon, chroma_on, luminance_on, jnd_on):
    """
    Fused frame pass over (n, 3) rows

    Args:
        rgb: 8-bit sRGB display colors
        background_lab: CIELAB of the blurred, attenuated background behind each color

    Returns:
        (8-bit sRGB display colors, flags of pixels whose background sits at the ball center)
    """
    n = rgb.shape[0]
    out = np.empty((n, 3), dtype=np.uint8)
    degenerate = np.zeros(n, dtype=np.bool_)
    for k in prange(n):
        lightness, a, b = linear_to_lab_px(
            SRGB_DECODE_LUT[rgb[k, 0]], SRGB_DECODE_LUT[rgb[k, 1]], SRGB_DECODE_LUT[rgb[k, 2]]
        )
        rx, ry, rz = lab_to_scaled_px(lightness, a, b)
        dx, dy, dz = project_px(rx, ry, rz)
        sx, sy, sz = lab_to_scaled_px(background_lab[k, 0], background_lab[k, 1], background_lab[k, 2])
        bx, by, bz = project_px(sx, sy, sz)
        degenerate[k] = _norm(bx, by, bz) <= epsilon

        px, py, pz = optimize_px(dx, dy, dz, bx, by, bz, lambda_e, radius, epsilon, chroma_on, luminance_on, jnd_on)
        # The shift found for the in-ball point is carried over to the original color
        lr, lg, lb = scaled_into_gamut(rx + (px - dx), ry + (py - dy), rz + (pz - dz))
        out[k, 0] = encode_channel(lr)
        out[k, 1] = encode_channel(lg)
        out[k, 2] = encode_channel(lb)
    return out, degenerate
