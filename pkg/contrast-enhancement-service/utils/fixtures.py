"""
Synthetic Fixtures
Background captures and virtual scenes generated in code for tests, demos
and the benchmark
"""

from typing import Dict

import numpy as np

from utils.raster import RasterImage

# Virtual content colors: white UI text, skin, sky, red, green, purple
PALETTE = np.array([
    [255, 255, 255],
    [224, 172, 105],
    [135, 206, 235],
    [200, 30, 30],
    [40, 160, 60],
    [128, 64, 192],
], dtype=np.uint8)


def _gradient(width: int, height: int, top, bottom) -> np.ndarray:
    t = np.linspace(0.0, 1.0, height)[:, None, None]
    column = (1.0 - t) * np.asarray(top, dtype=np.float64) + t * np.asarray(bottom, dtype=np.float64)
    return np.repeat(column, width, axis=1)


def _hue_ramp(width: int, height: int) -> np.ndarray:
    hue = np.linspace(0.0, 1.0, width, endpoint=False)
    channels = [np.clip(np.abs(((hue + shift) % 1.0) * 6.0 - 3.0) - 1.0, 0.0, 1.0) for shift in (0.0, 2 / 3, 1 / 3)]
    row = np.stack(channels, axis=-1) * 200.0 + 30.0
    return np.repeat(row[None, :, :], height, axis=0)


def synthetic_backgrounds(width: int = 160, height: int = 120, seed: int = 7) -> Dict[str, RasterImage]:
    """
    Background captures covering uniform, graded and textured scenes

    No pixel is black, so every background contributes light to the blend.
    """
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width]
    checker = ((xx // 16 + yy // 16) % 2)[..., None]
    foliage = np.stack([
        40 + 30 * np.sin(xx / 5.0) * np.cos(yy / 7.0),
        120 + 50 * np.sin(xx / 9.0 + yy / 11.0),
        40 + 20 * np.cos(yy / 4.0),
    ], axis=-1)

    scenes = {
        "yellow": np.full((height, width, 3), (255, 230, 0), dtype=np.float64),
        "blue": np.full((height, width, 3), (20, 60, 220), dtype=np.float64),
        "red": np.full((height, width, 3), (210, 40, 30), dtype=np.float64),
        "green": np.full((height, width, 3), (40, 180, 60), dtype=np.float64),
        "white_wall": np.full((height, width, 3), (235, 235, 228), dtype=np.float64),
        "dark_gray": np.full((height, width, 3), (50, 50, 50), dtype=np.float64),
        "sky": _gradient(width, height, (90, 150, 235), (200, 225, 250)),
        "sunset": _gradient(width, height, (250, 120, 40), (120, 40, 110)),
        "checker": np.where(checker == 1, (230, 200, 40), (40, 90, 200)).astype(np.float64),
        "hue_ramp": _hue_ramp(width, height),
        "noise": rng.uniform(30, 255, size=(height, width, 3)),
        "foliage": foliage,
    }
    return {name: RasterImage(np.clip(np.rint(rgb), 1, 255).astype(np.uint8)) for name, rgb in scenes.items()}


def synthetic_virtual_scene(width: int = 160, height: int = 120, coverage: float = 0.5, seed: int = 0) -> RasterImage:
    """
    RGBA virtual scene whose first round(coverage * pixels) pixels, in row-major
    order, are opaque content drawn from PALETTE; the rest is transparent black
    """
    if not 0.0 <= coverage <= 1.0:
        raise ValueError(f"coverage must lie in [0, 1], got {coverage}")
    count = width * height
    filled = int(round(coverage * count))

    rng = np.random.default_rng(seed)
    band = (np.arange(count) // max(1, width * 4)) % len(PALETTE)
    rgb = PALETTE[band].astype(np.int16)
    rgb = rgb + rng.integers(-12, 13, size=rgb.shape)

    pixels = np.zeros((count, 4), dtype=np.uint8)
    pixels[:filled, :3] = np.clip(rgb[:filled], 1, 255)
    pixels[:filled, 3] = 255
    return RasterImage(pixels.reshape(height, width, 4))


def white_text_scene(width: int = 160, height: int = 120) -> RasterImage:
    """Opaque white block covering the middle half of the frame, transparent elsewhere"""
    pixels = np.zeros((height, width, 4), dtype=np.uint8)
    pixels[height // 4: height - height // 4, width // 4: width - width // 4] = (255, 255, 255, 255)
    return RasterImage(pixels)
