"""
Raster Image Utilities
The RasterImage carrier plus PNG loading, saving and validation
"""

import io
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from config import Config

logger = logging.getLogger(__name__)


class RasterShapeError(ValueError):
    """Raised when image dimensions are invalid or do not line up"""


@dataclass(frozen=True)
class RasterImage:
    """
    Row-major grid of 8-bit sRGB pixels with optional alpha

    pixels has shape (height, width, 3) or (height, width, 4), dtype uint8.
    """
    pixels: np.ndarray

    def __post_init__(self):
        pixels = np.asarray(self.pixels)
        if pixels.ndim != 3 or pixels.shape[2] not in (3, 4):
            raise RasterShapeError(f"Expected an (H, W, 3|4) pixel grid, got shape {pixels.shape}")
        if pixels.shape[0] < 1 or pixels.shape[1] < 1:
            raise RasterShapeError(f"Image must be at least 1x1, got {pixels.shape[1]}x{pixels.shape[0]}")
        if pixels.dtype != np.uint8:
            if pixels.size and (pixels.min() < 0 or pixels.max() > 255):
                raise RasterShapeError("Pixel values must lie in 0-255")
            pixels = pixels.astype(np.uint8)
        object.__setattr__(self, "pixels", np.ascontiguousarray(pixels))

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def has_alpha(self) -> bool:
        return self.pixels.shape[2] == 4

    @property
    def rgb(self) -> np.ndarray:
        return self.pixels[..., :3]

    @property
    def alpha(self) -> np.ndarray:
        """Alpha channel, 255 everywhere when the image has none"""
        if self.has_alpha:
            return self.pixels[..., 3]
        return np.full((self.height, self.width), 255, dtype=np.uint8)

    def with_rgb(self, rgb: np.ndarray) -> "RasterImage":
        """Copy of this image with new color channels and the same alpha"""
        rgb = np.asarray(rgb, dtype=np.uint8)
        if rgb.shape != (self.height, self.width, 3):
            raise RasterShapeError(f"RGB grid {rgb.shape} does not match image {self.width}x{self.height}")
        if self.has_alpha:
            return RasterImage(np.concatenate([rgb, self.pixels[..., 3:4]], axis=2))
        return RasterImage(rgb)

    @classmethod
    def solid(cls, width: int, height: int, color) -> "RasterImage":
        channels = len(color)
        pixels = np.empty((height, width, channels), dtype=np.uint8)
        pixels[...] = np.asarray(color, dtype=np.uint8)
        return cls(pixels)


def foreground_mask(img: RasterImage) -> np.ndarray:
    """
    Pixels carrying virtual content

    With alpha, any alpha > 0 is foreground; without alpha, any non-black
    pixel is, since an additive display renders black as transparent.
    """
    if img.has_alpha:
        return img.pixels[..., 3] > 0
    return np.any(img.rgb > 0, axis=2)


def require_same_size(*images: RasterImage):
    """Raise RasterShapeError unless every image has the same width and height"""
    sizes = {(im.width, im.height) for im in images}
    if len(sizes) > 1:
        raise RasterShapeError(f"Image dimensions do not match: {sorted(sizes)}")


def validate_image(image_data: bytes) -> Dict:
    """
    Validate image data and extract basic information

    Args:
        image_data: Raw image bytes

    Returns:
        Dictionary with validation results and image info
    """
    try:
        image = Image.open(io.BytesIO(image_data))
        width, height = image.size
        limit = Config.MAX_IMAGE_DIMENSION

        if width > limit or height > limit:
            return {
                "is_valid": False,
                "error": f"Image dimensions too large: {width}x{height} (max {limit}x{limit})",
                "width": width,
                "height": height
            }

        return {
            "is_valid": True,
            "width": width,
            "height": height,
            "format": image.format,
            "mode": image.mode,
            "has_alpha": image.mode in ("RGBA", "LA") or "transparency" in image.info,
        }

    except Exception as e:
        logger.error(f"Error validating image: {str(e)}")
        return {
            "is_valid": False,
            "error": f"Invalid image format: {str(e)}"
        }


def decode_image(image_data: bytes) -> RasterImage:
    """Decode image bytes, keeping alpha when the source has it"""
    info = validate_image(image_data)
    if not info["is_valid"]:
        if "width" in info:
            raise RasterShapeError(info["error"])
        raise OSError(info["error"])

    try:
        image = Image.open(io.BytesIO(image_data))
        image.load()
    except (UnidentifiedImageError, OSError) as e:
        raise OSError(f"Cannot decode image: {e}") from e

    mode = "RGBA" if info["has_alpha"] else "RGB"
    if image.mode != mode:
        image = image.convert(mode)
    return RasterImage(np.array(image, dtype=np.uint8))


def load_image(path: Union[str, Path]) -> RasterImage:
    """Read an image file into a RasterImage"""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Image not found: {path}")
    image = decode_image(path.read_bytes())
    logger.debug(f"Loaded {path} ({image.width}x{image.height}, alpha={image.has_alpha})")
    return image


def encode_png(img: RasterImage) -> bytes:
    """Encode a RasterImage as lossless PNG bytes"""
    output = io.BytesIO()
    Image.fromarray(img.pixels).save(output, format="PNG")
    return output.getvalue()


def save_image(img: RasterImage, path: Union[str, Path]):
    """Write a RasterImage as PNG"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_png(img))
    logger.debug(f"Wrote {path}")
