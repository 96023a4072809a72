"""
PNG image I/O.

Rasters are numpy uint8 arrays of shape (H, W, 3) in RGB order; OpenCV's BGR
order stays inside this module.
"""

from pathlib import Path
from typing import Union

import cv2
import numpy as np

from src.errors import ImageIOError

PathLike = Union[str, Path]


def read_image(path: PathLike) -> np.ndarray:
    """
    Read an image file as 8-bit RGB.

    Raises:
        ImageIOError: If the file is missing or not a decodable image
    """
    path = Path(path)
    if not path.exists():
        raise ImageIOError("Image not found", str(path))
    pixels = cv2.imread(str(path), cv2.IMREAD_COLOR)
    if pixels is None:
        raise ImageIOError("Could not decode image", str(path))
    return cv2.cvtColor(pixels, cv2.COLOR_BGR2RGB)


def encode_png(pixels: np.ndarray) -> bytes:
    """Encode an RGB raster as PNG bytes."""
    ok, buffer = cv2.imencode(".png", cv2.cvtColor(as_rgb(pixels), cv2.COLOR_RGB2BGR))
    if not ok:
        raise ImageIOError("Could not encode PNG", "<memory>")
    return buffer.tobytes()


def write_image(path: PathLike, pixels: np.ndarray) -> Path:
    """
    Write an RGB raster as PNG, creating parent directories.

    Raises:
        ImageIOError: If the file cannot be written
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(encode_png(pixels))
    except OSError as e:
        raise ImageIOError(f"Could not write image ({e.strerror})", str(path)) from e
    return path


def as_rgb(pixels: np.ndarray) -> np.ndarray:
    """Coerce grayscale or RGBA rasters to contiguous uint8 RGB."""
    array = np.asarray(pixels)
    if array.ndim == 2:
        array = np.stack([array] * 3, axis=-1)
    if array.shape[-1] == 4:
        array = array[..., :3]
    if array.dtype != np.uint8:
        array = np.clip(array, 0, 255).astype(np.uint8)
    return np.ascontiguousarray(array)


def blank_image(width: int, height: int, color=(255, 255, 255)) -> np.ndarray:
    """Solid-color RGB raster."""
    image = np.empty((height, width, 3), dtype=np.uint8)
    image[:] = color
    return image
