# morphforge/imagekit/ops.py

import math
from typing import Literal

import numpy as np
from scipy import ndimage

from morphforge.core.arrays import FloatArray
from morphforge.core.exceptions import ShapeMismatchError
from morphforge.imagekit.image import Image, Kernel2D

Border = Literal["replicate", "zero"]

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])

_NDIMAGE_MODES = {"replicate": "nearest", "zero": "constant"}


def to_grayscale(img: Image) -> Image:
    """Luma conversion y = 0.299 R + 0.587 G + 0.114 B; gray input is returned as is."""
    if img.channels == 1:
        return img
    gray = np.tensordot(LUMA_WEIGHTS, img.data, axes=(0, 0))
    return Image(np.clip(gray, 0.0, 1.0)[np.newaxis])


def convolve2d(img: Image, k: Kernel2D, border: Border = "replicate") -> Image:
    """Same-size correlation of every channel with ``k``; output is not clamped."""
    if border not in _NDIMAGE_MODES:
        raise ValueError(f"Unknown border policy: {border}")
    planes = [
        ndimage.correlate(plane, k.taps, mode=_NDIMAGE_MODES[border], cval=0.0)
        for plane in img.data
    ]
    return Image(np.stack(planes))


def gaussian_kernel(sigma: float) -> Kernel2D:
    """Sampled Gaussian with radius ceil(3 sigma), taps normalized to sum 1."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    radius = max(1, math.ceil(3.0 * sigma))
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    profile = np.exp(-0.5 * (offsets / sigma) ** 2)
    taps = np.outer(profile, profile)
    return Kernel2D(taps / taps.sum())


def sample_bilinear(planes: FloatArray, xs: FloatArray, ys: FloatArray) -> FloatArray:
    """Bilinear samples of (C, H, W) planes at float coordinates, replicate border."""
    coords = np.stack([np.asarray(ys, dtype=np.float64), np.asarray(xs, dtype=np.float64)])
    return np.stack(
        [
            ndimage.map_coordinates(plane, coords, order=1, mode="nearest")
            for plane in planes
        ]
    )


def half_pixel_grid(src_size: int, dst_size: int, origin: float = 0.0) -> FloatArray:
    """Source coordinates of ``dst_size`` output centers spread over ``src_size`` pixels."""
    scale = src_size / dst_size
    return origin + (np.arange(dst_size, dtype=np.float64) + 0.5) * scale - 0.5


def resize_bilinear(img: Image, w: int, h: int) -> Image:
    """Bilinear resampling with half-pixel-center alignment."""
    if w < 1 or h < 1:
        raise ShapeMismatchError(detail=f"Target size must be at least 1x1, got {w}x{h}")
    if (w, h) == (img.width, img.height):
        return img
    xs = half_pixel_grid(img.width, w)
    ys = half_pixel_grid(img.height, h)
    grid_y, grid_x = np.meshgrid(ys, xs, indexing="ij")
    return Image(sample_bilinear(img.data, grid_x, grid_y))


def crop(img: Image, x0: int, y0: int, x1: int, y1: int) -> Image:
    """Inclusive pixel crop [x0, x1] x [y0, y1]."""
    if not (0 <= x0 <= x1 < img.width and 0 <= y0 <= y1 < img.height):
        raise ShapeMismatchError(
            detail=f"Crop box ({x0},{y0})-({x1},{y1}) outside {img.width}x{img.height}"
        )
    return Image(img.data[:, y0:y1 + 1, x0:x1 + 1])
