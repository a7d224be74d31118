# morphforge/postprocess/filters.py

import logging

import numpy as np

from morphforge.core.arrays import FloatArray, IntArray
from morphforge.core.exceptions import ShapeMismatchError
from morphforge.imagekit.image import Image
from morphforge.imagekit.ops import convolve2d, gaussian_kernel

logger = logging.getLogger(__name__)

LEVELS = 256
CDF_EPS = 1e-12


def unsharp_mask(
    img: Image,
    sigma: float = 1.5,
    amount: float = 0.7,
    threshold: float = 0.0,
    clamp: bool = True,
) -> Image:
    """Add ``amount`` times the high-pass detail wherever |detail| exceeds ``threshold``."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if amount < 0 or threshold < 0:
        raise ValueError("amount and threshold must be non-negative")
    blurred = convolve2d(img, gaussian_kernel(sigma), border="replicate")
    detail = img.data - blurred.data
    boosted = np.where(np.abs(detail) > threshold, img.data + amount * detail, img.data)
    if clamp:
        boosted = np.clip(boosted, 0.0, 1.0)
    return Image(boosted)


def _levels(plane: FloatArray) -> IntArray:
    return np.floor(np.clip(plane, 0.0, 1.0) * (LEVELS - 1) + 0.5).astype(np.int64)


def _cdf(levels: IntArray) -> FloatArray:
    counts = np.bincount(levels.ravel(), minlength=LEVELS)
    return np.cumsum(counts) / levels.size


def level_mapping(cdf_img: FloatArray, cdf_ref: FloatArray) -> IntArray:
    """m[k] = smallest j with cdf_ref[j] >= cdf_img[k]; monotone by construction."""
    mapping = np.searchsorted(cdf_ref, cdf_img - CDF_EPS, side="left")
    return np.minimum(mapping, LEVELS - 1)


def histogram_match(img: Image, reference: Image) -> Image:
    """Map every channel so its 256-bin histogram approximates the reference's."""
    if img.channels != reference.channels:
        raise ShapeMismatchError(
            detail=f"Histogram reference has {reference.channels} channels, image has {img.channels}"
        )
    planes = []
    for plane, ref_plane in zip(img.data, reference.data):
        levels = _levels(plane)
        mapping = level_mapping(_cdf(levels), _cdf(_levels(ref_plane)))
        planes.append(mapping[levels] / (LEVELS - 1))
    return Image(np.stack(planes))


def equalize_histogram(img: Image) -> Image:
    """histogram_match against a flat reference histogram."""
    uniform_cdf = np.arange(1, LEVELS + 1, dtype=np.float64) / LEVELS
    planes = []
    for plane in img.data:
        levels = _levels(plane)
        planes.append(level_mapping(_cdf(levels), uniform_cdf)[levels] / (LEVELS - 1))
    return Image(np.stack(planes))
