# morphforge/detectors/edges.py

"""Edge and corner counts before and after one block-DCT recompression."""

import logging

import numpy as np
from scipy import ndimage
from scipy.fft import dctn, idctn

from morphforge.core.arrays import FloatArray
from morphforge.detectors.base import BaseExtractor, ExtractorOptions, FeatureVector
from morphforge.imagekit.image import Image
from morphforge.imagekit.ops import to_grayscale

logger = logging.getLogger(__name__)

BLOCK = 8
EDGE_THRESHOLD = 0.1
HARRIS_K = 0.04
CORNER_THRESHOLD = 1e-4

LUMINANCE_TABLE = np.array(
    [
        [16, 11, 10, 16, 24, 40, 51, 61],
        [12, 12, 14, 19, 26, 58, 60, 55],
        [14, 13, 16, 24, 40, 57, 69, 56],
        [14, 17, 22, 29, 51, 87, 80, 62],
        [18, 22, 37, 56, 68, 109, 103, 77],
        [24, 35, 55, 64, 81, 104, 113, 92],
        [49, 64, 78, 87, 103, 121, 120, 101],
        [72, 92, 95, 98, 112, 100, 103, 99],
    ],
    dtype=np.float64,
)


def quantization_table(quality: int) -> FloatArray:
    """Luminance table scaled by the usual quality law, entries clipped to 1..255."""
    if not 1 <= quality <= 100:
        raise ValueError(f"quality must lie in 1..100, got {quality}")
    scale = 5000.0 / quality if quality < 50 else 200.0 - 2.0 * quality
    table = np.floor((LUMINANCE_TABLE * scale + 50.0) / 100.0)
    return np.clip(table, 1.0, 255.0)


def block_dct(plane: FloatArray) -> FloatArray:
    """Orthonormal 8x8 DCT-II of an (8a, 8b) plane, returned as (a, b, 8, 8) blocks."""
    rows, cols = plane.shape[0] // BLOCK, plane.shape[1] // BLOCK
    blocks = plane.reshape(rows, BLOCK, cols, BLOCK).transpose(0, 2, 1, 3)
    return dctn(blocks, type=2, axes=(2, 3), norm="ortho")


def block_idct(coefficients: FloatArray) -> FloatArray:
    rows, cols = coefficients.shape[:2]
    blocks = idctn(coefficients, type=2, axes=(2, 3), norm="ortho")
    return blocks.transpose(0, 2, 1, 3).reshape(rows * BLOCK, cols * BLOCK)


def dct_recompress(img: Image, quality: int = 75) -> Image:
    """Quantize every channel in 8x8 DCT blocks the way a baseline JPEG encoder does."""
    table = quantization_table(quality)
    height, width = img.height, img.width
    pad_h, pad_w = (-height) % BLOCK, (-width) % BLOCK
    planes = []
    for plane in img.data:
        shifted = np.pad(plane * 255.0 - 128.0, ((0, pad_h), (0, pad_w)), mode="edge")
        coefficients = block_dct(shifted)
        quantized = np.round(coefficients / table) * table
        restored = (block_idct(quantized) + 128.0) / 255.0
        planes.append(restored[:height, :width])
    return Image(np.clip(np.stack(planes), 0.0, 1.0))


def gradients(plane: FloatArray) -> tuple[FloatArray, FloatArray]:
    """Sobel derivatives scaled to per-pixel units, replicate border."""
    gx = ndimage.sobel(plane, axis=1, mode="nearest") / 8.0
    gy = ndimage.sobel(plane, axis=0, mode="nearest") / 8.0
    return gx, gy


def edge_count(plane: FloatArray) -> int:
    gx, gy = gradients(plane)
    return int(np.count_nonzero(np.hypot(gx, gy) > EDGE_THRESHOLD))


def harris_response(plane: FloatArray) -> FloatArray:
    gx, gy = gradients(plane)
    window = 3 * 3
    sxx = ndimage.uniform_filter(gx * gx, size=3, mode="nearest") * window
    syy = ndimage.uniform_filter(gy * gy, size=3, mode="nearest") * window
    sxy = ndimage.uniform_filter(gx * gy, size=3, mode="nearest") * window
    return sxx * syy - sxy * sxy - HARRIS_K * (sxx + syy) ** 2


def corner_count(plane: FloatArray) -> int:
    response = harris_response(plane)
    peaks = response == ndimage.maximum_filter(response, size=3, mode="nearest")
    return int(np.count_nonzero(peaks & (response > CORNER_THRESHOLD)))


def edge_feature_stats(img: Image, quality: int = 75) -> FeatureVector:
    """[edges, corners] before and after recompression, then their relative changes."""
    gray = to_grayscale(img)
    recompressed = dct_recompress(gray, quality)
    edges_before, corners_before = edge_count(gray.data[0]), corner_count(gray.data[0])
    edges_after, corners_after = edge_count(recompressed.data[0]), corner_count(recompressed.data[0])
    values = [
        edges_before,
        corners_before,
        edges_after,
        corners_after,
        (edges_after - edges_before) / max(edges_before, 1),
        (corners_after - corners_before) / max(corners_before, 1),
    ]
    return FeatureVector(np.array(values, dtype=np.float64), "edgefeat")


class EdgeFeatureExtractor(BaseExtractor):
    scheme = "edgefeat"

    def __init__(self, quality: int = 75):
        quantization_table(quality)
        self.quality = quality

    @classmethod
    def from_options(cls, options: ExtractorOptions) -> "EdgeFeatureExtractor":
        return cls(options.edge_quality)

    def extract(self, img: Image) -> FeatureVector:
        return edge_feature_stats(img, self.quality)
