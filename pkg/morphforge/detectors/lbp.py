# morphforge/detectors/lbp.py

import numpy as np

from morphforge.core.arrays import FloatArray, IntArray
from morphforge.detectors.base import BaseExtractor, FeatureVector, normalized_histogram, require_gray
from morphforge.imagekit.image import Image
from morphforge.imagekit.ops import to_grayscale

# (dy, dx) starting east, counter-clockwise on screen (north is y - 1)
NEIGHBOUR_OFFSETS = ((0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1))
NON_UNIFORM_BIN = 58


def transitions(pattern: int) -> int:
    """Circular 0/1 transitions in an 8-bit pattern."""
    rotated = ((pattern >> 1) | ((pattern & 1) << 7)) & 0xFF
    return bin(pattern ^ rotated).count("1")


def uniform_lookup() -> IntArray:
    """Pattern -> bin: uniform patterns in ascending order take bins 0..57, the rest 58."""
    table = np.full(256, NON_UNIFORM_BIN, dtype=np.int64)
    next_bin = 0
    for pattern in range(256):
        if transitions(pattern) <= 2:
            table[pattern] = next_bin
            next_bin += 1
    return table


UNIFORM_BINS = uniform_lookup()


def lbp_codes(plane: FloatArray) -> IntArray:
    """8-neighbour radius-1 codes of the interior pixels; bit b set iff neighbour b >= center."""
    height, width = plane.shape
    center = plane[1:-1, 1:-1]
    codes = np.zeros(center.shape, dtype=np.int64)
    for bit, (dy, dx) in enumerate(NEIGHBOUR_OFFSETS):
        neighbour = plane[1 + dy:height - 1 + dy, 1 + dx:width - 1 + dx]
        codes |= (neighbour >= center).astype(np.int64) << bit
    return codes


def lbp_histogram(gray: Image) -> FeatureVector:
    """Normalized 59-bin uniform LBP histogram."""
    plane = require_gray(gray, 3, "LBP")
    bins = UNIFORM_BINS[lbp_codes(plane)]
    return FeatureVector(normalized_histogram(bins, NON_UNIFORM_BIN + 1), "lbp59")


class LbpExtractor(BaseExtractor):
    scheme = "lbp59"

    def extract(self, img: Image) -> FeatureVector:
        return lbp_histogram(to_grayscale(img))
