# morphforge/detectors/bsif.py

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from morphforge.core.arrays import FloatArray, IntArray
from morphforge.core.container import read_container, write_container
from morphforge.core.exceptions import FeatureError
from morphforge.detectors.base import (
    BaseExtractor,
    ExtractorOptions,
    FeatureVector,
    normalized_histogram,
    require_gray,
)
from morphforge.imagekit.image import Image
from morphforge.imagekit.ops import to_grayscale

logger = logging.getLogger(__name__)

FILTER_SIZE = 11
BIT_LENGTH = 12
ROW_CHUNK = 32
MEAN_TOLERANCE = 1e-6
ORTHONORMAL_TOLERANCE = 1e-4
# seeded taps are multiples of this, so every tap and every partial sum is exact
TAP_QUANTUM = 2.0**-24


@dataclass(frozen=True, eq=False)
class BsifFilterBank:
    """``BIT_LENGTH`` filters of FILTER_SIZE x FILTER_SIZE taps; filter k drives code bit k.

    Filters must be zero-mean and pairwise orthonormal when vectorized.
    """

    filters: FloatArray
    source: str = "loaded"

    def __post_init__(self) -> None:
        filters = np.array(self.filters, dtype=np.float64)
        if filters.shape != (BIT_LENGTH, FILTER_SIZE, FILTER_SIZE):
            raise FeatureError(
                detail=f"BSIF bank must be {BIT_LENGTH}x{FILTER_SIZE}x{FILTER_SIZE}, got {filters.shape}"
            )
        if not np.all(np.isfinite(filters)):
            raise FeatureError(detail="BSIF filters must be finite")
        vectors = filters.reshape(BIT_LENGTH, -1)
        worst_mean = float(np.max(np.abs(vectors.mean(axis=1))))
        if worst_mean > MEAN_TOLERANCE:
            raise FeatureError(detail=f"BSIF filters must be zero-mean, largest mean is {worst_mean:.3g}")
        worst_gram = float(np.max(np.abs(vectors @ vectors.T - np.eye(BIT_LENGTH))))
        if worst_gram > ORTHONORMAL_TOLERANCE:
            raise FeatureError(
                detail=f"BSIF filters must be orthonormal, largest deviation is {worst_gram:.3g}"
            )
        filters.setflags(write=False)
        object.__setattr__(self, "filters", filters)

    @property
    def filter_sums(self) -> FloatArray:
        return self.filters.reshape(BIT_LENGTH, -1).sum(axis=1)


def generate_bsif_bank(seed: int) -> BsifFilterBank:
    """Seeded surrogate bank: random vectors, mean removed, orthonormalized.

    Taps are snapped to a 2**-24 grid and each filter's rounding residue is
    folded into its largest tap, so every filter sums to exactly zero and
    survives the float32 container unchanged.
    """
    rng = np.random.default_rng(seed)
    vectors = rng.standard_normal((FILTER_SIZE * FILTER_SIZE, BIT_LENGTH))
    vectors -= vectors.mean(axis=0, keepdims=True)
    basis, upper = np.linalg.qr(vectors)
    # fix the sign convention of the factorization
    basis *= np.sign(np.diag(upper))
    basis -= basis.mean(axis=0, keepdims=True)

    taps = np.round(basis.T / TAP_QUANTUM)
    largest = np.argmax(np.abs(taps), axis=1)
    taps[np.arange(BIT_LENGTH), largest] -= taps.sum(axis=1)
    filters = (taps * TAP_QUANTUM).reshape(BIT_LENGTH, FILTER_SIZE, FILTER_SIZE).astype(np.float32)
    return BsifFilterBank(filters, source=f"seeded({seed})")


def save_bsif_bank(bank: BsifFilterBank, path: str | Path) -> None:
    write_container(path, {f"bsif.filter{k:02d}": bank.filters[k] for k in range(BIT_LENGTH)})


def load_bsif_bank(path: str | Path) -> BsifFilterBank:
    """Read a 12-filter bank; raises FeatureError unless it is zero-mean and orthonormal."""
    tensors = read_container(path)
    if len(tensors) != BIT_LENGTH:
        raise FeatureError(detail=f"BSIF bank {path} holds {len(tensors)} tensors, expected {BIT_LENGTH}")
    shapes = {tensor.shape for tensor in tensors.values()}
    if shapes != {(FILTER_SIZE, FILTER_SIZE)}:
        raise FeatureError(detail=f"BSIF bank {path} has tensor shapes {sorted(shapes)}")
    try:
        return BsifFilterBank(np.stack(list(tensors.values())), source="loaded")
    except FeatureError as e:
        raise FeatureError(detail=f"BSIF bank {path}: {e.detail}")


def bsif_codes(plane: FloatArray, bank: BsifFilterBank) -> IntArray:
    """12-bit codes over the valid-window region; bit k is set iff sum(window * filter k) > 0.

    The response is evaluated as sum((window - center) * filter) + center * sum(filter),
    which is the same sum regrouped; flat windows then give exactly center * sum(filter).
    """
    windows = sliding_window_view(plane, (FILTER_SIZE, FILTER_SIZE))
    radius = FILTER_SIZE // 2
    sums = bank.filter_sums
    weights = 1 << np.arange(BIT_LENGTH, dtype=np.int64)
    codes = np.zeros(windows.shape[:2], dtype=np.int64)
    for start in range(0, windows.shape[0], ROW_CHUNK):
        block = windows[start:start + ROW_CHUNK]
        center = block[..., radius, radius]
        centered = block - center[..., np.newaxis, np.newaxis]
        responses = np.einsum("hwij,kij->hwk", centered, bank.filters) + center[..., np.newaxis] * sums
        codes[start:start + ROW_CHUNK] = (responses > 0.0).astype(np.int64) @ weights
    return codes


def bsif_histogram(gray: Image, bank: BsifFilterBank) -> FeatureVector:
    """Normalized 4096-bin histogram of BSIF codes."""
    plane = require_gray(gray, FILTER_SIZE, "BSIF")
    return FeatureVector(normalized_histogram(bsif_codes(plane, bank), 1 << BIT_LENGTH), "bsif4096")


class BsifExtractor(BaseExtractor):
    scheme = "bsif4096"

    def __init__(self, bank: BsifFilterBank):
        self.bank = bank

    @classmethod
    def from_options(cls, options: ExtractorOptions) -> "BsifExtractor":
        bank = options.bsif_bank
        return cls(bank if bank is not None else generate_bsif_bank(options.bsif_seed))

    def extract(self, img: Image) -> FeatureVector:
        return bsif_histogram(to_grayscale(img), self.bank)
