# morphforge/detectors/base.py

import csv
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Optional

import numpy as np

from morphforge.config import format_float
from morphforge.core.arrays import FloatArray, IntArray
from morphforge.core.exceptions import ArtifactIOError, FeatureError
from morphforge.imagekit.image import Image

if TYPE_CHECKING:
    from morphforge.detectors.bsif import BsifFilterBank

logger = logging.getLogger(__name__)

SCHEME_LENGTHS = {"lbp59": 59, "bsif4096": 4096, "edgefeat": 6}
HISTOGRAM_SCHEMES = {"lbp59", "bsif4096"}

LABELS = ("bona_fide", "attack")
VARIANTS = ("simple", "improved", "sharp", "hequ", "imp_hequ", "genuine")

FEATURE_CSV_PREFIX = ["scheme", "label", "variant", "sample_id", "split"]


@dataclass(frozen=True)
class ExtractorOptions:
    """Scheme parameters; each extractor reads the ones it needs."""

    bsif_bank: Optional["BsifFilterBank"] = None
    bsif_seed: int = 12
    edge_quality: int = 75


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """Feature values tagged with the scheme that produced them."""

    values: FloatArray
    scheme: str

    def __post_init__(self) -> None:
        if self.scheme not in SCHEME_LENGTHS:
            raise FeatureError(detail=f"Unknown feature scheme '{self.scheme}'")
        values = np.array(self.values, dtype=np.float64).ravel()
        if len(values) != SCHEME_LENGTHS[self.scheme]:
            raise FeatureError(
                detail=f"Scheme {self.scheme} needs {SCHEME_LENGTHS[self.scheme]} values, got {len(values)}"
            )
        if not np.all(np.isfinite(values)):
            raise FeatureError(detail=f"Non-finite {self.scheme} feature values")
        if self.scheme in HISTOGRAM_SCHEMES and np.any(values < 0):
            raise FeatureError(detail=f"Negative {self.scheme} histogram bin")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class LabeledSample:
    """Feature vector with its ground truth and the morph variant it came from."""

    features: FeatureVector
    label: str
    variant: str
    sample_id: str = ""
    split: str = ""

    def __post_init__(self) -> None:
        if self.label not in LABELS:
            raise FeatureError(detail=f"Unknown label '{self.label}'")
        if self.variant not in VARIANTS:
            raise FeatureError(detail=f"Unknown variant '{self.variant}'")
        if (self.variant == "genuine") != (self.label == "bona_fide"):
            raise FeatureError(
                detail=f"Variant '{self.variant}' does not match label '{self.label}'"
            )

    @property
    def is_attack(self) -> bool:
        return self.label == "attack"


class BaseExtractor(ABC):
    """Base feature extractor."""

    scheme: str = ""

    @classmethod
    def can_handle_scheme(cls, scheme: str) -> bool:
        return scheme == cls.scheme

    @classmethod
    def from_options(cls, options: "ExtractorOptions") -> "BaseExtractor":
        return cls()

    @property
    def length(self) -> int:
        return SCHEME_LENGTHS[self.scheme]

    @abstractmethod
    def extract(self, img: Image) -> FeatureVector:
        """Compute the feature vector of one image."""
        pass


def require_gray(img: Image, min_size: int, what: str) -> FloatArray:
    if img.channels != 1:
        raise FeatureError(detail=f"{what} needs a 1-channel image, got {img.channels}")
    if img.width < min_size or img.height < min_size:
        raise FeatureError(
            detail=f"{what} needs at least {min_size}x{min_size} pixels, got {img.width}x{img.height}"
        )
    return img.data[0]


def normalized_histogram(codes: IntArray, bins: int) -> FloatArray:
    counts = np.bincount(codes.ravel(), minlength=bins).astype(np.float64)
    return counts / counts.sum()


def write_feature_csv(samples: Iterable[LabeledSample], path: str | Path) -> int:
    """Write ``scheme,label,variant,sample_id,split,v0,...`` rows; returns the row count."""
    rows = 0
    try:
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            for sample in samples:
                features = sample.features
                writer.writerow(
                    [features.scheme, sample.label, sample.variant, sample.sample_id, sample.split]
                    + [format_float(v) for v in features.values]
                )
                rows += 1
    except OSError as e:
        raise ArtifactIOError(detail=f"Cannot write feature file {path}: {e}")
    logger.info(f"Wrote {rows} feature rows to {path}")
    return rows


def read_feature_csv(path: str | Path) -> list[LabeledSample]:
    samples: list[LabeledSample] = []
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            for line_number, row in enumerate(csv.reader(handle), start=1):
                if not row:
                    continue
                if len(row) < len(FEATURE_CSV_PREFIX):
                    raise FeatureError(detail=f"{path}:{line_number}: truncated feature row")
                scheme, label, variant, sample_id, split = row[: len(FEATURE_CSV_PREFIX)]
                try:
                    values = [float(v) for v in row[len(FEATURE_CSV_PREFIX):]]
                except ValueError:
                    raise FeatureError(detail=f"{path}:{line_number}: non-numeric feature value")
                samples.append(
                    LabeledSample(FeatureVector(values, scheme), label, variant, sample_id, split)
                )
    except OSError as e:
        raise ArtifactIOError(detail=f"Cannot read feature file {path}: {e}")
    return samples


def feature_matrix(samples: list[LabeledSample]) -> tuple[FloatArray, FloatArray, str]:
    """(n, d) features, +1/-1 attack labels and the common scheme."""
    if not samples:
        raise FeatureError(detail="No samples given")
    schemes = {sample.features.scheme for sample in samples}
    if len(schemes) != 1:
        raise FeatureError(detail=f"Mixed feature schemes: {sorted(schemes)}")
    x = np.stack([sample.features.values for sample in samples])
    y = np.array([1.0 if sample.is_attack else -1.0 for sample in samples])
    return x, y, schemes.pop()
