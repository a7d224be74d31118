# morphforge/detectors/linear.py

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from morphforge.core.arrays import FloatArray
from morphforge.core.exceptions import TrainingError
from morphforge.detectors.base import LabeledSample, feature_matrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LinearModel:
    """Hinge-loss linear classifier over standardized features; attack scores positive."""

    weights: FloatArray
    bias: float
    mean: FloatArray
    scale: FloatArray
    scheme: str
    threshold: float = 0.0

    def __post_init__(self) -> None:
        for attr in ("weights", "mean", "scale"):
            array = np.array(getattr(self, attr), dtype=np.float64).ravel()
            array.setflags(write=False)
            object.__setattr__(self, attr, array)
        if not (len(self.weights) == len(self.mean) == len(self.scale)):
            raise TrainingError(detail="Linear model vectors differ in length")
        if not (np.all(np.isfinite(self.weights)) and np.isfinite(self.bias)):
            raise TrainingError(detail="Linear model parameters must be finite")
        if np.any(self.scale <= 0):
            raise TrainingError(detail="Standardization scale must be positive")

    @property
    def dimension(self) -> int:
        return len(self.weights)

    def decision(self, x: FloatArray) -> FloatArray:
        """Scores of the rows of ``x`` (or of a single vector)."""
        standardized = (np.asarray(x, dtype=np.float64) - self.mean) / self.scale
        return standardized @ self.weights + self.bias


def _as_float32(values: FloatArray) -> FloatArray:
    return np.asarray(values, dtype=np.float32).astype(np.float64)


def distinct_rows(x: FloatArray, y: FloatArray) -> tuple[FloatArray, FloatArray, FloatArray]:
    """Distinct (row, label) pairs in sorted order and their empirical weights count / n."""
    unique, counts = np.unique(np.column_stack([x, y]), axis=0, return_counts=True)
    return unique[:, :-1], unique[:, -1], counts / len(x)


def standardization(x: FloatArray, weights: Optional[FloatArray] = None) -> tuple[FloatArray, FloatArray]:
    """Per-feature mean and standard deviation; zero-variance features get scale 1.

    ``weights`` (summing to 1) lets repeated rows be passed once.
    """
    if weights is None:
        weights = np.full(len(x), 1.0 / len(x))
    mean = weights @ x
    scale = _as_float32(np.sqrt(weights @ (x - mean) ** 2))
    mean = _as_float32(mean)
    scale[~(scale > 0)] = 1.0
    return mean, scale


def train_linear(samples: list[LabeledSample], lam: float = 0.01, epochs: int = 100, seed: int = 0) -> LinearModel:
    """L2-regularized hinge loss by full-batch subgradient descent.

    Epoch t takes one step of 1 / (lam * t) along the subgradient of the
    empirical objective, with the bias trained as an extra constant feature,
    then projects onto the ball of radius 1 / sqrt(lam). Distinct rows are
    visited in sorted order and weighted by their multiplicity, so the model
    depends only on the empirical distribution: repeating every sample gives
    the same weights bit for bit. Sample order never matters, so ``seed`` only
    tags the log line.
    """
    if lam <= 0:
        raise TrainingError(detail=f"lambda must be positive, got {lam}")
    if epochs < 1:
        raise TrainingError(detail=f"epochs must be at least 1, got {epochs}")
    x, y, scheme = feature_matrix(samples)
    if len(set(y.tolist())) < 2:
        raise TrainingError(detail="Training data must contain both bona fide and attack samples")

    rows, labels, weights = distinct_rows(x, y)
    mean, scale = standardization(rows, weights)
    augmented = np.hstack([(rows - mean) / scale, np.ones((len(rows), 1))])
    radius = 1.0 / np.sqrt(lam)
    w = np.zeros(augmented.shape[1])

    for t in range(1, epochs + 1):
        margins = labels * (augmented @ w)
        active = np.where(margins < 1.0, weights * labels, 0.0)
        w = w - (1.0 / (lam * t)) * (lam * w - active @ augmented)
        norm = float(np.linalg.norm(w))
        if norm > radius:
            w *= radius / norm
        if logger.isEnabledFor(logging.DEBUG):
            hinge = np.maximum(0.0, 1.0 - labels * (augmented @ w))
            logger.debug(f"epoch {t}: mean hinge {float(weights @ hinge):.6f}")

    w = _as_float32(w)
    model = LinearModel(weights=w[:-1], bias=float(w[-1]), mean=mean, scale=scale, scheme=scheme)
    accuracy = float(np.mean(np.sign(model.decision(x)) == y))
    logger.info(
        f"Trained linear {scheme} model on {len(x)} samples ({len(rows)} distinct, seed {seed}), "
        f"training accuracy {accuracy:.3f}"
    )
    return model
