# morphforge/evalkit/metrics.py

"""Presentation-attack error rates, DET sweeps and morph acceptance.

Scores are oriented so that higher means more attack-like; a sample is
classified as attack when ``score >= threshold``.
"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from morphforge.core.arrays import FloatArray
from morphforge.core.exceptions import MetricsError

logger = logging.getLogger(__name__)

VARIANT_ORDER = ("simple", "improved", "sharp", "hequ", "imp_hequ")
POOLED = "all"


def _scores(values: Iterable[float], what: str) -> FloatArray:
    array = np.asarray(list(values), dtype=np.float64)
    if array.size == 0:
        raise MetricsError(detail=f"No {what} scores")
    if not np.all(np.isfinite(array)):
        raise MetricsError(detail=f"Non-finite {what} score")
    return array


@dataclass(frozen=True, eq=False)
class ScoreSet:
    bona_fide: FloatArray
    attacks: Mapping[str, FloatArray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "bona_fide", _scores(self.bona_fide, "bona fide"))
        if not self.attacks:
            raise MetricsError(detail="Score set has no attack variants")
        attacks = {variant: _scores(values, f"'{variant}' attack") for variant, values in self.attacks.items()}
        object.__setattr__(self, "attacks", attacks)

    @property
    def variants(self) -> list[str]:
        """Attack variants, known ones first in report order."""
        known = [v for v in VARIANT_ORDER if v in self.attacks]
        return known + sorted(v for v in self.attacks if v not in VARIANT_ORDER)

    def attack_scores(self, variant: str) -> FloatArray:
        """Scores of one variant, or of every variant pooled for ``all``."""
        if variant == POOLED:
            return np.concatenate([self.attacks[v] for v in self.variants])
        try:
            return self.attacks[variant]
        except KeyError:
            raise MetricsError(detail=f"No attack scores for variant '{variant}'")


@dataclass(frozen=True)
class DetPoint:
    apcer: float
    bpcer: float
    threshold: float


@dataclass(frozen=True)
class OperatingPoint:
    apcer: float
    bpcer: float
    threshold: float
    achieved: bool


@dataclass(frozen=True)
class MorphMatchRecord:
    morph_id: str
    similarity_a: float
    similarity_b: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.similarity_a) and np.isfinite(self.similarity_b)):
            raise MetricsError(detail=f"Non-finite similarity for morph '{self.morph_id}'")


def apcer(attack_scores: Sequence[float] | FloatArray, threshold: float) -> float:
    """Fraction of attacks classified bona fide (score < threshold)."""
    scores = _scores(attack_scores, "attack")
    return float(np.count_nonzero(scores < threshold)) / scores.size


def bpcer(bona_fide_scores: Sequence[float] | FloatArray, threshold: float) -> float:
    """Fraction of bona fide samples classified attack (score >= threshold)."""
    scores = _scores(bona_fide_scores, "bona fide")
    return float(np.count_nonzero(scores >= threshold)) / scores.size


def det_curve(scores: ScoreSet, variant: str) -> list[DetPoint]:
    """One point per distinct score plus a +inf sentinel, thresholds ascending."""
    attacks = np.sort(scores.attack_scores(variant))
    bona_fide = np.sort(scores.bona_fide)
    thresholds = np.append(np.unique(np.concatenate([attacks, bona_fide])), np.inf)
    below_attacks = np.searchsorted(attacks, thresholds, side="left")
    below_bona_fide = np.searchsorted(bona_fide, thresholds, side="left")
    return [
        DetPoint(
            apcer=float(a) / attacks.size,
            bpcer=float(bona_fide.size - b) / bona_fide.size,
            threshold=float(t),
        )
        for a, b, t in zip(below_attacks, below_bona_fide, thresholds)
    ]


def bpcer_at_apcer(scores: ScoreSet, variant: str, target: float) -> OperatingPoint:
    """BPCER at the largest swept threshold whose APCER stays within ``target``."""
    if not 0.0 < target <= 1.0:
        raise MetricsError(detail=f"APCER target must lie in (0, 1], got {target}")
    curve = det_curve(scores, variant)
    feasible = [point for point in curve if point.apcer <= target]
    if feasible:
        point = feasible[-1]
        return OperatingPoint(point.apcer, point.bpcer, point.threshold, achieved=True)
    point = min(curve, key=lambda p: (p.apcer, -p.threshold))
    logger.warning(f"APCER target {target} not reachable for '{variant}', best is {point.apcer}")
    return OperatingPoint(point.apcer, point.bpcer, point.threshold, achieved=False)


def mar(records: Sequence[MorphMatchRecord], accept_threshold: float) -> float:
    """Fraction of morphs that both contributing subjects verify against."""
    if not records:
        raise MetricsError(detail="No morph match records")
    accepted = sum(
        1 for r in records if min(r.similarity_a, r.similarity_b) >= accept_threshold
    )
    return accepted / len(records)


def threshold_at_far(impostor_scores: Sequence[float] | FloatArray, far: float) -> float:
    """Smallest observed impostor score t with fraction(impostor >= t) <= far.

    Returns a value just above the largest impostor score when only that
    reaches the rate.
    """
    if not 0.0 <= far <= 1.0:
        raise MetricsError(detail=f"False-accept rate must lie in [0, 1], got {far}")
    scores = np.sort(_scores(impostor_scores, "impostor"))
    for candidate in np.unique(scores):
        accepted = scores.size - np.searchsorted(scores, candidate, side="left")
        if accepted / scores.size <= far:
            return float(candidate)
    return float(np.nextafter(scores[-1], np.inf))


def mar_table(
    records_by_variant: Mapping[str, Sequence[MorphMatchRecord]],
    thresholds: Sequence[float],
) -> list[dict[str, float | str]]:
    """One row per variant with the MAR at every threshold."""
    if not thresholds:
        raise MetricsError(detail="No acceptance thresholds given")
    known = [v for v in VARIANT_ORDER if v in records_by_variant]
    variants = known + sorted(v for v in records_by_variant if v not in VARIANT_ORDER)
    rows: list[dict[str, float | str]] = []
    for variant in variants:
        row: dict[str, float | str] = {"variant": variant}
        for threshold in thresholds:
            row[f"mar@{threshold:g}"] = mar(records_by_variant[variant], threshold)
        rows.append(row)
    return rows
