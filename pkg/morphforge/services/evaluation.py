# morphforge/services/evaluation.py

import csv
import logging
from pathlib import Path
from typing import Optional

from morphforge.core.exceptions import ArtifactIOError, MetricsError
from morphforge.detectors.base import read_feature_csv
from morphforge.detectors.scoring import Model, load_model, score
from morphforge.evalkit.metrics import ScoreSet, mar_table, threshold_at_far
from morphforge.evalkit.report import (
    ReportPaths,
    emit_report,
    read_similarity_csv,
    write_mar_csv,
    write_score_csv,
)
from morphforge.schemas.run_config import RunConfig

logger = logging.getLogger(__name__)


def score_split(model: Model, features_path: str | Path, split: str = "test") -> ScoreSet:
    """Score every sample of ``split``: genuine images are bona fide, the rest grouped by variant."""
    bona_fide: list[float] = []
    attacks: dict[str, list[float]] = {}
    for sample in read_feature_csv(features_path):
        if sample.split != split:
            continue
        value = score(model, sample.features)
        if sample.is_attack:
            attacks.setdefault(sample.variant, []).append(value)
        else:
            bona_fide.append(value)
    if not bona_fide or not attacks:
        raise MetricsError(
            detail=f"Split '{split}' of {features_path} needs both genuine and morph samples"
        )
    return ScoreSet(bona_fide=bona_fide, attacks=attacks)


def evaluate_detector(
    config: RunConfig,
    model_path: str | Path,
    features_path: str | Path,
    out_dir: str | Path,
    prefix: str = "",
) -> ScoreSet:
    """Write the score file and the default-threshold, BPCER@APCER and DET reports."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    model = load_model(model_path)
    scores = score_split(model, features_path)
    write_score_csv(scores, out_dir / f"{prefix}scores.csv")
    emit_report(
        scores,
        config.apcer_targets,
        ReportPaths.in_directory(out_dir, prefix),
        default_threshold=model.threshold,
    )
    return scores


def _read_impostor_scores(path: Path) -> list[float]:
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            reader = csv.DictReader(handle)
            if not reader.fieldnames or "score" not in reader.fieldnames:
                raise MetricsError(detail=f"{path}: impostor file needs a 'score' column")
            return [float(row["score"]) for row in reader]
    except OSError as e:
        raise ArtifactIOError(detail=f"Cannot read impostor scores {path}: {e}")
    except ValueError as e:
        raise MetricsError(detail=f"{path}: bad impostor score: {e}")


def compute_mar(
    config: RunConfig,
    similarities_path: str | Path,
    out_path: str | Path,
    impostors_path: Optional[str | Path] = None,
) -> list[dict[str, float | str]]:
    """MAR per variant at every ``mar_thresholds`` value.

    With an impostor score file the configured values are false-accept
    rates and each is turned into a similarity threshold first.
    """
    records = read_similarity_csv(similarities_path)
    thresholds = list(config.mar_thresholds)
    if impostors_path is not None:
        impostors = _read_impostor_scores(Path(impostors_path))
        thresholds = [threshold_at_far(impostors, far) for far in thresholds]
        logger.info(
            "Verification thresholds: "
            + ", ".join(f"FAR {far:g} -> {t:.6g}" for far, t in zip(config.mar_thresholds, thresholds))
        )
    rows = mar_table(records, thresholds)
    write_mar_csv(rows, out_path)
    logger.info(f"Wrote MAR table for {len(rows)} variants to {out_path}")
    return rows
