# morphforge/services/training.py

import logging
import math
from pathlib import Path
from typing import Literal

from morphforge.core.exceptions import TrainingError
from morphforge.detectors.base import LabeledSample, read_feature_csv
from morphforge.detectors.linear import train_linear
from morphforge.detectors.scoring import Model, save_model
from morphforge.detectors.tree import train_tree
from morphforge.schemas.run_config import RunConfig

logger = logging.getLogger(__name__)

Mode = Literal["g11", "g12"]
MODES = ("g11", "g12")
IMPROVED_SUFFIX = "__improved"


def model_file(out_dir: str | Path, mode: str, config: RunConfig) -> Path:
    return Path(out_dir) / f"model_{mode}_{config.scheme}_{config.classifier}.cnwt"


def select_training_set(samples: list[LabeledSample], split: str, mode: Mode) -> list[LabeledSample]:
    """Genuine plus simple morphs of ``split``; ``g12`` swaps half of the morphs for improved ones.

    In g12 the first ceil(n/2) simple morphs by id are replaced by the
    improved morph made from the same pair, so an odd count favors improved.
    """
    if mode not in MODES:
        raise TrainingError(detail=f"Unknown training mode '{mode}'")
    in_split = [sample for sample in samples if sample.split == split]
    genuine = [sample for sample in in_split if sample.variant == "genuine"]
    simple = sorted(
        (sample for sample in in_split if sample.variant == "simple"), key=lambda s: s.sample_id
    )
    if mode == "g11":
        return genuine + simple

    improved = {sample.sample_id: sample for sample in in_split if sample.variant == "improved"}
    replaced = math.ceil(len(simple) / 2)
    swapped = []
    for sample in simple[:replaced]:
        key = sample.sample_id + IMPROVED_SUFFIX
        if key not in improved:
            raise TrainingError(detail=f"No improved morph for '{sample.sample_id}' in split '{split}'")
        swapped.append(improved[key])
    logger.info(f"g12: {replaced} of {len(simple)} simple training morphs replaced by improved ones")
    return genuine + swapped + simple[replaced:]


def train_detector(
    config: RunConfig, features_path: str | Path, mode: Mode, out_path: str | Path
) -> Model:
    """Fit the configured classifier on the training split and save it."""
    samples = read_feature_csv(features_path)
    training = select_training_set(samples, "train", mode)
    if config.classifier == "linear":
        model: Model = train_linear(training, config.svm_lambda, config.svm_epochs, config.seed)
    else:
        prune_set = select_training_set(samples, "val", mode)
        model = train_tree(training, config.tree_max_depth, config.tree_min_leaf, prune_set)
    save_model(model, out_path)
    logger.info(f"Trained {config.classifier} {mode} detector on {len(training)} samples -> {out_path}")
    return model
