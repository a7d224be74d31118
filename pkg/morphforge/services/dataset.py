# morphforge/services/dataset.py

import logging
import math
from collections import defaultdict
from pathlib import Path

import numpy as np

from morphforge.core.exceptions import ConfigError, ManifestError, PairingError
from morphforge.schemas.manifest import (
    ManifestEntry,
    PairPlan,
    read_manifest,
    resolve_path,
    write_manifest,
)
from morphforge.schemas.run_config import RunConfig

logger = logging.getLogger(__name__)

SPLITS = ("train", "test", "val")


def split_counts(subjects: int, ratios: tuple[float, float, float]) -> list[int]:
    """Largest-remainder subject counts per split.

    Every bucket with a positive ratio ends up with at least one subject;
    the extra subject is taken from the currently largest bucket.
    """
    exact = [ratio * subjects for ratio in ratios]
    counts = [math.floor(value) for value in exact]
    by_remainder = sorted(range(len(ratios)), key=lambda k: (-(exact[k] - counts[k]), k))
    for k in by_remainder[: subjects - sum(counts)]:
        counts[k] += 1
    for k, ratio in enumerate(ratios):
        if ratio > 0 and counts[k] == 0:
            donor = max(range(len(counts)), key=lambda j: (counts[j], -j))
            counts[donor] -= 1
            counts[k] += 1
    return counts


def split_dataset(
    entries: list[ManifestEntry], ratios: tuple[float, float, float], seed: int
) -> list[ManifestEntry]:
    """Assign train/test/val per subject; entry order is kept."""
    if any(ratio < 0 for ratio in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise ConfigError(detail=f"Split ratios must be non-negative and sum to 1, got {ratios}")
    subjects = sorted({entry.subject_id for entry in entries})
    buckets = sum(1 for ratio in ratios if ratio > 0)
    if len(subjects) < buckets:
        raise ManifestError(
            detail=f"{len(subjects)} subjects cannot fill {buckets} non-empty splits"
        )

    counts = split_counts(len(subjects), ratios)
    order = np.random.default_rng(seed).permutation(len(subjects))
    assignment: dict[str, str] = {}
    start = 0
    for split, count in zip(SPLITS, counts):
        for index in order[start:start + count]:
            assignment[subjects[index]] = split
        start += count

    logger.info(
        f"Split {len(subjects)} subjects ({len(entries)} images) into "
        + ", ".join(f"{split} {count}" for split, count in zip(SPLITS, counts))
    )
    return [entry.model_copy(update={"split": assignment[entry.subject_id]}) for entry in entries]


def _compatible(a: ManifestEntry, b: ManifestEntry) -> bool:
    return a.gender == b.gender and a.source_db == b.source_db


def plan_pairs(entries: list[ManifestEntry], split: str, pairs_wanted: int, seed: int = 0) -> PairPlan:
    """Greedy least-used pairing of the subjects in ``split``.

    The least-used subject (ties by id) is paired with its least-used
    compatible partner it has not been paired with yet. A subject's images
    are used round-robin. ``pairs_wanted`` 0 means one pair per pairable
    subject. Planning stops early rather than let usage counts drift apart by
    more than one.
    """
    images: dict[str, list[ManifestEntry]] = defaultdict(list)
    for entry in entries:
        if entry.split == split:
            images[entry.subject_id].append(entry)
    for subject_images in images.values():
        subject_images.sort(key=lambda entry: entry.id)
    representative = {subject: group[0] for subject, group in images.items()}

    partners = {
        subject: sorted(
            other
            for other in images
            if other != subject and _compatible(representative[subject], representative[other])
        )
        for subject in images
    }
    usage = {subject: 0 for subject in sorted(images) if partners[subject]}
    if len(usage) < 2:
        raise PairingError(
            detail=f"Split '{split}' has no two subjects of the same gender and source database"
        )

    wanted = pairs_wanted or len(usage)
    paired: set[frozenset[str]] = set()
    pairs: list[tuple[str, str]] = []
    while len(pairs) < wanted:
        choice = None
        for subject in sorted(usage, key=lambda s: (usage[s], s)):
            free = [p for p in partners[subject] if frozenset((subject, p)) not in paired]
            if free:
                choice = (subject, min(free, key=lambda p: (usage[p], p)))
                break
        if choice is None:
            logger.info(f"Split '{split}': every compatible pair is used")
            break

        first, second = choice
        trial = dict(usage)
        trial[first] += 1
        trial[second] += 1
        if max(trial.values()) - min(trial.values()) > 1:
            logger.info(f"Split '{split}': stopping to keep subject usage balanced")
            break

        image_a = images[first][usage[first] % len(images[first])]
        image_b = images[second][usage[second] % len(images[second])]
        pairs.append((image_a.id, image_b.id))
        paired.add(frozenset(choice))
        usage = trial

    if pairs_wanted and len(pairs) < pairs_wanted:
        logger.warning(f"Split '{split}': planned {len(pairs)} of {pairs_wanted} wanted pairs")
    logger.info(f"Split '{split}': {len(pairs)} pairs over {len(usage)} pairable subjects")
    return PairPlan(split=split, seed=seed, pairs=pairs, usage=usage)


def split_manifest(config: RunConfig, manifest_path: str | Path, out_path: str | Path) -> list[ManifestEntry]:
    """Read a manifest, assign splits from the config ratios and seed, write it to ``out_path``.

    Image and landmark paths are rewritten so they stay valid from ``out_path``.
    """
    manifest_path = Path(manifest_path)
    out_path = Path(out_path)
    entries = split_dataset(read_manifest(manifest_path), config.split_ratios, config.seed)
    base, target = manifest_path.parent.resolve(), out_path.parent.resolve()
    if base != target:
        entries = [
            entry.model_copy(
                update={
                    "image_path": str(resolve_path(entry.image_path, base)),
                    "landmarks_path": str(resolve_path(entry.landmarks_path, base)),
                }
            )
            for entry in entries
        ]
    write_manifest(entries, out_path)
    return entries
