# morphforge/services/generation.py

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from morphforge.core.exceptions import ManifestError, PairingError
from morphforge.imagekit.face import normalize_face
from morphforge.imagekit.io import load_image, load_landmarks, save_image, save_landmarks
from morphforge.morphgen.pipeline import CloneTarget, make_simple_morph
from morphforge.schemas.manifest import (
    ManifestEntry,
    PairPlan,
    VariantEntry,
    read_manifest,
    resolve_path,
    write_pair_plans,
    write_variants,
)
from morphforge.schemas.run_config import RunConfig
from morphforge.services.dataset import SPLITS, plan_pairs
from morphforge.tasks.pool import run_tasks

logger = logging.getLogger(__name__)

VARIANTS_FILE = "variants.csv"
PAIRS_FILE = "pairs.csv"
FACES_DIR = "faces"
MORPHS_DIR = "morphs"


@dataclass(frozen=True)
class NormalizeJob:
    image_path: Path
    landmarks_path: Path
    out_image: Path
    out_landmarks: Path
    size: int


@dataclass(frozen=True)
class MorphJob:
    image_a: Path
    landmarks_a: Path
    image_b: Path
    landmarks_b: Path
    out_image: Path
    alpha: float
    clone_into: CloneTarget


def normalize_one(job: NormalizeJob) -> None:
    img = load_image(job.image_path)
    lm = load_landmarks(job.landmarks_path)
    face, face_lm = normalize_face(img, lm, job.size)
    limit = float(job.size - 1)
    face_lm = face_lm.transformed(lambda points: np.clip(points, 0.0, limit))
    save_image(face, job.out_image)
    save_landmarks(face_lm, job.out_landmarks)


def morph_one(job: MorphJob) -> None:
    morph = make_simple_morph(
        load_image(job.image_a),
        load_landmarks(job.landmarks_a),
        load_image(job.image_b),
        load_landmarks(job.landmarks_b),
        alpha=job.alpha,
        clone_into=job.clone_into,
    )
    save_image(morph, job.out_image)


def morph_id(entry_a: str, entry_b: str) -> str:
    return f"{entry_a}__{entry_b}"


def generate_morphs(
    config: RunConfig,
    manifest_path: str | Path,
    out_dir: str | Path,
    workers: int | None = None,
) -> list[VariantEntry]:
    """Normalize every source face, plan pairs per split and write the simple morphs.

    Writes ``faces/``, ``morphs/``, ``pairs.csv`` and ``variants.csv`` under
    ``out_dir``; image paths in ``variants.csv`` are relative to it.
    """
    manifest_path = Path(manifest_path)
    out_dir = Path(out_dir)
    entries = read_manifest(manifest_path)
    assigned = [entry for entry in entries if entry.split != "unassigned"]
    if not assigned:
        raise ManifestError(detail=f"No entry of {manifest_path} has a split; run 'split' first")
    if len(assigned) < len(entries):
        logger.warning(f"Ignoring {len(entries) - len(assigned)} entries without a split")

    base = manifest_path.parent
    (out_dir / FACES_DIR).mkdir(parents=True, exist_ok=True)
    (out_dir / MORPHS_DIR).mkdir(parents=True, exist_ok=True)

    face_paths: dict[str, tuple[Path, Path]] = {}
    normalize_jobs = []
    for entry in assigned:
        out_image = out_dir / FACES_DIR / f"{entry.id}.png"
        out_landmarks = out_dir / FACES_DIR / f"{entry.id}.txt"
        face_paths[entry.id] = (out_image, out_landmarks)
        normalize_jobs.append(
            NormalizeJob(
                image_path=resolve_path(entry.image_path, base),
                landmarks_path=resolve_path(entry.landmarks_path, base),
                out_image=out_image,
                out_landmarks=out_landmarks,
                size=config.face_size,
            )
        )
    run_tasks(normalize_one, normalize_jobs, workers)
    logger.info(f"Normalized {len(normalize_jobs)} faces to {config.face_size}x{config.face_size}")

    plans = _plan_all(assigned, config)
    split_of = {entry.id: entry.split for entry in assigned}
    variants = [
        VariantEntry(
            id=entry.id,
            image_path=f"{FACES_DIR}/{entry.id}.png",
            variant="genuine",
            label="bona_fide",
            split=entry.split,
        )
        for entry in assigned
    ]

    morph_jobs = []
    for plan in plans:
        for entry_a, entry_b in plan.pairs:
            name = morph_id(entry_a, entry_b)
            (image_a, landmarks_a), (image_b, landmarks_b) = face_paths[entry_a], face_paths[entry_b]
            morph_jobs.append(
                MorphJob(
                    image_a=image_a,
                    landmarks_a=landmarks_a,
                    image_b=image_b,
                    landmarks_b=landmarks_b,
                    out_image=out_dir / MORPHS_DIR / f"{name}.png",
                    alpha=config.morph_alpha,
                    clone_into=config.clone_into,
                )
            )
            variants.append(
                VariantEntry(
                    id=name,
                    image_path=f"{MORPHS_DIR}/{name}.png",
                    variant="simple",
                    label="attack",
                    split=split_of[entry_a],
                    source_a=entry_a,
                    source_b=entry_b,
                )
            )
    run_tasks(morph_one, morph_jobs, workers)

    write_pair_plans(plans, out_dir / PAIRS_FILE)
    write_variants(variants, out_dir / VARIANTS_FILE)
    logger.info(
        f"Wrote {len(morph_jobs)} simple morphs and {len(assigned)} genuine faces to {out_dir}"
    )
    return variants


def _plan_all(entries: list[ManifestEntry], config: RunConfig) -> list[PairPlan]:
    plans = []
    for split in SPLITS:
        if not any(entry.split == split for entry in entries):
            continue
        try:
            plans.append(plan_pairs(entries, split, config.pairs_per_split, config.seed))
        except PairingError as e:
            logger.warning(f"No morphs for split '{split}': {e.detail}")
    if not any(plan.pairs for plan in plans):
        raise PairingError(detail="No split has a compatible pair of subjects")
    return plans
