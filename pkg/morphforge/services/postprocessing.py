# morphforge/services/postprocessing.py

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from morphforge.imagekit.io import load_image, save_image
from morphforge.postprocess.filters import equalize_histogram, histogram_match, unsharp_mask
from morphforge.schemas.manifest import VariantEntry
from morphforge.schemas.run_config import RunConfig
from morphforge.services.store import VariantStore
from morphforge.tasks.pool import run_tasks

logger = logging.getLogger(__name__)

POSTPROCESSED_DIR = "post"


@dataclass(frozen=True)
class PostJob:
    kind: str
    source: Path
    reference: Optional[Path]
    out_image: Path
    sigma: float
    amount: float
    threshold: float


def postprocess_one(job: PostJob) -> None:
    img = load_image(job.source)
    if job.kind == "sharp":
        result = unsharp_mask(img, job.sigma, job.amount, job.threshold)
    elif job.reference is None:
        result = equalize_histogram(img)
    else:
        result = histogram_match(img, load_image(job.reference))
    save_image(result, job.out_image)


def postprocess_morphs(
    config: RunConfig, variants_path: str | Path, workers: int | None = None
) -> dict[str, int]:
    """Derive sharp and hequ from the simple morphs and imp_hequ from the improved ones.

    HEQU matches the morph's histogram to source A, source B or a uniform
    histogram, per ``hequ_reference``. Without improved morphs imp_hequ is
    skipped with a warning.
    """
    store = VariantStore(variants_path)
    simple = store.require("simple")
    improved = store.of_variant("improved")
    if not improved:
        logger.warning(f"{store.path} lists no improved morphs; skipping imp_hequ")
    (store.base / POSTPROCESSED_DIR).mkdir(parents=True, exist_ok=True)

    def reference_for(entry: VariantEntry) -> Optional[Path]:
        if config.hequ_reference == "uniform":
            return None
        source = entry.source_a if config.hequ_reference == "a" else entry.source_b
        return store.image_path(store.get(source))

    plan = [("sharp", entry) for entry in simple]
    plan += [("hequ", entry) for entry in simple]
    plan += [("imp_hequ", entry) for entry in improved]

    jobs = []
    produced: dict[str, list[VariantEntry]] = {"sharp": [], "hequ": [], "imp_hequ": []}
    for variant, entry in plan:
        base_id = entry.id.removesuffix("__improved")
        name = f"{base_id}__{variant}"
        jobs.append(
            PostJob(
                kind=variant,
                source=store.image_path(entry),
                reference=reference_for(entry),
                out_image=store.base / POSTPROCESSED_DIR / f"{name}.png",
                sigma=config.sharp_sigma,
                amount=config.sharp_amount,
                threshold=config.sharp_threshold,
            )
        )
        produced[variant].append(
            VariantEntry(
                id=name,
                image_path=f"{POSTPROCESSED_DIR}/{name}.png",
                variant=variant,
                label="attack",
                split=entry.split,
                source_a=entry.source_a,
                source_b=entry.source_b,
            )
        )

    run_tasks(postprocess_one, jobs, workers)
    for variant, entries in produced.items():
        store.replace(variant, entries)
    return {variant: len(entries) for variant, entries in produced.items()}
