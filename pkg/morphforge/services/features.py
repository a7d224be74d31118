# morphforge/services/features.py

import logging
from dataclasses import dataclass
from pathlib import Path

from morphforge.detectors import get_extractor
from morphforge.detectors.base import ExtractorOptions, FeatureVector, LabeledSample, write_feature_csv
from morphforge.detectors.bsif import generate_bsif_bank, load_bsif_bank
from morphforge.imagekit.io import load_image
from morphforge.schemas.run_config import RunConfig
from morphforge.services.store import VariantStore
from morphforge.tasks.pool import run_tasks

logger = logging.getLogger(__name__)


def features_file(out_dir: str | Path, scheme: str) -> Path:
    return Path(out_dir) / f"features_{scheme}.csv"


def extractor_options(config: RunConfig) -> ExtractorOptions:
    if config.scheme != "bsif4096":
        return ExtractorOptions(bsif_seed=config.bsif_seed, edge_quality=config.edge_quality)
    bank = load_bsif_bank(config.bsif_bank) if config.bsif_bank else generate_bsif_bank(config.bsif_seed)
    return ExtractorOptions(bsif_bank=bank, bsif_seed=config.bsif_seed, edge_quality=config.edge_quality)


@dataclass(frozen=True)
class ExtractJob:
    image_path: Path
    scheme: str
    options: ExtractorOptions


def extract_one(job: ExtractJob) -> FeatureVector:
    return get_extractor(job.scheme, job.options).extract(load_image(job.image_path))


def extract_features(
    config: RunConfig,
    variants_path: str | Path,
    out_path: str | Path,
    workers: int | None = None,
) -> list[LabeledSample]:
    """Extract ``config.scheme`` features of every image in the variant manifest."""
    store = VariantStore(variants_path)
    options = extractor_options(config)
    jobs = [ExtractJob(store.image_path(entry), config.scheme, options) for entry in store.entries]
    vectors = run_tasks(extract_one, jobs, workers)

    samples = [
        LabeledSample(
            features=vector,
            label=entry.label,
            variant=entry.variant,
            sample_id=entry.id,
            split=entry.split,
        )
        for entry, vector in zip(store.entries, vectors)
    ]
    write_feature_csv(samples, out_path)
    return samples
