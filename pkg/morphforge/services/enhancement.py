# morphforge/services/enhancement.py

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

from morphforge.config import format_float
from morphforge.core.exceptions import ArtifactIOError, ConfigError
from morphforge.imagekit.io import load_image, save_image
from morphforge.schemas.manifest import VariantEntry
from morphforge.schemas.run_config import RunConfig
from morphforge.services.store import VariantStore
from morphforge.styletransfer.enhance import difference_image, enhance_morph_traced
from morphforge.styletransfer.loss import LossConfig
from morphforge.styletransfer.net import ConvNet, build_test_net, default_layer_roles, load_weights
from morphforge.styletransfer.optimizer import OptimizerConfig
from morphforge.tasks.pool import run_tasks

logger = logging.getLogger(__name__)

IMPROVED_DIR = "improved"
TRACES_DIR = "traces"
DIFFS_DIR = "diffs"


def build_network(config: RunConfig) -> ConvNet:
    if config.net_weights:
        return load_weights(config.net_weights)
    return build_test_net(config.net_seed, config.net_channels)


def build_loss_config(net: ConvNet, config: RunConfig) -> LossConfig:
    content_default, style_default = default_layer_roles(net)
    content = config.content_layers or content_default
    style = config.style_layers or style_default
    net.require_layers(content + style)
    try:
        return LossConfig.uniform(content, style, config.content_weight, config.style_weight)
    except ValueError as e:
        raise ConfigError(detail=f"Invalid loss configuration: {e}")


def build_optimizer_config(config: RunConfig) -> OptimizerConfig:
    return OptimizerConfig(
        memory=config.opt_memory,
        max_iters=config.opt_max_iters,
        grad_tol=config.opt_grad_tol,
        loss_rel_tol=config.opt_loss_rel_tol,
        backend=config.opt_backend,
    )


@dataclass(frozen=True)
class EnhanceJob:
    morph_id: str
    blended: Path
    orig_a: Path
    orig_b: Path
    out_image: Path
    out_trace: Path
    out_diff: Path
    config: RunConfig


@dataclass(frozen=True)
class EnhanceSummary:
    morph_id: str
    iterations: int
    reason: str
    initial_loss: float
    final_loss: float
    initial_style: float
    final_style: float


def write_trace(trace: list[float], path: Path) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["iteration", "loss"])
            writer.writerows([k, format_float(loss)] for k, loss in enumerate(trace))
    except OSError as e:
        raise ArtifactIOError(detail=f"Cannot write trace {path}: {e}")


def enhance_one(job: EnhanceJob) -> EnhanceSummary:
    net = build_network(job.config)
    blended = load_image(job.blended)
    enhanced, report = enhance_morph_traced(
        blended,
        load_image(job.orig_a),
        load_image(job.orig_b),
        net,
        build_loss_config(net, job.config),
        build_optimizer_config(job.config),
    )
    save_image(enhanced, job.out_image)
    save_image(difference_image(enhanced, blended), job.out_diff)
    write_trace(report.result.trace, job.out_trace)
    return EnhanceSummary(
        morph_id=job.morph_id,
        iterations=report.result.iterations,
        reason=report.result.reason,
        initial_loss=report.result.initial_loss,
        final_loss=report.result.final_loss,
        initial_style=report.initial.style_total,
        final_style=report.final.style_total,
    )


def enhance_morphs(
    config: RunConfig, variants_path: str | Path, workers: int | None = None
) -> list[EnhanceSummary]:
    """Style-transfer every simple morph toward the averaged style of its two sources."""
    store = VariantStore(variants_path)
    simple = store.require("simple")
    for folder in (IMPROVED_DIR, TRACES_DIR, DIFFS_DIR):
        (store.base / folder).mkdir(parents=True, exist_ok=True)

    # fail on a bad network or layer choice before any worker starts
    build_loss_config(build_network(config), config)

    jobs = []
    improved = []
    for entry in simple:
        name = f"{entry.id}__improved"
        jobs.append(
            EnhanceJob(
                morph_id=entry.id,
                blended=store.image_path(entry),
                orig_a=store.image_path(store.get(entry.source_a)),
                orig_b=store.image_path(store.get(entry.source_b)),
                out_image=store.base / IMPROVED_DIR / f"{name}.png",
                out_trace=store.base / TRACES_DIR / f"{entry.id}.csv",
                out_diff=store.base / DIFFS_DIR / f"{entry.id}.png",
                config=config,
            )
        )
        improved.append(
            VariantEntry(
                id=name,
                image_path=f"{IMPROVED_DIR}/{name}.png",
                variant="improved",
                label="attack",
                split=entry.split,
                source_a=entry.source_a,
                source_b=entry.source_b,
            )
        )

    summaries = run_tasks(enhance_one, jobs, workers)
    for summary in summaries:
        logger.info(
            f"{summary.morph_id}: {summary.iterations} iterations ({summary.reason}), "
            f"loss {summary.initial_loss:.6e} -> {summary.final_loss:.6e}, "
            f"style {summary.initial_style:.6e} -> {summary.final_style:.6e}"
        )
    store.replace("improved", improved)
    return summaries
