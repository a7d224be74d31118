# morphforge/cli.py

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Optional, Sequence

from morphforge.config import get_settings
from morphforge.core.exceptions import ConfigError, MorphForgeException
from morphforge.schemas.run_config import RunConfig, load_run_config
from morphforge.services import dataset, enhancement, evaluation, features, generation, postprocessing
from morphforge.services import synthetic, training

logger = logging.getLogger(__name__)


def seed_type(value: str) -> int:
    seed = int(value)
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return seed


def _variants_path(args: argparse.Namespace) -> Path:
    return Path(args.manifest) if args.manifest else Path(args.out) / generation.VARIANTS_FILE


def _features_path(args: argparse.Namespace, config: RunConfig) -> Path:
    if getattr(args, "features", None):
        return Path(args.features)
    return features.features_file(args.out, config.scheme)


def _require_manifest(args: argparse.Namespace) -> Path:
    if not args.manifest:
        raise ConfigError(detail=f"'{args.command}' needs --manifest")
    return Path(args.manifest)


def run_synth(args: argparse.Namespace, config: RunConfig) -> None:
    synthetic.generate_dataset(
        args.out,
        subjects=config.synthetic_subjects,
        images_per_subject=config.synthetic_images_per_subject,
        size=config.synthetic_size,
        seed=config.seed,
        workers=args.workers,
    )


def run_split(args: argparse.Namespace, config: RunConfig) -> None:
    manifest = _require_manifest(args)
    out_dir = Path(args.out) if args.out_given else manifest.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    dataset.split_manifest(config, manifest, out_dir / manifest.name)


def run_morph(args: argparse.Namespace, config: RunConfig) -> None:
    generation.generate_morphs(config, _require_manifest(args), args.out, args.workers)


def run_enhance(args: argparse.Namespace, config: RunConfig) -> None:
    enhancement.enhance_morphs(config, _variants_path(args), args.workers)


def run_post(args: argparse.Namespace, config: RunConfig) -> None:
    postprocessing.postprocess_morphs(config, _variants_path(args), args.workers)


def run_features(args: argparse.Namespace, config: RunConfig) -> None:
    features.extract_features(config, _variants_path(args), _features_path(args, config), args.workers)


def run_train(args: argparse.Namespace, config: RunConfig) -> None:
    out = Path(args.model) if args.model else training.model_file(args.out, args.mode, config)
    training.train_detector(config, _features_path(args, config), args.mode, out)


def run_eval(args: argparse.Namespace, config: RunConfig) -> None:
    model = Path(args.model) if args.model else training.model_file(args.out, args.mode, config)
    evaluation.evaluate_detector(
        config,
        model,
        _features_path(args, config),
        args.out,
        prefix=f"{args.mode}_{config.scheme}_{config.classifier}_",
    )


def run_mar(args: argparse.Namespace, config: RunConfig) -> None:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    evaluation.compute_mar(config, args.similarities, out_dir / "mar.csv", args.impostors)


COMMANDS: dict[str, tuple[str, Callable[[argparse.Namespace, RunConfig], None]]] = {
    "synth": ("Generate the synthetic face set and its manifest", run_synth),
    "split": ("Assign subject-disjoint train/test/val splits", run_split),
    "morph": ("Normalize faces, plan pairs and write simple morphs", run_morph),
    "enhance": ("Style-transfer the simple morphs (improved variant)", run_enhance),
    "post": ("Write the sharp, hequ and imp_hequ variants", run_post),
    "features": ("Extract detector features to CSV", run_features),
    "train": ("Train a detector on the training split", run_train),
    "eval": ("Score the test split and write the reports", run_eval),
    "mar": ("Morph acceptance rates from similarity scores", run_mar),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="Run configuration file (key = value)")
    common.add_argument("--manifest", type=Path, default=None, help="Manifest or variants CSV to read")
    common.add_argument("--out", type=Path, default=None, help="Output directory (default: current)")
    common.add_argument("--seed", type=seed_type, default=None, help="Override the configured seed")
    common.add_argument("--workers", type=int, default=None, help="Worker processes (default: settings)")

    parser = argparse.ArgumentParser(prog="morphforge", description="Face morph generation and detection")
    subparsers = parser.add_subparsers(dest="command", required=True)
    subcommands = {
        name: subparsers.add_parser(name, parents=[common], help=help_text)
        for name, (help_text, _) in COMMANDS.items()
    }

    for name in ("features", "train", "eval"):
        subcommands[name].add_argument("--features", type=Path, default=None, help="Feature CSV")
    for name in ("train", "eval"):
        subcommands[name].add_argument("--mode", choices=training.MODES, default="g11", help="Training mode")
        subcommands[name].add_argument("--model", type=Path, default=None, help="Model file")
    subcommands["mar"].add_argument("--similarities", type=Path, required=True, help="Similarity CSV")
    subcommands["mar"].add_argument(
        "--impostors", type=Path, default=None, help="Impostor scores; thresholds become FARs"
    )
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    args.out_given = args.out is not None
    args.out = args.out or Path(".")
    try:
        settings = get_settings()
        if args.workers is not None and args.workers < 1:
            raise ConfigError(detail=f"--workers must be at least 1, got {args.workers}")
        args.workers = args.workers or settings.workers
        config = load_run_config(args.config, seed=args.seed)
        logger.info(f"morphforge {args.command} (seed {config.seed}, {args.workers} workers)")
        COMMANDS[args.command][1](args, config)
    except MorphForgeException as e:
        logger.error(f"[{e.error_code}] {e.detail}")
        return e.exit_code
    except KeyboardInterrupt:
        logger.info("Interrupted")
        return 130
    return 0


if __name__ == "__main__":
    sys.exit(main())
