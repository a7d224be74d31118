# morphforge/schemas/run_config.py

import logging
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from morphforge.core.exceptions import ConfigError

logger = logging.getLogger(__name__)

LIST_KEYS = {"net_channels", "content_layers", "style_layers", "apcer_targets", "mar_thresholds"}


class RunConfig(BaseModel):
    """Experiment configuration read from a ``key = value`` file."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    # Seeds
    seed: int = Field(default=0, ge=0)
    net_seed: int = Field(default=7, ge=0)
    bsif_seed: int = Field(default=12, ge=0)

    # Morph generation
    face_size: int = Field(default=224, ge=16)
    morph_alpha: float = Field(default=0.5, ge=0.0, le=1.0)
    clone_into: Literal["none", "A", "B"] = "none"

    # Feature network and losses
    net_channels: list[int] = Field(default_factory=lambda: [16, 32, 64])
    net_weights: str = ""
    content_layers: Optional[list[str]] = None
    style_layers: Optional[list[str]] = None
    content_weight: float = Field(default=1.0, ge=0.0)
    style_weight: float = Field(default=1000.0, ge=0.0)

    # Optimizer
    opt_memory: int = Field(default=10, ge=1)
    opt_max_iters: int = Field(default=50, ge=0)
    opt_grad_tol: float = Field(default=1e-6, ge=0.0)
    opt_loss_rel_tol: float = Field(default=1e-9, ge=0.0)
    opt_backend: Literal["projected", "scipy"] = "projected"

    # Post-processing
    sharp_sigma: float = Field(default=1.5, gt=0.0)
    sharp_amount: float = Field(default=0.7, ge=0.0)
    sharp_threshold: float = Field(default=0.0, ge=0.0)
    hequ_reference: Literal["a", "b", "uniform"] = "a"

    # Detectors
    scheme: Literal["lbp59", "bsif4096", "edgefeat"] = "lbp59"
    classifier: Literal["linear", "tree"] = "linear"
    svm_lambda: float = Field(default=0.01, gt=0.0)
    svm_epochs: int = Field(default=100, ge=1)
    tree_max_depth: int = Field(default=8, ge=1)
    tree_min_leaf: int = Field(default=2, ge=1)
    bsif_bank: str = ""
    edge_quality: int = Field(default=75, ge=1, le=100)

    # Dataset
    split_train: float = Field(default=0.7, ge=0.0, le=1.0)
    split_test: float = Field(default=0.2, ge=0.0, le=1.0)
    split_val: float = Field(default=0.1, ge=0.0, le=1.0)
    pairs_per_split: int = Field(default=0, ge=0)

    # Evaluation
    apcer_targets: list[float] = Field(default_factory=lambda: [0.1, 0.05, 0.01])
    mar_thresholds: list[float] = Field(default_factory=lambda: [0.5])

    # Synthetic faces
    synthetic_subjects: int = Field(default=60, ge=2)
    synthetic_images_per_subject: int = Field(default=1, ge=1)
    synthetic_size: int = Field(default=96, ge=32)

    @field_validator(*sorted(LIST_KEYS), mode="before")
    @classmethod
    def split_list(cls, v):
        """Comma separated strings become lists; an empty string means unset."""
        if isinstance(v, str):
            items = [item.strip() for item in v.split(",") if item.strip()]
            return items or None
        return v

    @field_validator("net_channels")
    @classmethod
    def validate_channels(cls, v: list[int]) -> list[int]:
        if not v or any(c < 1 for c in v):
            raise ValueError("net_channels needs at least one positive block width")
        return v

    @field_validator("apcer_targets")
    @classmethod
    def validate_targets(cls, v: list[float]) -> list[float]:
        if not v or any(not 0.0 < t <= 1.0 for t in v):
            raise ValueError("apcer_targets must be fractions in (0, 1]")
        return v

    @model_validator(mode="after")
    def validate_split_ratios(self) -> "RunConfig":
        total = self.split_train + self.split_test + self.split_val
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"split ratios must sum to 1, got {total}")
        return self

    @property
    def split_ratios(self) -> tuple[float, float, float]:
        return self.split_train, self.split_test, self.split_val


def parse_run_config(text: str, source: str = "<string>") -> RunConfig:
    """Parse UTF-8 ``key = value`` lines; ``#`` starts a comment."""
    values: dict[str, str] = {}
    lines: dict[str, int] = {}
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(detail=f"{source}:{line_number}: expected 'key = value', got '{line}'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in values:
            raise ConfigError(
                detail=f"{source}:{line_number}: key '{key}' already set on line {lines[key]}"
            )
        values[key] = value
        lines[key] = line_number

    unknown = [key for key in values if key not in RunConfig.model_fields]
    if unknown:
        listed = ", ".join(f"'{key}' (line {lines[key]})" for key in unknown)
        raise ConfigError(detail=f"{source}: unknown configuration keys: {listed}")

    try:
        return RunConfig(**values)
    except ValidationError as e:
        problems = []
        for error in e.errors():
            key = str(error["loc"][0]) if error["loc"] else ""
            where = f"line {lines[key]}" if key in lines else "value"
            problems.append(f"{key or 'config'} ({where}): {error['msg']}")
        raise ConfigError(detail=f"{source}: invalid configuration: {'; '.join(problems)}")


def load_run_config(path: Optional[str | Path], seed: Optional[int] = None) -> RunConfig:
    """Read a config file (defaults when ``path`` is None); ``seed`` overrides the file."""
    if path is None:
        config = RunConfig()
    else:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as e:
            raise ConfigError(detail=f"Cannot read config file {path}: {e}")
        config = parse_run_config(text, source=str(path))
    if seed is not None:
        try:
            config = RunConfig(**{**config.model_dump(), "seed": seed})
        except ValidationError as e:
            raise ConfigError(detail=f"Invalid --seed {seed}: {e.errors()[0]['msg']}")
    logger.debug(f"Run configuration: {config.model_dump()}")
    return config
