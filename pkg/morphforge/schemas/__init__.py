# morphforge/schemas/__init__.py

from .manifest import (
    ManifestEntry,
    PairPlan,
    VariantEntry,
    read_manifest,
    read_variants,
    resolve_path,
    write_manifest,
    write_pair_plans,
    write_variants,
)
from .run_config import RunConfig, load_run_config, parse_run_config

__all__ = [
    "ManifestEntry",
    "PairPlan",
    "RunConfig",
    "VariantEntry",
    "load_run_config",
    "parse_run_config",
    "read_manifest",
    "read_variants",
    "resolve_path",
    "write_manifest",
    "write_pair_plans",
    "write_variants",
]
