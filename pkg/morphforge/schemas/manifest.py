# morphforge/schemas/manifest.py

import csv
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, ValidationInfo, field_validator

from morphforge.core.exceptions import ArtifactIOError, ManifestError

MANIFEST_HEADER = ["id", "image_path", "landmarks_path", "subject_id", "gender", "source_db", "split"]
VARIANTS_HEADER = ["id", "image_path", "variant", "label", "split", "source_a", "source_b"]
PAIRS_HEADER = ["split", "entry_a", "entry_b"]

Gender = Literal["m", "f", "x"]
Split = Literal["train", "test", "val", "unassigned"]
Variant = Literal["genuine", "simple", "improved", "sharp", "hequ", "imp_hequ"]
Label = Literal["bona_fide", "attack"]


class ManifestEntry(BaseModel):
    """One source face image with its landmarks and subject."""

    model_config = ConfigDict(frozen=True)

    id: str = Field(..., min_length=1)
    image_path: str = Field(..., min_length=1)
    landmarks_path: str = Field(..., min_length=1)
    subject_id: str = Field(..., min_length=1)
    gender: Gender
    source_db: str = Field(..., min_length=1)
    split: Split = "unassigned"

    @field_validator("id", "subject_id", "source_db")
    @classmethod
    def validate_no_separators(cls, v: str) -> str:
        """Reject values that would break CSV rows or file names."""
        if any(ch in v for ch in ",\n\r/\\"):
            raise ValueError(f"'{v}' must not contain commas, newlines or path separators")
        return v


class VariantEntry(BaseModel):
    """One image in the variant-tagged manifest written by the morph stage and later."""

    model_config = ConfigDict(frozen=True)

    id: str = Field(..., min_length=1)
    image_path: str = Field(..., min_length=1)
    variant: Variant
    label: Label
    split: Split
    source_a: str = ""
    source_b: str = ""

    @field_validator("label")
    @classmethod
    def validate_label(cls, v: str, info: ValidationInfo) -> str:
        variant = info.data.get("variant")
        if variant is not None and (variant == "genuine") != (v == "bona_fide"):
            raise ValueError(f"Variant '{variant}' does not match label '{v}'")
        return v

    @property
    def is_morph(self) -> bool:
        return self.variant != "genuine"


class PairPlan(BaseModel):
    """Morph pairs of one split and how often each subject is used."""

    split: Split
    seed: int = 0
    pairs: list[tuple[str, str]] = Field(default_factory=list)
    usage: dict[str, int] = Field(default_factory=dict)

    @property
    def spread(self) -> int:
        """max(usage) - min(usage), 0 for an empty plan."""
        if not self.usage:
            return 0
        return max(self.usage.values()) - min(self.usage.values())


def resolve_path(path: str, base: Path) -> Path:
    """Manifest paths are relative to the manifest's directory unless absolute."""
    candidate = Path(path)
    return candidate if candidate.is_absolute() else base / candidate


def _read_rows(path: Path, header: list[str], what: str) -> list[tuple[int, dict[str, str]]]:
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            reader = csv.DictReader(handle)
            if reader.fieldnames != header:
                raise ManifestError(
                    detail=f"{path}: {what} header must be {','.join(header)}, got {reader.fieldnames}"
                )
            return [(line_number, row) for line_number, row in enumerate(reader, start=2)]
    except OSError as e:
        raise ArtifactIOError(detail=f"Cannot read {what} {path}: {e}")


def _write_rows(path: Path, header: list[str], rows: list[list[str]], what: str) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as e:
        raise ArtifactIOError(detail=f"Cannot write {what} {path}: {e}")


def validate_manifest(entries: list[ManifestEntry]) -> None:
    """Ids unique; each subject has a single gender and source database."""
    seen: set[str] = set()
    subjects: dict[str, tuple[str, str]] = {}
    for entry in entries:
        if entry.id in seen:
            raise ManifestError(detail=f"Duplicate manifest id '{entry.id}'")
        seen.add(entry.id)
        attributes = (entry.gender, entry.source_db)
        known = subjects.setdefault(entry.subject_id, attributes)
        if known != attributes:
            raise ManifestError(
                detail=f"Subject '{entry.subject_id}' has conflicting gender/source_db "
                f"{known} and {attributes}"
            )


def read_manifest(path: str | Path) -> list[ManifestEntry]:
    path = Path(path)
    entries = []
    for line_number, row in _read_rows(path, MANIFEST_HEADER, "manifest"):
        try:
            entries.append(ManifestEntry(**row))
        except ValidationError as e:
            raise ManifestError(detail=f"{path}:{line_number}: {e.errors()[0]['msg']}")
    validate_manifest(entries)
    return entries


def write_manifest(entries: list[ManifestEntry], path: str | Path) -> None:
    validate_manifest(entries)
    rows = [[str(getattr(entry, key)) for key in MANIFEST_HEADER] for entry in entries]
    _write_rows(Path(path), MANIFEST_HEADER, rows, "manifest")


def read_variants(path: str | Path) -> list[VariantEntry]:
    path = Path(path)
    entries = []
    seen: set[str] = set()
    for line_number, row in _read_rows(path, VARIANTS_HEADER, "variant manifest"):
        try:
            entry = VariantEntry(**row)
        except ValidationError as e:
            raise ManifestError(detail=f"{path}:{line_number}: {e.errors()[0]['msg']}")
        if entry.id in seen:
            raise ManifestError(detail=f"{path}:{line_number}: duplicate id '{entry.id}'")
        seen.add(entry.id)
        entries.append(entry)
    return entries


def write_variants(entries: list[VariantEntry], path: str | Path) -> None:
    rows = [[str(getattr(entry, key)) for key in VARIANTS_HEADER] for entry in entries]
    _write_rows(Path(path), VARIANTS_HEADER, rows, "variant manifest")


def write_pair_plans(plans: list[PairPlan], path: str | Path) -> None:
    rows = [[plan.split, a, b] for plan in plans for a, b in plan.pairs]
    _write_rows(Path(path), PAIRS_HEADER, rows, "pair plan")

