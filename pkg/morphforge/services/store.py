# morphforge/services/store.py

import logging
from pathlib import Path
from typing import Iterable

from morphforge.core.exceptions import ManifestError
from morphforge.schemas.manifest import VariantEntry, read_variants, write_variants

logger = logging.getLogger(__name__)


class VariantStore:
    """The variant-tagged manifest of a run directory and the images it points at."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.base = self.path.parent
        self.entries = read_variants(self.path)

    def of_variant(self, variant: str) -> list[VariantEntry]:
        return [entry for entry in self.entries if entry.variant == variant]

    def get(self, entry_id: str) -> VariantEntry:
        for entry in self.entries:
            if entry.id == entry_id:
                return entry
        raise ManifestError(detail=f"'{entry_id}' is not listed in {self.path}")

    def image_path(self, entry: VariantEntry) -> Path:
        candidate = Path(entry.image_path)
        return candidate if candidate.is_absolute() else self.base / candidate

    def require(self, variant: str) -> list[VariantEntry]:
        entries = self.of_variant(variant)
        if not entries:
            raise ManifestError(detail=f"{self.path} lists no '{variant}' images")
        return entries

    def replace(self, variant: str, entries: Iterable[VariantEntry]) -> None:
        """Swap every entry of ``variant`` for ``entries`` and rewrite the file."""
        kept = [entry for entry in self.entries if entry.variant != variant]
        self.entries = kept + list(entries)
        write_variants(self.entries, self.path)
        logger.info(f"{self.path}: {len(self.of_variant(variant))} '{variant}' entries")
