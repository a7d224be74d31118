# morphforge/postprocess/__init__.py

from .filters import equalize_histogram, histogram_match, unsharp_mask

__all__ = ["equalize_histogram", "histogram_match", "unsharp_mask"]
