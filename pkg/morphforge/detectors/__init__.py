# morphforge/detectors/__init__.py

from typing import Optional

from morphforge.core.exceptions import FeatureError

from .base import (
    LABELS,
    SCHEME_LENGTHS,
    VARIANTS,
    BaseExtractor,
    ExtractorOptions,
    FeatureVector,
    LabeledSample,
    read_feature_csv,
    write_feature_csv,
)
from .bsif import (
    BsifExtractor,
    BsifFilterBank,
    bsif_histogram,
    generate_bsif_bank,
    load_bsif_bank,
    save_bsif_bank,
)
from .edges import EdgeFeatureExtractor, block_dct, block_idct, dct_recompress, edge_feature_stats
from .lbp import LbpExtractor, lbp_histogram
from .linear import LinearModel, train_linear
from .scoring import Model, load_model, save_model, score
from .tree import TreeModel, TreeNode, train_tree

# Registry of all available feature extractors
EXTRACTORS = [LbpExtractor, BsifExtractor, EdgeFeatureExtractor]


def get_extractor(scheme: str, options: Optional[ExtractorOptions] = None) -> BaseExtractor:
    """Get the extractor for a feature scheme."""
    for extractor_cls in EXTRACTORS:
        if extractor_cls.can_handle_scheme(scheme):
            return extractor_cls.from_options(options or ExtractorOptions())
    raise FeatureError(detail=f"No extractor found for scheme: {scheme}")


__all__ = [
    "EXTRACTORS",
    "LABELS",
    "SCHEME_LENGTHS",
    "VARIANTS",
    "BaseExtractor",
    "BsifExtractor",
    "BsifFilterBank",
    "EdgeFeatureExtractor",
    "ExtractorOptions",
    "FeatureVector",
    "LabeledSample",
    "LbpExtractor",
    "LinearModel",
    "Model",
    "TreeModel",
    "TreeNode",
    "block_dct",
    "block_idct",
    "bsif_histogram",
    "dct_recompress",
    "edge_feature_stats",
    "generate_bsif_bank",
    "get_extractor",
    "lbp_histogram",
    "load_bsif_bank",
    "load_model",
    "read_feature_csv",
    "save_bsif_bank",
    "save_model",
    "score",
    "train_linear",
    "train_tree",
    "write_feature_csv",
]
