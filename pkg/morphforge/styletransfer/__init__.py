# morphforge/styletransfer/__init__.py

from .enhance import EnhanceReport, difference_image, enhance_morph, enhance_morph_traced
from .loss import (
    LossBreakdown,
    LossConfig,
    StyleTarget,
    gram,
    loss_and_grad,
    style_target,
    style_target_average,
)
from .net import (
    ConvNet,
    FeatureMaps,
    Layer,
    build_test_net,
    default_layer_roles,
    forward,
    load_weights,
    save_weights,
)
from .optimizer import OptimizationResult, OptimizerConfig, lbfgsb_minimize

__all__ = [
    "ConvNet",
    "EnhanceReport",
    "FeatureMaps",
    "Layer",
    "LossBreakdown",
    "LossConfig",
    "OptimizationResult",
    "OptimizerConfig",
    "StyleTarget",
    "build_test_net",
    "default_layer_roles",
    "difference_image",
    "enhance_morph",
    "enhance_morph_traced",
    "forward",
    "gram",
    "lbfgsb_minimize",
    "load_weights",
    "loss_and_grad",
    "save_weights",
    "style_target",
    "style_target_average",
]
