# morphforge/styletransfer/loss.py

import logging
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from morphforge.core.arrays import FloatArray
from morphforge.core.exceptions import NetworkError, ShapeMismatchError
from morphforge.imagekit.image import Image
from morphforge.styletransfer.net import ConvNet, FeatureMaps, backpropagate, run_layers

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LossConfig:
    """Layer roles and their weights (v_l for content, w_l for style)."""

    content_layers: tuple[str, ...]
    style_layers: tuple[str, ...]
    content_weights: tuple[float, ...]
    style_weights: tuple[float, ...]

    def __post_init__(self) -> None:
        for attr in ("content_layers", "style_layers", "content_weights", "style_weights"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))
        if len(self.content_layers) != len(self.content_weights):
            raise ValueError("content_layers and content_weights differ in length")
        if len(self.style_layers) != len(self.style_weights):
            raise ValueError("style_layers and style_weights differ in length")
        weights = self.content_weights + self.style_weights
        if any(w < 0 for w in weights):
            raise ValueError("Loss weights must be non-negative")
        if not any(w > 0 for w in weights):
            raise ValueError("At least one loss weight must be positive")

    @classmethod
    def uniform(
        cls,
        content_layers: list[str],
        style_layers: list[str],
        content_weight: float = 1.0,
        style_weight: float = 1000.0,
    ) -> "LossConfig":
        return cls(
            content_layers=tuple(content_layers),
            style_layers=tuple(style_layers),
            content_weights=(content_weight,) * len(content_layers),
            style_weights=(style_weight,) * len(style_layers),
        )

    def with_weights(self, content_scale: float = 1.0, style_scale: float = 1.0) -> "LossConfig":
        return LossConfig(
            content_layers=self.content_layers,
            style_layers=self.style_layers,
            content_weights=tuple(w * content_scale for w in self.content_weights),
            style_weights=tuple(w * style_scale for w in self.style_weights),
        )


@dataclass(frozen=True, eq=False)
class StyleTarget:
    """Target Gram matrix per style layer."""

    grams: Mapping[str, FloatArray]

    @property
    def layers(self) -> list[str]:
        return list(self.grams.keys())


@dataclass
class LossBreakdown:
    """Unweighted per-layer content and style terms."""

    content: dict[str, float] = field(default_factory=dict)
    style: dict[str, float] = field(default_factory=dict)

    @property
    def style_total(self) -> float:
        return float(sum(self.style.values()))

    @property
    def content_total(self) -> float:
        return float(sum(self.content.values()))


def gram(features: FeatureMaps, layer: str) -> FloatArray:
    """G[i, j] = <F_i, F_j>, without normalization."""
    matrix = features[layer]
    return matrix @ matrix.T


def style_target(features: FeatureMaps, layers: list[str] | tuple[str, ...]) -> StyleTarget:
    return StyleTarget({layer: gram(features, layer) for layer in layers})


def style_target_average(target_a: StyleTarget, target_b: StyleTarget) -> StyleTarget:
    """Per-layer mean of two Gram targets."""
    if target_a.layers != target_b.layers:
        raise ShapeMismatchError(
            detail=f"Style targets cover different layers: {target_a.layers} vs {target_b.layers}"
        )
    averaged = {}
    for layer in target_a.layers:
        ga, gb = target_a.grams[layer], target_b.grams[layer]
        if ga.shape != gb.shape:
            raise ShapeMismatchError(
                detail=f"Gram shapes differ at '{layer}': {ga.shape} vs {gb.shape}"
            )
        averaged[layer] = (ga + gb) / 2.0
    return StyleTarget(averaged)


def loss_and_grad_array(
    net: ConvNet,
    x: FloatArray,
    content: FeatureMaps,
    style: StyleTarget,
    cfg: LossConfig,
) -> tuple[float, FloatArray, LossBreakdown]:
    """loss_and_grad on a raw (C, H, W) array."""
    net.require_layers(cfg.content_layers + cfg.style_layers)
    missing = sorted(set(cfg.style_layers) - set(style.layers))
    if missing:
        raise NetworkError(detail=f"Style target lacks layers {missing}")

    activations = run_layers(net, x)
    outputs = {layer.name: out for layer, out in zip(net.layers, activations[1:])}
    injected: dict[str, FloatArray] = {}
    breakdown = LossBreakdown()
    total = 0.0

    for layer, weight in zip(cfg.content_layers, cfg.content_weights):
        features = outputs[layer].reshape(outputs[layer].shape[0], -1)
        target = content[layer]
        if target.shape != features.shape:
            raise ShapeMismatchError(
                detail=f"Content target at '{layer}' is {target.shape}, image gives {features.shape}"
            )
        n_maps, n_pixels = features.shape
        residual = features - target
        term = float(np.sum(residual * residual)) / (2.0 * n_maps * n_pixels)
        breakdown.content[layer] = term
        total += weight * term
        if weight:
            grad = weight * residual / (n_maps * n_pixels)
            injected[layer] = injected[layer] + grad if layer in injected else grad

    for layer, weight in zip(cfg.style_layers, cfg.style_weights):
        features = outputs[layer].reshape(outputs[layer].shape[0], -1)
        target = style.grams[layer]
        n_maps, n_pixels = features.shape
        if target.shape != (n_maps, n_maps):
            raise ShapeMismatchError(
                detail=f"Style target at '{layer}' is {target.shape}, image gives {n_maps} maps"
            )
        residual = features @ features.T - target
        scale = float(n_maps * n_maps) * float(n_pixels * n_pixels)
        term = float(np.sum(residual * residual)) / (4.0 * scale)
        breakdown.style[layer] = term
        total += weight * term
        if weight:
            grad = weight * (residual @ features) / scale
            injected[layer] = injected[layer] + grad if layer in injected else grad

    gradient = backpropagate(net, activations, injected)
    return total, gradient, breakdown


def loss_and_grad(
    net: ConvNet,
    img: Image,
    content: FeatureMaps,
    style: StyleTarget,
    cfg: LossConfig,
) -> tuple[float, FloatArray, LossBreakdown]:
    """Weighted content plus style loss and its exact gradient with respect to ``img``.

    C_l = |F - P|^2 / (2 N M) and S_l = |G - A|^2 / (4 N^2 M^2); the gradient
    is accumulated backwards through avgpool, relu and conv.
    """
    return loss_and_grad_array(net, img.data, content, style, cfg)
