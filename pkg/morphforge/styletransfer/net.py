# morphforge/styletransfer/net.py

"""Small VGG-style convolutional feature extractor in numpy.

Blocks are conv-relu-conv-relu-avgpool; convolutions are 3x3, stride 1, zero
padded. Layer names follow the conv{block}_{k} / relu{block}_{k} / pool{block}
scheme so that full-size weight files can be dropped in.
"""

import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Literal, Mapping

import numpy as np
import numpy.typing as npt
from numpy.lib.stride_tricks import sliding_window_view

from morphforge.core.arrays import FloatArray
from morphforge.core.container import read_container, write_container
from morphforge.core.exceptions import NetworkError
from morphforge.imagekit.image import Image

logger = logging.getLogger(__name__)

LayerKind = Literal["conv", "relu", "avgpool"]

_TENSOR_NAME = re.compile(r"^conv(\d+)_(\d+)\.(weight|bias)$")


@dataclass(frozen=True, eq=False)
class Layer:
    name: str
    kind: LayerKind
    weight: FloatArray | None = None
    bias: FloatArray | None = None

    @property
    def out_channels(self) -> int:
        return 0 if self.weight is None else int(self.weight.shape[0])

    @property
    def in_channels(self) -> int:
        return 0 if self.weight is None else int(self.weight.shape[1])


@dataclass(frozen=True, eq=False)
class ConvNet:
    """Ordered layer list with a fixed input channel count."""

    layers: tuple[Layer, ...]
    in_channels: int = 3

    def __post_init__(self) -> None:
        layers = tuple(self.layers)
        names = [layer.name for layer in layers]
        duplicates = sorted({name for name in names if names.count(name) > 1})
        if duplicates:
            raise NetworkError(detail=f"Duplicate layer names: {duplicates}")

        channels = self.in_channels
        for layer in layers:
            if layer.kind != "conv":
                continue
            if layer.weight is None or layer.bias is None:
                raise NetworkError(detail=f"Conv layer '{layer.name}' lacks weights")
            if layer.weight.ndim != 4 or layer.weight.shape[2:] != (3, 3):
                raise NetworkError(
                    detail=f"Conv layer '{layer.name}' needs (out, in, 3, 3) weights, "
                    f"got {layer.weight.shape}"
                )
            if layer.in_channels != channels:
                raise NetworkError(
                    detail=f"Channel chain broken at '{layer.name}': expects "
                    f"{layer.in_channels} inputs, previous layer gives {channels}"
                )
            if layer.bias.shape != (layer.out_channels,):
                raise NetworkError(detail=f"Bias of '{layer.name}' has shape {layer.bias.shape}")
            if not (np.all(np.isfinite(layer.weight)) and np.all(np.isfinite(layer.bias))):
                raise NetworkError(detail=f"Conv layer '{layer.name}' has non-finite weights")
            channels = layer.out_channels
        object.__setattr__(self, "layers", layers)

    @property
    def layer_names(self) -> list[str]:
        return [layer.name for layer in self.layers]

    def conv_names(self) -> list[str]:
        return [layer.name for layer in self.layers if layer.kind == "conv"]

    def require_layers(self, names: Iterable[str]) -> None:
        unknown = sorted(set(names) - set(self.layer_names))
        if unknown:
            raise NetworkError(detail=f"Unknown layers: {unknown}")


@dataclass(frozen=True, eq=False)
class FeatureMaps:
    """Per layer an (N_l, M_l) matrix: N_l maps of M_l pixels each."""

    maps: Mapping[str, FloatArray]

    def __getitem__(self, layer: str) -> FloatArray:
        try:
            return self.maps[layer]
        except KeyError:
            raise NetworkError(detail=f"No feature maps for layer '{layer}'")

    def __contains__(self, layer: object) -> bool:
        return layer in self.maps

    @property
    def layers(self) -> list[str]:
        return list(self.maps.keys())


def conv_forward(x: FloatArray, weight: FloatArray, bias: FloatArray) -> FloatArray:
    """3x3 correlation of (C, H, W) input with zero padding."""
    padded = np.pad(x, ((0, 0), (1, 1), (1, 1)))
    windows = sliding_window_view(padded, (3, 3), axis=(1, 2))
    out = np.einsum("chwij,ocij->ohw", windows, weight.astype(np.float64), optimize=True)
    return out + bias.astype(np.float64)[:, np.newaxis, np.newaxis]


def conv_backward(dout: FloatArray, weight: FloatArray) -> FloatArray:
    """Input gradient of conv_forward: full correlation with the flipped kernel."""
    padded = np.pad(dout, ((0, 0), (1, 1), (1, 1)))
    windows = sliding_window_view(padded, (3, 3), axis=(1, 2))
    flipped = weight.astype(np.float64)[:, :, ::-1, ::-1]
    return np.einsum("ohwij,ocij->chw", windows, flipped, optimize=True)


def pool_forward(x: FloatArray) -> FloatArray:
    """2x2 average pooling, stride 2; an odd trailing row or column is dropped."""
    channels, height, width = x.shape
    h2, w2 = height // 2, width // 2
    trimmed = x[:, : 2 * h2, : 2 * w2]
    return trimmed.reshape(channels, h2, 2, w2, 2).mean(axis=(2, 4))


def pool_backward(dout: FloatArray, input_shape: tuple[int, ...]) -> FloatArray:
    dx = np.zeros(input_shape, dtype=np.float64)
    h2, w2 = dout.shape[1], dout.shape[2]
    spread = np.repeat(np.repeat(dout, 2, axis=1), 2, axis=2) / 4.0
    dx[:, : 2 * h2, : 2 * w2] = spread
    return dx


def run_layers(net: ConvNet, x: FloatArray) -> list[FloatArray]:
    """Activations: element 0 is the input, element i + 1 the output of layer i."""
    if x.shape[0] != net.in_channels:
        raise NetworkError(
            detail=f"Network expects {net.in_channels} input channels, got {x.shape[0]}"
        )
    activations = [x]
    for layer in net.layers:
        current = activations[-1]
        if layer.kind == "conv":
            out = conv_forward(current, layer.weight, layer.bias)
        elif layer.kind == "relu":
            out = np.maximum(current, 0.0)
        else:
            out = pool_forward(current)
            if out.shape[1] == 0 or out.shape[2] == 0:
                raise NetworkError(
                    detail=f"Input too small: '{layer.name}' leaves no pixels"
                )
        activations.append(out)
    return activations


def backpropagate(net: ConvNet, activations: list[FloatArray], injected: Mapping[str, FloatArray]) -> FloatArray:
    """Input gradient for gradients ``injected`` at the outputs of named layers.

    Layers are visited from last to first, which fixes the summation order.
    """
    grad: FloatArray | None = None
    for index in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[index]
        if layer.name in injected:
            contribution = injected[layer.name].reshape(activations[index + 1].shape)
            grad = contribution.copy() if grad is None else grad + contribution
        if grad is None:
            continue
        layer_input = activations[index]
        if layer.kind == "conv":
            grad = conv_backward(grad, layer.weight)
        elif layer.kind == "relu":
            grad = grad * (layer_input > 0.0)
        else:
            grad = pool_backward(grad, layer_input.shape)
    if grad is None:
        return np.zeros_like(activations[0])
    return grad


def forward(net: ConvNet, img: Image | FloatArray) -> FeatureMaps:
    """Feature maps of every named layer, each flattened to (N_l, M_l)."""
    data = img.data if isinstance(img, Image) else np.asarray(img, dtype=np.float64)
    activations = run_layers(net, data)
    maps = {
        layer.name: out.reshape(out.shape[0], -1)
        for layer, out in zip(net.layers, activations[1:])
    }
    return FeatureMaps(maps)


def build_test_net(seed: int, channels_per_block: list[int], in_channels: int = 3) -> ConvNet:
    """Seeded conv-relu-conv-relu-pool blocks, weights N(0, 1/fan_in) stored as float32."""
    if not channels_per_block or any(c < 1 for c in channels_per_block):
        raise NetworkError(detail=f"Invalid channels per block: {channels_per_block}")
    rng = np.random.default_rng(seed)
    layers: list[Layer] = []
    channels = in_channels
    for block, out_channels in enumerate(channels_per_block, start=1):
        for k in (1, 2):
            fan_in = 9 * channels
            weight = (rng.standard_normal((out_channels, channels, 3, 3)) / np.sqrt(fan_in)).astype(np.float32)
            bias = np.zeros(out_channels, dtype=np.float32)
            layers.append(Layer(f"conv{block}_{k}", "conv", weight, bias))
            layers.append(Layer(f"relu{block}_{k}", "relu"))
            channels = out_channels
        layers.append(Layer(f"pool{block}", "avgpool"))
    return ConvNet(tuple(layers), in_channels=in_channels)


def default_layer_roles(net: ConvNet) -> tuple[list[str], list[str]]:
    """(content, style) layer names: conv*_2 and conv*_1 of every block."""
    convs = net.conv_names()
    content = [name for name in convs if name.endswith("_2")]
    style = [name for name in convs if name.endswith("_1")]
    return content, style


def save_weights(net: ConvNet, path: str | Path) -> None:
    tensors: dict[str, npt.ArrayLike] = {}
    for layer in net.layers:
        if layer.kind == "conv":
            tensors[f"{layer.name}.weight"] = layer.weight
            tensors[f"{layer.name}.bias"] = layer.bias
    write_container(path, tensors)
    logger.info(f"Saved {len(tensors) // 2} conv layers to {path}")


def load_weights(path: str | Path) -> ConvNet:
    """Rebuild a block network from conv tensors; relus follow every conv, a pool ends every block."""
    tensors = read_container(path)
    convs: dict[tuple[int, int], dict[str, FloatArray]] = {}
    for name, tensor in tensors.items():
        match = _TENSOR_NAME.match(name)
        if match is None:
            raise NetworkError(detail=f"Unexpected tensor '{name}' in weight file {path}")
        key = (int(match.group(1)), int(match.group(2)))
        convs.setdefault(key, {})[match.group(3)] = tensor
    if not convs:
        raise NetworkError(detail=f"Weight file {path} holds no conv layers")

    layers: list[Layer] = []
    blocks = sorted({block for block, _ in convs})
    for block in blocks:
        indices = sorted(k for b, k in convs if b == block)
        if indices != list(range(1, len(indices) + 1)):
            raise NetworkError(detail=f"Block {block} has non-contiguous conv indices {indices}")
        for k in indices:
            parts = convs[(block, k)]
            if set(parts) != {"weight", "bias"}:
                raise NetworkError(detail=f"conv{block}_{k} needs both weight and bias")
            layers.append(Layer(f"conv{block}_{k}", "conv", parts["weight"], parts["bias"]))
            layers.append(Layer(f"relu{block}_{k}", "relu"))
        layers.append(Layer(f"pool{block}", "avgpool"))

    first = layers[0]
    return ConvNet(tuple(layers), in_channels=first.in_channels)
