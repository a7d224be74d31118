# morphforge/detectors/scoring.py

import logging
from pathlib import Path

import numpy as np
import numpy.typing as npt

from morphforge.core.arrays import FloatArray
from morphforge.core.container import read_container, write_container
from morphforge.core.exceptions import FeatureError, TrainingError
from morphforge.detectors.base import SCHEME_LENGTHS, FeatureVector
from morphforge.detectors.linear import LinearModel
from morphforge.detectors.tree import TreeModel, TreeNode

logger = logging.getLogger(__name__)

Model = LinearModel | TreeModel

SCHEME_PREFIX = "scheme."


def score(model: Model, f: FeatureVector) -> float:
    """Attack score of one feature vector; higher means more attack-like."""
    if f.scheme != model.scheme:
        raise FeatureError(detail=f"Model expects {model.scheme} features, got {f.scheme}")
    return float(np.ravel(model.decision(f.values))[0])


def _encode_tree(model: TreeModel) -> dict[str, FloatArray]:
    nodes = list(model.root.walk())
    index = {id(node): k for k, node in enumerate(nodes)}
    columns: dict[str, list[float]] = {name: [] for name in ("feature", "threshold", "left", "right", "attack", "confidence")}
    for node in nodes:
        columns["feature"].append(node.feature)
        columns["threshold"].append(node.threshold)
        columns["left"].append(-1 if node.is_leaf else index[id(node.left)])
        columns["right"].append(-1 if node.is_leaf else index[id(node.right)])
        columns["attack"].append(1.0 if node.label == "attack" else 0.0)
        columns["confidence"].append(node.confidence)
    tensors = {f"tree.{name}": np.array(values, dtype=np.float32) for name, values in columns.items()}
    tensors["tree.meta"] = np.array(
        [float(model.pruned), float(model.max_depth), model.threshold], dtype=np.float32
    )
    return tensors


def _decode_tree(tensors: dict[str, FloatArray], scheme: str) -> TreeModel:
    try:
        feature, threshold = tensors["tree.feature"], tensors["tree.threshold"]
        left, right = tensors["tree.left"], tensors["tree.right"]
        attack, confidence = tensors["tree.attack"], tensors["tree.confidence"]
        pruned, max_depth, decision_threshold = tensors["tree.meta"]
    except (KeyError, ValueError) as e:
        raise TrainingError(detail=f"Incomplete tree model: {e}")

    nodes = [
        TreeNode(
            label="attack" if attack[k] > 0.5 else "bona_fide",
            confidence=float(confidence[k]),
            feature=int(feature[k]),
            threshold=float(threshold[k]),
        )
        for k in range(len(feature))
    ]
    for k, node in enumerate(nodes):
        if node.is_leaf:
            continue
        children = int(left[k]), int(right[k])
        if not all(0 < child < len(nodes) for child in children):
            raise TrainingError(detail=f"Tree node {k} has invalid children {children}")
        node.left, node.right = nodes[children[0]], nodes[children[1]]
    return TreeModel(
        root=nodes[0],
        scheme=scheme,
        max_depth=int(max_depth),
        pruned=bool(pruned),
        threshold=float(decision_threshold),
    )


def save_model(model: Model, path: str | Path) -> None:
    """Write a detector model in the tensor container format, tagged with its scheme."""
    tensors: dict[str, npt.ArrayLike] = {f"{SCHEME_PREFIX}{model.scheme}": np.zeros(0, dtype=np.float32)}
    if isinstance(model, LinearModel):
        tensors["linear.weights"] = model.weights
        tensors["linear.bias"] = np.array([model.bias])
        tensors["linear.mean"] = model.mean
        tensors["linear.scale"] = model.scale
        tensors["linear.threshold"] = np.array([model.threshold])
    else:
        tensors.update(_encode_tree(model))
    write_container(path, tensors)
    logger.info(f"Saved {type(model).__name__} ({model.scheme}) to {path}")


def load_model(path: str | Path) -> Model:
    tensors = read_container(path)
    schemes = [name[len(SCHEME_PREFIX):] for name in tensors if name.startswith(SCHEME_PREFIX)]
    if len(schemes) != 1 or schemes[0] not in SCHEME_LENGTHS:
        raise TrainingError(detail=f"Model {path} lacks a valid scheme tag")
    scheme = schemes[0]

    if "linear.weights" in tensors:
        try:
            model = LinearModel(
                weights=tensors["linear.weights"],
                bias=float(tensors["linear.bias"][0]),
                mean=tensors["linear.mean"],
                scale=tensors["linear.scale"],
                scheme=scheme,
                threshold=float(tensors["linear.threshold"][0]),
            )
        except (KeyError, IndexError) as e:
            raise TrainingError(detail=f"Incomplete linear model {path}: {e}")
        if model.dimension != SCHEME_LENGTHS[scheme]:
            raise TrainingError(detail=f"Linear model {path} has {model.dimension} weights for {scheme}")
        return model
    if "tree.feature" in tensors:
        return _decode_tree(tensors, scheme)
    raise TrainingError(detail=f"Model {path} is neither a linear nor a tree model")
