# morphforge/detectors/tree.py

"""Gain-ratio decision tree with reduced-error pruning."""

import logging
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np
from scipy.special import entr

from morphforge.core.arrays import FloatArray, IntArray
from morphforge.core.exceptions import TrainingError
from morphforge.detectors.base import LabeledSample, feature_matrix

logger = logging.getLogger(__name__)

RATIO_EPS = 1e-12


@dataclass
class TreeNode:
    """Internal node when ``feature >= 0``; samples with x[feature] <= threshold go left.

    Every node keeps the majority label and its confidence so that pruning can
    turn it into a leaf.
    """

    label: str
    confidence: float
    feature: int = -1
    threshold: float = 0.0
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0

    @property
    def attack_score(self) -> float:
        return self.confidence if self.label == "attack" else 1.0 - self.confidence

    def make_leaf(self) -> None:
        self.feature = -1
        self.threshold = 0.0
        self.left = None
        self.right = None

    def walk(self) -> Iterator["TreeNode"]:
        """Pre-order traversal."""
        yield self
        if not self.is_leaf:
            yield from self.left.walk()
            yield from self.right.walk()

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())


@dataclass
class TreeModel:
    root: TreeNode
    scheme: str
    max_depth: int
    pruned: bool = False
    threshold: float = 0.5

    def leaf_for(self, x: FloatArray) -> TreeNode:
        node = self.root
        while not node.is_leaf:
            node = node.left if x[node.feature] <= node.threshold else node.right
        return node

    def decision(self, x: FloatArray) -> FloatArray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        return np.array([self.leaf_for(row).attack_score for row in x])

    @property
    def node_count(self) -> int:
        return sum(1 for _ in self.root.walk())


def entropy(first: FloatArray, second: FloatArray) -> FloatArray:
    """Entropy in bits of two-way counts, elementwise."""
    first, second = np.asarray(first, dtype=np.float64), np.asarray(second, dtype=np.float64)
    total = first + second
    with np.errstate(invalid="ignore", divide="ignore"):
        bits = (entr(first / total) + entr(second / total)) / np.log(2.0)
    return np.where(total > 0, bits, 0.0)


def _leaf(y: FloatArray) -> TreeNode:
    attacks = int(np.count_nonzero(y > 0))
    bona_fide = len(y) - attacks
    label = "attack" if attacks > bona_fide else "bona_fide"
    confidence = max(attacks, bona_fide) / len(y)
    return TreeNode(label=label, confidence=float(np.float32(confidence)))


def float32_thresholds(low: FloatArray, high: FloatArray) -> FloatArray:
    """Float32-representable t with low <= t < high near each midpoint; NaN where none exists."""
    mid = ((low + high) / 2.0).astype(np.float32)
    thresholds = np.full(len(low), np.nan)
    for candidate in (np.nextafter(mid, np.float32(-np.inf)), np.nextafter(mid, np.float32(np.inf)), mid):
        value = candidate.astype(np.float64)
        thresholds = np.where((low <= value) & (value < high), value, thresholds)
    return thresholds


def _feature_ratios(values: FloatArray, attacks_left: IntArray, min_leaf: int) -> tuple[FloatArray, FloatArray]:
    """Gain ratio and threshold of every admissible cut of one sorted feature column."""
    n = len(values)
    cuts = np.nonzero(np.diff(values) > 0)[0]
    n_left = cuts + 1
    n_right = n - n_left
    cuts = cuts[(n_left >= min_leaf) & (n_right >= min_leaf)]
    thresholds = float32_thresholds(values[cuts], values[cuts + 1])
    cuts, thresholds = cuts[~np.isnan(thresholds)], thresholds[~np.isnan(thresholds)]

    n_left = (cuts + 1).astype(np.float64)
    n_right = n - n_left
    a_left = attacks_left[cuts].astype(np.float64)
    a_right = attacks_left[-1] - a_left
    parent = entropy(np.array(n - attacks_left[-1]), np.array(attacks_left[-1]))
    children = n_left / n * entropy(n_left - a_left, a_left) + n_right / n * entropy(n_right - a_right, a_right)
    gain = parent - children
    keep = gain > RATIO_EPS
    return gain[keep] / entropy(n_left[keep], n_right[keep]), thresholds[keep]


def best_split(x: FloatArray, y: FloatArray, min_leaf: int) -> Optional[tuple[int, float, float]]:
    """(feature, threshold, gain ratio) with the highest gain ratio.

    Ratios within RATIO_EPS of the best count as ties; ties keep the lowest
    feature index, then the lowest threshold.
    """
    is_attack = (y > 0).astype(np.int64)
    per_feature = []
    for feature in range(x.shape[1]):
        order = np.argsort(x[:, feature], kind="stable")
        per_feature.append(_feature_ratios(x[order, feature], np.cumsum(is_attack[order]), min_leaf))

    top = max((float(ratios.max()) for ratios, _ in per_feature if ratios.size), default=None)
    if top is None:
        return None
    for feature, (ratios, thresholds) in enumerate(per_feature):
        tied = np.nonzero(ratios >= top - RATIO_EPS)[0]
        if tied.size:
            return feature, float(thresholds[tied[0]]), float(ratios[tied[0]])
    return None


def _grow(x: FloatArray, y: FloatArray, depth: int, max_depth: int, min_leaf: int) -> TreeNode:
    node = _leaf(y)
    if node.confidence == 1.0 or depth >= max_depth or len(y) < 2 * min_leaf:
        return node
    split = best_split(x, y, min_leaf)
    if split is None:
        return node
    feature, threshold, _ = split
    goes_left = x[:, feature] <= threshold
    node.feature = feature
    node.threshold = threshold
    node.left = _grow(x[goes_left], y[goes_left], depth + 1, max_depth, min_leaf)
    node.right = _grow(x[~goes_left], y[~goes_left], depth + 1, max_depth, min_leaf)
    return node


def _errors(node: TreeNode, x: FloatArray, y: FloatArray) -> int:
    model = TreeModel(root=node, scheme="", max_depth=0)
    predicted = np.array([1.0 if model.leaf_for(row).label == "attack" else -1.0 for row in x])
    return int(np.count_nonzero(predicted != y))


def _prune(node: TreeNode, x: FloatArray, y: FloatArray) -> int:
    """Bottom-up reduced-error pruning; returns the prune-set errors of the final subtree."""
    if node.is_leaf:
        return int(np.count_nonzero((1.0 if node.label == "attack" else -1.0) != y))
    goes_left = x[:, node.feature] <= node.threshold
    subtree_errors = _prune(node.left, x[goes_left], y[goes_left]) + _prune(
        node.right, x[~goes_left], y[~goes_left]
    )
    leaf_errors = int(np.count_nonzero((1.0 if node.label == "attack" else -1.0) != y))
    if leaf_errors <= subtree_errors:
        node.make_leaf()
        return leaf_errors
    return subtree_errors


def train_tree(
    samples: list[LabeledSample],
    max_depth: int = 8,
    min_leaf: int = 2,
    prune_set: Optional[list[LabeledSample]] = None,
) -> TreeModel:
    """Grow a gain-ratio tree on continuous features and prune it against ``prune_set``."""
    if max_depth < 0 or min_leaf < 1:
        raise TrainingError(detail=f"Invalid tree limits: max_depth={max_depth}, min_leaf={min_leaf}")
    x, y, scheme = feature_matrix(samples)
    if len(set(y.tolist())) < 2:
        raise TrainingError(detail="Training data must contain both bona fide and attack samples")

    root = _grow(x, y, 0, max_depth, min_leaf)
    model = TreeModel(root=root, scheme=scheme, max_depth=max_depth)
    grown = model.node_count

    if not prune_set:
        logger.warning("Empty prune set, tree left unpruned")
        return model
    px, py, prune_scheme = feature_matrix(prune_set)
    if prune_scheme != scheme:
        raise TrainingError(detail=f"Prune set scheme {prune_scheme} differs from {scheme}")
    before = _errors(root, px, py)
    after = _prune(root, px, py)
    model.pruned = True
    logger.info(
        f"Trained {scheme} tree: {grown} -> {model.node_count} nodes, "
        f"prune-set errors {before} -> {after}"
    )
    return model
