"""CART regression trees and bootstrap-aggregated forests, from scratch.

Trees split greedily on axis-aligned thresholds (midpoints between
consecutive distinct feature values) minimizing the summed squared error of
the two children; leaves predict their row mean.  Forests train each tree on
a bootstrap resample with an independent seeded RNG stream and predict the
mean of their trees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class EmptyTrainingError(ValueError):
    """Raised when a tree or forest is trained on zero rows."""


@dataclass(frozen=True)
class ForestHyperparams:
    """Forest settings; feature_subsample_fraction is per split."""

    n_trees: int = 100
    max_depth: int = 8
    min_samples_split: int = 2
    feature_subsample_fraction: float = 1.0 / 3.0
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if not 0.0 < self.feature_subsample_fraction <= 1.0:
            raise ValueError("feature_subsample_fraction must lie in (0, 1]")


@dataclass
class TreeNode:
    """Internal node (feature >= 0) or leaf (feature == -1, value set)."""

    feature: int = -1
    threshold: float = 0.0
    value: float = 0.0
    left: TreeNode | None = None
    right: TreeNode | None = None

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0


def _sse_split_scan(column, y):
    """Best (sse, threshold) for one feature, scanning sorted midpoints.

    Returns None when the column is constant.  The first threshold achieving
    the minimal SSE wins, matching an ascending exhaustive scan.
    """
    order = np.argsort(column, kind="stable")
    sc, sy = column[order], y[order]
    boundaries = np.nonzero(sc[1:] != sc[:-1])[0]
    if boundaries.size == 0:
        return None
    csum = np.cumsum(sy)
    csq = np.cumsum(sy * sy)
    total_sum, total_sq = csum[-1], csq[-1]
    n_left = boundaries + 1.0
    n_right = len(sy) - n_left
    sse_left = csq[boundaries] - csum[boundaries] ** 2 / n_left
    sse_right = (total_sq - csq[boundaries]) - (total_sum - csum[boundaries]) ** 2 / n_right
    sse = sse_left + sse_right
    j = int(np.argmin(sse))
    threshold = (sc[boundaries[j]] + sc[boundaries[j] + 1]) / 2.0
    return float(sse[j]), float(threshold)


class RegressionTree:
    """A fitted CART tree: a root node plus raw per-feature importance."""

    def __init__(self, root: TreeNode, importance: np.ndarray):
        self.root = root
        self.importance = importance

    def predict(self, row) -> float:
        node = self.root
        while not node.is_leaf:
            node = node.left if row[node.feature] <= node.threshold else node.right
        return node.value


def train_tree(x, y, hp: ForestHyperparams, rng) -> RegressionTree:
    """Greedy CART fit; rng drives the per-split feature subsample."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2 or len(x) != len(y):
        raise ValueError("x must be (n, f) with matching y")
    if len(y) == 0:
        raise EmptyTrainingError("no training rows")
    n_features = x.shape[1]
    n_candidates = math.ceil(hp.feature_subsample_fraction * n_features)
    importance = np.zeros(n_features)

    def build(indices, depth) -> TreeNode:
        sub_y = y[indices]
        mean = float(sub_y.mean())
        if (
            depth >= hp.max_depth
            or len(indices) < hp.min_samples_split
            or np.all(sub_y == sub_y[0])
        ):
            return TreeNode(value=mean)
        candidates = np.sort(rng.choice(n_features, size=n_candidates, replace=False))
        best = None
        for f in candidates:
            found = _sse_split_scan(x[indices, f], sub_y)
            if found is None:
                continue
            sse, threshold = found
            if best is None or sse < best[0] - 1e-12:
                best = (sse, int(f), threshold)
        if best is None:
            return TreeNode(value=mean)
        sse, feature, threshold = best
        parent_sse = float(((sub_y - mean) ** 2).sum())
        importance[feature] += max(parent_sse - sse, 0.0)
        mask = x[indices, feature] <= threshold
        return TreeNode(
            feature=feature,
            threshold=threshold,
            value=mean,
            left=build(indices[mask], depth + 1),
            right=build(indices[~mask], depth + 1),
        )

    root = build(np.arange(len(y)), 0)
    return RegressionTree(root, importance)


class RandomForest:
    """Bag of regression trees; prediction is their exact mean."""

    def __init__(self, trees: list[RegressionTree], n_features: int):
        if not trees:
            raise EmptyTrainingError("forest needs at least one tree")
        self.trees = trees
        self.n_features = n_features

    def predict(self, row) -> float:
        return math.fsum(tree.predict(row) for tree in self.trees) / len(self.trees)

    def raw_importance(self) -> np.ndarray:
        total = np.zeros(self.n_features)
        for tree in self.trees:
            total += tree.importance
        return total


def train_forest(x, y, hp: ForestHyperparams) -> RandomForest:
    """n_trees bootstrap-resampled trees on independent RNG streams."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(y) == 0:
        raise EmptyTrainingError("no training rows")
    n = len(y)
    trees = []
    for stream in np.random.SeedSequence(hp.seed).spawn(hp.n_trees):
        rng = np.random.default_rng(stream)
        idx = rng.integers(0, n, size=n)
        trees.append(train_tree(x[idx], y[idx], hp, rng))
    return RandomForest(trees, x.shape[1])
