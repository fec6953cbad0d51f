"""Versioned flat-file persistence for surrogate models.

One JSON document per model: format version, feature schema, hyperparams,
caller metadata (e.g. corpus hash and split seed), and per-target trees
serialized as preorder node lists.  Round-trips are exact.
"""

from __future__ import annotations

import json
from dataclasses import asdict

import numpy as np

from .forest import ForestHyperparams, RandomForest, RegressionTree, TreeNode
from .models import FeatureSchema, SurrogateForest

MODEL_FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    """Raised for unreadable or version-incompatible model files."""


def _node_list(node: TreeNode, out: list) -> list:
    if node.is_leaf:
        out.append(["L", node.value])
    else:
        out.append(["S", node.feature, node.threshold])
        _node_list(node.left, out)
        _node_list(node.right, out)
    return out


def _read_node(nodes, cursor):
    kind = nodes[cursor][0]
    if kind == "L":
        return TreeNode(value=float(nodes[cursor][1])), cursor + 1
    if kind == "S":
        _, feature, threshold = nodes[cursor]
        left, cursor = _read_node(nodes, cursor + 1)
        right, cursor = _read_node(nodes, cursor)
        return (
            TreeNode(
                feature=int(feature),
                threshold=float(threshold),
                left=left,
                right=right,
            ),
            cursor,
        )
    raise ModelFormatError(f"unknown node kind {kind!r}")


def save_model(model: SurrogateForest, path, metadata: dict | None = None) -> None:
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "schema": {
            "kind": model.schema.kind,
            "ngram_vocab": list(model.schema.ngram_vocab),
        },
        "hyperparams": asdict(model.hyperparams),
        "metadata": metadata or {},
        "n_features": len(model.schema.columns),
        "targets": {
            target: [
                {
                    "nodes": _node_list(tree.root, []),
                    "importance": tree.importance.tolist(),
                }
                for tree in forest.trees
            ]
            for target, forest in model.forests.items()
        },
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_model(path):
    """Returns (model, metadata); raises ModelFormatError on bad files."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"not a model file: {exc}") from exc
    version = doc.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ModelFormatError(
            f"format version {version!r} unsupported (expected {MODEL_FORMAT_VERSION})"
        )
    schema = FeatureSchema(
        kind=doc["schema"]["kind"],
        ngram_vocab=tuple(doc["schema"]["ngram_vocab"]),
    )
    hp = ForestHyperparams(**doc["hyperparams"])
    n_features = int(doc["n_features"])
    forests = {}
    for target, trees_doc in doc["targets"].items():
        trees = []
        for tree_doc in trees_doc:
            root, consumed = _read_node(tree_doc["nodes"], 0)
            if consumed != len(tree_doc["nodes"]):
                raise ModelFormatError("trailing nodes in tree serialization")
            trees.append(RegressionTree(root, np.array(tree_doc["importance"])))
        forests[target] = RandomForest(trees, n_features)
    return SurrogateForest(schema=schema, hyperparams=hp, forests=forests), doc["metadata"]
