"""Versioned JSON serialization of trained models."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .bayes import ChainModel, GnbModel
from .mlknn import MlknnModel
from .severity import SeverityModel
from .tree import BinaryRelevanceModel, DecisionTreeModel, Node

__all__ = ["FORMAT_VERSION", "model_to_dict", "model_from_dict", "save_model", "load_model"]

FORMAT_VERSION = 1


def _node_to_dict(node: Node) -> dict:
    if node.is_leaf:
        return {"counts": list(node.counts)}
    return {
        "counts": list(node.counts),
        "feature": node.feature,
        "threshold": node.threshold,
        "gain": node.gain,
        "left": _node_to_dict(node.left),
        "right": _node_to_dict(node.right),
    }


def _node_from_dict(d: dict) -> Node:
    if "feature" not in d:
        return Node(tuple(d["counts"]))
    return Node(
        tuple(d["counts"]),
        int(d["feature"]),
        float(d["threshold"]),
        _node_from_dict(d["left"]),
        _node_from_dict(d["right"]),
        float(d.get("gain", 0.0)),
    )


def _tree(m: DecisionTreeModel) -> dict:
    return {
        "root": _node_to_dict(m.root),
        "n_features": m.n_features,
        "n_classes": m.n_classes,
        "criterion": m.criterion,
        "max_depth": m.max_depth,
    }


def _tree_back(d) -> DecisionTreeModel:
    return DecisionTreeModel(_node_from_dict(d["root"]), d["n_features"], d["n_classes"], d["criterion"], d["max_depth"])


def _gnb(m: GnbModel) -> dict:
    return {k: getattr(m, k).tolist() for k in ("classes", "priors", "means", "variances")}


def model_to_dict(model) -> dict:
    if isinstance(model, DecisionTreeModel):
        body = {"kind": "tree", **_tree(model)}
    elif isinstance(model, BinaryRelevanceModel):
        body = {"kind": "brtree", "trees": [_tree(t) for t in model.trees]}
    elif isinstance(model, GnbModel):
        body = {"kind": "gnb", **_gnb(model)}
    elif isinstance(model, ChainModel):
        body = {
            "kind": "chain",
            "order": list(model.order),
            "n_features": model.n_features,
            "models": [_gnb(m) for m in model.models],
        }
    elif isinstance(model, MlknnModel):
        body = {
            "kind": "mlknn",
            "k": model.k,
            "s": model.s,
            "X": model.X.tolist(),
            "Y": model.Y.tolist(),
            "prior": model.prior.tolist(),
            "count_pos": model.count_pos.tolist(),
            "count_neg": model.count_neg.tolist(),
        }
    elif isinstance(model, SeverityModel):
        body = {"kind": "severity", "feature_names": list(model.feature_names), "tree": _tree(model.tree)}
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    return {"format": "faultdiag-model", "version": FORMAT_VERSION, **body}


def model_from_dict(d: dict):
    if d.get("format") != "faultdiag-model":
        raise ValueError("not a faultdiag model document")
    if d.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {d.get('version')!r}")
    kind = d["kind"]
    if kind == "tree":
        return _tree_back(d)
    if kind == "brtree":
        return BinaryRelevanceModel(tuple(_tree_back(t) for t in d["trees"]))
    if kind == "gnb":
        return GnbModel(**{k: d[k] for k in ("classes", "priors", "means", "variances")})
    if kind == "chain":
        models = tuple(GnbModel(**m) for m in d["models"])
        return ChainModel(tuple(d["order"]), models, d["n_features"])
    if kind == "mlknn":
        return MlknnModel(
            np.array(d["X"], dtype=float),
            np.array(d["Y"], dtype=int),
            int(d["k"]),
            float(d["s"]),
            np.array(d["prior"], dtype=float),
            np.array(d["count_pos"], dtype=int),
            np.array(d["count_neg"], dtype=int),
        )
    if kind == "severity":
        return SeverityModel(_tree_back(d["tree"]), tuple(d["feature_names"]))
    raise ValueError(f"unknown model kind {kind!r}")


def save_model(model, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(model_to_dict(model), indent=1))
    return path


def load_model(path):
    return model_from_dict(json.loads(Path(path).read_text()))
