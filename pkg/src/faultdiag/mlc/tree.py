"""CART decision tree with Gini or entropy splitting, written from scratch."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Node",
    "DecisionTreeModel",
    "gini",
    "entropy",
    "split_gain",
    "train_tree",
    "tree_predict",
    "tree_predict_batch",
    "BinaryRelevanceModel",
    "train_binary_relevance",
]


def gini(counts) -> float:
    counts = np.asarray(counts, dtype=float)
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts / total
    return float(1.0 - np.sum(p * p))


def entropy(counts) -> float:
    counts = np.asarray(counts, dtype=float)
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-np.sum(p * np.log2(p)))


_IMPURITY = {"gini": gini, "entropy": entropy}
_TIE_EPS = 1e-12


def split_gain(left_counts, right_counts, criterion="gini") -> float:
    """Parent impurity minus the size-weighted child impurity."""
    imp = _IMPURITY[criterion]
    left = np.asarray(left_counts, dtype=float)
    right = np.asarray(right_counts, dtype=float)
    nl, nr = left.sum(), right.sum()
    n = nl + nr
    return imp(left + right) - (nl / n) * imp(left) - (nr / n) * imp(right)


def _vec_impurity(counts, criterion):
    # counts: (m, C) rows of class counts; returns impurity per row
    tot = counts.sum(axis=1, keepdims=True)
    p = np.divide(counts, tot, out=np.zeros_like(counts), where=tot > 0)
    if criterion == "gini":
        return 1.0 - np.sum(p * p, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.where(p > 0, np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return -np.sum(p * logs, axis=1)


@dataclass(frozen=True)
class Node:
    """Internal node when ``feature`` is not None, leaf otherwise.

    Rows with ``x[feature] <= threshold`` go left.
    """

    counts: tuple
    feature: int | None = None
    threshold: float | None = None
    left: "Node | None" = None
    right: "Node | None" = None
    gain: float = 0.0

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())

    def leaves(self):
        if self.is_leaf:
            yield self
        else:
            yield from self.left.leaves()
            yield from self.right.leaves()


@dataclass(frozen=True)
class DecisionTreeModel:
    root: Node
    n_features: int
    n_classes: int
    criterion: str = "gini"
    max_depth: int | None = None

    @property
    def depth(self) -> int:
        return self.root.depth()


def _best_split(X, y, n_classes, criterion):
    n, d = X.shape
    parent = np.bincount(y, minlength=n_classes).astype(float)
    parent_imp = _vec_impurity(parent[None, :], criterion)[0]
    best = None  # (gain, feature, threshold)
    onehot = np.eye(n_classes)[y]
    for j in range(d):
        order = np.argsort(X[:, j], kind="stable")
        xs = X[order, j]
        valid = np.nonzero(xs[1:] > xs[:-1])[0]
        if len(valid) == 0:
            continue
        left = np.cumsum(onehot[order], axis=0)[valid]
        right = parent - left
        nl = valid + 1.0
        gains = parent_imp - (nl * _vec_impurity(left, criterion) + (n - nl) * _vec_impurity(right, criterion)) / n
        # first near-max -> lowest threshold
        i = int(np.argmax(gains >= gains.max() - _TIE_EPS))
        g = float(gains[i])
        if best is None or g > best[0] + _TIE_EPS:
            thr = float((xs[valid[i]] + xs[valid[i] + 1]) / 2.0)
            best = (g, j, thr)
    return best


def _grow(X, y, n_classes, criterion, max_depth, min_samples_split, depth):
    counts = tuple(int(c) for c in np.bincount(y, minlength=n_classes))
    n = len(y)
    pure = sum(c > 0 for c in counts) <= 1
    if pure or n < min_samples_split or (max_depth is not None and depth >= max_depth):
        return Node(counts)
    found = _best_split(X, y, n_classes, criterion)
    if found is None:
        return Node(counts)
    gain, j, thr = found
    mask = X[:, j] <= thr
    return Node(
        counts,
        feature=j,
        threshold=thr,
        left=_grow(X[mask], y[mask], n_classes, criterion, max_depth, min_samples_split, depth + 1),
        right=_grow(X[~mask], y[~mask], n_classes, criterion, max_depth, min_samples_split, depth + 1),
        gain=max(gain, 0.0),
    )


def train_tree(
    X,
    y,
    criterion: str = "gini",
    max_depth: int | None = None,
    min_samples_split: int = 2,
    n_classes: int | None = None,
) -> DecisionTreeModel:
    """Fit a CART classification tree.

    ``y`` holds integer class indices. Candidate thresholds are midpoints
    between consecutive distinct values; the split with the largest impurity
    decrease wins, ties going to the lowest feature index and then the
    lowest threshold. Zero-gain splits are still taken (XOR needs them).
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if X.ndim != 2 or len(X) == 0 or len(X) != len(y):
        raise ValueError(f"need a non-empty 2-D X matching y, got X{X.shape}, y{y.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("features must be finite")
    if criterion not in _IMPURITY:
        raise ValueError(f"criterion must be 'gini' or 'entropy', got {criterion!r}")
    if max_depth is not None and max_depth < 1:
        raise ValueError("max_depth must be >= 1 or None")
    if np.any(y < 0):
        raise ValueError("class labels must be non-negative integers")
    n_classes = int(max(n_classes or 0, y.max() + 1))
    root = _grow(X, y, n_classes, criterion, max_depth, max(2, min_samples_split), 0)
    return DecisionTreeModel(root, X.shape[1], n_classes, criterion, max_depth)


def _leaf(model, x):
    node = model.root
    while not node.is_leaf:
        node = node.left if x[node.feature] <= node.threshold else node.right
    return node


def tree_predict(model: DecisionTreeModel, x) -> tuple[int, np.ndarray]:
    """Class index and leaf class probabilities for one observation."""
    x = np.asarray(x, dtype=float)
    if x.shape != (model.n_features,):
        raise ValueError(f"expected {model.n_features} features, got shape {x.shape}")
    counts = np.asarray(_leaf(model, x).counts, dtype=float)
    return int(np.argmax(counts)), counts / counts.sum()


def tree_predict_batch(model: DecisionTreeModel, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return np.array([tree_predict(model, x)[0] for x in X], dtype=int)


@dataclass(frozen=True)
class BinaryRelevanceModel:
    trees: tuple

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.column_stack([tree_predict_batch(t, X) for t in self.trees])


def train_binary_relevance(X, Y, criterion="gini", max_depth=None, min_samples_split=2):
    """One independent binary tree per label column of ``Y``."""
    Y = np.asarray(Y)
    if Y.ndim != 2:
        raise ValueError("Y must be a 2-D label matrix")
    if not np.isin(Y, (0, 1)).all():
        raise ValueError("labels must be binary")
    trees = tuple(
        train_tree(X, Y[:, j], criterion, max_depth, min_samples_split, n_classes=2)
        for j in range(Y.shape[1])
    )
    return BinaryRelevanceModel(trees)
