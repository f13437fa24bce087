"""Gaussian naive Bayes and a classifier chain built on it."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

__all__ = [
    "GnbModel",
    "train_gnb",
    "gnb_posterior",
    "gnb_predict",
    "ChainModel",
    "train_chain",
    "chain_predict",
    "chain_predict_batch",
]

VAR_FLOOR_FACTOR = 1e-9


@dataclass(frozen=True)
class GnbModel:
    classes: np.ndarray
    priors: np.ndarray
    means: np.ndarray  # (n_classes, n_features)
    variances: np.ndarray

    def __post_init__(self):
        for name in ("classes", "priors", "means", "variances"):
            a = np.array(getattr(self, name), dtype=int if name == "classes" else float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if abs(self.priors.sum() - 1.0) > 1e-9 or np.any(self.priors <= 0):
            raise ValueError("priors must be positive and sum to 1")
        if np.any(self.variances <= 0):
            raise ValueError("variances must be > 0")
        if self.means.shape != self.variances.shape or len(self.means) != len(self.classes):
            raise ValueError("inconsistent GNB parameter shapes")

    @property
    def n_features(self) -> int:
        return self.means.shape[1]


def train_gnb(X, y) -> GnbModel:
    """Maximum-likelihood class priors, means and variances.

    Variances are floored at ``1e-9`` times the largest per-feature variance
    of ``X`` so constant features stay usable.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if X.ndim != 2 or len(X) == 0 or len(X) != len(y):
        raise ValueError(f"need non-empty 2-D X matching y, got X{X.shape}, y{y.shape}")
    classes, counts = np.unique(y, return_counts=True)
    floor = VAR_FLOOR_FACTOR * float(np.var(X, axis=0).max())
    if floor <= 0:
        floor = VAR_FLOOR_FACTOR
    means = np.array([X[y == c].mean(axis=0) for c in classes])
    variances = np.array([X[y == c].var(axis=0) for c in classes]) + floor
    return GnbModel(classes, counts / counts.sum(), means, variances)


def _joint_log(model, X):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.n_features:
        raise ValueError(f"expected {model.n_features} features, got {X.shape[1]}")
    diff = X[:, None, :] - model.means[None]
    ll = -0.5 * np.sum(np.log(2 * np.pi * model.variances)[None] + diff**2 / model.variances[None], axis=2)
    return ll + np.log(model.priors)[None]


def gnb_posterior(model: GnbModel, x) -> np.ndarray:
    """Normalized class posterior, ordered as ``model.classes``."""
    jl = _joint_log(model, x)
    post = np.exp(jl - logsumexp(jl, axis=1, keepdims=True))
    return post[0] if np.ndim(x) == 1 else post


def gnb_predict(model: GnbModel, X) -> np.ndarray:
    jl = _joint_log(model, X)
    return model.classes[np.argmax(jl, axis=1)]


def _positive_prob(model, X):
    post = np.atleast_2d(gnb_posterior(model, X))
    hit = np.nonzero(model.classes == 1)[0]
    if len(hit) == 0:
        return np.zeros(len(post))
    return post[:, hit[0]]


@dataclass(frozen=True)
class ChainModel:
    order: tuple
    models: tuple
    n_features: int

    def __post_init__(self):
        if sorted(self.order) != list(range(len(self.order))):
            raise ValueError(f"order {self.order} is not a permutation")
        for j, m in enumerate(self.models):
            if m.n_features != self.n_features + j:
                raise ValueError(
                    f"chain position {j} takes {m.n_features} inputs, expected {self.n_features + j}"
                )

    @property
    def input_widths(self) -> list[int]:
        return [m.n_features for m in self.models]


def train_chain(X, Y, order=None) -> ChainModel:
    """Train one GNB per label, each seeing the true values of earlier labels."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=int)
    if Y.ndim == 1:
        Y = Y[:, None]
    if not np.isin(Y, (0, 1)).all():
        raise ValueError("labels must be binary")
    order = tuple(range(Y.shape[1])) if order is None else tuple(int(o) for o in order)
    if sorted(order) != list(range(Y.shape[1])):
        raise ValueError(f"order {order} is not a permutation of {Y.shape[1]} labels")
    models = []
    for j, label in enumerate(order):
        inputs = np.hstack([X, Y[:, list(order[:j])]]) if j else X
        models.append(train_gnb(inputs, Y[:, label]))
    return ChainModel(order, tuple(models), X.shape[1])


def chain_predict_batch(model: ChainModel, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    out = np.zeros((len(X), len(model.order)), dtype=int)
    feed = X
    for label, sub in zip(model.order, model.models):
        pred = (_positive_prob(sub, feed) >= 0.5).astype(int)
        out[:, label] = pred
        feed = np.hstack([feed, pred[:, None]])
    return out


def chain_predict(model: ChainModel, x) -> np.ndarray:
    """Binary label vector (in original label order) for one observation."""
    return chain_predict_batch(model, np.asarray(x, dtype=float)[None, :])[0]
