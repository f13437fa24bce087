"""ML-kNN: multi-label k nearest neighbours with Bayesian smoothing."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["MlknnModel", "train_mlknn", "mlknn_predict", "mlknn_predict_batch", "nearest"]


def _sqdist(A, B):
    return ((A[:, None, :] - B[None, :, :]) ** 2).sum(axis=2)


def nearest(dist_row, k, exclude=None):
    """Indices of the ``k`` smallest distances; ties go to the lower index."""
    d = np.asarray(dist_row, dtype=float)
    if exclude is not None:
        d = d.copy()
        d[exclude] = np.inf
    return np.argsort(d, kind="stable")[:k]


@dataclass(frozen=True)
class MlknnModel:
    X: np.ndarray
    Y: np.ndarray
    k: int
    s: float
    prior: np.ndarray  # P(H_j = 1), shape (L,)
    count_pos: np.ndarray  # (L, k+1): training points with label j whose neighbours carry j delta times
    count_neg: np.ndarray

    def cond_pos(self) -> np.ndarray:
        c = self.count_pos
        return (self.s + c) / (self.s * (self.k + 1) + c.sum(axis=1, keepdims=True))

    def cond_neg(self) -> np.ndarray:
        c = self.count_neg
        return (self.s + c) / (self.s * (self.k + 1) + c.sum(axis=1, keepdims=True))


def train_mlknn(X, Y, k: int = 3, s: float = 1.0) -> MlknnModel:
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=int)
    m = len(X)
    if Y.ndim != 2 or len(Y) != m or X.ndim != 2:
        raise ValueError("X and Y must be 2-D with the same number of rows")
    if not 1 <= k < m:
        raise ValueError(f"k must satisfy 1 <= k < {m}, got {k}")
    if not s > 0:
        raise ValueError("smoothing s must be > 0")
    L = Y.shape[1]
    prior = (s + Y.sum(axis=0)) / (2 * s + m)
    D = _sqdist(X, X)
    count_pos = np.zeros((L, k + 1), dtype=int)
    count_neg = np.zeros((L, k + 1), dtype=int)
    for i in range(m):
        c = Y[nearest(D[i], k, exclude=i)].sum(axis=0)
        for j in range(L):
            if Y[i, j]:
                count_pos[j, c[j]] += 1
            else:
                count_neg[j, c[j]] += 1
    return MlknnModel(X.copy(), Y.copy(), int(k), float(s), prior, count_pos, count_neg)


def mlknn_predict_batch(model: MlknnModel, Xq) -> np.ndarray:
    Xq = np.atleast_2d(np.asarray(Xq, dtype=float))
    if Xq.shape[1] != model.X.shape[1]:
        raise ValueError(f"expected {model.X.shape[1]} features, got {Xq.shape[1]}")
    pos, neg = model.cond_pos(), model.cond_neg()
    labels = np.arange(model.Y.shape[1])
    out = np.zeros((len(Xq), model.Y.shape[1]), dtype=int)
    D = _sqdist(Xq, model.X)
    for q in range(len(Xq)):
        c = model.Y[nearest(D[q], model.k)].sum(axis=0)
        yes = model.prior * pos[labels, c]
        no = (1 - model.prior) * neg[labels, c]
        out[q] = yes >= no
    return out


def mlknn_predict(model: MlknnModel, x) -> np.ndarray:
    return mlknn_predict_batch(model, np.asarray(x, dtype=float)[None, :])[0]
