"""Gradient-boosted regression trees on the softmax cross-entropy."""
from __future__ import annotations

import math

import numpy as np

from .base import N_CLASSES, ModelError, TrainedModel, as_labels, check_training_data, softmax
from .tree import apply_tree, dense_features, grow_regression_tree


def _cross_entropy(F, y):
    z = F - F.max(axis=1, keepdims=True)
    log_p = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    return float(-log_p[np.arange(len(y)), y].mean())


def _tree_output(tree, A):
    return np.asarray(tree["value"], dtype=np.float64)[apply_tree(tree, A)]


def train_gbt(X, y, n_rounds=100, depth=3, shrinkage=0.1, seed=0) -> TrainedModel:
    """Fit one least-squares tree per class per round to the negative gradient.

    Scores start at zero.  Leaves take the mean residual (first-order only;
    no Hessian weighting, no row or column subsampling), so ``seed`` is kept
    for interface symmetry but does not change the result.
    """
    if n_rounds < 1:
        raise ModelError("n_rounds must be >= 1")
    if not 0.0 < shrinkage <= 1.0:
        raise ModelError("shrinkage must lie in (0, 1]")
    if depth < 1:
        raise ModelError("depth must be >= 1")
    y = as_labels(y)
    check_training_data(X, y)
    A = dense_features(X)
    n = A.shape[0]
    Y = np.zeros((n, N_CLASSES))
    Y[np.arange(n), y] = 1.0
    F = np.zeros((n, N_CLASSES))
    rounds = []
    history = []
    for r in range(n_rounds):
        residual = Y - softmax(F)
        trees = [grow_regression_tree(A, residual[:, k], max_depth=depth) for k in range(N_CLASSES)]
        for k, tree in enumerate(trees):
            F[:, k] += shrinkage * _tree_output(tree, A)
        loss = _cross_entropy(F, y)
        if not (math.isfinite(loss) and np.isfinite(F).all()):
            raise ModelError(f"boosting scores became non-finite at round {r + 1}")
        rounds.append(trees)
        history.append(loss)
    return TrainedModel(
        kind="gbt",
        hyperparameters={"n_rounds": int(n_rounds), "depth": int(depth), "shrinkage": float(shrinkage),
                         "seed": int(seed)},
        parameters={"rounds": rounds},
        vocabulary_fingerprint=X.vocabulary_fingerprint,
        n_features=X.n_cols,
        history=tuple(history),
    )


def gbt_scores(model, A):
    shrinkage = model.hyperparameters["shrinkage"]
    F = np.zeros((A.shape[0], N_CLASSES))
    for trees in model.parameters["rounds"]:
        for k, tree in enumerate(trees):
            F[:, k] += shrinkage * _tree_output(tree, A)
    return F


def gbt_predict_dist(model, A):
    return softmax(gbt_scores(model, A))
