"""Linear models: multinomial logistic regression and one-vs-rest linear SVM."""
from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp

from .base import N_CLASSES, ModelError, TrainedModel, as_labels, check_training_data, softmax, tolist

MAX_HALVINGS = 40


def _onehot(y):
    Y = np.zeros((len(y), N_CLASSES))
    Y[np.arange(len(y)), y] = 1.0
    return Y


def logistic_loss_and_grad(W, b, X, Y, l2):
    """Mean softmax cross-entropy plus ``l2/2 * ||W||^2`` (bias unpenalised).

    ``X`` is (n, V) dense or sparse, ``Y`` one-hot (n, K), ``W`` (V, K).
    Returns ``(loss, grad_W, grad_b)``.
    """
    n = X.shape[0]
    scores = np.asarray(X @ W) + b
    z = scores - scores.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(z).sum(axis=1, keepdims=True))
    log_p = z - log_norm
    loss = -(Y * log_p).sum() / n + 0.5 * l2 * float((W * W).sum())
    diff = (np.exp(log_p) - Y) / n
    grad_W = np.asarray(X.T @ diff) + l2 * W
    grad_b = diff.sum(axis=0)
    return loss, grad_W, grad_b


def train_logistic(X, y, l2=1e-4, lr=0.1, epochs=50, seed=0, batch_size=32) -> TrainedModel:
    """Softmax regression by mini-batch gradient descent on cross-entropy + L2.

    Batches are reshuffled every epoch from ``seed``.  An epoch that ends with
    a higher full-data loss than it started with is undone and replayed at
    half the learning rate, so the recorded loss curve never increases.
    ``batch_size=None`` gives plain full-batch descent.
    """
    if epochs < 1:
        raise ModelError("epochs must be >= 1")
    if lr <= 0:
        raise ModelError("lr must be positive")
    if l2 < 0:
        raise ModelError("l2 must be non-negative")
    y = as_labels(y)
    check_training_data(X, y)
    Xs = X.to_scipy()
    Y = _onehot(y)
    n, V = Xs.shape
    bs = n if batch_size is None else max(1, min(int(batch_size), n))
    W = np.zeros((V, N_CLASSES))
    b = np.zeros(N_CLASSES)
    rng = np.random.default_rng(seed)
    step = float(lr)
    loss = logistic_loss_and_grad(W, b, Xs, Y, l2)[0]
    history = []
    for epoch in range(epochs):
        order = rng.permutation(n)
        for _ in range(MAX_HALVINGS):
            W_new, b_new = W.copy(), b.copy()
            for start in range(0, n, bs):
                idx = order[start:start + bs]
                _, gW, gb = logistic_loss_and_grad(W_new, b_new, Xs[idx], Y[idx], l2)
                W_new -= step * gW
                b_new -= step * gb
            new_loss = logistic_loss_and_grad(W_new, b_new, Xs, Y, l2)[0]
            if not math.isfinite(new_loss):
                raise ModelError(f"logistic regression loss became non-finite at epoch {epoch + 1} (lr={step})")
            if new_loss <= loss:
                W, b, loss = W_new, b_new, new_loss
                break
            step *= 0.5
        history.append(float(loss))
    return TrainedModel(
        kind="logistic",
        hyperparameters={"l2": float(l2), "lr": float(lr), "epochs": int(epochs), "seed": int(seed),
                         "batch_size": bs},
        parameters={"W": tolist(W), "b": tolist(b)},
        vocabulary_fingerprint=X.vocabulary_fingerprint,
        n_features=X.n_cols,
        history=tuple(history),
    )


def linear_scores(model, Xs):
    W = np.asarray(model.parameters["W"]).reshape(-1, N_CLASSES)
    b = np.asarray(model.parameters["b"])
    return np.asarray(Xs @ W[: Xs.shape[1]]) + b


def logistic_predict_dist(model, Xs):
    return softmax(linear_scores(model, Xs))


def train_svm(X, y, c=1.0, epochs=50, seed=0, batch_size=32) -> TrainedModel:
    """One-vs-rest linear SVMs by mini-batch subgradient descent (Pegasos).

    Each class minimises ``lam/2 ||w||^2 + mean hinge`` with
    ``lam = 1 / (c * n)``; the bias is an always-on feature, so it is
    regularised along with the weights.
    """
    if c <= 0:
        raise ModelError("c must be positive")
    if epochs < 1:
        raise ModelError("epochs must be >= 1")
    y = as_labels(y)
    check_training_data(X, y)
    Xs = sp.hstack([X.to_scipy(), sp.csr_matrix(np.ones((X.n_rows, 1)))], format="csr")
    n, D = Xs.shape
    S = np.where(_onehot(y) > 0, 1.0, -1.0)
    lam = 1.0 / (c * n)
    radius = 1.0 / math.sqrt(lam)
    W = np.zeros((D, N_CLASSES))
    rng = np.random.default_rng(seed)
    bs = max(1, min(int(batch_size), n))
    t = 0
    history = []
    for epoch in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, bs):
            idx = order[start:start + bs]
            t += 1
            eta = 1.0 / (lam * t)
            Xb = Xs[idx]
            Sb = S[idx]
            active = (Sb * np.asarray(Xb @ W)) < 1.0
            W *= 1.0 - eta * lam
            W += (eta / len(idx)) * np.asarray(Xb.T @ (active * Sb))
            norms = np.sqrt((W * W).sum(axis=0))
            W *= np.minimum(1.0, radius / np.maximum(norms, 1e-300))
        if not np.isfinite(W).all():
            raise ModelError(f"svm weights became non-finite at epoch {epoch + 1}")
        margins = S * np.asarray(Xs @ W)
        hinge = np.maximum(0.0, 1.0 - margins).mean(axis=0)
        objective = 0.5 * lam * (W * W).sum(axis=0) + hinge
        history.append(float(objective.sum()))
    return TrainedModel(
        kind="svm",
        hyperparameters={"c": float(c), "epochs": int(epochs), "seed": int(seed), "batch_size": bs},
        parameters={"W": tolist(W[:-1]), "b": tolist(W[-1])},
        vocabulary_fingerprint=X.vocabulary_fingerprint,
        n_features=X.n_cols,
        history=tuple(history),
    )


def svm_margins(model, Xs):
    return linear_scores(model, Xs)


def svm_predict_dist(model, Xs):
    # rank-preserving only; these are not calibrated probabilities
    return softmax(svm_margins(model, Xs))
