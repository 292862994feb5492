"""Multinomial Naive Bayes with additive (Laplace) smoothing."""
from __future__ import annotations

import numpy as np

from .base import N_CLASSES, ModelError, TrainedModel, as_labels, check_training_data, tolist


def train_naive_bayes(X, y, alpha=1.0, classes=None) -> TrainedModel:
    """Fit class priors and smoothed per-class term likelihoods.

    ``classes`` lists the label codes the model covers (default: all three).
    A listed class with no training document is an error; an unlisted class
    gets prior zero and is never predicted.

    Only raw sufficient statistics are stored (class document counts and
    per-class feature totals) so the parameters stay finite even with
    ``alpha=0``; log-likelihoods are derived at prediction time.
    TF-IDF input is accepted and treated as fractional counts.
    """
    if alpha < 0:
        raise ModelError("alpha must be non-negative")
    y = as_labels(y)
    check_training_data(X, y)
    classes = list(range(N_CLASSES)) if classes is None else sorted({int(c) for c in classes})
    if not classes or not set(classes) <= set(range(N_CLASSES)):
        raise ModelError(f"classes must be a non-empty subset of 0..{N_CLASSES - 1}")
    stray = sorted(set(np.unique(y).tolist()) - set(classes))
    if stray:
        raise ModelError(f"label code(s) {stray} not among the modelled classes {classes}")
    class_counts = np.bincount(y, minlength=N_CLASSES).astype(np.float64)
    missing = [c for c in classes if class_counts[c] == 0]
    if missing:
        raise ModelError(f"class code(s) {missing} absent from training data; cannot estimate a prior")
    onehot = np.zeros((len(y), N_CLASSES))
    onehot[np.arange(len(y)), y] = 1.0
    feature_counts = np.asarray((X.to_scipy().T @ onehot).T)
    return TrainedModel(
        kind="naive_bayes",
        hyperparameters={"alpha": float(alpha), "classes": classes},
        parameters={"class_counts": tolist(class_counts), "feature_counts": tolist(feature_counts)},
        vocabulary_fingerprint=X.vocabulary_fingerprint,
        n_features=X.n_cols,
    )


def _log_params(model):
    alpha = model.hyperparameters["alpha"]
    class_counts = np.asarray(model.parameters["class_counts"])
    fc = np.asarray(model.parameters["feature_counts"])
    num = fc + alpha
    den = num.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_prior = np.log(class_counts / class_counts.sum())
        log_lik = np.log(num) - np.log(den)
    # unmodelled classes are ruled out by their prior alone
    log_lik[class_counts == 0] = 0.0
    return log_prior, log_lik


def joint_log_likelihood(model, Xs):
    """Unnormalised log posterior per class; -inf marks impossible classes."""
    log_prior, log_lik = _log_params(model)
    Xs = Xs.tocsr()
    n = Xs.shape[0]
    out = np.tile(log_prior, (n, 1))
    for c in range(N_CLASSES):
        ll = log_lik[c]
        finite = np.isfinite(ll)
        # handle -inf separately so 0 * -inf never becomes nan
        out[:, c] += Xs[:, finite] @ ll[finite]
        if not finite.all():
            hits = np.asarray((Xs[:, ~finite] != 0).sum(axis=1)).ravel() > 0
            out[hits, c] = -np.inf
    return out


def predict_dist(model, Xs):
    jll = joint_log_likelihood(model, Xs)
    top = jll.max(axis=1, keepdims=True)
    dead = ~np.isfinite(top[:, 0])
    top[dead] = 0.0
    with np.errstate(invalid="ignore"):
        e = np.exp(jll - top)
    e[dead] = 1.0
    return e / e.sum(axis=1, keepdims=True)
