"""The six classifiers behind one train / predict contract."""
from __future__ import annotations

import numpy as np

from .base import FORMAT_VERSION, KINDS, N_CLASSES, ModelError, TrainedModel, check_features
from .gbt import gbt_predict_dist, train_gbt
from .linear import logistic_loss_and_grad, logistic_predict_dist, svm_margins, svm_predict_dist, train_logistic, train_svm
from .naive_bayes import joint_log_likelihood
from .naive_bayes import predict_dist as nb_predict_dist
from .naive_bayes import train_naive_bayes
from .tree import (
    decision_tree_predict_dist,
    dense_features,
    random_forest_predict,
    random_forest_predict_dist,
    train_decision_tree,
    train_random_forest,
)

# CLI short names
ALIASES = {
    "nb": "naive_bayes",
    "lr": "logistic",
    "svm": "svm",
    "dt": "decision_tree",
    "rf": "random_forest",
    "gbt": "gbt",
    "xgb": "gbt",
}

SHORT_NAMES = {"naive_bayes": "nb", "logistic": "lr", "svm": "svm", "decision_tree": "dt",
               "random_forest": "rf", "gbt": "gbt"}

DISPLAY_NAMES = {
    "naive_bayes": "Naive Bayes",
    "logistic": "Logistic Regression",
    "svm": "SVM",
    "decision_tree": "Decision Tree",
    "random_forest": "Random Forest",
    "gbt": "Gradient Boosting",
}

DEFAULT_HYPERPARAMETERS = {
    "naive_bayes": {"alpha": 1.0},
    "logistic": {"l2": 1e-4, "lr": 0.1, "epochs": 50, "seed": 0},
    "svm": {"c": 1.0, "epochs": 50, "seed": 0},
    "decision_tree": {"max_depth": 20, "min_samples_split": 2},
    "random_forest": {"n_trees": 100, "max_depth": 20, "feature_fraction": None, "seed": 0},
    "gbt": {"n_rounds": 100, "depth": 3, "shrinkage": 0.1, "seed": 0},
}

TRAINERS = {
    "naive_bayes": train_naive_bayes,
    "logistic": train_logistic,
    "svm": train_svm,
    "decision_tree": train_decision_tree,
    "random_forest": train_random_forest,
    "gbt": train_gbt,
}


def resolve_kind(name):
    kind = ALIASES.get(name, name)
    if kind not in KINDS:
        raise ModelError(f"unknown model {name!r}; choose from {sorted(set(ALIASES) | set(KINDS))}")
    return kind


def train(kind, X, y, **hyperparameters) -> TrainedModel:
    kind = resolve_kind(kind)
    params = dict(DEFAULT_HYPERPARAMETERS[kind])
    params.update(hyperparameters)
    return TRAINERS[kind](X, y, **params)


def predict_dist(model: TrainedModel, X) -> np.ndarray:
    """One class-distribution row per feature row (columns = label codes)."""
    check_features(model, X)
    if model.kind in ("naive_bayes", "logistic", "svm"):
        Xs = X.to_scipy()
        return {"naive_bayes": nb_predict_dist, "logistic": logistic_predict_dist,
                "svm": svm_predict_dist}[model.kind](model, Xs)
    A = dense_features(X, model.n_features)
    if model.kind == "decision_tree":
        return decision_tree_predict_dist(model, A)
    if model.kind == "random_forest":
        return random_forest_predict_dist(model, A)
    return gbt_predict_dist(model, A)


def predict(model: TrainedModel, X) -> np.ndarray:
    """Label codes; ties resolve to the lowest code (random forest: summed leaf counts first)."""
    check_features(model, X)
    if model.kind == "random_forest":
        return random_forest_predict(model, dense_features(X, model.n_features))
    if model.kind == "naive_bayes":
        return joint_log_likelihood(model, X.to_scipy()).argmax(axis=1)
    if model.kind == "svm":
        return svm_margins(model, X.to_scipy()).argmax(axis=1)
    return predict_dist(model, X).argmax(axis=1)


__all__ = [
    "ALIASES", "DEFAULT_HYPERPARAMETERS", "DISPLAY_NAMES", "FORMAT_VERSION", "KINDS", "N_CLASSES",
    "ModelError", "SHORT_NAMES", "TrainedModel", "logistic_loss_and_grad", "predict", "predict_dist",
    "resolve_kind", "train", "train_decision_tree", "train_gbt", "train_logistic", "train_naive_bayes",
    "train_random_forest", "train_svm",
]
