"""Shared train/predict contract and the model file envelope."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

FORMAT_VERSION = 1
N_CLASSES = 3
KINDS = ("naive_bayes", "logistic", "svm", "decision_tree", "random_forest", "gbt")


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class TrainedModel:
    kind: str
    hyperparameters: dict
    parameters: dict
    vocabulary_fingerprint: str
    n_features: int
    labels: tuple = (0, 1, 2)
    history: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ModelError(f"unknown model kind {self.kind!r}")
        _check_finite(self.parameters, self.kind)

    def to_dict(self):
        return {
            "format_version": FORMAT_VERSION,
            "kind": self.kind,
            "hyperparameters": self.hyperparameters,
            "vocabulary_fingerprint": self.vocabulary_fingerprint,
            "n_features": self.n_features,
            "labels": list(self.labels),
            "parameters": self.parameters,
            "history": list(self.history),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def save(self, path):
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def from_dict(cls, data):
        version = data.get("format_version")
        if version != FORMAT_VERSION:
            raise ModelError(f"unsupported model format_version {version!r} (expected {FORMAT_VERSION})")
        return cls(
            kind=data["kind"],
            hyperparameters=data["hyperparameters"],
            parameters=data["parameters"],
            vocabulary_fingerprint=data["vocabulary_fingerprint"],
            n_features=data["n_features"],
            labels=tuple(data["labels"]),
            history=tuple(data.get("history", ())),
        )

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _check_finite(obj, kind):
    if isinstance(obj, dict):
        for v in obj.values():
            _check_finite(v, kind)
    elif isinstance(obj, (list, tuple)):
        for v in obj:
            _check_finite(v, kind)
    elif isinstance(obj, float) and not math.isfinite(obj):
        raise ModelError(f"{kind} model has non-finite parameters")


def as_labels(y):
    y = np.asarray([int(v) for v in y], dtype=np.int64)
    if y.size and (y.min() < 0 or y.max() >= N_CLASSES):
        raise ModelError("labels must be integer codes 0..2")
    return y


def check_training_data(X, y):
    if X.n_rows != len(y):
        raise ModelError(f"{X.n_rows} feature rows but {len(y)} labels")
    if X.n_rows == 0:
        raise ModelError("cannot train on zero rows")


def check_features(model: TrainedModel, X):
    if X.vocabulary_fingerprint != model.vocabulary_fingerprint:
        raise ModelError(
            f"feature vocabulary {X.vocabulary_fingerprint!r} does not match "
            f"the model's {model.vocabulary_fingerprint!r}"
        )
    if X.n_cols > model.n_features:
        raise ModelError(f"feature rows have {X.n_cols} columns, model expects {model.n_features}")


def softmax(scores):
    z = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def tolist(a):
    return np.asarray(a, dtype=np.float64).tolist()
