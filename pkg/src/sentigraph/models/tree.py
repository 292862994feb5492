"""Entropy decision trees, random forests and the regression trees used by boosting.

Trees are stored as parallel arrays (feature, threshold, left, right, value)
so they serialise to plain JSON.  A leaf has ``feature == -1``.  Samples with
``x[feature] <= threshold`` go left.
"""
from __future__ import annotations

import math

import numpy as np

from .base import N_CLASSES, ModelError, TrainedModel, as_labels, check_training_data

MIN_GAIN = 1e-12
BLOCK_CELLS = 1 << 20


def dense_features(X, n_features=None):
    A = np.asarray(X.to_dense(), dtype=np.float64)
    if n_features is not None and A.shape[1] < n_features:
        A = np.hstack([A, np.zeros((A.shape[0], n_features - A.shape[1]))])
    return np.asfortranarray(A)


def entropy(counts):
    """Shannon entropy in bits of a class-count vector."""
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def information_gain(parent, left, right):
    n = float(np.sum(parent))
    nl, nr = float(np.sum(left)), float(np.sum(right))
    return entropy(parent) - (nl / n) * entropy(left) - (nr / n) * entropy(right)


def _feature_blocks(features, m):
    # bound the (m, block, K) work arrays to a few million cells
    features = np.asarray(list(features), dtype=np.int64)
    width = max(1, BLOCK_CELLS // max(m, 1))
    for start in range(0, len(features), width):
        yield features[start:start + width]


def _pick(gain, xs, feats, best):
    """Fold one block's gain matrix into ``best``: first feature, then lowest threshold, wins ties."""
    col_best = gain.max(axis=0)
    j = int(np.argmax(col_best))
    if col_best[j] > best[0]:
        i = int(np.argmax(gain[:, j]))
        best = (float(col_best[j]), int(feats[j]), float((xs[i, j] + xs[i + 1, j]) / 2.0))
    return best


def _best_class_split(X, idx, Yh, features):
    n = len(idx)
    parent = Yh[idx].sum(axis=0)
    h_parent = entropy(parent)
    nl = np.arange(1, n, dtype=np.float64)[:, None]
    best = (MIN_GAIN, -1, 0.0)
    if n < 2:
        return best
    for feats in _feature_blocks(features, n):
        cols = X[np.ix_(idx, feats)]
        order = np.argsort(cols, axis=0, kind="stable")
        xs = np.take_along_axis(cols, order, axis=0)
        valid = xs[:-1] < xs[1:]
        C = np.cumsum(Yh[idx][order], axis=0)[:-1]  # (n-1, block, K) left counts
        R = parent - C
        gain = h_parent - (nl * _entropy_last(C) + (n - nl) * _entropy_last(R)) / n
        gain = np.where(valid, gain, -np.inf)
        best = _pick(gain, xs, feats, best)
    return best


def _entropy_last(C):
    # entropy (bits) along the last axis of a count array
    tot = C.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(tot > 0, C / tot, 0.0)
        terms = np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return -terms.sum(axis=-1)


def _best_regression_split(X, idx, r, features):
    n = len(idx)
    best = (MIN_GAIN, -1, 0.0)
    if n < 2:
        return best
    rn = r[idx]
    sse_parent = float(((rn - rn.sum() / n) ** 2).sum())
    nl = np.arange(1, n, dtype=np.float64)[:, None]
    nr = n - nl
    for feats in _feature_blocks(features, n):
        cols = X[np.ix_(idx, feats)]
        order = np.argsort(cols, axis=0, kind="stable")
        xs = np.take_along_axis(cols, order, axis=0)
        valid = xs[:-1] < xs[1:]
        rs = rn[order]
        s1 = np.cumsum(rs, axis=0)
        s2 = np.cumsum(rs * rs, axis=0)
        sl, ql = s1[:-1], s2[:-1]
        sr, qr = s1[-1] - sl, s2[-1] - ql
        gain = sse_parent - ((ql - sl * sl / nl) + (qr - sr * sr / nr))
        gain = np.where(valid, gain, -np.inf)
        best = _pick(gain, xs, feats, best)
    return best


class _Builder:
    def __init__(self):
        self.feature, self.threshold, self.left, self.right, self.value = [], [], [], [], []

    def add(self, value):
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(value)
        return len(self.feature) - 1

    def arrays(self):
        return {
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left,
            "right": self.right,
            "value": self.value,
        }


def grow_classification_tree(X, y, max_depth=20, min_samples_split=2, max_features=None, rng=None):
    """Grow an entropy tree on dense ``X`` (n, V); leaves hold class counts."""
    if max_depth < 1:
        raise ModelError("max_depth must be >= 1")
    n, V = X.shape
    Yh = np.zeros((n, N_CLASSES))
    Yh[np.arange(n), y] = 1.0
    b = _Builder()
    m = V if max_features is None else max(1, min(V, int(max_features)))

    def grow(idx, depth):
        counts = Yh[idx].sum(axis=0)
        node = b.add([float(c) for c in counts])
        if depth >= max_depth or len(idx) < min_samples_split or np.count_nonzero(counts) <= 1:
            return node
        if m < V:
            features = np.sort(rng.choice(V, size=m, replace=False))
        else:
            features = range(V)
        gain, f, thr = _best_class_split(X, idx, Yh, features)
        if f < 0:
            return node
        mask = X[idx, f] <= thr
        b.feature[node], b.threshold[node] = f, thr
        b.left[node] = grow(idx[mask], depth + 1)
        b.right[node] = grow(idx[~mask], depth + 1)
        return node

    grow(np.arange(n), 0)
    return b.arrays()


def grow_regression_tree(X, r, max_depth=3, min_samples_split=2):
    """Least-squares tree; leaves hold the mean target of their samples."""
    n, V = X.shape
    b = _Builder()

    def grow(idx, depth):
        node = b.add(float(r[idx].mean()))
        if depth >= max_depth or len(idx) < min_samples_split:
            return node
        gain, f, thr = _best_regression_split(X, idx, r, range(V))
        if f < 0:
            return node
        mask = X[idx, f] <= thr
        b.feature[node], b.threshold[node] = f, thr
        b.left[node] = grow(idx[mask], depth + 1)
        b.right[node] = grow(idx[~mask], depth + 1)
        return node

    grow(np.arange(n), 0)
    return b.arrays()


def apply_tree(tree, X):
    """Leaf index reached by every row of dense ``X``."""
    feature = np.asarray(tree["feature"])
    threshold = np.asarray(tree["threshold"], dtype=np.float64)
    left = np.asarray(tree["left"])
    right = np.asarray(tree["right"])
    node = np.zeros(X.shape[0], dtype=np.int64)
    rows = np.arange(X.shape[0])
    while True:
        f = feature[node]
        active = f >= 0
        if not active.any():
            return node
        a = rows[active]
        go_left = X[a, f[active]] <= threshold[node[active]]
        node[a] = np.where(go_left, left[node[active]], right[node[active]])


def tree_depth(tree):
    left, right = tree["left"], tree["right"]

    def depth(i):
        if left[i] < 0:
            return 0
        return 1 + max(depth(left[i]), depth(right[i]))

    return depth(0)


def train_decision_tree(X, y, max_depth=20, min_samples_split=2) -> TrainedModel:
    y = as_labels(y)
    check_training_data(X, y)
    tree = grow_classification_tree(dense_features(X), y, max_depth, min_samples_split)
    return TrainedModel(
        kind="decision_tree",
        hyperparameters={"max_depth": int(max_depth), "min_samples_split": int(min_samples_split)},
        parameters={"tree": tree},
        vocabulary_fingerprint=X.vocabulary_fingerprint,
        n_features=X.n_cols,
    )


def _leaf_counts(tree, A):
    values = np.asarray(tree["value"], dtype=np.float64)
    return values[apply_tree(tree, A)]


def decision_tree_predict_dist(model, A):
    counts = _leaf_counts(model.parameters["tree"], A)
    return counts / counts.sum(axis=1, keepdims=True)


def tree_rng(seed, index):
    """Independent generator per tree so trees can be built in any order."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(index),)))


def train_random_forest(X, y, n_trees=100, max_depth=20, feature_fraction=None, seed=0,
                        min_samples_split=2, bootstrap=True) -> TrainedModel:
    """Bagged entropy trees with a fresh random feature subset at every split.

    ``feature_fraction=None`` means sqrt(V)/V, i.e. about sqrt(V) candidate
    features per split.
    """
    if n_trees < 1:
        raise ModelError("n_trees must be >= 1")
    y = as_labels(y)
    check_training_data(X, y)
    A = dense_features(X)
    n, V = A.shape
    frac = math.sqrt(V) / V if feature_fraction is None else float(feature_fraction)
    if not 0.0 < frac <= 1.0:
        raise ModelError("feature_fraction must lie in (0, 1]")
    max_features = max(1, min(V, math.ceil(frac * V)))
    trees = []
    for t in range(n_trees):
        rng = tree_rng(seed, t)
        idx = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
        trees.append(grow_classification_tree(A[idx], y[idx], max_depth, min_samples_split, max_features, rng))
    return TrainedModel(
        kind="random_forest",
        hyperparameters={
            "n_trees": int(n_trees),
            "max_depth": int(max_depth),
            "min_samples_split": int(min_samples_split),
            "feature_fraction": frac,
            "max_features": int(max_features),
            "bootstrap": bool(bootstrap),
            "seed": int(seed),
        },
        parameters={"trees": trees},
        vocabulary_fingerprint=X.vocabulary_fingerprint,
        n_features=X.n_cols,
    )


def forest_votes(model, A):
    n = A.shape[0]
    votes = np.zeros((n, N_CLASSES))
    leaf_totals = np.zeros((n, N_CLASSES))
    rows = np.arange(n)
    for tree in model.parameters["trees"]:
        counts = _leaf_counts(tree, A)
        # leaf majority, lowest code on ties
        votes[rows, counts.argmax(axis=1)] += 1.0
        leaf_totals += counts
    return votes, leaf_totals


def random_forest_predict_dist(model, A):
    votes, _ = forest_votes(model, A)
    return votes / votes.sum(axis=1, keepdims=True)


def random_forest_predict(model, A):
    """Majority vote; ties go to the tied class with the larger summed leaf counts, then lowest code."""
    votes, leaf_totals = forest_votes(model, A)
    tied = votes == votes.max(axis=1, keepdims=True)
    key = np.where(tied, leaf_totals, -np.inf)
    return key.argmax(axis=1)
