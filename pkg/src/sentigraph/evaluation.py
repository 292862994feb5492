"""Classification metrics, one-vs-rest ROC curves and model comparison."""
from __future__ import annotations

import csv
import math
import io
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .corpus import LABELS, SentimentLabel


class EvaluationError(ValueError):
    pass


class DegenerateClassWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: tuple  # rows = true label code, columns = predicted

    @property
    def array(self):
        return np.asarray(self.counts, dtype=np.int64)

    @property
    def total(self):
        return int(self.array.sum())


def confusion(y_true, y_pred, n_classes=len(LABELS)) -> ConfusionMatrix:
    y_true = [int(v) for v in y_true]
    y_pred = [int(v) for v in y_pred]
    if len(y_true) != len(y_pred):
        raise EvaluationError(f"length mismatch: {len(y_true)} true labels vs {len(y_pred)} predictions")
    if not y_true:
        raise EvaluationError("nothing to evaluate")
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (np.asarray(y_true), np.asarray(y_pred)), 1)
    return ConfusionMatrix(tuple(tuple(int(v) for v in row) for row in cm))


def _ratio(num, den, what, notes):
    if den == 0:
        notes.append(what)
        return 0.0
    return float(num) / float(den)


def metrics(cm: ConfusionMatrix) -> dict:
    """Accuracy plus per-class, macro and micro precision / recall / F1.

    A zero denominator yields 0 and a DegenerateClassWarning; the affected
    quantities are listed under ``"degenerate"``.
    """
    a = cm.array
    total = a.sum()
    if total <= 0:
        raise EvaluationError("confusion matrix is empty")
    notes = []
    per_class = {}
    for lab in LABELS:
        c = int(lab)
        tp = a[c, c]
        name = lab.name.lower()
        p = _ratio(tp, a[:, c].sum(), f"precision[{name}]", notes)
        r = _ratio(tp, a[c, :].sum(), f"recall[{name}]", notes)
        f1 = _ratio(2 * p * r, p + r, f"f1[{name}]", notes)
        per_class[name] = {"precision": p, "recall": r, "f1": f1, "support": int(a[c, :].sum())}
    macro = {k: float(np.mean([v[k] for v in per_class.values()])) for k in ("precision", "recall", "f1")}
    tp_all = np.trace(a)
    micro_p = float(tp_all) / float(a.sum(axis=0).sum())
    micro_r = float(tp_all) / float(a.sum(axis=1).sum())
    micro = {"precision": micro_p, "recall": micro_r,
             "f1": _ratio(2 * micro_p * micro_r, micro_p + micro_r, "f1[micro]", notes)}
    if notes:
        warnings.warn("zero denominator for " + ", ".join(notes), DegenerateClassWarning, stacklevel=2)
    return {
        "accuracy": float(tp_all) / float(total),
        "per_class": per_class,
        "macro": macro,
        "micro": micro,
        "degenerate": notes,
    }


def roc_curve_ovr(y_true, score_rows, positive_class):
    """One-vs-rest ROC points ``[(threshold, fpr, tpr), ...]`` for one class.

    Thresholds sweep every distinct score in descending order; the curve
    starts at (0, 0) with threshold +inf and ends at (1, 1).
    """
    y_true = np.asarray([int(v) for v in y_true])
    scores = np.asarray(score_rows, dtype=np.float64)
    if scores.ndim == 2:
        scores = scores[:, int(positive_class)]
    if scores.shape[0] != y_true.shape[0]:
        raise EvaluationError("scores and labels differ in length")
    if not np.isfinite(scores).all():
        raise EvaluationError("scores must be finite")
    pos = y_true == int(positive_class)
    n_pos = int(pos.sum())
    n_neg = int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        name = SentimentLabel(int(positive_class)).name.lower() if 0 <= int(positive_class) < 3 else positive_class
        raise EvaluationError(f"class {name!r} is degenerate: needs both positive and negative examples")
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    hits = pos[order]
    tps = np.cumsum(hits)
    fps = np.cumsum(~hits)
    last = np.r_[np.nonzero(s[:-1] != s[1:])[0], len(s) - 1]
    points = [(float("inf"), 0.0, 0.0)]
    for i in last:
        points.append((float(s[i]), float(fps[i] / n_neg), float(tps[i] / n_pos)))
    return points


def auc(points) -> float:
    """Trapezoidal area under ROC points."""
    fpr = np.asarray([p[1] for p in points])
    tpr = np.asarray([p[2] for p in points])
    return float(np.sum((fpr[1:] - fpr[:-1]) * (tpr[1:] + tpr[:-1]) / 2.0))


def auc_macro(per_class_rocs) -> float:
    rocs = list(per_class_rocs.values()) if isinstance(per_class_rocs, dict) else list(per_class_rocs)
    if not rocs:
        raise EvaluationError("no ROC curves given")
    return float(np.mean([auc(r) for r in rocs]))


def roc_csv(points) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["threshold", "fpr", "tpr"])
    for thr, fpr, tpr in points:
        w.writerow([repr(thr), repr(float(fpr)), repr(float(tpr))])
    return buf.getvalue()


@dataclass
class EvaluationReport:
    model: str
    features: str
    confusion: list
    accuracy: float
    per_class: dict
    macro: dict
    micro: dict
    roc: dict
    auc: dict
    macro_auc: float
    test_fingerprint: str = ""
    degenerate: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**{k: data[k] for k in cls.__dataclass_fields__ if k in data})


def evaluate(y_true, y_pred, dist, model="", features="", test_fingerprint="") -> EvaluationReport:
    """Full report from labels, predictions and class-distribution rows."""
    cm = confusion(y_true, y_pred)
    with warnings.catch_warnings(record=True):
        warnings.simplefilter("always")
        core = metrics(cm)
    dist = np.asarray(dist, dtype=np.float64)
    rocs = {}
    for lab in LABELS:
        try:
            rocs[lab.name.lower()] = roc_curve_ovr(y_true, dist, int(lab))
        except EvaluationError:
            core["degenerate"].append(f"roc[{lab.name.lower()}]")
    aucs = {k: auc(v) for k, v in rocs.items()}
    return EvaluationReport(
        model=model,
        features=features,
        confusion=[list(r) for r in cm.counts],
        accuracy=core["accuracy"],
        per_class=core["per_class"],
        macro=core["macro"],
        micro=core["micro"],
        # the leading +inf threshold is stored as null to keep the JSON standard
        roc={k: [[None if math.isinf(t) else t, f, r] for t, f, r in v] for k, v in rocs.items()},
        auc=aucs,
        macro_auc=float(np.mean(list(aucs.values()))) if aucs else 0.0,
        test_fingerprint=test_fingerprint,
        degenerate=core["degenerate"],
    )


def _sort_key(report):
    return (-report.accuracy, -report.macro["f1"], report.model)


def compare_models(reports):
    """Rank reports by accuracy, then macro F1, then model name.

    Returns ``{feature_kind: [(model, accuracy, precision, recall, f1), ...]}``
    with macro-averaged precision / recall / F1, each list in ranked order.
    """
    reports = list(reports)
    fingerprints = {r.test_fingerprint for r in reports}
    if len(fingerprints) > 1:
        raise EvaluationError(f"reports come from different test sets: {sorted(fingerprints)}")
    table = {}
    for r in sorted(reports, key=_sort_key):
        table.setdefault(r.features, []).append(
            (r.model, r.accuracy, r.macro["precision"], r.macro["recall"], r.macro["f1"])
        )
    return table


def comparison_markdown(table, names=None) -> str:
    names = names or {}
    lines = ["| Features | Model | Accuracy | Precision | Recall | F1 |",
             "|---|---|---|---|---|---|"]
    for feat, rows in table.items():
        for model, acc, p, r, f1 in rows:
            lines.append(f"| {feat} | {names.get(model, model)} | {acc:.2%} | {p:.2%} | {r:.2%} | {f1:.2%} |")
    return "\n".join(lines) + "\n"
