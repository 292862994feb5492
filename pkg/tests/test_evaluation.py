import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import mann_whitney_auc
from sentigraph.evaluation import (
    DegenerateClassWarning,
    EvaluationError,
    EvaluationReport,
    auc,
    auc_macro,
    compare_models,
    comparison_markdown,
    confusion,
    evaluate,
    metrics,
    roc_csv,
    roc_curve_ovr,
)

NEG, NEU, POS = 0, 1, 2


def test_confusion_examples():
    assert confusion([0, 1, 2], [0, 1, 2]).array.tolist() == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    cm = confusion([POS, NEG, NEU], [POS, NEU, NEU])
    assert cm.array.tolist() == [[0, 1, 0], [0, 1, 0], [0, 0, 1]]
    assert cm.total == 3
    assert confusion([1], [2]).array.tolist() == [[0, 0, 0], [0, 0, 1], [0, 0, 0]]


def test_confusion_errors():
    with pytest.raises(EvaluationError, match="length mismatch"):
        confusion([0, 1], [0])
    with pytest.raises(EvaluationError):
        confusion([], [])


def test_metrics_diagonal():
    m = metrics(confusion([0, 1, 2, 2], [0, 1, 2, 2]))
    assert m["accuracy"] == 1.0
    assert all(v["f1"] == 1.0 for v in m["per_class"].values())
    assert m["degenerate"] == []


def test_metrics_hand_case():
    cm = confusion([POS, NEG, NEU], [POS, NEU, NEU])
    with pytest.warns(DegenerateClassWarning, match="precision\\[negative\\]"):
        m = metrics(cm)
    assert m["accuracy"] == pytest.approx(2 / 3)
    neu = m["per_class"]["neutral"]
    assert (neu["precision"], neu["recall"]) == (0.5, 1.0)
    assert neu["f1"] == pytest.approx(2 / 3)
    neg = m["per_class"]["negative"]
    assert (neg["precision"], neg["recall"], neg["f1"]) == (0.0, 0.0, 0.0)
    assert {"precision[negative]", "f1[negative]"} <= set(m["degenerate"])
    pos = m["per_class"]["positive"]
    assert (pos["precision"], pos["recall"], pos["f1"]) == (1.0, 1.0, 1.0)
    assert m["macro"]["precision"] == pytest.approx((0 + 0.5 + 1) / 3)
    assert m["macro"]["recall"] == pytest.approx((0 + 1 + 1) / 3)
    assert m["macro"]["f1"] == pytest.approx((0 + 2 / 3 + 1) / 3)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2)), min_size=1, max_size=60))
def test_metrics_invariants(pairs):
    y, p = zip(*pairs)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        m = metrics(confusion(y, p))
    assert m["micro"]["precision"] == pytest.approx(m["accuracy"])
    assert m["micro"]["recall"] == pytest.approx(m["accuracy"])
    for row in list(m["per_class"].values()) + [m["macro"], m["micro"]]:
        for k in ("precision", "recall", "f1"):
            assert 0.0 <= row[k] <= 1.0


def test_roc_perfect_separation():
    pts = roc_curve_ovr([1, 1, 0, 0], [0.9, 0.8, 0.2, 0.1], 1)
    assert [(f, t) for _, f, t in pts] == [(0.0, 0.0), (0.0, 0.5), (0.0, 1.0), (0.5, 1.0), (1.0, 1.0)]
    assert auc(pts) == 1.0


def test_roc_hand_case():
    y = [1, 1, 0, 0]
    scores = [0.9, 0.8, 0.7, 0.85]
    # pairs: .9>.7, .9>.85, .8>.7 win; .8<.85 loses -> 3/4
    assert mann_whitney_auc([0.9, 0.8], [0.7, 0.85]) == 0.75
    assert auc(roc_curve_ovr(y, scores, 1)) == pytest.approx(0.75, abs=1e-12)


def test_roc_reversed_scores():
    rng = np.random.default_rng(3)
    y = rng.integers(0, 2, size=50)
    s = rng.normal(size=50)
    a = auc(roc_curve_ovr(y, s, 1))
    assert auc(roc_curve_ovr(y, -s, 1)) == pytest.approx(1 - a, abs=1e-12)


def test_roc_from_distribution_rows():
    dist = [[0.1, 0.2, 0.7], [0.6, 0.3, 0.1], [0.2, 0.5, 0.3]]
    assert auc(roc_curve_ovr([2, 0, 1], dist, 2)) == 1.0


def test_roc_errors():
    with pytest.raises(EvaluationError, match="'positive' is degenerate"):
        roc_curve_ovr([0, 1], [0.1, 0.2], 2)
    with pytest.raises(EvaluationError, match="finite"):
        roc_curve_ovr([0, 1], [0.1, float("nan")], 1)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.booleans(), st.integers(0, 8)), min_size=2, max_size=60))
def test_auc_equals_pair_count(rows):
    y = [int(b) for b, _ in rows]
    s = [v / 8 for _, v in rows]
    if 0 < sum(y) < len(y):
        pts = roc_curve_ovr(y, s, 1)
        fpr = [p[1] for p in pts]
        tpr = [p[2] for p in pts]
        assert pts[0][1:] == (0.0, 0.0) and pts[-1][1:] == (1.0, 1.0)
        assert all(np.diff(fpr) >= 0) and all(np.diff(tpr) >= 0)
        pos = [v for v, t in zip(s, y) if t]
        neg = [v for v, t in zip(s, y) if not t]
        assert auc(pts) == pytest.approx(mann_whitney_auc(pos, neg), abs=1e-9)


def test_auc_macro():
    perfect = roc_curve_ovr([1, 0], [1.0, 0.0], 1)
    assert auc_macro({"a": perfect, "b": perfect, "c": perfect}) == 1.0
    rng = np.random.default_rng(0)
    y = rng.integers(0, 3, size=2000)
    dist = rng.dirichlet([1, 1, 1], size=2000)
    rocs = [roc_curve_ovr(y, dist, c) for c in range(3)]
    assert abs(auc_macro(rocs) - 0.5) <= 0.05


def test_roc_csv():
    text = roc_csv(roc_curve_ovr([1, 0], [0.75, 0.25], 1))
    assert text.splitlines() == ["threshold,fpr,tpr", "inf,0.0,0.0", "0.75,0.0,1.0", "0.25,1.0,1.0"]


def report(model, acc, f1=0.5, fp="t"):
    return EvaluationReport(model, "bow", [], acc, {}, {"precision": 0.1, "recall": 0.2, "f1": f1}, {}, {}, {}, 0.5, fp)


def test_compare_models_ranking():
    table = compare_models([report("nb", 0.80), report("rf", 0.93)])
    assert [row[0] for row in table["bow"]] == ["rf", "nb"]
    table = compare_models([report("b", 0.9, 0.4), report("a", 0.9, 0.6), report("c", 0.9, 0.6)])
    assert [row[0] for row in table["bow"]] == ["a", "c", "b"]
    md = comparison_markdown(table, {"a": "Alpha"})
    assert "| bow | Alpha | 90.00% | 10.00% | 20.00% | 60.00% |" in md


def test_compare_models_rejects_mixed_test_sets():
    with pytest.raises(EvaluationError, match="different test sets"):
        compare_models([report("nb", 0.8, fp="x"), report("rf", 0.9, fp="y")])


def test_evaluate_round_trip():
    y = [0, 1, 2, 2, 1, 0]
    dist = np.eye(3)[[0, 1, 2, 1, 1, 0]] * 0.8 + 0.2 / 3
    r = evaluate(y, dist.argmax(axis=1), dist, "nb", "bow", "fp")
    assert r.accuracy == pytest.approx(5 / 6)
    assert r.roc["negative"][0][0] is None
    assert set(r.auc) == {"negative", "neutral", "positive"}
    again = EvaluationReport.from_dict(r.to_dict())
    assert again == r
