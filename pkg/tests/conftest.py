import time

import numpy as np
import pytest

from sentigraph.corpus import load_csv, split
from sentigraph.experiment import ExperimentConfig, bundled_fixture, run_experiment
from sentigraph.features import SparseFeatureMatrix, build_vocabulary, featurize
from sentigraph.polarity import PolarityLexicon, weak_label_dataset


def matrix(rows, n_cols=None, kind="count", fingerprint="toy"):
    """Sparse matrix from a dense list of lists."""
    dense = np.asarray(rows, dtype=np.float64)
    n_cols = dense.shape[1] if n_cols is None else n_cols
    sparse_rows = [[(j, float(v)) for j, v in enumerate(r) if v != 0] for r in dense]
    return SparseFeatureMatrix.from_rows(sparse_rows, n_cols, kind, fingerprint)


@pytest.fixture(scope="session")
def fixture_dataset():
    return load_csv(bundled_fixture())


@pytest.fixture(scope="session")
def labeled(fixture_dataset):
    return weak_label_dataset(fixture_dataset, PolarityLexicon.load())


@pytest.fixture(scope="session")
def fixture_split(labeled):
    """80/20 split with seed 42 and BoW/TF-IDF matrices at min_count 2."""
    train, test = split(labeled.dataset, 0.8, 42)
    tok = labeled.tokens
    vocab = build_vocabulary([tok[d.id] for d in train], 2)
    out = {"vocab": vocab, "train": train, "test": test,
           "y_train": np.array([int(d.label) for d in train]),
           "y_test": np.array([int(d.label) for d in test])}
    for kind in ("bow", "tfidf"):
        out[kind] = (featurize([tok[d.id] for d in train], vocab, kind),
                     featurize([tok[d.id] for d in test], vocab, kind))
    return out


@pytest.fixture(scope="session")
def fixture_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run") / "fixture"
    start = time.perf_counter()
    run = run_experiment(ExperimentConfig(out=str(out)))
    run.elapsed = time.perf_counter() - start
    return run


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
