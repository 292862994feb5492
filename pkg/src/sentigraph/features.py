"""Vocabulary construction and bag-of-words / TF-IDF featurisation."""
from __future__ import annotations

import hashlib
import json
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


class FeatureError(ValueError):
    pass


def _tokens(doc):
    return doc.tokens if hasattr(doc, "tokens") else tuple(doc)


@dataclass(frozen=True)
class Vocabulary:
    index: dict
    document_frequency: dict
    document_count: int
    min_count: int

    def __len__(self):
        return len(self.index)

    def __contains__(self, term):
        return term in self.index

    @property
    def terms(self):
        out = [None] * len(self.index)
        for term, i in self.index.items():
            out[i] = term
        return out

    def to_dict(self):
        out = {t: {"index": i, "df": self.document_frequency[t]} for t, i in self.index.items()}
        return {"terms": out, "N": self.document_count, "min_count": self.min_count}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, data):
        terms = data["terms"]
        return cls(
            index={t: v["index"] for t, v in terms.items()},
            document_frequency={t: v["df"] for t, v in terms.items()},
            document_count=data["N"],
            min_count=data["min_count"],
        )

    @property
    def fingerprint(self):
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()[:16]


def build_vocabulary(train_docs, min_count=1) -> Vocabulary:
    """Admit terms whose total occurrence count in ``train_docs`` is >= min_count.

    Indices are assigned by descending total frequency, ties lexicographic.
    """
    if min_count < 1:
        raise FeatureError("min_count must be >= 1")
    totals = Counter()
    df = Counter()
    n = 0
    for doc in train_docs:
        toks = _tokens(doc)
        totals.update(toks)
        df.update(set(toks))
        n += 1
    if n == 0:
        raise FeatureError("cannot build a vocabulary from an empty corpus")
    admitted = sorted((t for t, c in totals.items() if c >= min_count), key=lambda t: (-totals[t], t))
    if not admitted:
        raise FeatureError(f"vocabulary is empty after filtering with min_count={min_count}; lower min_count")
    return Vocabulary(
        index={t: i for i, t in enumerate(admitted)},
        document_frequency={t: df[t] for t in admitted},
        document_count=n,
        min_count=min_count,
    )


@dataclass(frozen=True)
class SparseFeatureMatrix:
    """CSR-layout rows of (column, weight) pairs with strictly increasing columns."""

    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    n_cols: int
    kind: str
    vocabulary_fingerprint: str = ""

    @property
    def n_rows(self):
        return len(self.indptr) - 1

    @property
    def shape(self):
        return (self.n_rows, self.n_cols)

    def row(self, i):
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return list(zip(self.indices[lo:hi].tolist(), self.data[lo:hi].tolist()))

    def rows(self):
        return [self.row(i) for i in range(self.n_rows)]

    def to_scipy(self):
        return sp.csr_matrix((self.data, self.indices, self.indptr), shape=self.shape)

    def to_dense(self):
        return self.to_scipy().toarray()

    @classmethod
    def from_rows(cls, rows, n_cols, kind, fingerprint=""):
        indptr = [0]
        indices = []
        data = []
        for r in rows:
            for j, w in r:
                if w != 0:
                    indices.append(j)
                    data.append(w)
            indptr.append(len(indices))
        return cls(
            np.asarray(indptr, dtype=np.int64),
            np.asarray(indices, dtype=np.int64),
            np.asarray(data, dtype=np.float64),
            n_cols,
            kind,
            fingerprint,
        )

    def to_coordinate_text(self, header=()):
        """MatrixMarket-style coordinate text (1-based indices)."""
        lines = ["%%MatrixMarket matrix coordinate real general"]
        lines.append(f"% kind={self.kind} vocabulary={self.vocabulary_fingerprint}")
        lines.extend(f"% {h}" for h in header)
        lines.append(f"{self.n_rows} {self.n_cols} {len(self.data)}")
        for i in range(self.n_rows):
            for j, w in self.row(i):
                lines.append(f"{i + 1} {j + 1} {w!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_coordinate_text(cls, text):
        kind = ""
        fingerprint = ""
        lines = iter(text.splitlines())
        for line in lines:
            if line.startswith("%"):
                for word in line.lstrip("%").split():
                    key, _, value = word.partition("=")
                    if key == "kind":
                        kind = value
                    elif key == "vocabulary":
                        fingerprint = value
                continue
            n_rows, n_cols, _ = (int(x) for x in line.split())
            break
        else:
            raise FeatureError("coordinate text has no size line")
        rows = [[] for _ in range(n_rows)]
        for line in lines:
            if not line.strip():
                continue
            i, j, w = line.split()
            rows[int(i) - 1].append((int(j) - 1, float(w)))
        return cls.from_rows(rows, n_cols, kind, fingerprint)


def bow_vector(doc, v: Vocabulary):
    counts = Counter(t for t in _tokens(doc) if t in v.index)
    return sorted((v.index[t], c) for t, c in counts.items())


def bow_matrix(docs, v: Vocabulary) -> SparseFeatureMatrix:
    rows = [[(j, float(c)) for j, c in bow_vector(d, v)] for d in docs]
    return SparseFeatureMatrix.from_rows(rows, len(v), "count", v.fingerprint)


def tf(term, doc) -> float:
    toks = _tokens(doc)
    if not toks:
        return 0.0
    return toks.count(term) / len(toks)


def idf(term, v: Vocabulary) -> float:
    if term not in v.document_frequency:
        raise FeatureError(f"term {term!r} is not in the vocabulary")
    return math.log(v.document_count / v.document_frequency[term])


def tfidf_matrix(docs, v: Vocabulary) -> SparseFeatureMatrix:
    idfs = {t: idf(t, v) for t in v.index}
    terms = v.terms
    rows = []
    for doc in docs:
        toks = _tokens(doc)
        total = len(toks)
        row = []
        for j, c in bow_vector(toks, v):
            w = (c / total) * idfs[terms[j]]
            if w != 0:
                row.append((j, w))
        rows.append(row)
    return SparseFeatureMatrix.from_rows(rows, len(v), "tfidf", v.fingerprint)


def featurize(docs, v: Vocabulary, kind) -> SparseFeatureMatrix:
    if kind in ("bow", "count"):
        return bow_matrix(docs, v)
    if kind == "tfidf":
        return tfidf_matrix(docs, v)
    raise FeatureError(f"unknown feature kind {kind!r}")
