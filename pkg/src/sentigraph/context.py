"""Per-sentiment keyword ranking, top-k extraction and coverage accuracy."""
from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass

OVERALL = "overall"


class ContextError(ValueError):
    pass


def _tokens(doc):
    return doc.tokens if hasattr(doc, "tokens") else tuple(doc)


@dataclass(frozen=True)
class KeywordRanking:
    label: str
    entries: tuple  # ((term, importance), ...) by importance desc, then term asc
    k: int | None = None

    def __len__(self):
        return len(self.entries)

    @property
    def terms(self):
        return [t for t, _ in self.entries]

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["rank", "term", "importance"])
        for i, (term, imp) in enumerate(self.entries, start=1):
            w.writerow([i, term, repr(imp)])
        return buf.getvalue()


def _ordered(scores):
    return tuple(sorted(scores.items(), key=lambda kv: (-kv[1], kv[0])))


def term_counts(docs):
    counts = Counter()
    for d in docs:
        counts.update(_tokens(d))
    return counts


def rank_keywords(docs_of_label, label=OVERALL) -> KeywordRanking:
    """Importance = total occurrences of the term across the documents."""
    docs = list(docs_of_label)
    if not docs:
        raise ContextError(f"no documents to rank for {label!r}")
    return KeywordRanking(str(label), _ordered(term_counts(docs)))


def rank_keywords_distinctive(docs_by_label) -> dict:
    """Frequency x across-label IDF, ``ln(L / labels containing term)``.

    Terms used by every label score zero; kept in the ranking after all
    positive scores.
    """
    counts = {lab: term_counts(docs) for lab, docs in docs_by_label.items()}
    n_labels = len(counts)
    spread = Counter()
    for c in counts.values():
        spread.update(c.keys())
    out = {}
    for lab, c in counts.items():
        if not c:
            raise ContextError(f"no documents to rank for {lab!r}")
        out[lab] = KeywordRanking(
            str(lab), _ordered({t: n * math.log(n_labels / spread[t]) for t, n in c.items()})
        )
    return out


def top_k(r: KeywordRanking, k) -> KeywordRanking:
    if k < 1:
        raise ContextError("k must be >= 1")
    return KeywordRanking(r.label, r.entries[:k], k)


def context_accuracy(topk: KeywordRanking, held_out_docs_of_label) -> float:
    """Fraction of held-out documents containing at least one top-k term."""
    docs = list(held_out_docs_of_label)
    if not docs:
        raise ContextError(f"no held-out documents for {topk.label!r}")
    vocab = set(topk.terms)
    covered = sum(1 for d in docs if vocab.intersection(_tokens(d)))
    return covered / len(docs)


def export_frequencies(r: KeywordRanking, k=None) -> dict:
    entries = r.entries if k is None else r.entries[:k]
    return {term: imp for term, imp in entries}
