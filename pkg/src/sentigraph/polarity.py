"""Lexicon polarity scoring and weak labeling."""
from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .corpus import Dataset, SentimentLabel
from .preprocess import Rejected, TokenSequence, preprocess_pipeline


class LexiconError(ValueError):
    pass


@dataclass(frozen=True)
class PolarityLexicon:
    entries: dict
    name: str = "custom"
    version: str = "0"

    def __post_init__(self):
        for term, value in self.entries.items():
            if not -1.0 <= value <= 1.0:
                raise LexiconError(f"polarity of {term!r} outside [-1, 1]: {value}")

    def __len__(self):
        return len(self.entries)

    def get(self, term):
        return self.entries.get(term)

    @classmethod
    def parse(cls, text, name="custom"):
        """Parse ``term<TAB>polarity`` lines; ``#`` starts a comment."""
        entries = {}
        version = "0"
        for lineno, line in enumerate(text.splitlines(), start=1):
            stripped = line.strip()
            if not stripped:
                continue
            if stripped.startswith("#"):
                words = stripped.lstrip("#").split()
                if len(words) >= 2 and words[-1].startswith("v") and words[-1][1:].isdigit():
                    version = words[-1][1:]
                continue
            parts = stripped.split("\t")
            if len(parts) != 2:
                raise LexiconError(f"line {lineno}: expected term<TAB>polarity, got {line!r}")
            try:
                value = float(parts[1])
            except ValueError:
                raise LexiconError(f"line {lineno}: bad polarity {parts[1]!r}") from None
            entries[parts[0].strip()] = value
        return cls(entries, name=name, version=version)

    @classmethod
    def load(cls, path=None):
        if path is None:
            text = resources.files("sentigraph").joinpath("data").joinpath("polarity_lexicon.tsv")
            return cls.parse(text.read_text(encoding="utf-8"), name="sentigraph-seed")
        path = Path(path)
        return cls.parse(path.read_text(encoding="utf-8"), name=path.stem)


@dataclass(frozen=True)
class PolarityScore:
    value: float
    matched_terms: int


def score(tokens, lex: PolarityLexicon) -> PolarityScore:
    total = 0.0
    matched = 0
    for tok in tokens:
        v = lex.get(tok)
        if v is not None:
            total += v
            matched += 1
    if matched == 0:
        return PolarityScore(0.0, 0)
    return PolarityScore(total / matched, matched)


def to_label(s, neutral_band=0.0) -> SentimentLabel:
    if neutral_band < 0:
        raise ValueError("neutral_band must be non-negative")
    value = s.value if isinstance(s, PolarityScore) else float(s)
    if value > neutral_band:
        return SentimentLabel.POSITIVE
    if value < -neutral_band:
        return SentimentLabel.NEGATIVE
    return SentimentLabel.NEUTRAL


@dataclass
class LabelingResult:
    dataset: Dataset
    tokens: dict
    scores: dict
    rejected: list = field(default_factory=list)

    def counts(self):
        out = {lab.name.lower(): 0 for lab in SentimentLabel}
        for d in self.dataset:
            out[d.label.name.lower()] += 1
        return out


def weak_label_dataset(d: Dataset, lex: PolarityLexicon, band=0.0, cfg=None, tokens=None):
    """Label every document that survives preprocessing.

    ``tokens`` may carry precomputed ``id -> TokenSequence | Rejected`` results;
    otherwise documents are run through the pipeline here.  The returned
    dataset holds only the accepted documents, in load order.
    """
    labels = {}
    kept_tokens = {}
    scores = {}
    rejected = []
    for doc in d:
        seq = tokens[doc.id] if tokens is not None else preprocess_pipeline(doc, cfg)
        if isinstance(seq, Rejected):
            rejected.append(doc.id)
            continue
        if not isinstance(seq, TokenSequence):
            seq = TokenSequence(tuple(seq))
        s = score(seq.tokens, lex)
        labels[doc.id] = to_label(s, band)
        kept_tokens[doc.id] = seq
        scores[doc.id] = s
    labeled = d.subset(labels).with_labels(labels)
    return LabelingResult(labeled, kept_tokens, scores, rejected)
