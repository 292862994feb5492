"""Loading, validating and splitting microblog datasets."""
from __future__ import annotations

import csv
import enum
import io
import json
import random
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path


class CorpusError(ValueError):
    pass


class SentimentLabel(enum.IntEnum):
    NEGATIVE = 0
    NEUTRAL = 1
    POSITIVE = 2

    @classmethod
    def parse(cls, value):
        """Parse a label name or integer code; returns None when unrecognised."""
        if isinstance(value, SentimentLabel):
            return value
        text = str(value).strip().lower()
        for member in cls:
            if text == member.name.lower() or text == str(member.value):
                return member
        return None

    @property
    def display(self):
        return self.name.capitalize()


LABELS = tuple(SentimentLabel)


@dataclass(frozen=True)
class Document:
    id: str
    text: str
    label: SentimentLabel | None = None


@dataclass(frozen=True)
class Dataset:
    documents: tuple[Document, ...]
    source: str = ""
    loaded_at: str = ""
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        seen = set()
        for doc in self.documents:
            if not doc.id:
                raise CorpusError("document with empty id")
            if doc.id in seen:
                raise CorpusError(f"duplicate document id {doc.id!r}")
            seen.add(doc.id)

    def __len__(self):
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    @property
    def ids(self):
        return [d.id for d in self.documents]

    def subset(self, ids):
        wanted = set(ids)
        return replace(self, documents=tuple(d for d in self.documents if d.id in wanted))

    def with_labels(self, labels):
        """Return a copy whose labels come from the ``id -> label`` mapping."""
        docs = tuple(replace(d, label=labels.get(d.id)) for d in self.documents)
        return replace(self, documents=docs)

    def summary(self):
        counts = {lab.name.lower(): 0 for lab in LABELS}
        labeled = 0
        for d in self.documents:
            if d.label is not None:
                labeled += 1
                counts[d.label.name.lower()] += 1
        return {
            "total": len(self.documents),
            "labeled": labeled,
            "counts": counts,
            "warnings": list(self.warnings),
        }

    def summary_json(self):
        return json.dumps(self.summary(), indent=2, sort_keys=True)


@dataclass(frozen=True)
class Schema:
    id: str = "id"
    text: str = "text"
    label: str | None = "label"

    @classmethod
    def parse(cls, spec):
        """Build from ``"id=tweet_id,text=content,label=sentiment"`` style strings."""
        if isinstance(spec, Schema):
            return spec
        if isinstance(spec, dict):
            return cls(**spec)
        fields = {}
        for part in filter(None, (p.strip() for p in spec.split(","))):
            key, _, value = part.partition("=")
            if key not in ("id", "text", "label") or not value:
                raise CorpusError(f"bad schema entry {part!r}")
            fields[key] = value
        return cls(**fields)


def load_csv(path, schema=Schema()) -> Dataset:
    path = Path(path)
    schema = Schema.parse(schema)
    if not path.is_file():
        raise CorpusError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in (schema.id, schema.text):
            if col not in header:
                raise CorpusError(f"{path}: missing required column {col!r}")
        has_label = schema.label is not None and schema.label in header
        docs = []
        warnings = []
        seen = set()
        for lineno, row in enumerate(reader, start=2):
            doc_id = (row[schema.id] or "").strip()
            if not doc_id:
                raise CorpusError(f"{path}:{lineno}: empty id")
            if doc_id in seen:
                raise CorpusError(f"{path}:{lineno}: duplicate id {doc_id!r}")
            seen.add(doc_id)
            text = row[schema.text] or ""
            label = None
            if has_label:
                raw = row[schema.label]
                if raw not in (None, ""):
                    label = SentimentLabel.parse(raw)
                    if label is None:
                        warnings.append(f"line {lineno}: unparseable label {raw!r} for id {doc_id!r}")
            if not text.strip():
                warnings.append(f"line {lineno}: empty text for id {doc_id!r}")
            docs.append(Document(doc_id, text, label))
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return Dataset(tuple(docs), source=str(path), loaded_at=stamp, warnings=tuple(warnings))


def to_csv(dataset: Dataset, path=None, schema=Schema()):
    """Write RFC-4180 CSV; returns the text when ``path`` is None."""
    schema = Schema.parse(schema)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    label_col = schema.label or "label"
    writer.writerow([schema.id, schema.text, label_col])
    for d in dataset.documents:
        writer.writerow([d.id, d.text, "" if d.label is None else d.label.name.lower()])
    text = buf.getvalue()
    if path is None:
        return text
    Path(path).write_text(text, encoding="utf-8", newline="")
    return None


def split(dataset: Dataset, train_fraction: float, seed: int):
    """Seeded Fisher-Yates shuffle, then cut into (train, test)."""
    if not 0.0 < train_fraction < 1.0:
        raise CorpusError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    n = len(dataset)
    if n == 0:
        raise CorpusError("cannot split an empty dataset")
    order = list(range(n))
    rng = random.Random(seed)
    for i in range(n - 1, 0, -1):
        j = rng.randrange(i + 1)
        order[i], order[j] = order[j], order[i]
    cut = round(train_fraction * n)
    docs = dataset.documents
    train = replace(dataset, documents=tuple(docs[i] for i in order[:cut]))
    test = replace(dataset, documents=tuple(docs[i] for i in order[cut:]))
    return train, test


def label_distribution(dataset: Dataset):
    """Per-label counts and percentages; every document must be labeled."""
    counts = {lab: 0 for lab in LABELS}
    for d in dataset.documents:
        if d.label is None:
            raise CorpusError(f"document {d.id!r} is unlabeled")
        counts[d.label] += 1
    total = len(dataset)
    percentages = {lab: (100.0 * c / total if total else 0.0) for lab, c in counts.items()}
    return counts, percentages
