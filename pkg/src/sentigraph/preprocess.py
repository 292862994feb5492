"""Tweet normalisation: English filter, cleaning, tokenisation, stopwords, stemming."""
from __future__ import annotations

import functools
import re
import unicodedata
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from nltk.stem.porter import PorterStemmer

MENTION_TOKEN = "@username"
DEFAULT_ENGLISH_THRESHOLD = 0.15

_URL = re.compile(r"(?:https?://|www\.)\S*", re.IGNORECASE)
_MENTION = re.compile(r"@\w+")
_DISALLOWED = re.compile(r"[^A-Za-z0-9_\s]")
_EDGE_PUNCT = re.compile(r"^[^\w]+|[^\w]+$")
_WS = re.compile(r"\s+")

_porter = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)


def read_term_file(path):
    """One term per line; blank lines and ``#`` comments skipped."""
    if path is None:
        raise ValueError("no path given")
    text = Path(path).read_text(encoding="utf-8")
    return _parse_terms(text)


def _parse_terms(text):
    out = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(line)
    return out


def _resource(name):
    return resources.files("sentigraph").joinpath("data").joinpath(name).read_text(encoding="utf-8")


@functools.lru_cache(maxsize=None)
def _bundled(name):
    return frozenset(_parse_terms(_resource(name)))


def load_stopwords(path=None) -> frozenset:
    if path is None:
        return _bundled("stopwords_en.txt")
    return frozenset(t.lower() for t in read_term_file(path))


def load_wordlist(path=None) -> frozenset:
    if path is None:
        return _bundled("english_words.txt")
    return frozenset(t.lower() for t in read_term_file(path))


@dataclass(frozen=True)
class PipelineConfig:
    stopwords: frozenset = field(default_factory=load_stopwords)
    wordlist: frozenset = field(default_factory=load_wordlist, repr=False)
    english_threshold: float = DEFAULT_ENGLISH_THRESHOLD
    strip_urls: bool = True
    lowercase: bool = True
    remove_stopwords: bool = True
    keep_mentions: bool = True

    def __post_init__(self):
        if not 0.0 <= self.english_threshold <= 1.0:
            raise ValueError("english_threshold must lie in [0, 1]")
        if self.remove_stopwords and not self.stopwords:
            raise ValueError("stopword removal enabled with an empty stopword list")


@dataclass(frozen=True)
class TokenSequence:
    tokens: tuple[str, ...]
    dropped_count: int = 0

    def __len__(self):
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)


@dataclass(frozen=True)
class Rejected:
    doc_id: str
    reason: str = "non-English"


def is_english(text, threshold=DEFAULT_ENGLISH_THRESHOLD, wordlist=None) -> bool:
    words = text.split()
    if not words:
        return False
    if wordlist is None:
        wordlist = load_wordlist()
    hits = sum(1 for w in words if _EDGE_PUNCT.sub("", w.lower()) in wordlist)
    return hits / len(words) >= threshold


def _fold(text):
    # compatibility-decompose and drop combining marks so accented letters keep their base
    decomposed = unicodedata.normalize("NFKD", text)
    return "".join(ch for ch in decomposed if not unicodedata.combining(ch))


def clean_text(text, cfg: PipelineConfig | None = None) -> str:
    strip_urls = True if cfg is None else cfg.strip_urls
    lowercase = True if cfg is None else cfg.lowercase
    text = _fold(text)
    if strip_urls:
        text = _URL.sub(" ", text)
    # mentions are split out first so the sentinel keeps its "@"
    pieces = []
    for part in _MENTION.split(text):
        part = _DISALLOWED.sub(" ", part)
        pieces.append(part.lower() if lowercase else part)
    text = f" {MENTION_TOKEN} ".join(pieces)
    return _WS.sub(" ", text).strip()


def tokenize(cleaned) -> list:
    return cleaned.split()


def remove_stopwords(tokens, stoplist) -> list:
    return [t for t in tokens if t not in stoplist]


@functools.lru_cache(maxsize=1 << 16)
def stem(token) -> str:
    if token == MENTION_TOKEN:
        return token
    return _porter.stem(token, to_lowercase=False)


def preprocess_pipeline(doc, cfg: PipelineConfig | None = None):
    """Run one document through the full pipeline.

    Returns a TokenSequence, or Rejected when the document fails the English
    filter.  ``doc`` may be a corpus Document or a bare string.
    """
    if cfg is None:
        cfg = default_config()
    text = getattr(doc, "text", doc)
    doc_id = getattr(doc, "id", "")
    if not is_english(text, cfg.english_threshold, cfg.wordlist):
        return Rejected(doc_id)
    raw = tokenize(clean_text(text, cfg))
    kept = raw
    if cfg.remove_stopwords:
        kept = remove_stopwords(kept, cfg.stopwords)
    if not cfg.keep_mentions:
        kept = [t for t in kept if t != MENTION_TOKEN]
    stems = [stem(t) for t in kept]
    if cfg.remove_stopwords:
        # stems may land on a stopword ("ones" -> "on")
        stems = [s for s in stems if s not in cfg.stopwords]
    return TokenSequence(tuple(stems), dropped_count=len(raw) - len(stems))


@functools.lru_cache(maxsize=1)
def default_config():
    return PipelineConfig()
