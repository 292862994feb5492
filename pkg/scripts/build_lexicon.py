"""Regenerate the bundled seed polarity lexicon.

Seeds are taken from the VADER lexicon (MIT licensed), restricted to common
English words, stemmed with the pipeline's Porter stemmer and bucketed into
polarities of +/-0.3, +/-0.6, +/-0.9.  Needs ``vaderSentiment`` and
``wordfreq`` (not runtime dependencies):

    python scripts/build_lexicon.py > src/sentigraph/data/polarity_lexicon.tsv
"""
import re
from importlib import resources

from wordfreq import zipf_frequency

from sentigraph.preprocess import load_stopwords, stem

SIZE = 600


def bucket(v):
    mag = abs(v)
    if mag < 1.5:
        out = 0.3
    elif mag < 2.5:
        out = 0.6
    else:
        out = 0.9
    return out if v > 0 else -out


raw = resources.files("vaderSentiment").joinpath("vader_lexicon.txt").read_text(encoding="utf-8")
stop = load_stopwords()
best = {}
for line in raw.splitlines():
    word, mean = line.split("\t")[:2]
    if not re.fullmatch(r"[a-z]{3,}", word) or word in stop:
        continue
    freq = zipf_frequency(word, "en")
    if freq < 2.5:
        continue
    term = stem(word)
    # the most frequent surface form decides the polarity of a shared stem
    if term not in best or freq > best[term][0]:
        best[term] = (freq, float(mean))

chosen = sorted(best.items(), key=lambda kv: (-kv[1][0], kv[0]))[:SIZE]
print("# sentigraph seed polarity lexicon v1")
print("# term<TAB>polarity; terms are Porter stems")
for term, (_, mean) in sorted(chosen):
    print("%s\t%+.1f" % (term, bucket(mean)))
