"""Regenerate the bundled English wordlist used by the language filter.

Needs ``wordfreq`` and ``english-words`` (not runtime dependencies):

    pip install wordfreq english-words
    python scripts/build_wordlist.py > src/sentigraph/data/english_words.txt
"""
import re

from english_words import get_english_words_set
from wordfreq import top_n_list

TOP_N = 20000
FOREIGN = ("es", "fr", "de", "pt", "it", "nl", "id", "tr")

dictionary = get_english_words_set(["web2", "gcide"], lower=True)
common = top_n_list("en", TOP_N)
core = set(common[:1000])
frequent = set(common[:6000])
foreign = set()
for lang in FOREIGN:
    foreign.update(top_n_list(lang, 300))

words = set()
for w in common:
    if not re.fullmatch(r"[a-z]+", w):
        continue
    if w in foreign and w not in core:
        continue
    if w in dictionary or w in frequent:
        words.add(w)

print("# English wordlist derived from wordfreq top-%d, one term per line" % TOP_N)
for w in sorted(words):
    print(w)
