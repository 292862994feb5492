"""Regenerate the bundled 600-document synthetic tweet fixture.

Positive and negative posts carry sentiment words from the seed lexicon;
neutral posts carry none.  Each class draws topical words from its own
vocabulary plus a shared pool, and a dozen Spanish posts exercise the
English filter.  The ``label`` column holds the intended sentiment.

    python scripts/make_fixture.py > src/sentigraph/data/fixture.csv
"""
import csv
import random
import sys

SEED = 2020
N_POS, N_NEU, N_NEG, N_FOREIGN = 204, 294, 90, 12

POSITIVE = ("love hope safe thank good great happy support care strong best win "
            "beautiful proud enjoy kind smile glad peace grateful brave blessed fun").split()
NEGATIVE = ("death die kill sad fear bad worst crisis panic sick hate terrible angry "
            "pain worry fail scared danger suffer disaster awful").split()
MILD_NEGATIVE = ["lost", "victim"]

SHARED = ("covid coronavirus pandemic lockdown vaccine mask home people week today news "
          "city government hospital test update report world state virus quarantine").split()
TOPICS = {
    "positive": ("family together community neighbor garden music cooking baking recipe "
                 "sunshine volunteer donation children puppy birthday recovery online").split(),
    "neutral": ("announced minister press conference schedule guideline office statistics "
                "weekly ministry official briefing county district data daily").split(),
    "negative": ("hospital icu shortage ventilator jobless layoff rent bills shutdown "
                 "infection outbreak burial patients overwhelmed nurse daily").split(),
}
FILLER = "the a to of and in is are we our for with this that on at it my all".split()
MENTIONS = ["@Alaa", "@WHO", "@CDCgov", "@nytimes", "@jane_doe", "@BBCNews"]
HASHTAGS = ["#COVID19", "#StayHome", "#StaySafe", "#Lockdown", "#coronavirus"]
EXTRAS = ["https://t.co/abc123", "💪", "🙏", "😷", "!!", "...", "100%", "&amp;"]
SPANISH = ("hola amigos quedate casa por favor situacion esta muy dificil "
           "gracias los medicos enfermeras del nuestra ciudad").split()


def post(rng, label):
    words = []
    topic = TOPICS[label]
    for _ in range(rng.randint(4, 7)):
        words.append(rng.choice(topic) if rng.random() < 0.6 else rng.choice(SHARED))
    if label == "positive":
        words += rng.sample(POSITIVE, rng.randint(1, 2))
        if rng.random() < 0.1:
            words += [rng.choice(MILD_NEGATIVE)] + rng.sample(POSITIVE, 2)
    elif label == "negative":
        words += rng.sample(NEGATIVE, rng.randint(1, 2))
    words += rng.sample(FILLER, rng.randint(2, 4))
    rng.shuffle(words)
    if rng.random() < 0.3:
        words.insert(0, rng.choice(MENTIONS))
    if rng.random() < 0.4:
        words.append(rng.choice(HASHTAGS))
    if rng.random() < 0.3:
        words.append(rng.choice(EXTRAS))
    text = " ".join(words)
    return text[0].upper() + text[1:] if rng.random() < 0.5 else text


def main(out=sys.stdout):
    rng = random.Random(SEED)
    rows = [(label, post(rng, label)) for label, n in
            (("positive", N_POS), ("neutral", N_NEU), ("negative", N_NEG)) for _ in range(n)]
    rows += [("", " ".join(rng.sample(SPANISH, 8))) for _ in range(N_FOREIGN)]
    rng.shuffle(rows)
    w = csv.writer(out, lineterminator="\r\n")
    w.writerow(["id", "text", "label"])
    for i, (label, text) in enumerate(rows, start=1):
        w.writerow([f"t{i:04d}", text, label])


if __name__ == "__main__":
    main()
