"""End-to-end experiment: staged artifacts under one run directory.

Stages and what they write (relative to the run directory):

    preprocess  tokens.json
    label       labels.json
    featurize   split.json, vocab.json, features/{bow,tfidf}_{train,test}.mtx
    train       models/<model>_<features>.json
    evaluate    reports/<model>_<features>.json, roc/<model>_<features>_<class>.csv,
                comparison.json, comparison.md
    context     context.json, keywords/<label>.csv, wordcloud/<label>.json
    report      report.md

``run_experiment`` runs them in order through the same functions, so a
stage-by-stage run and a whole run produce identical files.
"""
from __future__ import annotations

import hashlib
import json
import logging
import math
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from importlib import resources
from pathlib import Path


from . import context as ctx
from . import models
from .corpus import LABELS, Dataset, Document, Schema, SentimentLabel, load_csv, split
from .evaluation import EvaluationReport, compare_models, comparison_markdown, evaluate, roc_csv
from .features import SparseFeatureMatrix, build_vocabulary, featurize
from .polarity import PolarityLexicon, score, to_label
from .preprocess import PipelineConfig, Rejected, TokenSequence, load_stopwords, load_wordlist, preprocess_pipeline

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
FEATURE_KINDS = ("bow", "tfidf")
FIXTURE_MIN_COUNT = 2
FULL_CORPUS_MIN_COUNT = 500
# fields that change where or how fast a run happens, not what it computes
_UNHASHED = ("out", "jobs", "force")


class ValidationError(ValueError):
    """Bad configuration or missing upstream artifact (exit code 1)."""


class StageError(RuntimeError):
    """A stage failed while running (exit code 2)."""

    def __init__(self, stage, cause):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


def bundled_fixture():
    return str(resources.files("sentigraph").joinpath("data").joinpath("fixture.csv"))


@dataclass
class ExperimentConfig:
    input: str | None = None
    schema: str = "id=id,text=text,label=label"
    lexicon: str | None = None
    stopwords: str | None = None
    wordlist: str | None = None
    english_threshold: float = 0.15
    strip_urls: bool = True
    lowercase: bool = True
    keep_mentions: bool = True
    neutral_band: float = 0.0
    split: float = 0.8
    seed: int = 42
    min_count: int | None = None
    models: list = field(default_factory=lambda: list(models.KINDS))
    features: list = field(default_factory=lambda: list(FEATURE_KINDS))
    hyperparameters: dict = field(default_factory=dict)
    k: int = 50
    keyword_scoring: str = "frequency"
    out: str = "runs/latest"
    jobs: int = 1
    force: bool = False

    def resolved(self):
        """Fill defaults that depend on other fields and canonicalise names."""
        cfg = replace(self)
        if cfg.input is None:
            cfg.input = bundled_fixture()
            if cfg.min_count is None:
                cfg.min_count = FIXTURE_MIN_COUNT
        if cfg.min_count is None:
            cfg.min_count = FULL_CORPUS_MIN_COUNT
        cfg.models = [models.resolve_kind(m) for m in as_list(cfg.models)]
        cfg.features = [f for f in as_list(cfg.features)]
        hp = {}
        for kind in cfg.models:
            merged = dict(models.DEFAULT_HYPERPARAMETERS[kind])
            if "seed" in merged:
                merged["seed"] = cfg.seed
            for key in (models.SHORT_NAMES[kind], kind):
                merged.update(cfg.hyperparameters.get(key, {}))
            hp[kind] = merged
        cfg.hyperparameters = hp
        return cfg

    def validate(self):
        if not self.input or not Path(self.input).is_file():
            raise ValidationError(f"input file not found: {self.input}")
        if not 0.0 < self.split < 1.0:
            raise ValidationError(f"split must lie strictly between 0 and 1, got {self.split}")
        if self.min_count is not None and self.min_count < 1:
            raise ValidationError("min_count must be >= 1")
        if self.k < 1:
            raise ValidationError("k must be >= 1")
        if self.jobs < 1:
            raise ValidationError("jobs must be >= 1")
        if not 0.0 <= self.english_threshold <= 1.0:
            raise ValidationError("english_threshold must lie in [0, 1]")
        if self.neutral_band < 0:
            raise ValidationError("neutral_band must be non-negative")
        if self.keyword_scoring not in ("frequency", "distinctive"):
            raise ValidationError(f"keyword_scoring must be frequency or distinctive, got {self.keyword_scoring!r}")
        for f in as_list(self.features):
            if f not in FEATURE_KINDS:
                raise ValidationError(f"unknown feature kind {f!r}; choose from {FEATURE_KINDS}")
        for m in as_list(self.models):
            try:
                models.resolve_kind(m)
            except models.ModelError as exc:
                raise ValidationError(str(exc)) from None
        for path in (self.lexicon, self.stopwords, self.wordlist):
            if path is not None and not Path(path).is_file():
                raise ValidationError(f"resource file not found: {path}")
        try:
            Schema.parse(self.schema)
        except ValueError as exc:
            raise ValidationError(str(exc)) from None
        return self

    def to_dict(self):
        return asdict(self)

    @property
    def hash(self):
        data = {k: v for k, v in self.to_dict().items() if k not in _UNHASHED}
        blob = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


def as_list(value):
    if isinstance(value, str):
        return [v.strip() for v in value.split(",") if v.strip()]
    return list(value)


def pipeline_config(cfg):
    return PipelineConfig(
        stopwords=load_stopwords(cfg.stopwords),
        wordlist=load_wordlist(cfg.wordlist),
        english_threshold=cfg.english_threshold,
        strip_urls=cfg.strip_urls,
        lowercase=cfg.lowercase,
        keep_mentions=cfg.keep_mentions,
    )


# ---------------------------------------------------------------- artifact io

class Run:
    """Paths and typed read/write helpers for one run directory."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.dir = Path(cfg.out)
        self.meta = {"format_version": FORMAT_VERSION, "config_hash": cfg.hash}
        # provenance line for the non-JSON artifacts
        self.stamp = f"config_hash={self.meta['config_hash']} format_version={FORMAT_VERSION}"

    def path(self, *parts):
        return self.dir.joinpath(*parts)

    def require(self, *parts, stage):
        p = self.path(*parts)
        if not p.is_file():
            raise ValidationError(f"missing artifact {p} (run the {stage!r} stage first)")
        return p

    def guard(self, *parts):
        p = self.path(*parts)
        if p.exists() and not self.cfg.force:
            raise ValidationError(f"{p} already exists; pass --force to overwrite")
        p.parent.mkdir(parents=True, exist_ok=True)
        return p

    def write_json(self, parts, payload, guard=True):
        p = self.guard(*parts) if guard else self.path(*parts)
        p.parent.mkdir(parents=True, exist_ok=True)
        body = {"meta": self.meta, **payload}
        p.write_text(json.dumps(body, indent=1, sort_keys=True) + "\n", encoding="utf-8")
        return p

    def read_json(self, parts, stage):
        data = json.loads(self.require(*parts, stage=stage).read_text(encoding="utf-8"))
        return data

    def write_text(self, parts, text, guard=True):
        p = self.guard(*parts) if guard else self.path(*parts)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text, encoding="utf-8")
        return p

    def write_config(self):
        self.dir.mkdir(parents=True, exist_ok=True)
        body = {"meta": self.meta, "config": self.cfg.to_dict()}
        self.path("config.json").write_text(json.dumps(body, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def job_name(kind, feat):
    return f"{models.SHORT_NAMES[kind]}_{feat}"


# ---------------------------------------------------------------- stages

def stage_preprocess(run: Run):
    cfg = run.cfg
    dataset = load_csv(cfg.input, Schema.parse(cfg.schema))
    pcfg = pipeline_config(cfg)
    docs = []
    rejected = []
    for doc in dataset:
        seq = preprocess_pipeline(doc, pcfg)
        if isinstance(seq, Rejected):
            rejected.append({"id": doc.id, "reason": seq.reason})
        else:
            docs.append({"id": doc.id, "tokens": list(seq.tokens), "dropped": seq.dropped_count})
    run.write_json(("tokens.json",), {"dataset": dataset.summary(), "documents": docs, "rejected": rejected})
    log.info("preprocess: %d accepted, %d rejected", len(docs), len(rejected))


def _load_tokens(run):
    data = run.read_json(("tokens.json",), stage="preprocess")
    return {d["id"]: TokenSequence(tuple(d["tokens"]), d["dropped"]) for d in data["documents"]}, data


def stage_label(run: Run):
    cfg = run.cfg
    tokens, tdata = _load_tokens(run)
    lex = PolarityLexicon.load(cfg.lexicon)
    labels = {}
    scores = {}
    for doc_id, seq in tokens.items():
        s = score(seq.tokens, lex)
        labels[doc_id] = to_label(s, cfg.neutral_band).name.lower()
        scores[doc_id] = [s.value, s.matched_terms]
    counts = {lab.name.lower(): 0 for lab in LABELS}
    for v in labels.values():
        counts[v] += 1
    total = len(labels)
    percentages = {k: (100.0 * v / total if total else 0.0) for k, v in counts.items()}
    run.write_json(("labels.json",), {
        "lexicon": {"name": lex.name, "version": lex.version, "size": len(lex)},
        "neutral_band": cfg.neutral_band,
        "labels": labels,
        "scores": scores,
        "counts": counts,
        "percentages": percentages,
        "rejected": len(tdata["rejected"]),
        "input": tdata["dataset"],
    })
    log.info("label: %s", counts)


def _labeled(run):
    tokens, _ = _load_tokens(run)
    ldata = run.read_json(("labels.json",), stage="label")
    order = list(tokens)  # load order
    labels = {i: SentimentLabel.parse(ldata["labels"][i]) for i in order}
    return tokens, labels, order


def stage_featurize(run: Run):
    cfg = run.cfg
    tokens, labels, order = _labeled(run)
    ds = Dataset(tuple(Document(i, "", labels[i]) for i in order))
    train, test = split(ds, cfg.split, cfg.seed)
    train_ids, test_ids = train.ids, test.ids
    vocab = build_vocabulary([tokens[i] for i in train_ids], cfg.min_count)
    run.write_json(("split.json",), {
        "train": {"ids": train_ids, "labels": [int(labels[i]) for i in train_ids]},
        "test": {"ids": test_ids, "labels": [int(labels[i]) for i in test_ids]},
    })
    run.write_json(("vocab.json",), {"vocabulary": vocab.to_dict(), "fingerprint": vocab.fingerprint})
    header = (run.stamp,)
    for feat in cfg.features:
        for part, ids in (("train", train_ids), ("test", test_ids)):
            X = featurize([tokens[i] for i in ids], vocab, feat)
            run.write_text(("features", f"{feat}_{part}.mtx"), X.to_coordinate_text(header))
    log.info("featurize: %d train / %d test, |V| = %d", len(train_ids), len(test_ids), len(vocab))


def _matrix(run, feat, part):
    p = run.require("features", f"{feat}_{part}.mtx", stage="featurize")
    return SparseFeatureMatrix.from_coordinate_text(p.read_text(encoding="utf-8"))


def _split(run):
    return run.read_json(("split.json",), stage="featurize")


def train_one(run: Run, kind, feat):
    X = _matrix(run, feat, "train")
    y = _split(run)["train"]["labels"]
    model = models.train(kind, X, y, **run.cfg.hyperparameters[kind])
    p = run.guard("models", f"{job_name(kind, feat)}.json")
    body = model.to_dict()
    body["meta"] = run.meta
    p.write_text(json.dumps(body, sort_keys=True, separators=(",", ":")) + "\n", encoding="utf-8")
    return p


def _test_fingerprint(split_data):
    blob = json.dumps(split_data["test"], sort_keys=True).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]


def evaluate_one(run: Run, kind, feat):
    p = run.require("models", f"{job_name(kind, feat)}.json", stage="train")
    model = models.TrainedModel.load(p)
    X = _matrix(run, feat, "test")
    split_data = _split(run)
    y = split_data["test"]["labels"]
    dist = models.predict_dist(model, X)
    pred = models.predict(model, X)
    report = evaluate(y, pred, dist, model=kind, features=feat, test_fingerprint=_test_fingerprint(split_data))
    name = job_name(kind, feat)
    run.write_json(("reports", f"{name}.json"), {"report": report.to_dict()})
    for cls, pts in report.roc.items():
        pts = [(math.inf if t is None else t, f, r) for t, f, r in pts]
        run.write_text(("roc", f"{name}_{cls}.csv"), f"# {run.stamp}\n" + roc_csv(pts))
    return report


def _job(args):
    cfg, kind, feat, do_train, do_eval = args
    run = Run(cfg)
    if do_train:
        train_one(run, kind, feat)
    if do_eval:
        evaluate_one(run, kind, feat)
    return kind, feat


def _jobs(run, do_train, do_eval, only_models=None, only_features=None):
    cfg = run.cfg
    todo = [(cfg, k, f, do_train, do_eval)
            for f in (only_features or cfg.features)
            for k in (only_models or cfg.models)]
    if cfg.jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=min(cfg.jobs, len(todo))) as pool:
            list(pool.map(_job, todo))
    else:
        for item in todo:
            _job(item)


def stage_train(run: Run, only_models=None, only_features=None):
    for feat in (only_features or run.cfg.features):
        run.require("features", f"{feat}_train.mtx", stage="featurize")
    _jobs(run, True, False, only_models, only_features)


def load_reports(run: Run):
    reports = []
    for feat in run.cfg.features:
        for kind in run.cfg.models:
            p = run.path("reports", f"{job_name(kind, feat)}.json")
            if p.is_file():
                reports.append(EvaluationReport.from_dict(json.loads(p.read_text(encoding="utf-8"))["report"]))
    return reports


def write_comparison(run: Run):
    reports = load_reports(run)
    if not reports:
        return None
    table = compare_models(reports)
    run.write_json(("comparison.json",), {"table": {f: [list(r) for r in rows] for f, rows in table.items()}},
                   guard=False)
    run.write_text(("comparison.md",), f"<!-- {run.stamp} -->\n" + comparison_markdown(table, models.DISPLAY_NAMES),
                   guard=False)
    return table


def stage_evaluate(run: Run, only_models=None, only_features=None):
    _jobs(run, False, True, only_models, only_features)
    write_comparison(run)


def stage_context(run: Run):
    cfg = run.cfg
    tokens, labels, order = _labeled(run)
    split_data = _split(run)
    train_ids, test_ids = split_data["train"]["ids"], split_data["test"]["ids"]
    by_label = {lab.name.lower(): [tokens[i] for i in train_ids if labels[i] == lab] for lab in LABELS}
    held_out = {lab.name.lower(): [tokens[i] for i in test_ids if labels[i] == lab] for lab in LABELS}
    if cfg.keyword_scoring == "distinctive":
        rankings = ctx.rank_keywords_distinctive({k: v for k, v in by_label.items() if v})
    else:
        rankings = {k: ctx.rank_keywords(v, k) for k, v in by_label.items() if v}
    rankings[ctx.OVERALL] = ctx.rank_keywords([tokens[i] for i in order], ctx.OVERALL)
    out = {}
    for name, ranking in rankings.items():
        top = ctx.top_k(ranking, cfg.k)
        entry = {"top_k": [[t, imp] for t, imp in top.entries], "k": cfg.k}
        if name != ctx.OVERALL:
            docs = held_out.get(name) or []
            entry["held_out"] = len(docs)
            entry["accuracy"] = ctx.context_accuracy(top, docs) if docs else None
        out[name] = entry
        run.write_text(("keywords", f"{name}.csv"), f"# {run.stamp}\n" + top.to_csv())
        run.write_json(("wordcloud", f"{name}.json"), {"frequencies": ctx.export_frequencies(top)})
    run.write_json(("context.json",), {"scoring": cfg.keyword_scoring, "k": cfg.k, "sentiments": out})


REPORT_ARTIFACTS = ("config.json", "labels.json", "vocab.json", "comparison.json", "context.json")


def stage_report(run: Run):
    missing = [a for a in REPORT_ARTIFACTS if not run.path(a).is_file()]
    missing += [f"reports/{job_name(k, f)}.json" for f in run.cfg.features for k in run.cfg.models
                if not run.path("reports", f"{job_name(k, f)}.json").is_file()]
    if missing:
        raise ValidationError("incomplete run, missing: " + ", ".join(missing))
    text = render_report(run)
    run.write_text(("report.md",), text, guard=False)
    return text


def render_report(run: Run):
    labels = run.read_json(("labels.json",), stage="label")
    comparison = run.read_json(("comparison.json",), stage="evaluate")["table"]
    context = run.read_json(("context.json",), stage="context")
    aucs = {}
    for r in load_reports(run):
        aucs[(r.model, r.features)] = r.macro_auc
    lines = [f"<!-- {run.stamp} -->", "# Sentiment experiment report", "",
             f"Config hash `{run.meta['config_hash']}`, input `{run.cfg.input}`.", "",
             "## Sentiment distribution", "",
             "| Sentiment | Documents | Share |", "|---|---|---|"]
    for name in ("positive", "neutral", "negative"):
        lines.append(f"| {name.capitalize()} | {labels['counts'][name]} | {labels['percentages'][name]:.1f}% |")
    lines += ["", f"{labels['rejected']} documents rejected by the English filter.", "",
              "## Classifier comparison", ""]
    for feat, rows in comparison.items():
        lines += [f"### {'Bag of words' if feat == 'bow' else 'TF-IDF'}", "",
                  "| Model | Accuracy | Precision | Recall | F1 | Macro AUC |", "|---|---|---|---|---|---|"]
        for model, acc, p, r, f1 in rows:
            lines.append(f"| {models.DISPLAY_NAMES.get(model, model)} | {acc:.2%} | {p:.2%} | {r:.2%} | "
                         f"{f1:.2%} | {aucs.get((model, feat), float('nan')):.3f} |")
        lines.append("")
    k = context["k"]
    lines += [f"## Top-{k} keywords", ""]
    for name, entry in context["sentiments"].items():
        terms = ", ".join(t for t, _ in entry["top_k"])
        lines += [f"**{name.capitalize()}**: {terms}", ""]
    lines += ["## Context accuracy", "", f"Share of held-out documents containing at least one top-{k} keyword.",
              "", "| Sentiment | Held-out documents | Accuracy |", "|---|---|---|"]
    for name, entry in context["sentiments"].items():
        if name == ctx.OVERALL:
            continue
        acc = entry["accuracy"]
        lines.append(f"| {name.capitalize()} | {entry['held_out']} | {'n/a' if acc is None else f'{acc:.1%}'} |")
    return "\n".join(lines) + "\n"


STAGES = {
    "preprocess": stage_preprocess,
    "label": stage_label,
    "featurize": stage_featurize,
    "train": stage_train,
    "evaluate": stage_evaluate,
    "context": stage_context,
    "report": stage_report,
}


def prepare(cfg: ExperimentConfig) -> Run:
    try:
        cfg = cfg.resolved()
    except models.ModelError as exc:
        raise ValidationError(str(exc)) from None
    return Run(cfg.validate())


def run_stage(cfg: ExperimentConfig, stage, **kwargs):
    run = prepare(cfg)
    existing = run.path("config.json")
    if existing.is_file():
        stored = json.loads(existing.read_text(encoding="utf-8"))["meta"]["config_hash"]
        if stored != run.meta["config_hash"] and not run.cfg.force:
            raise ValidationError(f"{run.dir} was created with a different config ({stored}); pass --force")
    run.write_config()
    _execute(run, stage, STAGES[stage], **kwargs)
    return run


def _execute(run, name, fn, **kwargs):
    failed = run.path("FAILED.json")
    try:
        result = fn(run, **kwargs)
    except ValidationError:
        raise
    except Exception as exc:
        run.dir.mkdir(parents=True, exist_ok=True)
        failed.write_text(json.dumps({"stage": name, "error": repr(exc),
                                      "traceback": traceback.format_exc()}, indent=1), encoding="utf-8")
        raise StageError(name, exc) from exc
    if failed.exists():
        failed.unlink()
    return result


def run_experiment(cfg: ExperimentConfig) -> Run:
    run = prepare(cfg)
    if run.dir.exists() and any(run.dir.iterdir()) and not run.cfg.force:
        raise ValidationError(f"{run.dir} is not empty; pass --force to overwrite")
    run.write_config()
    for name, fn in STAGES.items():
        log.info("stage %s", name)
        _execute(run, name, fn)
    return run
