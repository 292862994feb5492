"""Command-line entry point.

    sentigraph run [flags]                  whole experiment
    sentigraph preprocess|label|featurize|train|evaluate|context|report [flags]

Settings resolve in this order, later winning: built-in defaults, the
``--config`` TOML file (or, for stage commands, the run directory's
``config.json``), ``SENTIGRAPH_*`` environment variables, command-line
flags.  Exit status: 0 success, 1 validation error, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import typing
from dataclasses import fields
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import experiment
from .experiment import ExperimentConfig, StageError, ValidationError

ENV_PREFIX = "SENTIGRAPH_"
EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2


def _field_types():
    hints = typing.get_type_hints(ExperimentConfig)
    return {f.name: hints[f.name] for f in fields(ExperimentConfig)}


def _coerce(name, value):
    if not isinstance(value, str):
        return value
    kind = _field_types()[name]
    text = value.strip()
    if kind is bool:
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ValidationError(f"{name}: expected a boolean, got {value!r}")
    try:
        if kind is int or kind == (int | None):
            return int(text)
        if kind is float:
            return float(text)
    except ValueError:
        raise ValidationError(f"{name}: bad value {value!r}") from None
    if kind is dict:
        return json.loads(text)
    return text


def load_config_file(path):
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"config file not found: {path}")
    if path.suffix == ".json":
        data = json.loads(path.read_text(encoding="utf-8"))
        data = data.get("config", data)
    else:
        try:
            data = tomllib.loads(path.read_text(encoding="utf-8"))
        except tomllib.TOMLDecodeError as exc:
            raise ValidationError(f"{path}: {exc}") from None
    return {k.replace("-", "_"): v for k, v in data.items()}


def env_overrides(environ=None):
    environ = os.environ if environ is None else environ
    out = {}
    for name in _field_types():
        key = ENV_PREFIX + name.upper()
        if key in environ:
            out[name] = _coerce(name, environ[key])
    return out


FLAGS = (
    ("--input", "input", str, "CSV file (default: bundled 600-post fixture)"),
    ("--schema", "schema", str, "column mapping, e.g. id=tweet_id,text=content,label=sentiment"),
    ("--lexicon", "lexicon", str, "polarity lexicon file (term<TAB>polarity)"),
    ("--stopwords", "stopwords", str, "stopword list, one term per line"),
    ("--wordlist", "wordlist", str, "English wordlist for the language filter"),
    ("--english-threshold", "english_threshold", float, "minimum wordlist hit ratio (default 0.15)"),
    ("--neutral-band", "neutral_band", float, "polarity band mapped to neutral (default 0)"),
    ("--split", "split", float, "training fraction (default 0.8)"),
    ("--seed", "seed", int, "random seed (default 42)"),
    ("--min-count", "min_count", int, "minimum corpus occurrences per term (default 500; 2 for the fixture)"),
    ("--models", "models", str, "comma list of nb,lr,svm,dt,rf,gbt"),
    ("--features", "features", str, "comma list of bow,tfidf"),
    ("--k", "k", int, "keywords per sentiment (default 50)"),
    ("--keyword-scoring", "keyword_scoring", str, "frequency (default) or distinctive"),
    ("--out", "out", str, "run directory (default runs/latest)"),
    ("--jobs", "jobs", int, "parallel training jobs (default 1)"),
)


def build_parser():
    parser = argparse.ArgumentParser(prog="sentigraph", description="Microblog sentiment experiment pipeline.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run",) + tuple(experiment.STAGES):
        p = sub.add_parser(name, help=f"run the {name} stage" if name != "run" else "run every stage")
        p.add_argument("--config", help="TOML (or JSON) config file")
        for flag, dest, typ, help_ in FLAGS:
            p.add_argument(flag, dest=dest, type=typ, default=None, help=help_)
        p.add_argument("--force", action="store_true", default=None, help="overwrite existing outputs")
        p.add_argument("--drop-mentions", dest="keep_mentions", action="store_false", default=None,
                       help="drop the @username token")
        p.add_argument("--keep-urls", dest="strip_urls", action="store_false", default=None)
        if name in ("train", "evaluate"):
            p.add_argument("--model", dest="only_models", default=None,
                           help="restrict this stage to some models (comma list)")
    return parser


def resolve_config(args, environ=None):
    values = {}
    if args.config:
        values.update(load_config_file(args.config))
    elif args.command != "run":
        out = args.out or (environ or os.environ).get(ENV_PREFIX + "OUT") or ExperimentConfig.out
        stored = Path(out) / "config.json"
        if stored.is_file():
            values.update(load_config_file(stored))
            values.pop("force", None)
    values.update(env_overrides(environ))
    cli = {k: v for k, v in vars(args).items() if k in _field_types() and v is not None}
    restrict_features = None
    if args.command in ("train", "evaluate") and "features" in cli and "features" in values:
        # on a stage command --features picks a subset of the run's extractors
        restrict_features = experiment.as_list(cli.pop("features"))
    values.update(cli)
    cfg = ExperimentConfig.from_dict(values)
    return cfg, restrict_features


def main(argv=None, environ=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg, only_features = resolve_config(args, environ)
        if args.command == "run":
            run = experiment.run_experiment(cfg)
            print(f"run complete: {run.dir}")
        else:
            kwargs = {}
            if args.command in ("train", "evaluate"):
                if args.only_models:
                    kwargs["only_models"] = [experiment.models.resolve_kind(m)
                                             for m in experiment.as_list(args.only_models)]
                if only_features:
                    kwargs["only_features"] = only_features
            run = experiment.run_stage(cfg, args.command, **kwargs)
            if args.command == "report":
                print(run.path("report.md").read_text(encoding="utf-8"), end="")
            else:
                print(f"{args.command} complete: {run.dir}")
    except (ValidationError, experiment.models.ModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - top-level guard maps anything else to the runtime code
        print(f"error: {exc!r}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
