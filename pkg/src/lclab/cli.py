"""Command-line entry point.

Subcommands: train, eval, entropy-report, subset-search, augment-preview,
gradcheck.  Exit codes: 0 success, 1 invalid input or config, 2 runtime
failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import logging
import sys
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from . import augment, corpus, gradcheck, metrics, subsets, trainer

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


class ConfigError(ValueError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class InputError(ValueError):
    """Malformed matrix or other user-supplied input."""


# ---------------------------------------------------------------------------
# experiment config

_TRAIN_FIELDS = {f.name: f.type for f in fields(trainer.TrainConfig) if f.name != "seed"}
_CASTS = {"int": int, "float": float, "str": str}
_EXPERIMENT_KEYS = {
    "dataset": str, "format": str, "text_column": str, "label_column": str,
    "lexicon": str, "seeds": str, "output_dir": str, "keep_classes": str, "jobs": int,
}


def parse_config(path):
    """Read a flat ``key = value`` file into a validated dict.

    Relative paths resolve against the config file's directory.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError("config", f"file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string("[experiment]\n" + path.read_text(encoding="utf-8"), source=str(path))
    except configparser.Error as exc:
        raise ConfigError("config", str(exc).splitlines()[0]) from exc
    raw = dict(parser["experiment"])

    cfg = {"format": "csv", "text_column": "text", "label_column": "label", "seeds": "0", "jobs": 1}
    train_kwargs = {}
    for key, value in raw.items():
        if key in _EXPERIMENT_KEYS:
            target = cfg
            cast = _EXPERIMENT_KEYS[key]
        elif key in _TRAIN_FIELDS:
            target = train_kwargs
            cast = _CASTS[_TRAIN_FIELDS[key]]
        else:
            raise ConfigError(key, "unknown key")
        try:
            target[key] = cast(value.strip())
        except ValueError as exc:
            raise ConfigError(key, f"cannot parse {value!r}") from exc

    for key in ("dataset", "output_dir"):
        if key not in cfg:
            raise ConfigError(key, "required")
    if cfg["format"] not in ("csv", "tsv"):
        raise ConfigError("format", "must be csv or tsv")
    try:
        cfg["seeds"] = [int(s) for s in cfg["seeds"].split(",") if s.strip()]
    except ValueError as exc:
        raise ConfigError("seeds", "must be a comma-separated list of integers") from exc
    if not cfg["seeds"]:
        raise ConfigError("seeds", "at least one seed required")
    if cfg["jobs"] < 1:
        raise ConfigError("jobs", "must be >= 1")

    alpha = train_kwargs.get("alpha", 0.5)
    if not 0.0 <= alpha <= 1.0:
        raise ConfigError("alpha", f"must be in [0, 1], got {alpha}")
    tau = train_kwargs.get("temperature", 0.3)
    if not tau > 0:
        raise ConfigError("temperature", f"must be > 0, got {tau}")
    try:
        cfg["train"] = trainer.TrainConfig(**train_kwargs)
    except ValueError as exc:
        raise ConfigError("train", str(exc)) from exc
    if cfg["train"].objective in ("scl", "lcl") and "lexicon" not in cfg:
        raise ConfigError("lexicon", f"required for objective {cfg['train'].objective!r}")

    base = path.parent
    for key in ("dataset", "output_dir", "lexicon"):
        if key in cfg:
            cfg[key] = base / cfg[key]
    if "keep_classes" in cfg:
        cfg["keep_classes"] = [c.strip() for c in cfg["keep_classes"].split(",") if c.strip()]
    return cfg


# ---------------------------------------------------------------------------
# file helpers


def _fmt(x):
    return repr(float(x))


def write_matrix_csv(path, matrix, header=None, integer=False):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if header is not None:
            writer.writerow(header)
        for row in np.asarray(matrix):
            writer.writerow([str(int(v)) if integer else _fmt(v) for v in row])


def read_matrix_csv(path):
    """Numeric matrix plus optional header names (first row if non-numeric)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise InputError(f"{path}: empty matrix file")
    header = None
    try:
        [float(v) for v in rows[0]]
    except ValueError:
        header, rows = rows[0], rows[1:]
    try:
        mat = np.array([[float(v) for v in r] for r in rows])
    except ValueError as exc:
        raise InputError(f"{path}: non-numeric entry") from exc
    if mat.ndim != 2 or mat.size == 0 or len({len(r) for r in rows}) != 1:
        raise InputError(f"{path}: malformed matrix")
    if header is not None and len(header) != mat.shape[1]:
        raise InputError(f"{path}: header width {len(header)} != {mat.shape[1]} columns")
    return mat, header


def write_json(path, payload):
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _format_of(path, fmt):
    if fmt:
        return fmt
    return "tsv" if Path(path).suffix.lower() == ".tsv" else "csv"


# ---------------------------------------------------------------------------
# commands


def cmd_train(args):
    cfg = parse_config(args.config)
    split = corpus.load_dataset(cfg["dataset"], cfg["format"], cfg["text_column"], cfg["label_column"])
    if "keep_classes" in cfg:
        split = corpus.filter_classes(split, cfg["keep_classes"])
    lexicon = augment.load_lexicon(cfg["lexicon"]) if "lexicon" in cfg else None
    out = Path(cfg["output_dir"])
    out.mkdir(parents=True, exist_ok=True)

    summary = trainer.run_seeds(split, cfg["train"], cfg["seeds"], lexicon, jobs=cfg["jobs"])
    for run in summary.runs:
        run_dir = out / f"seed_{run.seed}"
        run_dir.mkdir(exist_ok=True)
        run.model.save(run_dir / "model.ckpt")
        (run_dir / "history.csv").write_text(run.history.to_csv(), encoding="utf-8")
        (run_dir / "tokenizer.tsv").write_text(run.model.tokenizer.to_tsv(), encoding="utf-8")
        write_matrix_csv(run_dir / "confusion.csv", run.report.confusion, split.vocab.names, integer=True)

    report = summary.to_dict()
    report["config"] = {k: v for k, v in asdict(cfg["train"]).items() if k != "seed"}
    report["labels"] = list(split.vocab.names)
    report["best_epochs"] = [r.history.best_epoch for r in summary.runs]
    write_json(out / "report.json", report)
    acc = report["accuracy"]
    print(f"accuracy {acc['mean']:.4f} (sd {acc['sd']:.4f}) over {len(summary.runs)} seed(s) -> {out}")
    return EXIT_OK


def cmd_eval(args):
    model = trainer.TrainedModel.load(args.checkpoint)
    fmt = _format_of(args.data, args.format)
    rows = corpus.read_labeled_rows(args.data, fmt, args.text_column, args.label_column)
    names = list(model.label_names)
    unknown = sorted({label for _, label in rows} - set(names))
    if unknown:
        raise corpus.DatasetError(f"labels not in checkpoint vocabulary {names}: {unknown}")
    examples = [corpus.Example(text, names.index(label)) for text, label in rows]
    report = trainer.evaluate(model, examples)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "metrics.json", {"accuracy": report.accuracy, "weighted_f1": report.f1,
                                      "n": len(examples), "labels": names})
    write_matrix_csv(out / "confusion.csv", report.confusion, names, integer=True)
    write_matrix_csv(out / "scores.csv", report.scores, names)
    print(f"accuracy {report.accuracy:.4f}  weighted F1 {report.f1:.4f}  ({len(examples)} examples)")
    return EXIT_OK


def cmd_entropy(args):
    S, _ = read_matrix_csv(args.scores)
    try:
        curve = metrics.entropy_curve(S, args.k_max, atol=1e-6)
    except ValueError as exc:
        raise InputError(f"{args.scores}: {exc}") from exc
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["k", "mean_entropy"])
        for k, h in curve:
            writer.writerow([k, _fmt(h)])
    return EXIT_OK


def _combo_row(combo, total, names):
    ids = " ".join(str(c) for c in combo)
    label = " ".join(names[c] for c in combo) if names else ""
    return [ids, label, _fmt(total)]


def cmd_subsets(args):
    cm, names = read_matrix_csv(args.confusion)
    try:
        ranking = subsets.rank_subsets(cm, args.m, normalize=args.normalize)
        seq = subsets.hard_subset_sequence(cm, args.m, args.rounds, args.normalize) if args.rounds else []
    except ValueError as exc:
        raise InputError(f"{args.confusion}: {exc}") from exc
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["rank", "combination", "names", "offdiag_sum"])
        for i in range(len(ranking)):
            writer.writerow([i + 1, *_combo_row(*ranking[i], names)])
    if seq:
        ref = subsets._as_matrix(cm, args.normalize)
        for r, combo in enumerate(seq, start=1):
            total = sum(ref[a, b] for a in combo for b in combo if a != b)
            ids, label, value = _combo_row(combo, total, names)
            print(f"round {r}: [{ids}] {label} sum={value}")
    return EXIT_OK


def cmd_augment_preview(args):
    lexicon = augment.load_lexicon(args.lexicon)
    fmt = _format_of(args.data, args.format)
    rows = corpus.read_labeled_rows(args.data, fmt, args.text_column, args.label_column)
    rng = corpus.epoch_rng(args.seed, 2, 0, 0)
    for text, label in rows[: args.n]:
        toks = augment.tokenize(text)
        twin = augment.synonym_replace(toks, args.rate, lexicon, rng)
        print(f"[{label}] {text}\n    -> {' '.join(twin)}")
    return EXIT_OK


def cmd_gradcheck(args):
    results = gradcheck.run_suite(seed=args.seed, tolerance=args.tolerance)
    failed = 0
    for name, err, ok in results:
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'}  {name:<40s} max_rel_err={err:.3e}")
    print(f"{len(results) - failed}/{len(results)} checks passed (tolerance {args.tolerance:g})")
    return EXIT_OK if failed == 0 else EXIT_RUNTIME


def build_parser():
    p = argparse.ArgumentParser(prog="lclab", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="progress lines on stderr")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train and evaluate over seeds from a config file")
    t.add_argument("config")
    t.set_defaults(func=cmd_train)

    def data_args(q):
        q.add_argument("--format", choices=("csv", "tsv"))
        q.add_argument("--text-column", default="text")
        q.add_argument("--label-column", default="label")

    e = sub.add_parser("eval", help="evaluate a checkpoint on a labeled file")
    e.add_argument("checkpoint")
    e.add_argument("data")
    e.add_argument("--out", required=True, help="output directory")
    data_args(e)
    e.set_defaults(func=cmd_eval)

    h = sub.add_parser("entropy-report", help="top-k entropy curve from a score-matrix CSV")
    h.add_argument("scores")
    h.add_argument("--k-max", type=int)
    h.add_argument("--out", required=True)
    h.set_defaults(func=cmd_entropy)

    s = sub.add_parser("subset-search", help="rank class subsets of a confusion matrix")
    s.add_argument("confusion")
    s.add_argument("-m", type=int, default=4)
    s.add_argument("--rounds", type=int, default=0, help="also print this many disjoint hard subsets")
    s.add_argument("--normalize", action="store_true", help="row-normalize counts first")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_subsets)

    a = sub.add_parser("augment-preview", help="show synonym-replacement pairs")
    a.add_argument("data")
    a.add_argument("--lexicon", required=True)
    a.add_argument("-n", type=int, default=5)
    a.add_argument("--rate", type=float, default=0.3)
    a.add_argument("--seed", type=int, default=0)
    data_args(a)
    a.set_defaults(func=cmd_augment_preview)

    g = sub.add_parser("gradcheck", help="finite-difference check of losses and networks")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--tolerance", type=float, default=gradcheck.TOLERANCE)
    g.set_defaults(func=cmd_gradcheck)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (InputError, corpus.DatasetError, augment.LexiconError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, FloatingPointError, RuntimeError) as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
