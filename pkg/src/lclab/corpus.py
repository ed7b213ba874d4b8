"""Labeled text datasets: loading, label vocabularies, class subsetting and
reproducible batching."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SPLITS = ("train", "validation", "test")


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class LabelVocab:
    names: tuple

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        if not self.names:
            raise DatasetError("label vocabulary is empty")
        if len(set(self.names)) != len(self.names):
            raise DatasetError("label names must be unique")

    @property
    def size(self):
        return len(self.names)

    def index(self, name):
        return self.names.index(name)


@dataclass(frozen=True)
class Example:
    text: str
    label: int


@dataclass(frozen=True)
class DatasetSplit:
    train: list
    validation: list
    test: list
    vocab: LabelVocab

    def __post_init__(self):
        c = self.vocab.size
        for part in SPLITS:
            for ex in getattr(self, part):
                if not 0 <= ex.label < c:
                    raise DatasetError(f"label id {ex.label} outside [0, {c}) in {part}")
                if not ex.text.strip():
                    raise DatasetError(f"empty text in {part}")
        present = {ex.label for ex in self.train}
        missing = [self.vocab.names[i] for i in range(c) if i not in present]
        if missing:
            raise DatasetError(f"classes with no training examples: {missing}")

    def class_counts(self, part="train"):
        return np.bincount([ex.label for ex in getattr(self, part)], minlength=self.vocab.size)


@dataclass(frozen=True)
class BatchPlan:
    batch_size: int
    seed: int = 0
    drop_last: bool = False

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


def _split_file(path, part, fmt):
    path = Path(path)
    for name in (part, "valid", "dev") if part == "validation" else (part,):
        candidate = path / f"{name}.{fmt}"
        if candidate.exists():
            return candidate
    raise FileNotFoundError(f"no {part}.{fmt} under {path}")


def read_labeled_rows(file, fmt, text_column, label_column):
    delimiter = "\t" if fmt == "tsv" else ","
    quoting = csv.QUOTE_NONE if fmt == "tsv" else csv.QUOTE_MINIMAL
    with open(file, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh, delimiter=delimiter, quoting=quoting)
        if reader.fieldnames is None:
            raise DatasetError(f"{file}: missing header row")
        for col in (text_column, label_column):
            if col not in reader.fieldnames:
                raise DatasetError(f"{file}: column not found: {col!r}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            text, label = row.get(text_column), row.get(label_column)
            if text is None or label is None:
                raise DatasetError(f"{file}:{lineno}: row is missing a column")
            label = label.strip()
            if not label:
                raise DatasetError(f"{file}:{lineno}: empty label")
            if not text.strip():
                raise DatasetError(f"{file}:{lineno}: empty text")
            rows.append((text, label))
    return rows


def load_dataset(path, format="csv", text_column="text", label_column="label"):
    """Load ``train``, ``validation`` and ``test`` files from directory ``path``.

    Label ids follow first appearance in the training file.  A label seen only
    in validation or test is an error.
    """
    if format not in ("csv", "tsv"):
        raise DatasetError(f"unsupported format {format!r}")
    path = Path(path)
    if not path.is_dir():
        raise FileNotFoundError(f"dataset directory not found: {path}")

    raw = {part: read_labeled_rows(_split_file(path, part, format), format, text_column, label_column)
           for part in SPLITS}
    names = list(dict.fromkeys(label for _, label in raw["train"]))
    ids = {name: i for i, name in enumerate(names)}
    for part in ("validation", "test"):
        unknown = sorted({label for _, label in raw[part]} - ids.keys())
        if unknown:
            raise DatasetError(f"labels in {part} absent from train: {unknown}")
    data = {part: [Example(text, ids[label]) for text, label in raw[part]] for part in SPLITS}
    return DatasetSplit(vocab=LabelVocab(names), **data)


def write_dataset(split, path, format="csv", text_column="text", label_column="label"):
    """Write ``split`` as three files readable by :func:`load_dataset`."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    delimiter = "\t" if format == "tsv" else ","
    for part in SPLITS:
        with open(path / f"{part}.{format}", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
            writer.writerow([text_column, label_column])
            for ex in getattr(split, part):
                writer.writerow([ex.text, split.vocab.names[ex.label]])


def filter_classes(split, keep):
    """Keep only the classes in ``keep`` (ids or names), remapped by ascending id."""
    c = split.vocab.size
    ids = set()
    for k in keep:
        if isinstance(k, str):
            if k not in split.vocab.names:
                raise DatasetError(f"unknown class name {k!r}")
            k = split.vocab.index(k)
        if not 0 <= k < c:
            raise DatasetError(f"class id {k} outside [0, {c})")
        ids.add(int(k))
    if len(ids) < 2:
        raise DatasetError("keep at least two classes")
    order = sorted(ids)
    remap = {old: new for new, old in enumerate(order)}

    def sub(part):
        return [Example(ex.text, remap[ex.label]) for ex in part if ex.label in remap]

    return DatasetSplit(
        train=sub(split.train),
        validation=sub(split.validation),
        test=sub(split.test),
        vocab=LabelVocab([split.vocab.names[i] for i in order]),
    )


def epoch_rng(seed, *keys):
    """Counter-based generator keyed by ``(seed, *keys)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, keys)])))


def batch_iter(examples, plan, epoch):
    """Shuffled batches for one epoch; the order depends only on (seed, epoch)."""
    n = len(examples)
    if n == 0:
        raise ValueError("no examples to batch")
    k = plan.batch_size
    if plan.drop_last and k > n:
        raise ValueError(f"batch size {k} exceeds {n} examples with drop_last set")
    order = epoch_rng(plan.seed, 0, epoch).permutation(n)
    stop = n - n % k if plan.drop_last else n
    return [[examples[j] for j in order[i:i + k]] for i in range(0, stop, k)]
