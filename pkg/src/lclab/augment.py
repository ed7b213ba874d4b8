"""Synonym-replacement augmentation and contrastive batch assembly."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class LexiconError(ValueError):
    pass


@dataclass(frozen=True)
class SynonymLexicon:
    entries: dict

    def __len__(self):
        return len(self.entries)

    def __contains__(self, word):
        return word.lower() in self.entries

    def synonyms(self, word):
        return self.entries.get(word.lower(), ())


def lexicon_from_dict(mapping):
    entries = {}
    for word, syns in mapping.items():
        key = word.strip().lower()
        merged = list(dict.fromkeys(list(entries.get(key, ())) + [s.strip() for s in syns if s.strip()]))
        entries[key] = merged
    for key, syns in entries.items():
        if not syns:
            raise LexiconError(f"empty synonym list for {key!r}")
        if all(s.lower() == key for s in syns):
            raise LexiconError(f"{key!r} is its own only synonym")
    return SynonymLexicon({k: tuple(v) for k, v in entries.items()})


def load_lexicon(path):
    """Read a ``word<TAB>syn1,syn2,...`` file; repeated words are merged."""
    mapping = {}
    with open(Path(path), newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh, delimiter="\t", quoting=csv.QUOTE_NONE), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2 or not row[0].strip():
                raise LexiconError(f"{path}:{lineno}: expected 'word<TAB>synonyms'")
            syns = [s.strip() for s in row[1].split(",") if s.strip()]
            if not syns:
                raise LexiconError(f"{path}:{lineno}: empty synonym list for {row[0]!r}")
            key = row[0].strip().lower()
            mapping[key] = mapping.get(key, []) + syns
    return lexicon_from_dict(mapping)


def write_lexicon(lexicon, path):
    with open(Path(path), "w", encoding="utf-8") as fh:
        for word in sorted(lexicon.entries):
            fh.write(f"{word}\t{','.join(lexicon.entries[word])}\n")


def tokenize(text):
    return text.split()


def replacement_count(n_tokens, n_covered, rate):
    if n_covered == 0:
        return 0
    return min(n_covered, max(1, int(round(rate * n_tokens))))


def synonym_replace(tokens, rate, lexicon, rng):
    """Replace ``round(rate * len(tokens))`` covered positions (at least one,
    at most all covered) with a random synonym each."""
    if not 0.0 < rate <= 1.0:
        raise ValueError(f"rate must be in (0, 1], got {rate}")
    tokens = list(tokens)
    covered = [i for i, tok in enumerate(tokens) if tok.lower() in lexicon.entries]
    m = replacement_count(len(tokens), len(covered), rate)
    if m == 0:
        return tokens
    for pos in rng.choice(covered, size=m, replace=False):
        syns = lexicon.entries[tokens[pos].lower()]
        tokens[pos] = syns[rng.integers(len(syns))]
    return tokens


@dataclass(frozen=True)
class AugmentedBatch:
    """``2K`` rows: originals first, then their augmented twins.

    ``pairing[i]`` is the 0-based index of row ``i``'s twin.
    """

    texts: list
    labels: np.ndarray
    pairing: np.ndarray

    @property
    def size(self):
        return len(self.texts)


def make_contrastive_batch(batch, lexicon, rng, rate=0.3):
    k = len(batch)
    if k < 1:
        raise ValueError("empty batch")
    originals = [tokenize(ex.text) for ex in batch]
    twins = [synonym_replace(toks, rate, lexicon, rng) for toks in originals]
    labels = np.array([ex.label for ex in batch] * 2, dtype=np.int64)
    idx = np.arange(2 * k)
    pairing = np.where(idx < k, idx + k, idx - k)
    return AugmentedBatch(originals + twins, labels, pairing)
