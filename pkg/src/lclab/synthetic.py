"""Template-generated corpora and a matching synonym lexicon.

``separable`` has four classes with disjoint cue vocabularies.  In
``confusable`` the classes come in two pairs (sad/devastated,
annoyed/furious); each pair shares most of its cue words, and the words that
tell the pair members apart appear only some of the time or with skewed
frequencies.  Both are bundled under ``lclab/data`` and can be regenerated
bit-for-bit from the seeds below.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from .augment import lexicon_from_dict, load_lexicon, write_lexicon
from .corpus import DatasetSplit, Example, LabelVocab, load_dataset, write_dataset

SIZES = (800, 100, 100)

FILLER = {
    "today": ["nowadays"], "the": ["this"], "and": ["plus"], "then": ["afterwards"],
    "we": ["us"], "i": ["me"], "went": ["walked"], "after": ["following"],
    "work": ["job"], "home": ["house"], "friend": ["pal", "buddy"], "again": ["anew"],
    "really": ["truly"], "was": ["seemed"], "about": ["regarding"], "news": ["report"],
}

SEPARABLE = {
    "angry": ["rage", "shouting", "slammed", "outraged", "hostile", "yelled", "fuming", "irate"],
    "afraid": ["scared", "trembling", "nervous", "panic", "dread", "frightened", "shaking", "alarmed"],
    "joyful": ["happy", "smiling", "delighted", "cheerful", "laughing", "glad", "thrilled", "elated"],
    "sad": ["crying", "tears", "lonely", "gloomy", "sorrow", "unhappy", "blue", "mournful"],
}

# pair -> shared cue words
FAMILIES = {
    "loss": ["grief", "missing", "gone", "heartache", "weeping", "hurt", "empty", "tearful"],
    "irritation": ["temper", "mad", "irritated", "snapped", "bothered", "cross", "frustrated", "grumbling"],
}
CONFUSABLE = {
    "sad": ("loss", ["melancholy", "wistful", "downcast", "somber"]),
    "devastated": ("loss", ["shattered", "crushed", "destroyed", "ruined"]),
    "annoyed": ("irritation", ["irked", "peeved", "miffed", "vexed"]),
    "furious": ("irritation", ["livid", "enraged", "seething", "incensed"]),
}
INTENSIFIERS = ["utterly", "completely", "totally", "deeply"]
# P(intensifier) for the milder / stronger member of each pair
INTENSITY = {"sad": 0.3, "devastated": 0.65, "annoyed": 0.3, "furious": 0.65}
DISTINCT_RATE = 0.6


def _synonym_ring(words):
    # each word maps to its two neighbours in the group, so replacements stay in-group
    n = len(words)
    return {w: [words[(i + 1) % n], words[(i - 1) % n]] for i, w in enumerate(words)}


def build_lexicon():
    mapping = dict(FILLER)
    for words in SEPARABLE.values():
        mapping.update(_synonym_ring(words))
    for words in FAMILIES.values():
        mapping.update(_synonym_ring(words))
    for _, distinct in CONFUSABLE.values():
        mapping.update(_synonym_ring(distinct))
    mapping.update(_synonym_ring(INTENSIFIERS))
    return lexicon_from_dict(mapping)


def _fillers(rng, lo=3, hi=6):
    words = list(FILLER)
    return [words[i] for i in rng.integers(len(words), size=rng.integers(lo, hi + 1))]


def _separable_text(rng, label):
    cues = SEPARABLE[label]
    picked = [cues[i] for i in rng.choice(len(cues), size=rng.integers(2, 4), replace=False)]
    toks = _fillers(rng) + picked
    return " ".join(toks[i] for i in rng.permutation(len(toks)))


def _confusable_text(rng, label):
    family, distinct = CONFUSABLE[label]
    shared = FAMILIES[family]
    toks = [shared[i] for i in rng.choice(len(shared), size=2, replace=False)]
    if rng.random() < DISTINCT_RATE:
        toks.append(distinct[rng.integers(len(distinct))])
    if rng.random() < INTENSITY[label]:
        toks.append(INTENSIFIERS[rng.integers(len(INTENSIFIERS))])
    toks += _fillers(rng)
    return " ".join(toks[i] for i in rng.permutation(len(toks)))


def _generate(labels, make_text, seed, sizes):
    rng = np.random.default_rng(seed)
    parts = []
    for n in sizes:
        # balanced classes, shuffled order
        ids = np.resize(np.arange(len(labels)), n)
        rng.shuffle(ids)
        parts.append([Example(make_text(rng, labels[i]), int(i)) for i in ids])
    return DatasetSplit(*parts, vocab=LabelVocab(labels))


def separable_corpus(seed=7, sizes=SIZES):
    return _generate(list(SEPARABLE), _separable_text, seed, sizes)


def confusable_corpus(seed=11, sizes=SIZES):
    return _generate(list(CONFUSABLE), _confusable_text, seed, sizes)


def data_dir():
    return Path(str(resources.files("lclab") / "data"))


def bundled(name):
    """Load a bundled corpus (``separable`` or ``confusable``)."""
    if name not in ("separable", "confusable"):
        raise ValueError(f"unknown bundled corpus {name!r}")
    return load_dataset(data_dir() / name, "csv")


def bundled_lexicon():
    return load_lexicon(data_dir() / "lexicon.tsv")


def write_bundled(root=None):
    root = data_dir() if root is None else Path(root)
    write_dataset(separable_corpus(), root / "separable")
    write_dataset(confusable_corpus(), root / "confusable")
    write_lexicon(build_lexicon(), root / "lexicon.tsv")
