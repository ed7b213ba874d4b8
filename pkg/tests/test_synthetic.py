import numpy as np

from lclab import synthetic
from lclab.augment import tokenize


def test_bundled_files_match_generator(tmp_path):
    synthetic.write_bundled(tmp_path)
    bundled = synthetic.data_dir()
    for rel in ["lexicon.tsv"] + [f"{n}/{p}.csv" for n in ("separable", "confusable")
                                  for p in ("train", "validation", "test")]:
        assert (tmp_path / rel).read_bytes() == (bundled / rel).read_bytes(), rel


def test_sizes_and_balance():
    for name in ("separable", "confusable"):
        split = synthetic.bundled(name)
        assert (len(split.train), len(split.validation), len(split.test)) == synthetic.SIZES
        assert split.vocab.size == 4
        counts = split.class_counts()
        assert counts.max() - counts.min() <= 1


def test_separable_cues_are_disjoint():
    cue_sets = [set(v) for v in synthetic.SEPARABLE.values()]
    assert sum(map(len, cue_sets)) == len(set().union(*cue_sets))
    split = synthetic.bundled("separable")
    owner = {w: name for name, cues in synthetic.SEPARABLE.items() for w in cues}
    for ex in split.train:
        assert {owner[t] for t in tokenize(ex.text) if t in owner} == {split.vocab.names[ex.label]}


def test_lexicon_covers_corpus():
    lex = synthetic.bundled_lexicon()
    toks = [t for ex in synthetic.bundled("confusable").train for t in tokenize(ex.text)]
    assert np.mean([t in lex for t in toks]) > 0.3
