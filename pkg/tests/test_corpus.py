import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lclab.corpus import (BatchPlan, DatasetError, DatasetSplit, Example, LabelVocab, batch_iter,
                          filter_classes, load_dataset, write_dataset)


def write_rows(path, rows, header=("text", "label"), delimiter=","):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter=delimiter)
        w.writerow(header)
        w.writerows(rows)


def make_dir(tmp_path, train, validation=None, test=None, **kw):
    for name, rows in [("train", train), ("validation", validation or train), ("test", test or train)]:
        write_rows(tmp_path / f"{name}.csv", rows, **kw)
    return tmp_path


def toy_split(c=4, per_class=3):
    names = [f"c{i}" for i in range(c)]
    train = [Example(f"text {i} {j}", i) for i in range(c) for j in range(per_class)]
    return DatasetSplit(train, train[:c], train[-c:], LabelVocab(names))


class TestLoad:
    def test_first_appearance_order(self, tmp_path):
        d = make_dir(tmp_path, [("i feel low", "sad"), ("great day", "joyful"), ("so blue", "sad")])
        split = load_dataset(d)
        assert split.vocab.names == ("sad", "joyful")
        assert [ex.label for ex in split.train] == [0, 1, 0]

    def test_column_not_found(self, tmp_path):
        d = make_dir(tmp_path, [("a", "x"), ("b", "y")])
        with pytest.raises(DatasetError, match="column not found"):
            load_dataset(d, text_column="sentence")

    def test_unknown_validation_label(self, tmp_path):
        d = make_dir(tmp_path, [("a", "x"), ("b", "y")], validation=[("c", "z")])
        with pytest.raises(DatasetError, match="absent from train"):
            load_dataset(d)

    def test_empty_label(self, tmp_path):
        d = make_dir(tmp_path, [("a", "x"), ("b", " ")])
        with pytest.raises(DatasetError, match="empty label"):
            load_dataset(d)

    def test_missing_file(self, tmp_path):
        write_rows(tmp_path / "train.csv", [("a", "x")])
        with pytest.raises(FileNotFoundError):
            load_dataset(tmp_path)

    def test_tsv_and_custom_columns(self, tmp_path):
        rows = [("x", "hello there"), ("y", "bye now")]
        for name in ("train", "dev", "test"):
            write_rows(tmp_path / f"{name}.tsv", rows, header=("emotion", "utterance"), delimiter="\t")
        split = load_dataset(tmp_path, "tsv", text_column="utterance", label_column="emotion")
        assert split.train[1] == Example("bye now", 1)

    def test_split_sizes_match_independent_count(self, tmp_path):
        rng = np.random.default_rng(5)
        sizes = {"train": 280, "validation": 60, "test": 60}
        for name, n in sizes.items():
            labels = [f"k{j % 4}" for j in range(n)]
            rng.shuffle(labels)
            write_rows(tmp_path / f"{name}.csv", [(f"row {j}, with comma", lab) for j, lab in enumerate(labels)])
        split = load_dataset(tmp_path)
        for name in sizes:
            with open(tmp_path / f"{name}.csv", encoding="utf-8") as fh:
                counted = sum(1 for _ in csv.reader(fh)) - 1
            assert len(getattr(split, name)) == counted == sizes[name]
        assert sum(sizes.values()) == 400

    def test_round_trip(self, tmp_path):
        split = toy_split()
        write_dataset(split, tmp_path)
        assert load_dataset(tmp_path) == split


class TestSplitInvariants:
    def test_label_out_of_range(self):
        with pytest.raises(DatasetError):
            DatasetSplit([Example("a", 0), Example("b", 2)], [], [], LabelVocab(["x", "y"]))

    def test_class_missing_from_train(self):
        with pytest.raises(DatasetError, match="no training examples"):
            DatasetSplit([Example("a", 0)], [], [], LabelVocab(["x", "y"]))

    def test_duplicate_names(self):
        with pytest.raises(DatasetError):
            LabelVocab(["x", "x"])


class TestFilter:
    def test_ascending_remap(self):
        out = filter_classes(toy_split(), {3, 1})
        assert out.vocab.names == ("c1", "c3")
        assert {ex.text.split()[1]: ex.label for ex in out.train} == {"1": 0, "3": 1}

    def test_keep_all_is_identity(self):
        split = toy_split()
        assert filter_classes(split, range(4)) == split

    def test_named_subset_of_32(self):
        names = [f"emo{i}" for i in range(28)] + ["Angry", "Afraid", "Joyful", "Sad"]
        rng = np.random.default_rng(0)
        train = [Example(f"t{j}", int(j % 32)) for j in range(320)]
        test = [Example(f"u{j}", int(rng.integers(32))) for j in range(200)]
        split = DatasetSplit(train, test[:100], test[100:], LabelVocab(names))
        easy = {"Angry", "Afraid", "Joyful", "Sad"}
        out = filter_classes(split, easy)
        for part in ("train", "validation", "test"):
            expected = [ex.text for ex in getattr(split, part) if names[ex.label] in easy]
            assert [ex.text for ex in getattr(out, part)] == expected
            assert {out.vocab.names[ex.label] for ex in getattr(out, part)} <= easy

    @pytest.mark.parametrize("keep", [{0}, {0, 9}, {"nope", 1}])
    def test_errors(self, keep):
        with pytest.raises(DatasetError):
            filter_classes(toy_split(), keep)

    @settings(max_examples=40, deadline=None)
    @given(st.sets(st.integers(0, 5), min_size=2))
    def test_idempotent_and_count_preserving(self, keep):
        split = toy_split(6, 2)
        once = filter_classes(split, keep)
        assert filter_classes(split, keep) == once
        order = sorted(keep)
        np.testing.assert_array_equal(once.class_counts(), split.class_counts()[order])


class TestBatches:
    examples = [Example(f"e{i}", 0) for i in range(5)]

    def test_deterministic(self):
        plan = BatchPlan(2, seed=3)
        assert batch_iter(self.examples[:4], plan, 0) == batch_iter(self.examples[:4], plan, 0)

    def test_epochs_differ(self):
        plan = BatchPlan(2, seed=0)
        assert batch_iter(self.examples, plan, 0) != batch_iter(self.examples, plan, 1)

    def test_drop_last(self):
        assert [len(b) for b in batch_iter(self.examples, BatchPlan(2, drop_last=True), 0)] == [2, 2]
        assert [len(b) for b in batch_iter(self.examples, BatchPlan(2), 0)] == [2, 2, 1]

    def test_oversized_batch_with_drop_last(self):
        with pytest.raises(ValueError):
            batch_iter(self.examples, BatchPlan(6, drop_last=True), 0)

    def test_bad_plan(self):
        with pytest.raises(ValueError):
            BatchPlan(0)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 30), st.integers(1, 8), st.integers(0, 2**32), st.integers(0, 50))
    def test_epoch_is_permutation(self, n, k, seed, epoch):
        exs = [Example(f"e{i}", 0) for i in range(n)]
        flat = [ex for b in batch_iter(exs, BatchPlan(k, seed), epoch) for ex in b]
        assert sorted(ex.text for ex in flat) == sorted(ex.text for ex in exs)
