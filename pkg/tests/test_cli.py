import csv
import json

import numpy as np
import pytest

from lclab import cli
from lclab import diffcore as dc
from lclab.synthetic import data_dir

SMALL = """\
dataset = {data}
output_dir = out
objective = {objective}
lr = 0.001
max_epochs = 2
patience = 1
embed_dim = 8
hidden_dim = 8
rep_dim = 8
seeds = 1, 2
keep_classes = angry, sad
"""


def write_config(tmp_path, objective="ce", extra="", lexicon=True):
    text = SMALL.format(data=data_dir() / "separable", objective=objective) + extra
    if lexicon:
        text += f"lexicon = {data_dir() / 'lexicon.tsv'}\n"
    path = tmp_path / "exp.cfg"
    path.write_text(text)
    return path


class TestConfig:
    def test_missing_lexicon_names_field(self, tmp_path, capsys):
        path = write_config(tmp_path, "lcl", lexicon=False)
        assert cli.main(["train", str(path)]) == 1
        assert "lexicon" in capsys.readouterr().err

    @pytest.mark.parametrize("line,field", [("alpha = 1.5", "alpha"), ("temperature = 0", "temperature"),
                                            ("colour = red", "colour"), ("seeds = 1, b", "seeds"),
                                            ("lr = fast", "lr"), ("lr = 0.1\nlr = 0.2", "config")])
    def test_field_errors(self, tmp_path, capsys, line, field):
        path = write_config(tmp_path)
        key = line.split()[0]
        kept = [row for row in path.read_text().splitlines() if not row.startswith(key + " ")]
        path.write_text("\n".join(kept + [line]) + "\n")
        assert cli.main(["train", str(path)]) == 1
        assert f"{field}:" in capsys.readouterr().err

    def test_parse(self, tmp_path):
        cfg = cli.parse_config(write_config(tmp_path, "lcl"))
        assert cfg["seeds"] == [1, 2] and cfg["keep_classes"] == ["angry", "sad"]
        assert cfg["train"].objective == "lcl" and cfg["output_dir"] == tmp_path / "out"

    def test_missing_dataset_dir(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("dataset = nowhere\noutput_dir = out\nobjective = ce\n")
        assert cli.main(["train", str(path)]) == 1


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("run")
    assert cli.main(["train", str(write_config(tmp, "lcl"))]) == 0
    return tmp / "out"


def test_train_outputs(trained):
    report = json.loads((trained / "report.json").read_text())
    assert report["seeds"] == [1, 2] and len(report["accuracy"]["values"]) == 2
    assert report["labels"] == ["sad", "angry"] and "seed" not in report["config"]
    for seed in (1, 2):
        d = trained / f"seed_{seed}"
        assert {p.name for p in d.iterdir()} == {"model.ckpt", "history.csv", "tokenizer.tsv", "confusion.csv"}


def test_eval_entropy_subsets(trained, tmp_path):
    test_file = tmp_path / "test.csv"
    rows = list(csv.reader(open(data_dir() / "separable" / "test.csv")))
    with open(test_file, "w", newline="") as fh:
        csv.writer(fh).writerows([rows[0]] + [r for r in rows[1:] if r[1] in ("angry", "sad")])
    ev = tmp_path / "ev"
    assert cli.main(["eval", str(trained / "seed_1" / "model.ckpt"), str(test_file), "--out", str(ev)]) == 0
    m = json.loads((ev / "metrics.json").read_text())
    S, header = cli.read_matrix_csv(ev / "scores.csv")
    cm, _ = cli.read_matrix_csv(ev / "confusion.csv")
    assert header == ["sad", "angry"] and S.shape == (m["n"], 2) and cm.sum() == m["n"]
    np.testing.assert_allclose(S.sum(axis=1), 1.0, atol=1e-12)

    assert cli.main(["entropy-report", str(ev / "scores.csv"), "--out", str(tmp_path / "h.csv")]) == 0
    lines = (tmp_path / "h.csv").read_text().splitlines()
    assert lines[0] == "k,mean_entropy" and lines[1] == "1,0.0" and len(lines) == 3

    assert cli.main(["subset-search", str(ev / "confusion.csv"), "-m", "2", "--out", str(tmp_path / "r.csv")]) == 0
    assert (tmp_path / "r.csv").read_text().splitlines()[1].startswith("1,0 1,sad angry,")


def test_eval_unknown_label(trained, tmp_path):
    f = tmp_path / "x.csv"
    f.write_text("text,label\nhello,joyful\n")
    assert cli.main(["eval", str(trained / "seed_1" / "model.ckpt"), str(f), "--out", str(tmp_path)]) == 1


def test_entropy_curve_uniform(tmp_path):
    cli.write_matrix_csv(tmp_path / "s.csv", np.full((3, 4), 0.25))
    assert cli.main(["entropy-report", str(tmp_path / "s.csv"), "--out", str(tmp_path / "h.csv")]) == 0
    values = [float(r.split(",")[1]) for r in (tmp_path / "h.csv").read_text().splitlines()[1:]]
    np.testing.assert_allclose(values, np.log2([1, 2, 3, 4]), atol=1e-12)


@pytest.mark.parametrize("body", ["", "1,2\n3\n", "0.5,0.6\n", "a,b\nx,y\n"])
def test_entropy_bad_matrix(tmp_path, body):
    (tmp_path / "s.csv").write_text(body)
    assert cli.main(["entropy-report", str(tmp_path / "s.csv"), "--out", str(tmp_path / "h.csv")]) == 1


def test_subsets_ranking_and_rounds(tmp_path, capsys):
    cm = np.eye(32, dtype=int)
    cm[1, 3] = 7
    cli.write_matrix_csv(tmp_path / "c.csv", cm, integer=True)
    assert cli.main(["subset-search", str(tmp_path / "c.csv"), "--rounds", "2", "--out", str(tmp_path / "r.csv")]) == 0
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert len(lines) == 35960 + 1
    assert lines[1] == "1,0 1 2 3,,7.0"
    out = capsys.readouterr().out
    assert "round 1: [0 1 2 3]" in out and "round 2: [4 5 6 7]" in out


def test_subsets_too_many_rounds(tmp_path):
    cli.write_matrix_csv(tmp_path / "c.csv", np.eye(5), integer=True)
    assert cli.main(["subset-search", str(tmp_path / "c.csv"), "--rounds", "2", "--out", str(tmp_path / "r.csv")]) == 1


def test_augment_preview(capsys):
    args = ["augment-preview", str(data_dir() / "separable" / "train.csv"),
            "--lexicon", str(data_dir() / "lexicon.tsv"), "-n", "3"]
    assert cli.main(args) == 0
    first = capsys.readouterr().out
    assert first.count("->") == 3
    cli.main(args)
    assert capsys.readouterr().out == first


def test_gradcheck_pass_and_repeatable(capsys):
    assert cli.main(["gradcheck"]) == 0
    first = capsys.readouterr().out
    assert "FAIL" not in first
    assert cli.main(["gradcheck"]) == 0
    assert capsys.readouterr().out == first


def test_gradcheck_fault_injection(monkeypatch, capsys):
    def broken_relu(a):
        a = dc.as_tensor(a)
        gate = (a.values > 0).astype(np.float64)
        return dc._make(a.values * gate, (a,), lambda g: (0.5 * g * gate,), "relu")

    monkeypatch.setattr(dc, "relu", broken_relu)
    assert cli.main(["gradcheck"]) != 0
    assert "FAIL  relu" in capsys.readouterr().out


def test_train_reruns_are_byte_identical(tmp_path):
    path = write_config(tmp_path, "lcl")
    snapshots = []
    for _ in range(2):
        assert cli.main(["train", str(path)]) == 0
        snapshots.append({p.relative_to(tmp_path): p.read_bytes() for p in sorted((tmp_path / "out").rglob("*")) if p.is_file()})
    assert snapshots[0] == snapshots[1]
