"""Joint training of the primary encoder and the weighting network.

Per batch, for the ``lcl`` objective:

1. build the ``2K`` augmented batch,
2. run the encoder network to get representations ``H`` and logits,
3. run the weighting network to get its logits and detached confidences ``W``,
4. ``L_f = alpha * (L_w + L_e) + (1 - alpha) * L_LCL`` and one Adam step for
   each network.

``ce`` trains the encoder alone on plain batches; ``scl`` uses the augmented
batch with ``alpha * L_e + (1 - alpha) * L_SCL``.  Only the encoder network
survives into the returned :class:`TrainedModel`.
"""

from __future__ import annotations

import csv
import io
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import checkpoint, corpus, losses
from . import diffcore as dc
from .augment import make_contrastive_batch, tokenize
from .encoder import Network, Tokenizer, build_tokenizer, forward, init_network, weighting_forward
from .metrics import accuracy, confusion_matrix, weighted_f1

log = logging.getLogger(__name__)

OBJECTIVES = ("ce", "scl", "lcl")

# rng stream ids; the shuffle stream (0) lives in corpus.batch_iter
_INIT, _AUGMENT, _DROPOUT = 1, 2, 3


class TrainingDiverged(RuntimeError):
    def __init__(self, epoch, batch, detail):
        super().__init__(f"non-finite loss at epoch {epoch}, batch {batch}: {detail}")
        self.epoch = epoch
        self.batch = batch


@dataclass(frozen=True)
class TrainConfig:
    objective: str = "lcl"
    lr: float = 2e-5
    alpha: float = 0.5
    temperature: float = 0.3
    batch_size: int = 10
    max_epochs: int = 30
    patience: int = 3
    seed: int = 0
    augment_rate: float = 0.3
    weight_decay: float = 1e-2
    embed_dim: int = 64
    hidden_dim: int = 128
    rep_dim: int = 64
    dropout: float = 0.1
    min_count: int = 1
    max_length: int = 64

    def __post_init__(self):
        if self.objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES}, got {self.objective!r}")
        if not self.lr > 0:
            raise ValueError("lr must be > 0")
        losses.ContrastiveConfig(self.temperature, self.alpha)
        if self.batch_size < 1 or self.max_epochs < 1 or self.patience < 1:
            raise ValueError("batch_size, max_epochs and patience must be >= 1")
        if not 0.0 < self.augment_rate <= 1.0:
            raise ValueError("augment_rate must be in (0, 1]")

    def replace(self, **changes):
        return TrainConfig(**{**asdict(self), **changes})


@dataclass
class EpochRecord:
    epoch: int
    loss_w: float
    loss_e: float
    loss_contrastive: float
    loss_f: float
    val_accuracy: float
    wall_time: float = field(default=0.0, compare=False)


@dataclass
class TrainHistory:
    records: list = field(default_factory=list)
    best_epoch: int = 0

    CSV_FIELDS = ("epoch", "loss_w", "loss_e", "loss_contrastive", "loss_f", "val_accuracy")

    def to_csv(self):
        # wall time is left out so reruns are byte-identical
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.CSV_FIELDS)
        for r in self.records:
            writer.writerow([r.epoch] + [repr(float(getattr(r, f))) for f in self.CSV_FIELDS[1:]])
        return buf.getvalue()


class EarlyStopping:
    """Track the best validation score; ties keep the earlier epoch."""

    def __init__(self, patience):
        self.patience = patience
        self.best = -np.inf
        self.best_epoch = 0
        self.bad_epochs = 0

    def update(self, score, epoch):
        """Record ``score``; returns True if it is a new best."""
        if score > self.best:
            self.best, self.best_epoch, self.bad_epochs = score, epoch, 0
            return True
        self.bad_epochs += 1
        return False

    @property
    def should_stop(self):
        return self.bad_epochs >= self.patience


@dataclass
class TrainedModel:
    network: Network
    tokenizer: Tokenizer
    label_names: tuple
    config: TrainConfig
    best_epoch: int = 0

    @property
    def num_classes(self):
        return len(self.label_names)

    def scores(self, examples_or_texts, chunk=512):
        """Row-softmax of the encoder's eval-mode logits."""
        texts = [e.text if isinstance(e, corpus.Example) else e for e in examples_or_texts]
        out = []
        for i in range(0, len(texts), chunk):
            seqs = [self.tokenizer.ids(tokenize(t)) for t in texts[i:i + chunk]]
            _, logits = forward(self.network, seqs, train_mode=False)
            out.append(dc.softmax(logits).values)
        return np.concatenate(out) if out else np.zeros((0, self.num_classes))

    def predict(self, examples_or_texts):
        return self.scores(examples_or_texts).argmax(axis=1)

    def save(self, path):
        meta = {
            "format": "lclab-model-1",
            "labels": list(self.label_names),
            "config": asdict(self.config),
            "best_epoch": self.best_epoch,
            "tokenizer": self.tokenizer.to_tsv(),
        }
        blocks = {name: t.values for name, t in self.network.named_tensors()}
        checkpoint.save(path, blocks, meta)

    @classmethod
    def load(cls, path):
        blocks, meta = checkpoint.load(path)
        if meta.get("format") != "lclab-model-1":
            raise ValueError(f"{path}: not a trained-model checkpoint")
        config = TrainConfig(**meta["config"])
        tok = Tokenizer.from_tsv(meta["tokenizer"], config.max_length)
        labels = tuple(meta["labels"])
        net = init_network(np.random.default_rng(0), tok.size, len(labels),
                           config.embed_dim, config.hidden_dim, config.rep_dim)
        for name, t in net.named_tensors():
            if name not in blocks or blocks[name].shape != t.shape:
                raise ValueError(f"{path}: block {name} missing or mis-shaped")
            t.values = blocks[name]
        net.head.dropout = config.dropout
        return cls(net, tok, labels, config, meta["best_epoch"])


@dataclass
class EvalReport:
    accuracy: float
    f1: float
    confusion: np.ndarray
    scores: np.ndarray

    def summary(self):
        return {"accuracy": self.accuracy, "weighted_f1": self.f1}


def evaluate(model, examples):
    if not examples:
        raise ValueError("no examples to evaluate")
    S = model.scores(examples)
    y = np.array([e.label for e in examples])
    cm = confusion_matrix(y, S.argmax(axis=1), model.num_classes)
    return EvalReport(accuracy(cm), weighted_f1(cm), cm, S)


def _validation_accuracy(model, split):
    examples = split.validation or split.train
    return evaluate(model, examples).accuracy


def _snapshot(net):
    return [t.values.copy() for t in net.tensors()]


def _restore(net, snap):
    for t, v in zip(net.tensors(), snap):
        t.values = v.copy()


def _step_losses(cfg, phi, psi, tok, batch, lexicon, aug_rng, drop_rng):
    """Loss tensors for one batch: ``(L_w, L_e, L_contrastive, L_f)``."""
    if cfg.objective == "ce":
        seqs = [tok.ids(tokenize(e.text)) for e in batch]
        labels = np.array([e.label for e in batch])
        _, logits = forward(phi, seqs, True, drop_rng)
        loss_e = losses.cross_entropy(logits, labels)
        return None, loss_e, None, loss_e

    aug = make_contrastive_batch(batch, lexicon, aug_rng, cfg.augment_rate)
    seqs = [tok.ids(t) for t in aug.texts]
    H, logits = forward(phi, seqs, True, drop_rng)
    loss_e = losses.cross_entropy(logits, aug.labels)
    if cfg.objective == "scl":
        loss_c = losses.l_scl(H, aug.labels, aug.pairing, cfg.temperature)
        total = dc.add(dc.scale(loss_e, cfg.alpha), dc.scale(loss_c, 1.0 - cfg.alpha))
        return None, loss_e, loss_c, total

    logits_w, W = weighting_forward(psi, seqs, True, drop_rng)
    loss_w = losses.cross_entropy(logits_w, aug.labels)
    loss_c = losses.l_lcl(H, aug.labels, aug.pairing, W, cfg.temperature)
    return loss_w, loss_e, loss_c, losses.joint_objective(loss_w, loss_e, loss_c, cfg.alpha)


def _value(t):
    return 0.0 if t is None else t.item()


def train(split, config, lexicon=None):
    """Train per ``config``; returns ``(TrainedModel, TrainHistory)``."""
    cfg = config
    if cfg.objective in ("scl", "lcl") and lexicon is None:
        raise ValueError(f"objective {cfg.objective!r} needs a synonym lexicon")
    tok = build_tokenizer(split.train, cfg.min_count, cfg.max_length)
    c = split.vocab.size
    dims = (cfg.embed_dim, cfg.hidden_dim, cfg.rep_dim)
    phi = init_network(corpus.epoch_rng(cfg.seed, _INIT, 0), tok.size, c, *dims)
    phi.head.dropout = cfg.dropout
    psi = None
    if cfg.objective == "lcl":
        psi = init_network(corpus.epoch_rng(cfg.seed, _INIT, 1), tok.size, c, *dims)
        psi.head.dropout = cfg.dropout

    def adam():
        return dc.AdamState(lr=cfg.lr, weight_decay=cfg.weight_decay)

    opt_phi, opt_psi = adam(), adam()
    model = TrainedModel(phi, tok, split.vocab.names, cfg)
    plan = corpus.BatchPlan(cfg.batch_size, cfg.seed, drop_last=False)
    stopper = EarlyStopping(cfg.patience)
    history = TrainHistory()
    best = _snapshot(phi)

    for epoch in range(1, cfg.max_epochs + 1):
        start = time.perf_counter()
        totals = np.zeros(4)
        batches = corpus.batch_iter(split.train, plan, epoch)
        for b, batch in enumerate(batches):
            aug_rng = corpus.epoch_rng(cfg.seed, _AUGMENT, epoch, b)
            drop_rng = corpus.epoch_rng(cfg.seed, _DROPOUT, epoch, b)
            try:
                parts = _step_losses(cfg, phi, psi, tok, batch, lexicon, aug_rng, drop_rng)
            except FloatingPointError as exc:
                raise TrainingDiverged(epoch, b, exc) from exc
            loss_f = parts[-1]
            if not np.isfinite(loss_f.item()):
                raise TrainingDiverged(epoch, b, loss_f.item())
            totals += [_value(p) for p in parts]
            phi.zero_grad()
            if psi is not None:
                psi.zero_grad()
            loss_f.backward()
            dc.adam_step(opt_phi, phi.tensors())
            if psi is not None:
                dc.adam_step(opt_psi, psi.tensors())
        means = totals / len(batches)

        val_acc = _validation_accuracy(model, split)
        record = EpochRecord(epoch, *means.tolist(), val_acc, time.perf_counter() - start)
        history.records.append(record)
        log.info("epoch %d  L_f=%.4f  val_acc=%.4f  (%.1fs)", epoch, record.loss_f, val_acc, record.wall_time)
        if stopper.update(val_acc, epoch):
            best = _snapshot(phi)
        if stopper.should_stop:
            break

    _restore(phi, best)
    history.best_epoch = stopper.best_epoch
    model.best_epoch = stopper.best_epoch
    return model, history


@dataclass
class SeedRun:
    seed: int
    model: TrainedModel
    history: TrainHistory
    report: EvalReport


@dataclass
class SeedSummary:
    runs: list

    def values(self, metric):
        return [getattr(r.report, metric) for r in self.runs]

    def mean(self, metric):
        return float(np.mean(self.values(metric)))

    def sd(self, metric):
        vals = self.values(metric)
        return float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0

    def to_dict(self):
        out = {"seeds": [r.seed for r in self.runs]}
        for metric, key in (("accuracy", "accuracy"), ("f1", "weighted_f1")):
            out[key] = {"values": self.values(metric), "mean": self.mean(metric), "sd": self.sd(metric)}
        return out


def _run_one(args):
    split, config, lexicon, seed = args
    model, history = train(split, config.replace(seed=seed), lexicon)
    return SeedRun(seed, model, history, evaluate(model, split.test))


def run_seeds(split, config, seeds, lexicon=None, jobs=1):
    """Independent trainings, one per seed, each evaluated on the test split."""
    tasks = [(split, config, lexicon, s) for s in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(_run_one, tasks))
    else:
        runs = [_run_one(t) for t in tasks]
    return SeedSummary(runs)
