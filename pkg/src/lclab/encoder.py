"""Bag-of-embeddings text encoder, classifier head and the weighting network.

``encode`` mean-pools token embeddings, passes them through a two-layer ReLU
MLP and l2-normalizes the result.  ``classify`` projects those
representations to class logits.  A :class:`Network` bundles both halves;
the weighting network is simply a second, independently initialized
``Network`` of the same shape.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from . import diffcore as dc

UNK = "<unk>"
DROPOUT = 0.1


@dataclass
class Tokenizer:
    vocab: dict
    counts: dict
    max_length: int = 64
    unk_id: int = 0

    @property
    def size(self):
        return len(self.vocab)

    def ids(self, tokens):
        toks = [t.lower() for t in tokens][: self.max_length]
        if not toks:
            raise ValueError("empty token sequence")
        return [self.vocab.get(t, self.unk_id) for t in toks]

    def to_tsv(self):
        lines = ["token\tid\tcount"]
        lines += [f"{tok}\t{i}\t{self.counts.get(tok, 0)}" for tok, i in sorted(self.vocab.items(), key=lambda kv: kv[1])]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_tsv(cls, text, max_length=64):
        vocab, counts = {}, {}
        for line in text.splitlines()[1:]:
            if not line:
                continue
            tok, i, n = line.split("\t")
            vocab[tok] = int(i)
            counts[tok] = int(n)
        if vocab.get(UNK) != 0:
            raise ValueError("tokenizer file must reserve id 0 for <unk>")
        return cls(vocab, counts, max_length)


def build_tokenizer(train, min_count=1, max_length=64):
    """Vocabulary from training texts: frequency descending, then lexicographic."""
    if not train:
        raise ValueError("no training examples")
    counts = Counter(tok.lower() for ex in train for tok in ex.text.split())
    kept = sorted((tok for tok, n in counts.items() if n >= min_count), key=lambda t: (-counts[t], t))
    vocab = {UNK: 0}
    vocab.update((tok, i) for i, tok in enumerate(kept, start=1))
    return Tokenizer(vocab, {UNK: 0, **{t: counts[t] for t in kept}}, max_length)


@dataclass
class EncoderParams:
    embedding: dc.Tensor
    w1: dc.Tensor
    b1: dc.Tensor
    w2: dc.Tensor
    b2: dc.Tensor

    @property
    def dim(self):
        return self.w2.shape[1]

    def tensors(self):
        return [self.embedding, self.w1, self.b1, self.w2, self.b2]


@dataclass
class ClassifierHead:
    w1: dc.Tensor
    b1: dc.Tensor
    w2: dc.Tensor
    b2: dc.Tensor
    dropout: float = DROPOUT

    @property
    def num_classes(self):
        return self.w2.shape[1]

    def tensors(self):
        return [self.w1, self.b1, self.w2, self.b2]


@dataclass
class Network:
    encoder: EncoderParams
    head: ClassifierHead

    def named_tensors(self):
        names = ["embedding", "enc_w1", "enc_b1", "enc_w2", "enc_b2", "head_w1", "head_b1", "head_w2", "head_b2"]
        return list(zip(names, self.encoder.tensors() + self.head.tensors()))

    def tensors(self):
        return self.encoder.tensors() + self.head.tensors()

    def zero_grad(self):
        for t in self.tensors():
            t.zero_grad()


def _param(values, name):
    return dc.Tensor(values, requires_grad=True, name=name)


def _glorot(rng, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def init_network(rng, vocab_size, num_classes, embed_dim=64, hidden_dim=128, rep_dim=64, head_hidden=None):
    head_hidden = hidden_dim if head_hidden is None else head_hidden
    enc = EncoderParams(
        embedding=_param(rng.normal(0.0, 1.0, size=(vocab_size, embed_dim)), "embedding"),
        w1=_param(_glorot(rng, embed_dim, hidden_dim), "enc_w1"),
        b1=_param(np.zeros(hidden_dim), "enc_b1"),
        w2=_param(_glorot(rng, hidden_dim, rep_dim), "enc_w2"),
        b2=_param(np.zeros(rep_dim), "enc_b2"),
    )
    head = ClassifierHead(
        w1=_param(_glorot(rng, rep_dim, head_hidden), "head_w1"),
        b1=_param(np.zeros(head_hidden), "head_b1"),
        w2=_param(_glorot(rng, head_hidden, num_classes), "head_w2"),
        b2=_param(np.zeros(num_classes), "head_b2"),
    )
    return Network(enc, head)


def pooling_matrix(sequences):
    """Flat token ids plus the ``N x T`` averaging matrix that mean-pools them."""
    lengths = [len(s) for s in sequences]
    if any(n == 0 for n in lengths):
        raise ValueError("empty token sequence")
    flat = np.concatenate([np.asarray(s, dtype=np.int64) for s in sequences])
    pool = np.zeros((len(sequences), len(flat)))
    start = 0
    for row, n in enumerate(lengths):
        pool[row, start:start + n] = 1.0 / n
        start += n
    return flat, pool


def encode(params, sequences):
    """Unit-norm representations, one row per token-id sequence."""
    flat, pool = pooling_matrix(sequences)
    pooled = dc.matmul(pool, dc.gather_rows(params.embedding, flat))
    hidden = dc.relu(dc.add(dc.matmul(pooled, params.w1), params.b1))
    return dc.l2_normalize(dc.add(dc.matmul(hidden, params.w2), params.b2))


def classify(head, H, train_mode=False, rng=None):
    H = dc.as_tensor(H)
    if H.ndim != 2 or H.shape[1] != head.w1.shape[0]:
        raise ValueError(f"representation shape {H.shape} does not fit head input {head.w1.shape[0]}")
    if train_mode and rng is None:
        raise ValueError("train mode needs an rng for dropout")
    x = dc.dropout(H, head.dropout, rng, train=train_mode)
    x = dc.relu(dc.add(dc.matmul(x, head.w1), head.b1))
    x = dc.dropout(x, head.dropout, rng, train=train_mode)
    return dc.add(dc.matmul(x, head.w2), head.b2)


def forward(net, sequences, train_mode=False, rng=None):
    H = encode(net.encoder, sequences)
    return H, classify(net.head, H, train_mode, rng)


def weighting_forward(psi, sequences, train_mode=False, rng=None):
    """Weighting-network logits and the detached softmax confidences ``W``."""
    _, logits = forward(psi, sequences, train_mode, rng)
    return logits, dc.softmax(logits.detach()).values
