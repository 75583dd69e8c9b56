"""Shared pieces for every trainable head: featurized sentences, padded
batches, the convolutional backbone and the training loop."""
from __future__ import annotations

import copy
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
import torch
from torch import nn

from ..errors import DivergedLoss, EmptyTrainingSet
from ..features import (CHANNELS, ChannelConfig, ContextualEncoder, EmbeddingTables,
                        build_tag_vocabs, encode_tokens, token_tags)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 5e-3
    epochs: int = 30
    seed: int = 0
    batch_size: int = 16
    hidden: int = 64
    weight_decay: float = 0.0
    clip: float = 5.0
    gcn_layers: int = 2
    k: int = 1                       # pruning context for argument roles
    none_weight: Optional[float] = None  # None: positive/negative ratio
    type_dim: int = 16
    relpos_dim: int = 8

    def with_seed(self, seed: int) -> "TrainConfig":
        return replace(self, seed=seed)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class FeaturizedSentence:
    sent: object
    word: np.ndarray
    tags: dict
    cache: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.sent.tokens)


class FeatureSpace:
    """Encoder + tag inventories + initial channel tables for one experiment."""

    def __init__(self, encoder: ContextualEncoder, vocabs: dict, channels: ChannelConfig,
                 table_seed: int = 0):
        self.encoder = encoder
        self.vocabs = vocabs
        self.channels = channels
        self.table_seed = table_seed
        self.tables = EmbeddingTables.init(vocabs, channels, table_seed)
        self._cache: dict[int, FeaturizedSentence] = {}

    @classmethod
    def build(cls, sentences: Iterable, encoder: ContextualEncoder,
              channels: Optional[ChannelConfig] = None, table_seed: int = 0) -> "FeatureSpace":
        return cls(encoder, build_tag_vocabs(sentences), channels or ChannelConfig(), table_seed)

    @property
    def word_dim(self) -> int:
        return self.encoder.dim

    def featurize(self, sent) -> FeaturizedSentence:
        hit = self._cache.get(id(sent))
        if hit is not None and hit.sent is sent:
            return hit
        word = encode_tokens(self.encoder, sent).astype(np.float32)
        tags = {}
        for c in CHANNELS:
            vocab = self.vocabs[c]
            idx = []
            for t in token_tags(sent, c):
                i = vocab.index(t)
                if i == 0:
                    self.tables.oov_tally[(c, t)] += 1
                idx.append(i)
            tags[c] = np.asarray(idx, dtype=np.int64)
        fs = FeaturizedSentence(sent, word, tags)
        self._cache[id(sent)] = fs
        return fs


@dataclass
class Batch:
    items: list
    word: torch.Tensor       # B x L x d
    tags: dict               # channel -> B x L
    mask: torch.Tensor       # B x L bool


def collate(items: Sequence[FeaturizedSentence]) -> Batch:
    B = len(items)
    L = max(max(it.n for it in items), 1)
    d = items[0].word.shape[1]
    word = np.zeros((B, L, d), dtype=np.float32)
    mask = np.zeros((B, L), dtype=bool)
    tags = {c: np.zeros((B, L), dtype=np.int64) for c in CHANNELS}
    for b, it in enumerate(items):
        word[b, :it.n] = it.word
        mask[b, :it.n] = True
        for c in CHANNELS:
            tags[c][b, :it.n] = it.tags[c]
    return Batch(list(items), torch.from_numpy(word), {c: torch.from_numpy(v) for c, v in tags.items()},
                 torch.from_numpy(mask))


class SharedBackbone(nn.Module):
    """Channel embeddings followed by one width-3 convolution with tanh.

    Padded positions are zeroed before the convolution so a sentence gets the
    same representation alone or inside a batch.
    """

    def __init__(self, word_dim: int, tables: EmbeddingTables, channels: ChannelConfig,
                 hidden: int = 64, kernel: int = 3):
        super().__init__()
        self.channels = channels
        self.used = [c for c, on in zip(CHANNELS, (channels.use_pos, channels.use_ner, channels.use_dep))
                     if on and channels.dims()[c] > 0]
        self.emb = nn.ModuleDict({c: nn.Embedding.from_pretrained(
            torch.tensor(tables.weights[c], dtype=torch.float32), freeze=False) for c in self.used})
        self.in_dim = channels.width(word_dim)
        self.hidden = hidden
        self.conv = nn.Conv1d(self.in_dim, hidden, kernel, padding=kernel // 2)

    def inputs(self, batch: Batch) -> torch.Tensor:
        parts = [batch.word] + [self.emb[c](batch.tags[c]) for c in self.used]
        return torch.cat(parts, dim=-1) * batch.mask[..., None]

    def forward(self, batch: Batch) -> torch.Tensor:
        x = self.inputs(batch)
        h = torch.tanh(self.conv(x.transpose(1, 2)).transpose(1, 2))
        return h * batch.mask[..., None]


def new_backbone(space: FeatureSpace, cfg: TrainConfig) -> SharedBackbone:
    return SharedBackbone(space.word_dim, space.tables, space.channels, cfg.hidden)


def snapshot(module: nn.Module) -> nn.Module:
    return copy.deepcopy(module)


def batches(items: Sequence, size: int, rng: np.random.Generator):
    order = rng.permutation(len(items))
    for i in range(0, len(items), size):
        yield [items[j] for j in order[i:i + size]]


def fit(modules: Sequence[nn.Module], items: Sequence, loss_fn: Callable, cfg: TrainConfig,
        on_epoch: Optional[Callable] = None) -> list[float]:
    """Adam over the union of ``modules``' parameters; returns mean loss per epoch.

    ``loss_fn(batch_items)`` returns a scalar tensor. ``on_epoch(epoch, loss)``
    may be used for checkpoint selection.
    """
    if not items:
        raise EmptyTrainingSet("no training instances")
    params, seen = [], set()
    for m in modules:
        for p in m.parameters():
            if id(p) not in seen and p.requires_grad:
                seen.add(id(p))
                params.append(p)
    curve: list[float] = []
    if cfg.epochs <= 0 or not params:
        return curve
    opt = torch.optim.Adam(params, lr=cfg.lr, weight_decay=cfg.weight_decay)
    rng = np.random.default_rng(cfg.seed)
    for m in modules:
        m.train()
    for epoch in range(cfg.epochs):
        total, count = 0.0, 0
        for chunk in batches(items, cfg.batch_size, rng):
            opt.zero_grad()
            loss = loss_fn(chunk)
            value = float(loss.detach())
            if not math.isfinite(value):
                raise DivergedLoss(f"loss became {value} in epoch {epoch}")
            loss.backward()
            if cfg.clip:
                nn.utils.clip_grad_norm_(params, cfg.clip)
            opt.step()
            total += value * len(chunk)
            count += len(chunk)
        curve.append(total / count)
        if on_epoch is not None:
            on_epoch(epoch, curve[-1])
    for m in modules:
        m.eval()
    return curve


def argmax_first(scores: np.ndarray) -> np.ndarray:
    """Row-wise argmax; ties go to the lowest index."""
    return np.argmax(scores, axis=-1)
