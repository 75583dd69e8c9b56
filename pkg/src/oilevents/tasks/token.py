"""BIO token classification heads for entity mentions (EMD) and event
triggers (ED)."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import torch
from torch import nn
from torch.nn import functional as F

from ..bio import TypedSpan, decode_bio
from ..vocab import LabelVocab, load_vocab
from .common import (FeatureSpace, FeaturizedSentence, SharedBackbone, TrainConfig, argmax_first,
                     collate, fit, new_backbone)

TOKEN_TASKS = {"EMD": "entity", "ED": "event"}


class TokenClassifierHead(nn.Module):
    def __init__(self, task: str, tags: Sequence[str], in_dim: int):
        super().__init__()
        if task not in TOKEN_TASKS:
            raise ValueError(f"token task must be EMD or ED, got {task!r}")
        self.task = task
        self.tags = list(tags)
        self.index = {t: i for i, t in enumerate(self.tags)}
        self.proj = nn.Linear(in_dim, len(self.tags))

    def forward(self, H: torch.Tensor) -> torch.Tensor:
        return self.proj(H)

    def gold(self, fs: FeaturizedSentence) -> np.ndarray:
        key = ("bio", self.task)
        if key not in fs.cache:
            fs.cache[key] = np.asarray([self.index.get(t, 0) for t in fs.sent.bio(TOKEN_TASKS[self.task])],
                                       dtype=np.int64)
        return fs.cache[key]


def new_token_head(task: str, cfg: TrainConfig, vocab: Optional[LabelVocab] = None) -> TokenClassifierHead:
    vocab = vocab or load_vocab()
    return TokenClassifierHead(task, vocab.bio_tags(TOKEN_TASKS[task]), cfg.hidden)


def token_loss(head: TokenClassifierHead, H: torch.Tensor, items: Sequence[FeaturizedSentence]) -> torch.Tensor:
    logits = head(H)
    L = H.shape[1]
    gold = np.full((len(items), L), -100, dtype=np.int64)
    for b, fs in enumerate(items):
        gold[b, :fs.n] = head.gold(fs)
    return F.cross_entropy(logits.reshape(-1, logits.shape[-1]), torch.from_numpy(gold).reshape(-1),
                           ignore_index=-100)


@dataclass
class TokenModel:
    backbone: SharedBackbone
    head: TokenClassifierHead
    curve: list = field(default_factory=list)

    @property
    def task(self) -> str:
        return self.head.task

    def distributions(self, items: Sequence[FeaturizedSentence]) -> list[np.ndarray]:
        with torch.no_grad():
            batch = collate(items)
            probs = torch.softmax(self.head(self.backbone(batch)), dim=-1).numpy()
        return [probs[b, :fs.n] for b, fs in enumerate(items)]

    def predict(self, items: Sequence[FeaturizedSentence], chunk: int = 64) -> list[list[TypedSpan]]:
        out = []
        for i in range(0, len(items), chunk):
            part = items[i:i + chunk]
            with torch.no_grad():
                H = self.backbone(collate(part))
            for b, fs in enumerate(part):
                out.append(predict_spans(self.head, fs.sent, H[b, :fs.n]))
        return out


def train_token_head(task: str, data: Sequence, cfg: TrainConfig, space: FeatureSpace,
                     vocab: Optional[LabelVocab] = None) -> TokenModel:
    """Train a fresh backbone plus a BIO head for ``task`` on ``data``
    (sentences); cross-entropy over every real token."""
    torch.manual_seed(cfg.seed)
    backbone = new_backbone(space, cfg)
    head = new_token_head(task, cfg, vocab)
    items = [space.featurize(s) for s in data]

    def loss_fn(chunk):
        return token_loss(head, backbone(collate(chunk)), chunk)

    curve = fit([backbone, head], items, loss_fn, cfg)
    return TokenModel(backbone, head, curve)


def predict_spans(head: TokenClassifierHead, sent, feats) -> list[TypedSpan]:
    """Argmax tag per token, repaired and decoded into typed spans.

    ``feats`` is the backbone output for ``sent`` (tokens x hidden)."""
    with torch.no_grad():
        logits = head(torch.as_tensor(feats, dtype=torch.float32)).numpy()
    if logits.shape[0] != len(sent.tokens):
        raise ValueError("features are not aligned with the sentence")
    tags = [head.tags[i] for i in argmax_first(logits)]
    return decode_bio(tags)
