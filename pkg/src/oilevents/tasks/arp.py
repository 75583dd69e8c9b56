"""Argument role prediction: every trigger x entity pair in a sentence is
classified into one of the argument roles or NONE by a graph convolution over
the pruned dependency subtree linking the two mentions."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import torch
from torch import nn
from torch.nn import functional as F

from ..bio import TypedSpan
from ..graph import normalized_adjacency, prune
from ..vocab import NONE_ROLE, LabelVocab, load_vocab
from .common import (FeatureSpace, FeaturizedSentence, SharedBackbone, TrainConfig, argmax_first,
                     collate, fit, new_backbone)


@dataclass(frozen=True)
class Candidate:
    trigger: TypedSpan
    entity: TypedSpan
    role: str = NONE_ROLE


def enumerate_pairs(triggers: Sequence[TypedSpan], entities: Sequence[TypedSpan],
                    sent=None) -> list[Candidate]:
    """Cross product of triggers and entities in trigger-major order. With a
    gold ``sent`` each pair carries its gold role when both spans match a gold
    mention exactly (offsets and type), otherwise NONE."""
    gold = {}
    if sent is not None:
        for a in sent.arguments:
            gold[(tuple(sent.triggers[a.trigger_idx].span), tuple(sent.entities[a.entity_idx].span))] = a.role
    return [Candidate(TypedSpan(*t), TypedSpan(*e), gold.get((tuple(t), tuple(e)), NONE_ROLE))
            for t in triggers for e in entities]


def gold_candidates(sent) -> list[Candidate]:
    return enumerate_pairs(sent.trigger_spans(), sent.entity_spans(), sent)


class TorchGcn(nn.Module):
    """``H <- relu(A H W + b)`` per layer, the same kernel as ``graph.gcn_forward``."""

    def __init__(self, dims: Sequence[int]):
        super().__init__()
        self.layers = nn.ModuleList(nn.Linear(a, b) for a, b in zip(dims[:-1], dims[1:]))
        for layer in self.layers:
            nn.init.xavier_uniform_(layer.weight)
            nn.init.zeros_(layer.bias)

    def forward(self, H: torch.Tensor, A: torch.Tensor) -> torch.Tensor:
        for layer in self.layers:
            H = torch.relu(layer(A @ H))
        return H


def _block_diag(blocks: Sequence[np.ndarray]) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=np.float32)
    i = 0
    for b in blocks:
        m = b.shape[0]
        out[i:i + m, i:i + m] = b
        i += m
    return out


class ArpHead(nn.Module):
    def __init__(self, roles: Sequence[str], entity_types: Sequence[str], event_types: Sequence[str],
                 in_dim: int, cfg: TrainConfig):
        super().__init__()
        self.roles = list(roles)
        if self.roles[0] != NONE_ROLE:
            raise ValueError("role inventory must start with NONE")
        self.role_index = {r: i for i, r in enumerate(self.roles)}
        self.entity_index = {t: i + 1 for i, t in enumerate(entity_types)}
        self.event_index = {t: i + 1 for i, t in enumerate(event_types)}
        self.k = cfg.k
        dim = cfg.hidden
        self.gcn = TorchGcn([in_dim] + [dim] * cfg.gcn_layers)
        self.ent_emb = nn.Embedding(len(entity_types) + 1, cfg.type_dim)
        self.evt_emb = nn.Embedding(len(event_types) + 1, cfg.type_dim)
        self.mlp = nn.Sequential(nn.Linear(3 * dim + 2 * cfg.type_dim, dim), nn.ReLU(),
                                 nn.Linear(dim, len(self.roles)))

    def structure(self, fs: FeaturizedSentence, cand: Candidate):
        """Kept nodes, normalized adjacency and anchor rows for one pair (cached)."""
        key = ("arp", self.k, cand.trigger[:2], cand.entity[:2])
        hit = fs.cache.get(key)
        if hit is None:
            tree = fs.sent.dep_tree
            a = tree.span_head(cand.trigger.start, cand.trigger.end)
            b = tree.span_head(cand.entity.start, cand.entity.end)
            sub = prune(tree, a, b, self.k)
            nodes = sub.nodes
            hit = (np.asarray(nodes, dtype=np.int64), normalized_adjacency(sub, tree).astype(np.float32),
                   nodes.index(a), nodes.index(b))
            fs.cache[key] = hit
        return hit

    def forward(self, H: torch.Tensor, items: Sequence[FeaturizedSentence],
                cands: Sequence[Sequence[Candidate]]) -> torch.Tensor:
        """Logits for every candidate of every sentence, concatenated in order.
        ``H`` is the padded backbone output (B x L x hidden)."""
        rows, blocks, anchors, types = [], [], [], []
        offset = 0
        for b, (fs, cs) in enumerate(zip(items, cands)):
            for c in cs:
                nodes, A, ia, ib = self.structure(fs, c)
                rows.append(H[b, torch.from_numpy(nodes)])
                blocks.append(A)
                anchors.append((offset, offset + len(nodes), offset + ia, offset + ib))
                types.append((self.event_index.get(c.trigger.label, 0), self.entity_index.get(c.entity.label, 0)))
                offset += len(nodes)
        if not rows:
            return H.new_zeros((0, len(self.roles)))
        X = self.gcn(torch.cat(rows), torch.from_numpy(_block_diag(blocks)))
        reps = [torch.cat([X[ia], X[ib], X[s:e].max(dim=0).values]) for s, e, ia, ib in anchors]
        t = torch.as_tensor(types, dtype=torch.long)
        feats = torch.cat([torch.stack(reps), self.evt_emb(t[:, 0]), self.ent_emb(t[:, 1])], dim=1)
        return self.mlp(feats)


def new_arp_head(cfg: TrainConfig, vocab: Optional[LabelVocab] = None) -> ArpHead:
    vocab = vocab or load_vocab()
    return ArpHead(vocab.argument_roles, vocab.entity_types, vocab.event_types, cfg.hidden, cfg)


def none_weight(cands: Sequence[Sequence[Candidate]], override: Optional[float] = None) -> float:
    """Loss weight for NONE: #positive / #negative candidates, capped at 1."""
    if override is not None:
        return override
    pos = sum(c.role != NONE_ROLE for cs in cands for c in cs)
    neg = sum(c.role == NONE_ROLE for cs in cands for c in cs)
    return min(1.0, pos / neg) if neg and pos else 1.0


def arp_loss(head: ArpHead, H: torch.Tensor, items: Sequence[FeaturizedSentence],
             cands: Sequence[Sequence[Candidate]], w_none: float) -> torch.Tensor:
    logits = head(H, items, cands)
    if logits.shape[0] == 0:
        return H.sum() * 0.0
    gold = torch.as_tensor([head.role_index.get(c.role, 0) for cs in cands for c in cs])
    weight = torch.ones(len(head.roles))
    weight[0] = w_none
    return F.cross_entropy(logits, gold, weight=weight)


@dataclass
class ArpModel:
    backbone: SharedBackbone
    head: ArpHead
    curve: list = field(default_factory=list)

    def predict(self, items: Sequence[FeaturizedSentence],
                cands: Sequence[Sequence[Candidate]]) -> list[list[str]]:
        out = []
        with torch.no_grad():
            for i in range(0, len(items), 64):
                part, pc = items[i:i + 64], cands[i:i + 64]
                logits = self.head(self.backbone(collate(part)), part, pc).numpy()
                flat = [self.head.roles[j] for j in argmax_first(logits)] if len(logits) else []
                pos = 0
                for cs in pc:
                    out.append(flat[pos:pos + len(cs)])
                    pos += len(cs)
        return out


def train_arp_head(data: Sequence, cfg: TrainConfig, space: FeatureSpace,
                   vocab: Optional[LabelVocab] = None) -> ArpModel:
    """Fresh backbone + role head trained on gold candidate pairs."""
    torch.manual_seed(cfg.seed)
    backbone = new_backbone(space, cfg)
    head = new_arp_head(cfg, vocab)
    items = [space.featurize(s) for s in data]
    cmap = {id(fs): gold_candidates(fs.sent) for fs in items}
    w_none = none_weight(list(cmap.values()), cfg.none_weight)

    def loss_fn(chunk):
        return arp_loss(head, backbone(collate(chunk)), chunk, [cmap[id(fs)] for fs in chunk], w_none)

    curve = fit([backbone, head], items, loss_fn, cfg)
    return ArpModel(backbone, head, curve)


def predict_role(head: ArpHead, pair: tuple, sent, feats) -> str:
    """Role for one (trigger span, entity span) pair; ``feats`` is the backbone
    output for ``sent``. Ties resolve to the lowest role index."""
    fs = FeaturizedSentence(sent, np.zeros((len(sent.tokens), 0), dtype=np.float32), {})
    H = torch.as_tensor(feats, dtype=torch.float32)[None]
    with torch.no_grad():
        logits = head(H, [fs], [[Candidate(TypedSpan(*pair[0]), TypedSpan(*pair[1]))]]).numpy()
    return head.roles[int(argmax_first(logits)[0])]
