"""Event property classifiers (polarity, modality, intensity).

Each model owns a backbone. Token vectors are extended with an embedding of
the position relative to the trigger, then reduced to one vector per event by
the configured span strategy and classified by a two-layer feed-forward
network.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np
import torch
from torch import nn
from torch.nn import functional as F

from ..bio import TypedSpan
from ..errors import SingleClassTrainingSet
from ..graph import PrunedSubtree, normalized_adjacency
from ..vocab import PROPERTIES, LabelVocab, load_vocab
from .common import (FeatureSpace, FeaturizedSentence, SharedBackbone, TrainConfig, argmax_first,
                     collate, fit, new_backbone)
from .spans import (ATTENTIVE, SUBTREE, WINDOW, SpanStrategy, attention_scope, extract_span_subtree,
                    window_slots)

MAX_REL = 8


class PropertyInstance(NamedTuple):
    sent: object
    trigger: Optional[TypedSpan]   # None for sentence-level (source corpus) examples
    label: str


def event_instances(sentences: Sequence, prop: str) -> list[PropertyInstance]:
    if prop not in PROPERTIES:
        raise KeyError(prop)
    return [PropertyInstance(s, t.span, getattr(t, prop)) for s in sentences for t in s.triggers]


def relpos_buckets(n: int, trigger: Optional[TypedSpan]) -> np.ndarray:
    """Clipped offset to the trigger head per token; bucket 2*MAX_REL+1 when there is no trigger."""
    if trigger is None:
        return np.full(n, 2 * MAX_REL + 1, dtype=np.int64)
    i = trigger[0]
    return np.clip(np.arange(n) - i, -MAX_REL, MAX_REL).astype(np.int64) + MAX_REL


class PropertyHead(nn.Module):
    def __init__(self, prop: str, classes: Sequence[str], strategy: SpanStrategy, in_dim: int,
                 cfg: TrainConfig):
        super().__init__()
        self.prop = prop
        self.classes = list(classes)
        self.index = {c: i for i, c in enumerate(self.classes)}
        self.strategy = strategy
        self.relpos = nn.Embedding(2 * MAX_REL + 2, cfg.relpos_dim)
        D = in_dim + cfg.relpos_dim
        self.token_dim = D
        if strategy.kind == WINDOW:
            rep = (2 * strategy.r + 1) * D
        elif strategy.kind == SUBTREE:
            self.gcn = nn.Linear(D, D)
            rep = 2 * D
        else:
            self.score = nn.Linear(D, 1, bias=False)
            rep = D
        self.ffn = nn.Sequential(nn.Linear(rep, cfg.hidden), nn.ReLU(), nn.Linear(cfg.hidden, len(self.classes)))

    def token_features(self, Hb: torch.Tensor, n: int, trigger) -> torch.Tensor:
        rel = self.relpos(torch.from_numpy(relpos_buckets(n, trigger)))
        return torch.cat([Hb[:n], rel], dim=1)

    def represent(self, T: torch.Tensor, fs: FeaturizedSentence, trigger) -> torch.Tensor:
        n = fs.n
        span = trigger if trigger is not None else TypedSpan(0, n - 1, "")
        kind = self.strategy.kind
        if kind == WINDOW:
            zero = T.new_zeros(self.token_dim)
            return torch.cat([T[j] if j is not None else zero for j in window_slots(n, span, self.strategy.r)])
        if kind == SUBTREE:
            key = ("subtree", tuple(span[:2]))
            hit = fs.cache.get(key)
            if hit is None:
                tree = fs.sent.dep_tree
                nodes = extract_span_subtree(tree, span)
                A = normalized_adjacency(PrunedSubtree(frozenset(nodes)), tree).astype(np.float32)
                hit = (np.asarray(nodes, dtype=np.int64), torch.from_numpy(A),
                       nodes.index(tree.span_head(span[0], span[1])))
                fs.cache[key] = hit
            nodes, A, root = hit
            X = torch.relu(self.gcn(A @ T[torch.from_numpy(nodes)]))
            return torch.cat([X[root], X.max(dim=0).values])
        start, end = attention_scope(fs.sent, trigger, self.strategy)
        Ts = T[start:end + 1]
        alpha = torch.softmax(self.score(Ts).squeeze(-1), dim=0)
        return alpha @ Ts

    def forward(self, H: torch.Tensor, items: Sequence[FeaturizedSentence], triggers: Sequence) -> torch.Tensor:
        reps = []
        for b, (fs, trig) in enumerate(zip(items, triggers)):
            reps.append(self.represent(self.token_features(H[b], fs.n, trig), fs, trig))
        return self.ffn(torch.stack(reps))


@dataclass
class PropertyModel:
    backbone: SharedBackbone
    head: PropertyHead
    curve: list = field(default_factory=list)
    selected_epoch: Optional[int] = None

    @property
    def prop(self) -> str:
        return self.head.prop

    def probabilities(self, space: FeatureSpace, instances: Sequence) -> np.ndarray:
        out = []
        with torch.no_grad():
            for i in range(0, len(instances), 64):
                part = instances[i:i + 64]
                items = [space.featurize(x.sent) for x in part]
                logits = self.head(self.backbone(collate(items)), items, [x.trigger for x in part])
                out.append(torch.softmax(logits, dim=-1).numpy())
        return np.concatenate(out) if out else np.zeros((0, len(self.head.classes)))

    def predict(self, space: FeatureSpace, instances: Sequence) -> list[str]:
        probs = self.probabilities(space, instances)
        return [self.head.classes[i] for i in argmax_first(probs)] if len(probs) else []


def new_property_model(prop: str, strategy: SpanStrategy, cfg: TrainConfig, space: FeatureSpace,
                       vocab: Optional[LabelVocab] = None) -> PropertyModel:
    vocab = vocab or load_vocab()
    torch.manual_seed(cfg.seed)
    backbone = new_backbone(space, cfg)
    head = PropertyHead(prop, vocab.property_classes(prop), strategy, cfg.hidden, cfg)
    return PropertyModel(backbone, head)


def class_weights(head: PropertyHead, labels: Sequence[str]) -> torch.Tensor:
    """Inverse-frequency class weights normalised to mean 1 over present classes."""
    counts = np.bincount([head.index[l] for l in labels], minlength=len(head.classes)).astype(float)
    w = np.where(counts > 0, counts.sum() / np.maximum(counts, 1) / max((counts > 0).sum(), 1), 0.0)
    return torch.tensor(w, dtype=torch.float32)


def fit_property(model: PropertyModel, space: FeatureSpace, instances: Sequence, cfg: TrainConfig,
                 validation: Optional[Sequence] = None, freeze_backbone: bool = False) -> PropertyModel:
    """Train ``model`` in place. With ``validation`` the parameters of the
    epoch with the best validation macro-F1 are restored at the end."""
    from ..evaluation import confusion, macro_f1

    head = model.head
    unknown = {x.label for x in instances} - set(head.classes)
    if unknown:
        raise ValueError(f"labels outside the {head.prop} inventory: {sorted(unknown)}")
    if len({x.label for x in instances}) < 2:
        raise SingleClassTrainingSet(f"{head.prop}: training set has a single class")
    weights = class_weights(head, [x.label for x in instances])
    for p in model.backbone.parameters():
        p.requires_grad_(not freeze_backbone)

    def loss_fn(chunk):
        items = [space.featurize(x.sent) for x in chunk]
        logits = head(model.backbone(collate(items)), items, [x.trigger for x in chunk])
        gold = torch.as_tensor([head.index[x.label] for x in chunk])
        return F.cross_entropy(logits, gold, weight=weights)

    best = {"score": -1.0, "state": None, "epoch": None}

    def on_epoch(epoch, _loss):
        if not validation:
            return
        model.backbone.eval()
        head.eval()
        pred = model.predict(space, validation)
        score = macro_f1(confusion([x.label for x in validation], pred, head.classes))
        if score > best["score"]:
            best.update(score=score, epoch=epoch,
                        state=({k: v.clone() for k, v in model.backbone.state_dict().items()},
                               {k: v.clone() for k, v in head.state_dict().items()}))
        model.backbone.train()
        head.train()

    model.curve = fit([model.backbone, head], list(instances), loss_fn, cfg, on_epoch)
    if best["state"] is not None:
        model.backbone.load_state_dict(best["state"][0])
        head.load_state_dict(best["state"][1])
        model.selected_epoch = best["epoch"]
    for p in model.backbone.parameters():
        p.requires_grad_(True)
    return model


def train_property_head(prop: str, strategy: SpanStrategy, data: Sequence, cfg: TrainConfig,
                        space: FeatureSpace, vocab: Optional[LabelVocab] = None) -> PropertyModel:
    """Train on gold triggers. ``data`` holds sentences or PropertyInstances."""
    instances = [x for x in data if isinstance(x, PropertyInstance)]
    if len(instances) != len(data):
        instances = event_instances(data, prop)
    model = new_property_model(prop, strategy, cfg, space, vocab)
    return fit_property(model, space, instances, cfg)
