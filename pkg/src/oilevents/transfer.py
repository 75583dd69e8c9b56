"""Task setups for joint / sequential training of EMD, ED and ARP, and
cross-domain sequential transfer for event properties."""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

import numpy as np
import torch

from .errors import IncompatibleSource, NonFiniteLoss, SourceTooSmall, StageFailure
from .evaluation import (MetricsReport, build_report, confusion, span_report, stratified_kfold)
from .sources import NEGATION, SUPPORTED_PROPERTIES, UNCERTAINTY, SourceKind, SourceSentenceSet
from .tasks.arp import (ArpHead, ArpModel, Candidate, arp_loss, enumerate_pairs, gold_candidates,
                        new_arp_head, none_weight)
from .tasks.common import FeatureSpace, TrainConfig, collate, fit, new_backbone, snapshot
from .tasks.properties import (PropertyInstance, PropertyModel, event_instances, fit_property,
                               new_property_model)
from .tasks.spans import SpanStrategy
from .tasks.token import TokenModel, new_token_head, token_loss
from .vocab import NONE_ROLE, LabelVocab, load_vocab

log = logging.getLogger(__name__)

TASKS = ("EMD", "ED", "ARP")
DEFAULT_BETA = 2.0


class SetupKind(str, enum.Enum):
    SINGLE = "Single"
    FULL_MTL = "FullMTL"
    FULL_STL = "FullSTL"
    COMBO1 = "Combo1"
    COMBO2 = "Combo2"


@dataclass(frozen=True)
class JointLossSpec:
    weights: tuple = ()   # (task, weight) pairs; tasks not listed weigh 1.0

    def __post_init__(self):
        items = tuple(self.weights.items()) if isinstance(self.weights, Mapping) else tuple(self.weights)
        for task, w in items:
            if not (w > 0 and math.isfinite(w)):
                raise ValueError(f"loss weight for {task} must be positive, got {w}")
        object.__setattr__(self, "weights", items)

    def weight(self, task: str) -> float:
        return dict(self.weights).get(task, 1.0)

    def as_dict(self) -> dict:
        return dict(self.weights)


def joint_loss(losses: Mapping, spec: JointLossSpec = JointLossSpec()):
    """``sum_t w_t * loss_t``. Works on floats and scalar tensors alike."""
    total = 0.0
    for task, loss in losses.items():
        value = float(loss.detach()) if isinstance(loss, torch.Tensor) else float(loss)
        if not math.isfinite(value) or value < 0:
            raise NonFiniteLoss(f"{task} loss is {value}")
        total = total + spec.weight(task) * loss
    return total


@dataclass(frozen=True)
class Stage:
    tasks: tuple
    loss: JointLossSpec = JointLossSpec()


@dataclass(frozen=True)
class TaskSetup:
    kind: SetupKind
    stages: tuple
    share_backbone: bool = True

    def stage_tasks(self) -> list[set]:
        return [set(s.tasks) for s in self.stages]

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "share_backbone": self.share_backbone,
                "stages": [{"tasks": list(s.tasks), "weights": s.loss.as_dict()} for s in self.stages]}


def make_setup(kind: SetupKind | str, beta: float = DEFAULT_BETA, literal_joint_loss: bool = False) -> TaskSetup:
    """Build one of the five setups.

    Combo1 trains EMD first, then ED and ARP jointly with ``beta`` on the ED
    loss. With ``literal_joint_loss`` the second stage instead optimises
    ``loss_EMD + beta * loss_ED`` and ARP gets a stage of its own.
    """
    kind = SetupKind(kind)
    S = Stage
    if kind is SetupKind.SINGLE:
        return TaskSetup(kind, (S(("EMD",)), S(("ED",)), S(("ARP",))), share_backbone=False)
    if kind is SetupKind.FULL_MTL:
        return TaskSetup(kind, (S(("EMD", "ED", "ARP")),))
    if kind is SetupKind.FULL_STL:
        return TaskSetup(kind, (S(("EMD",)), S(("ED",)), S(("ARP",))))
    if kind is SetupKind.COMBO1:
        if literal_joint_loss:
            return TaskSetup(kind, (S(("EMD",)), S(("EMD", "ED"), JointLossSpec({"ED": beta})), S(("ARP",))))
        return TaskSetup(kind, (S(("EMD",)), S(("ED", "ARP"), JointLossSpec({"ED": beta}))))
    return TaskSetup(kind, (S(("EMD", "ED")), S(("ARP",))))


# ------------------------------------------------------------- extraction


@dataclass
class ExtractionModels:
    setup: TaskSetup
    backbones: dict = field(default_factory=dict)   # task -> backbone snapshot of its stage
    heads: dict = field(default_factory=dict)
    curves: list = field(default_factory=list)      # one loss curve per stage
    handoffs: list = field(default_factory=list)    # backbone state entering each stage

    def token_model(self, task: str) -> TokenModel:
        return TokenModel(self.backbones[task], self.heads[task])

    def arp_model(self) -> ArpModel:
        return ArpModel(self.backbones["ARP"], self.heads["ARP"])


def _state(module) -> dict:
    return {k: v.detach().clone() for k, v in module.state_dict().items()}


def train_setup(setup: TaskSetup, train: Sequence, cfg: TrainConfig, space: FeatureSpace,
                vocab: Optional[LabelVocab] = None) -> ExtractionModels:
    """Run the stages in order. Within a stage every task shares the backbone
    and the loss is the stage's joint loss; ARP learns from gold candidate
    pairs. Heads of tasks seen in an earlier stage keep training; new tasks get
    fresh heads on the inherited backbone."""
    vocab = vocab or load_vocab()
    items = [space.featurize(s) for s in train]
    cands = {id(fs): gold_candidates(fs.sent) for fs in items}
    w_none = none_weight(list(cands.values()), cfg.none_weight)
    models = ExtractionModels(setup)
    backbone = None
    for si, stage in enumerate(setup.stages):
        stage_cfg = cfg.with_seed(cfg.seed + 1000 * si)
        try:
            torch.manual_seed(stage_cfg.seed)
            if backbone is None or not setup.share_backbone:
                backbone = new_backbone(space, stage_cfg)
            models.handoffs.append(_state(backbone))
            heads = {}
            for task in stage.tasks:
                if task in models.heads:
                    heads[task] = models.heads[task]
                elif task == "ARP":
                    heads[task] = new_arp_head(stage_cfg, vocab)
                else:
                    heads[task] = new_token_head(task, stage_cfg, vocab)

            def loss_fn(chunk, heads=heads, backbone=backbone, stage=stage):
                H = backbone(collate(chunk))
                losses = {}
                for task, head in heads.items():
                    if task == "ARP":
                        losses[task] = arp_loss(head, H, chunk, [cands[id(fs)] for fs in chunk], w_none)
                    else:
                        losses[task] = token_loss(head, H, chunk)
                return joint_loss(losses, stage.loss)

            models.curves.append(fit([backbone, *heads.values()], items, loss_fn, stage_cfg))
        except Exception as exc:
            raise StageFailure(si, exc) from exc
        snap = snapshot(backbone)
        for task, head in heads.items():
            models.backbones[task] = snap
            models.heads[task] = head
    return models


@dataclass
class Extraction:
    entities: list
    triggers: list
    candidates: list
    roles: list


def extract(models: ExtractionModels, items: Sequence) -> list[Extraction]:
    """Pipeline inference: predicted triggers x predicted entities feed ARP."""
    ents = models.token_model("EMD").predict(items)
    trigs = models.token_model("ED").predict(items)
    cands = [enumerate_pairs(t, e, fs.sent) for fs, t, e in zip(items, trigs, ents)]
    roles = models.arp_model().predict(items, cands)
    return [Extraction(e, t, c, r) for e, t, c, r in zip(ents, trigs, cands, roles)]


def arp_pairs(sent, ex: Extraction) -> tuple[list, list]:
    """Gold / predicted role lists over predicted candidates; gold arguments
    whose pair was never proposed count as predicted NONE."""
    gold = [c.role for c in ex.candidates]
    pred = list(ex.roles)
    proposed = {(tuple(c.trigger), tuple(c.entity)) for c in ex.candidates}
    for a in sent.arguments:
        key = (tuple(sent.triggers[a.trigger_idx].span), tuple(sent.entities[a.entity_idx].span))
        if key not in proposed:
            gold.append(a.role)
            pred.append(NONE_ROLE)
    return gold, pred


def role_report(gold: Sequence[str], pred: Sequence[str], task: str = "ARP") -> MetricsReport:
    classes = [NONE_ROLE] + sorted((set(gold) | set(pred)) - {NONE_ROLE})
    return build_report(confusion(gold, pred, classes), task=task, ignore=(NONE_ROLE,))


def evaluate_extraction(models: ExtractionModels, test: Sequence, space: FeatureSpace) -> dict:
    items = [space.featurize(s) for s in test]
    out = extract(models, items)
    reports = {
        "EMD": span_report([s.entity_spans() for s in test], [x.entities for x in out], task="EMD"),
        "ED": span_report([s.trigger_spans() for s in test], [x.triggers for x in out], task="ED"),
    }
    gold, pred = [], []
    for s, x in zip(test, out):
        g, p = arp_pairs(s, x)
        gold += g
        pred += p
    reports["ARP"] = role_report(gold, pred)
    return reports


def run_setup(setup: TaskSetup, train: Sequence, test: Sequence, cfg: TrainConfig, space: FeatureSpace,
              vocab: Optional[LabelVocab] = None) -> tuple[ExtractionModels, dict]:
    models = train_setup(setup, train, cfg, space, vocab)
    return models, evaluate_extraction(models, test, space)


# ------------------------------------------------------------- properties


def property_report(model: PropertyModel, space: FeatureSpace, instances: Sequence) -> MetricsReport:
    pred = model.predict(space, instances)
    return build_report(confusion([x.label for x in instances], pred, model.head.classes), task=model.prop)


def predicted_trigger_report(model: PropertyModel, space: FeatureSpace, instances: Sequence,
                             ed: TokenModel) -> tuple[MetricsReport, float]:
    """Property metrics over the gold events whose trigger span the ED model
    recovers, plus the recovered fraction."""
    sents = list({id(x.sent): x.sent for x in instances}.values())
    found = ed.predict([space.featurize(s) for s in sents])
    hits = {id(s): {sp[:2] for sp in spans} for s, spans in zip(sents, found)}
    kept = [x for x in instances if tuple(x.trigger[:2]) in hits[id(x.sent)]]
    coverage = len(kept) / len(instances) if instances else 0.0
    if not kept:
        raise ValueError("no gold event was detected")
    return property_report(model, space, kept), coverage


# ------------------------------------------------------------- source transfer

PROPERTY_LABELS = {"polarity": ("NEGATIVE", "POSITIVE"), "modality": ("OTHER", "ASSERTED")}
_CUE_OF = {"polarity": NEGATION, "modality": UNCERTAINTY}
_MARKED = {NEGATION: "negated", UNCERTAINTY: "uncertain"}


@dataclass(frozen=True)
class AlignedSourceSet:
    source_kind: SourceKind
    target_property: str
    texts: tuple
    labels: tuple
    name: str = ""

    def __len__(self):
        return len(self.texts)

    @property
    def classes(self) -> tuple:
        return tuple(sorted(set(self.labels)))


def align_source_labels(src: SourceSentenceSet, target_property: Optional[str] = None) -> AlignedSourceSet:
    """Sentence-level binary labels for one event property.

    polarity: NEGATIVE when a negation cue is present (or the sentence is labelled
    negated), else POSITIVE. modality: OTHER when an uncertainty cue is present
    (or the sentence is labelled uncertain), else ASSERTED.
    """
    supported = SUPPORTED_PROPERTIES[SourceKind(src.source_kind)]
    if target_property is None:
        if len(supported) != 1:
            raise IncompatibleSource(f"{src.source_kind.value} supports {sorted(supported)}; choose one")
        target_property = next(iter(supported))
    target_property = target_property.lower()
    if target_property not in PROPERTY_LABELS:
        raise IncompatibleSource(f"no source alignment for {target_property}")
    if target_property not in supported:
        raise IncompatibleSource(f"{src.source_kind.value} has no annotation usable for {target_property}")
    cue = _CUE_OF[target_property]
    marked, unmarked = PROPERTY_LABELS[target_property]
    texts, labels = [], []
    for s in src.sentences:
        hit = s.has_cue(cue) or (s.labels or {}).get(cue) == _MARKED[cue]
        texts.append(s.text)
        labels.append(marked if hit else unmarked)
    out = AlignedSourceSet(src.source_kind, target_property, tuple(texts), tuple(labels), src.name)
    if len(set(labels)) != 2:
        raise IncompatibleSource(f"{src.name or src.source_kind.value}: aligned labels form a single class")
    return out


@dataclass(frozen=True)
class TransferPlan:
    source: str
    target_property: str
    selection: str = "best-source-validation"
    phase1_epochs: Optional[int] = None    # None: cfg.epochs
    phase2_epochs: Optional[int] = None
    freeze_backbone: bool = False
    validation_folds: int = 10             # 1/10 of the source held out
    min_source: int = 20


@dataclass
class TransferResult:
    model: PropertyModel
    report: MetricsReport
    space: FeatureSpace
    selected_epoch: Optional[int]
    source_size: int


def source_instances(aligned: AlignedSourceSet, annotator=None) -> list[PropertyInstance]:
    from .corpus import sentence_from_text

    return [PropertyInstance(sentence_from_text(t, annotator), None, lab)
            for t, lab in zip(aligned.texts, aligned.labels)]


def sequential_transfer(plan: TransferPlan, source_set: SourceSentenceSet, target_train: Sequence,
                        target_test: Sequence, cfg: TrainConfig, strategy: SpanStrategy, encoder,
                        channels=None, annotator=None, vocab: Optional[LabelVocab] = None) -> TransferResult:
    """Phase 1 trains on the aligned source keeping the epoch that scores best
    on held-out source sentences; phase 2 fine-tunes on the target training
    events. ``target_*`` hold sentences with gold triggers."""
    prop = plan.target_property.lower()
    aligned = align_source_labels(source_set, prop)
    if len(aligned) < plan.min_source:
        raise SourceTooSmall(f"{len(aligned)} source sentences, need {plan.min_source}")
    src = source_instances(aligned, annotator)
    space = FeatureSpace.build([x.sent for x in src] + list(target_train) + list(target_test), encoder, channels)
    model = new_property_model(prop, strategy, cfg, space, vocab)
    p1 = cfg.epochs if plan.phase1_epochs is None else plan.phase1_epochs
    if p1 > 0:
        folds = stratified_kfold([x.label for x in src], plan.validation_folds, cfg.seed)
        tr, va = folds.train_test(0)
        fit_property(model, space, [src[i] for i in tr], replace(cfg, epochs=p1), validation=[src[i] for i in va])
    selected = model.selected_epoch
    p2 = cfg.epochs if plan.phase2_epochs is None else plan.phase2_epochs
    fit_property(model, space, event_instances(target_train, prop), replace(cfg, epochs=p2),
                 freeze_backbone=plan.freeze_backbone)
    report = property_report(model, space, event_instances(target_test, prop))
    return TransferResult(model, report, space, selected, len(aligned))
