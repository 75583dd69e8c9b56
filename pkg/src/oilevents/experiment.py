"""Declarative experiments: k-fold runs of a task setup plus the event
property classifiers, one report per (seed, fold) and an aggregate."""
from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

from .corpus import ingest_directory, iter_sentences, load_corpus
from .errors import ConfigError, EmptyDataset
from .evaluation import aggregate_reports, kfold, stratified_kfold, summary_table
from .features import ChannelConfig, load_encoder
from .pipeline import EventPipeline, config_hash
from .tasks.common import FeatureSpace, TrainConfig
from .tasks.properties import event_instances, fit_property, new_property_model
from .tasks.spans import WINDOW, SpanStrategy
from .transfer import (SetupKind, make_setup, predicted_trigger_report, property_report, run_setup,
                       train_setup)
from .vocab import PROPERTIES

log = logging.getLogger(__name__)


@dataclass
class ExperimentConfig:
    """Experiment file (JSON). Only ``corpus`` is required::

        {"corpus": "data/corpus.json", "setup": "Combo2", "beta": 2.0, "k": 1,
         "strategy": "SelfAttentiveSpan", "r": 1, "encoder": "hash:dim=64,seed=0",
         "seeds": [0], "folds": 5, "output_dir": "runs",
         "train": {"epochs": 20, "lr": 0.005}}
    """

    corpus: str
    output_dir: str = "runs"
    encoder: str = "hash:dim=64,seed=0"
    setup: str = "Combo2"
    beta: float = 2.0
    literal_joint_loss: bool = False
    k: int = 1
    strategy: str = "SelfAttentiveSpan"
    r: int = 1
    seeds: list = field(default_factory=lambda: [0])
    folds: int = 5
    max_folds: Optional[int] = None      # run only the first N folds of each seed
    properties: list = field(default_factory=lambda: list(PROPERTIES))
    train: dict = field(default_factory=dict)
    channels: dict = field(default_factory=dict)
    save_model: bool = True

    @classmethod
    def from_dict(cls, d: dict, base_dir: Optional[Path] = None) -> "ExperimentConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "corpus" not in d:
            raise ConfigError("config needs a corpus path")
        d = dict(d)
        if base_dir is not None and not Path(d["corpus"]).is_absolute():
            d["corpus"] = str(base_dir / d["corpus"])
        cfg = cls(**d)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        path = Path(path)
        try:
            raw = json.loads(path.read_text("utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(raw, path.parent)

    def validate(self) -> None:
        valid = [k.value for k in SetupKind]
        if self.setup not in valid:
            raise ConfigError(f"setup must be one of {valid}, got {self.setup!r}")
        if not self.seeds:
            raise ConfigError("seeds must be non-empty")
        if self.folds < 2:
            raise ConfigError("folds must be at least 2")
        if self.beta <= 0:
            raise ConfigError("beta must be positive")
        unknown = set(self.properties) - set(PROPERTIES)
        if unknown:
            raise ConfigError(f"unknown properties {sorted(unknown)}")
        try:
            self.span_strategy()
            TrainConfig(**self.train)
            ChannelConfig(**self.channels)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def span_strategy(self) -> SpanStrategy:
        s = SpanStrategy.parse(self.strategy)
        return SpanStrategy(WINDOW, r=self.r) if s.kind == WINDOW and "(" not in self.strategy else s

    def train_config(self, seed: int) -> TrainConfig:
        return TrainConfig(**{**self.train, "k": self.k, "seed": seed})

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def hash(self) -> str:
        d = self.to_dict()
        d.pop("output_dir")
        return config_hash(d)


def load_sentences(path: str | Path, annotator=None) -> list:
    """Sentences from a canonical corpus file or a directory of brat pairs."""
    path = Path(path)
    if path.is_dir():
        docs, failures = ingest_directory(path, annotator)
        if failures:
            raise EmptyDataset("unparseable documents: " + ", ".join(sorted(failures)))
    else:
        docs = load_corpus(path)
    sents = [s for s in iter_sentences(docs) if s.tokens]
    if not sents:
        raise EmptyDataset(f"no sentences in {path}")
    return sents


def run_fold(cfg: ExperimentConfig, sentences: list, seed: int, fold: int) -> dict:
    """Reports (as dicts) for one fold: EMD/ED/ARP for the setup, and each
    property on stratified event folds, both with gold triggers and with the
    fold's own ED predictions."""
    space = FeatureSpace.build(sentences, load_encoder(cfg.encoder), ChannelConfig(**cfg.channels))
    tc = cfg.train_config(seed)
    tr, te = kfold(len(sentences), cfg.folds, seed).train_test(fold)
    train, test = [sentences[i] for i in tr], [sentences[i] for i in te]
    setup = make_setup(cfg.setup, cfg.beta, cfg.literal_joint_loss)
    models, reports = run_setup(setup, train, test, tc, space)
    out = {task: rep.to_dict() for task, rep in reports.items()}
    test_ids = {id(s) for s in test}
    ed = models.token_model("ED")
    for prop in cfg.properties:
        inst = event_instances(sentences, prop)
        ptr, pte = stratified_kfold([x.label for x in inst], cfg.folds, seed).train_test(fold)
        model = new_property_model(prop, cfg.span_strategy(), tc, space)
        fit_property(model, space, [inst[i] for i in ptr], tc)
        held = [inst[i] for i in pte]
        out[prop] = property_report(model, space, held).to_dict()
        unseen = [x for x in held if id(x.sent) in test_ids]
        if unseen:
            try:
                rep, coverage = predicted_trigger_report(model, space, unseen, ed)
                out[f"{prop}@predicted"] = {**rep.to_dict(), "coverage": coverage}
            except ValueError:
                out[f"{prop}@predicted"] = {"coverage": 0.0}
    return out


def _fold_job(args):
    cfg_dict, sentences, seed, fold = args
    return seed, fold, run_fold(ExperimentConfig(**cfg_dict), sentences, seed, fold)


def new_run_dir(output_dir: str | Path, run_name: Optional[str] = None) -> Path:
    base = Path(output_dir)
    name = run_name or time.strftime("run-%Y%m%d-%H%M%S")
    path, i = base / name, 1
    while path.exists():
        path, i = base / f"{name}-{i}", i + 1
    path.mkdir(parents=True)
    return path


def train_full(cfg: ExperimentConfig, sentences: list, seed: Optional[int] = None) -> EventPipeline:
    seed = cfg.seeds[0] if seed is None else seed
    space = FeatureSpace.build(sentences, load_encoder(cfg.encoder), ChannelConfig(**cfg.channels))
    tc = cfg.train_config(seed)
    models = train_setup(make_setup(cfg.setup, cfg.beta, cfg.literal_joint_loss), sentences, tc, space)
    props = {}
    for prop in cfg.properties:
        m = new_property_model(prop, cfg.span_strategy(), tc, space)
        props[prop] = fit_property(m, space, event_instances(sentences, prop), tc)
    return EventPipeline(space, models, props, tc, strategy=cfg.span_strategy(),
                         meta={"config_hash": cfg.hash})


def run_experiment(cfg: ExperimentConfig, jobs: int = 1, run_name: Optional[str] = None,
                   output_dir: Optional[str] = None) -> tuple[Path, dict]:
    sentences = load_sentences(cfg.corpus)
    run_dir = new_run_dir(output_dir or cfg.output_dir, run_name)
    (run_dir / "config.json").write_text(json.dumps({**cfg.to_dict(), "config_hash": cfg.hash},
                                                    indent=1, sort_keys=True), encoding="utf-8")
    n_folds = min(cfg.folds, cfg.max_folds or cfg.folds)
    jobs_args = [(cfg.to_dict(), sentences, seed, fold) for seed in cfg.seeds for fold in range(n_folds)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_fold_job, jobs_args))
    else:
        results = [_fold_job(a) for a in jobs_args]
    by_task: dict[str, list] = {}
    from .evaluation import MetricsReport

    for seed, fold, reports in results:
        seed_dir = run_dir / f"seed{seed}"
        seed_dir.mkdir(exist_ok=True)
        (seed_dir / f"fold{fold}.json").write_text(json.dumps(reports, indent=1, sort_keys=True),
                                                   encoding="utf-8")
        for task, rep in reports.items():
            if "task" in rep:
                clean = {k: v for k, v in rep.items() if k != "coverage"}
                by_task.setdefault(task, []).append(MetricsReport.from_dict(clean))
    aggregate = {task: aggregate_reports(reps, task) for task, reps in by_task.items()}
    (run_dir / "aggregate.json").write_text(
        json.dumps({t: r.to_dict() for t, r in aggregate.items()}, indent=1, sort_keys=True), encoding="utf-8")
    table = summary_table({cfg.setup: {t: r for t, r in aggregate.items() if "@" not in t}})
    (run_dir / "summary.txt").write_text(table + "\n", encoding="utf-8")
    if cfg.save_model:
        pipe = train_full(cfg, sentences)
        pipe.meta["metrics"] = {t: {"f1": r.f1, "mcc": r.mcc_value} for t, r in aggregate.items()}
        pipe.save(run_dir / "model")
    return run_dir, aggregate
