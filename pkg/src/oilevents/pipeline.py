"""End-to-end event extraction: trained models bundled with their feature
space, saved as a directory with a manifest and reloaded for prediction."""
from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Optional, Sequence

import torch

from .corpus import Sentence, Token
from .errors import ManifestMismatch
from .features import ChannelConfig, TagVocab, encoder_id, encoder_spec, load_encoder
from .tasks.arp import new_arp_head
from .tasks.common import FeatureSpace, TrainConfig, new_backbone
from .tasks.properties import PropertyHead, PropertyInstance, PropertyModel
from .tasks.spans import SpanStrategy
from .tasks.token import new_token_head
from .transfer import ExtractionModels, extract, make_setup
from .vocab import PROPERTIES, LabelVocab, load_vocab

MANIFEST = "manifest.json"
WEIGHTS = "weights.pt"
MODEL_FORMAT = "oilevents-model"
MODEL_VERSION = 1


def config_hash(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True, default=str).encode()).hexdigest()[:16]


class EventPipeline:
    def __init__(self, space: FeatureSpace, extraction: ExtractionModels, properties: dict,
                 cfg: TrainConfig, vocab: Optional[LabelVocab] = None, strategy: Optional[SpanStrategy] = None,
                 meta: Optional[dict] = None):
        self.space = space
        self.extraction = extraction
        self.properties = dict(properties)
        self.cfg = cfg
        self.vocab = vocab or load_vocab()
        self.strategy = strategy or next((m.head.strategy for m in self.properties.values()), None)
        self.meta = dict(meta or {})

    # ----------------------------------------------------------- inference

    def predict_sentences(self, sentences: Sequence[Sentence]) -> list[dict]:
        sentences = [s for s in sentences if s.tokens]
        if not sentences:
            return []
        items = [self.space.featurize(s) for s in sentences]
        found = extract(self.extraction, items)
        props = {}
        for prop, model in self.properties.items():
            inst = [PropertyInstance(s, t, "") for s, x in zip(sentences, found) for t in x.triggers]
            props[prop] = iter(model.predict(self.space, inst)) if inst else iter(())
        out = []
        for s, x in zip(sentences, found):
            words = s.words
            ents = [{"text": " ".join(words[e.start:e.end + 1]), "type": e.label,
                     "start_tok": e.start, "end_tok": e.end} for e in x.entities]
            ent_pos = {tuple(e): i for i, e in enumerate(x.entities)}
            events = []
            for t in x.triggers:
                args = [{"entity": ent_pos[tuple(c.entity)], "text": " ".join(words[c.entity.start:c.entity.end + 1]),
                         "role": role}
                        for c, role in zip(x.candidates, x.roles) if c.trigger == t and role != "NONE"]
                ev = {"trigger": " ".join(words[t.start:t.end + 1]), "type": t.label,
                      "start_tok": t.start, "end_tok": t.end, "arguments": args}
                for prop in PROPERTIES:
                    if prop in props:
                        ev[prop] = next(props[prop])
                events.append(ev)
            out.append({"text": s.text or " ".join(words), "tokens": words, "entities": ents, "events": events})
        return out

    def predict_text(self, text: str, annotator=None) -> list[dict]:
        from .annotate import FallbackAnnotator
        from .corpus import _checked_tree

        annotator = annotator or FallbackAnnotator()
        sentences = []
        for a in annotator.annotate(text):
            if not a.tokens:
                continue
            heads, labels = _checked_tree(a, "input")
            toks = tuple(Token(t.surface, t.pos, t.ner, labels[i], heads[i], t.start, t.end)
                         for i, t in enumerate(a.tokens))
            sentences.append(Sentence(toks, text=text[a.start:a.end], start_char=a.start, end_char=a.end))
        return self.predict_sentences(sentences)

    # ---------------------------------------------------------- persistence

    def manifest(self) -> dict:
        enc = self.space.encoder
        return {
            "format": MODEL_FORMAT, "version": MODEL_VERSION,
            "task": ["EMD", "ED", "ARP"] + sorted(self.properties),
            "label_vocab_hash": self.vocab.digest,
            "encoder": {"id": encoder_id(enc), "spec": encoder_spec(enc), "name": enc.name,
                        "dim": enc.dim, "version": enc.version},
            "channel_config": self.space.channels.to_dict(),
            "k": self.cfg.k,
            "strategy": str(self.strategy) if self.strategy else None,
            "seed": self.cfg.seed,
            "setup": self.extraction.setup.kind.value,
            "train_config": self.cfg.to_dict(),
            "tag_vocabs": {c: v.itos for c, v in self.space.vocabs.items()},
            **self.meta,
        }

    def save(self, directory: str | Path) -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        state = {"backbones": {t: b.state_dict() for t, b in self.extraction.backbones.items()},
                 "heads": {t: h.state_dict() for t, h in self.extraction.heads.items()},
                 "properties": {p: {"backbone": m.backbone.state_dict(), "head": m.head.state_dict()}
                                for p, m in self.properties.items()}}
        torch.save(state, directory / WEIGHTS)
        (directory / MANIFEST).write_text(json.dumps(self.manifest(), indent=1, sort_keys=True, default=str),
                                          encoding="utf-8")
        return directory

    @classmethod
    def load(cls, directory: str | Path, encoder=None, vocab: Optional[LabelVocab] = None) -> "EventPipeline":
        directory = Path(directory)
        try:
            man = json.loads((directory / MANIFEST).read_text("utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ManifestMismatch(f"cannot read manifest in {directory}: {exc}") from exc
        if man.get("format") != MODEL_FORMAT or man.get("version") != MODEL_VERSION:
            raise ManifestMismatch(f"unsupported model format {man.get('format')}/{man.get('version')}")
        vocab = vocab or load_vocab()
        if man["label_vocab_hash"] != vocab.digest:
            raise ManifestMismatch("label vocabulary differs from the one the model was trained with")
        if encoder is None:
            encoder = load_encoder(man["encoder"]["spec"])
        if encoder_id(encoder) != man["encoder"]["id"]:
            raise ManifestMismatch(f"model expects encoder {man['encoder']['id']}, got {encoder_id(encoder)}")
        cfg = TrainConfig(**man["train_config"])
        vocabs = {c: TagVocab(itos[1:]) for c, itos in man["tag_vocabs"].items()}
        space = FeatureSpace(encoder, vocabs, ChannelConfig(**man["channel_config"]))
        state = torch.load(directory / WEIGHTS, weights_only=True)
        models = ExtractionModels(make_setup(man["setup"]))
        for task, sd in state["backbones"].items():
            bb = new_backbone(space, cfg)
            bb.load_state_dict(sd)
            models.backbones[task] = bb.eval()
        for task, sd in state["heads"].items():
            head = new_arp_head(cfg, vocab) if task == "ARP" else new_token_head(task, cfg, vocab)
            head.load_state_dict(sd)
            head.eval()
            models.heads[task] = head
        strategy = SpanStrategy.parse(man["strategy"]) if man.get("strategy") else None
        props = {}
        for prop, sd in state["properties"].items():
            bb = new_backbone(space, cfg)
            bb.load_state_dict(sd["backbone"])
            head = PropertyHead(prop, vocab.property_classes(prop), strategy, cfg.hidden, cfg)
            head.load_state_dict(sd["head"])
            bb.eval()
            head.eval()
            props[prop] = PropertyModel(bb, head)
        known = {"format", "version", "task", "label_vocab_hash", "encoder", "channel_config", "k",
                 "strategy", "seed", "setup", "train_config", "tag_vocabs"}
        meta = {k: v for k, v in man.items() if k not in known}
        return cls(space, models, props, cfg, vocab, strategy, meta)
