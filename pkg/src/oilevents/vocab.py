"""Label inventories, event records and gold-structure validation."""
from __future__ import annotations

import hashlib
import json
import logging
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional

from .bio import TypedSpan

log = logging.getLogger(__name__)

NONE_ROLE = "NONE"
PROPERTIES = ("polarity", "modality", "intensity")


def normalize_label(label: str) -> str:
    """Map annotation spellings ("Financial attribute", "SLOW-WEAK") to the
    canonical upper-snake form used in the vocabulary."""
    return re.sub(r"[\s\-]+", "_", label.strip()).upper()


@dataclass(frozen=True)
class LabelVocab:
    entity_types: tuple
    event_types: tuple
    argument_roles: tuple
    polarity: tuple = ("POSITIVE", "NEGATIVE")
    modality: tuple = ("ASSERTED", "OTHER")
    intensity: tuple = ("NEUTRAL", "EASED", "INTENSIFIED")
    role_matrix: Mapping[str, frozenset] = field(default_factory=dict)
    version: str = "1.0"

    def __post_init__(self):
        for name in ("entity_types", "event_types", "argument_roles",
                     "polarity", "modality", "intensity"):
            values = getattr(self, name)
            if len(set(values)) != len(values):
                raise ValueError(f"duplicate labels in {name}")
            if any(v != normalize_label(v) for v in values):
                raise ValueError(f"{name} labels must be in canonical upper-snake form")
        if list(self.argument_roles).count(NONE_ROLE) != 1:
            raise ValueError("argument_roles must contain NONE exactly once")

    @classmethod
    def from_dict(cls, d: dict) -> "LabelVocab":
        return cls(
            entity_types=tuple(d["entity_types"]),
            event_types=tuple(d["event_types"]),
            argument_roles=tuple(d["argument_roles"]),
            polarity=tuple(d.get("polarity", cls.polarity)),
            modality=tuple(d.get("modality", cls.modality)),
            intensity=tuple(d.get("intensity", cls.intensity)),
            role_matrix={k: frozenset(v) for k, v in d.get("role_matrix", {}).items()},
            version=str(d.get("version", "1.0")),
        )

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "entity_types": list(self.entity_types),
            "event_types": list(self.event_types),
            "argument_roles": list(self.argument_roles),
            "polarity": list(self.polarity),
            "modality": list(self.modality),
            "intensity": list(self.intensity),
            "role_matrix": {k: sorted(v) for k, v in sorted(self.role_matrix.items())},
        }

    @property
    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def property_classes(self, prop: str) -> tuple:
        if prop not in PROPERTIES:
            raise KeyError(prop)
        return getattr(self, prop)

    def bio_tags(self, kind: str) -> list[str]:
        """Tag inventory for ``kind`` in {"entity", "event"}: O first, then B-/I- pairs."""
        labels = {"entity": self.entity_types, "event": self.event_types}[kind]
        tags = ["O"]
        for lab in labels:
            tags += [f"B-{lab}", f"I-{lab}"]
        return tags

    def role_listed(self, event_type: str, role: str) -> bool:
        return role in self.role_matrix.get(event_type, ())


@lru_cache(maxsize=None)
def _default_vocab() -> LabelVocab:
    text = resources.files(__package__).joinpath("data/vocab.json").read_text("utf-8")
    return LabelVocab.from_dict(json.loads(text))


def load_vocab(path: Optional[str | Path] = None) -> LabelVocab:
    """Load a vocabulary file; without a path, the shipped CrudeOilNews inventory."""
    if path is None:
        return _default_vocab()
    return LabelVocab.from_dict(json.loads(Path(path).read_text("utf-8")))


@dataclass(frozen=True)
class EventProperties:
    polarity: Optional[str] = "POSITIVE"
    modality: Optional[str] = "ASSERTED"
    intensity: Optional[str] = "NEUTRAL"

    def as_dict(self) -> dict:
        return {p: getattr(self, p) for p in PROPERTIES}


@dataclass(frozen=True)
class EventRecord:
    trigger: TypedSpan
    arguments: tuple = ()  # (TypedSpan entity, role) pairs
    properties: EventProperties = field(default_factory=EventProperties)


def validate_event(rec: EventRecord, vocab: LabelVocab, strict: bool = False) -> list[str]:
    """Return every violation found in ``rec``; an empty list means valid.

    The shipped role matrix is incomplete, so a known role that the matrix does
    not list for the event type only logs a warning unless ``strict`` is set.
    """
    problems = []
    etype = rec.trigger.label
    if etype not in vocab.event_types:
        problems.append(f"unknown event type {etype!r}")
    for ent, role in rec.arguments:
        if ent.label not in vocab.entity_types:
            problems.append(f"unknown entity type {ent.label!r}")
        if role not in vocab.argument_roles:
            problems.append(f"unknown argument role {role!r}")
        elif role == NONE_ROLE:
            problems.append("NONE is not a valid role for a linked argument")
        elif not vocab.role_listed(etype, role):
            if strict:
                problems.append(f"role {role} not permitted for {etype}")
            else:
                log.warning("role %s not listed for event type %s; allowing", role, etype)
    for prop in PROPERTIES:
        value = getattr(rec.properties, prop)
        if value is None:
            problems.append(f"missing {prop} value")
        elif value not in vocab.property_classes(prop):
            problems.append(f"unknown {prop} value {value!r}")
    return problems
