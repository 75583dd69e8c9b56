"""brat standoff ingest and the canonical sentence-level document model.

Canonical JSON layout (token indices 0-based, ``end_tok`` inclusive, ROOT
heads stored as -1)::

    {"doc_id": ..., "sentences": [
        {"text": ..., "start_char": ..., "end_char": ...,
         "tokens": [{"surface", "pos", "ner", "dep_label", "head", "start", "end"}],
         "entities": [{"type", "start_tok", "end_tok"}],
         "triggers": [{"type", "start_tok", "end_tok", "polarity", "modality", "intensity"}],
         "arguments": [{"trigger_idx", "entity_idx", "role"}]}]}
"""
from __future__ import annotations

import json
import logging
import re
from bisect import bisect_right
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Optional

from .annotate import AnnotatedSentence, FallbackAnnotator, LinguisticAnnotator
from .bio import TypedSpan, encode_bio
from .errors import (AnnotatorFailure, DanglingReference, MalformedLine, SpanOutOfBounds,
                     UnalignableSpan)
from .graph import ROOT, DepTree, tree_problem
from .vocab import EventProperties, EventRecord, normalize_label

log = logging.getLogger(__name__)

CORPUS_FORMAT = "oilevents-corpus"
CORPUS_VERSION = 1


# ---------------------------------------------------------------- standoff


@dataclass(frozen=True)
class TextBound:
    id: str
    type: str
    start: int
    end: int
    text: str


@dataclass(frozen=True)
class RawEvent:
    id: str
    type: str
    trigger: str
    args: tuple  # (role, ref id)


@dataclass(frozen=True)
class RawAttribute:
    id: str
    name: str
    target: str
    value: Optional[str]


@dataclass
class RawStandoffDoc:
    doc_id: str
    text: str
    ann_lines: list
    textbounds: dict = field(default_factory=dict)
    events: dict = field(default_factory=dict)
    attributes: list = field(default_factory=list)


_T_RE = re.compile(r"^(T\d+)\t(\S+) (\d+ \d+(?:;\d+ \d+)*)\t?(.*)$")
_E_RE = re.compile(r"^(E\d+)\t(\S+?):(\S+)((?: \S+:\S+)*)\s*$")
_A_RE = re.compile(r"^([AM]\d+)\t(\S+) (\S+)(?: (\S+))?\s*$")
_IGNORED = ("#", "R", "N", "*")


def parse_standoff(ann: str, txt: str, doc_id: str = "") -> RawStandoffDoc:
    if not txt:
        raise ValueError("document text is empty")
    doc = RawStandoffDoc(doc_id, txt, [])
    for line_no, line in enumerate(ann.splitlines(), start=1):
        if not line.strip():
            continue
        doc.ann_lines.append(line)
        if line.startswith(_IGNORED):
            continue
        if line.startswith("T"):
            m = _T_RE.match(line)
            if not m:
                raise MalformedLine(line_no, line)
            tid, ttype, frags, text = m.groups()
            pieces = [tuple(map(int, f.split())) for f in frags.split(";")]
            if len(pieces) > 1:
                log.warning("%s: discontinuous span %s covered by its outer extent", doc_id, tid)
            start, end = min(p[0] for p in pieces), max(p[1] for p in pieces)
            if start < 0 or end > len(txt) or start >= end:
                raise SpanOutOfBounds(tid)
            if len(pieces) == 1 and text and txt[start:end] != text:
                log.warning("%s: %s text %r differs from document %r", doc_id, tid, text, txt[start:end])
            doc.textbounds[tid] = TextBound(tid, ttype, start, end, txt[start:end])
        elif line.startswith("E"):
            m = _E_RE.match(line)
            if not m:
                raise MalformedLine(line_no, line)
            eid, etype, trig, rest = m.groups()
            args = tuple(tuple(a.split(":", 1)) for a in rest.split())
            doc.events[eid] = RawEvent(eid, etype, trig, args)
        elif line.startswith(("A", "M")):
            m = _A_RE.match(line)
            if not m:
                raise MalformedLine(line_no, line)
            doc.attributes.append(RawAttribute(*m.groups()))
        else:
            raise MalformedLine(line_no, line)
    for ev in doc.events.values():
        if ev.trigger not in doc.textbounds:
            raise DanglingReference(ev.trigger)
        for _, ref in ev.args:
            if ref not in doc.textbounds and ref not in doc.events:
                raise DanglingReference(ref)
    for attr in doc.attributes:
        if attr.target not in doc.events:
            raise DanglingReference(attr.target)
    return doc


def read_standoff_pair(ann_path: str | Path) -> RawStandoffDoc:
    ann_path = Path(ann_path)
    txt_path = ann_path.with_suffix(".txt")
    return parse_standoff(ann_path.read_text("utf-8"), txt_path.read_text("utf-8"), ann_path.stem)


# ---------------------------------------------------------------- canonical


@dataclass(frozen=True)
class Token:
    surface: str
    pos: str = "X"
    ner: str = "O"
    dep_label: str = "dep"
    head: int = ROOT
    start: int = -1
    end: int = -1


@dataclass(frozen=True)
class EntityMention:
    start: int
    end: int
    type: str

    @property
    def span(self) -> TypedSpan:
        return TypedSpan(self.start, self.end, self.type)


@dataclass(frozen=True)
class EventTrigger:
    start: int
    end: int
    type: str
    polarity: str = "POSITIVE"
    modality: str = "ASSERTED"
    intensity: str = "NEUTRAL"

    @property
    def span(self) -> TypedSpan:
        return TypedSpan(self.start, self.end, self.type)

    @property
    def properties(self) -> EventProperties:
        return EventProperties(self.polarity, self.modality, self.intensity)


@dataclass(frozen=True)
class ArgumentLink:
    trigger_idx: int
    entity_idx: int
    role: str


@dataclass(frozen=True)
class Sentence:
    tokens: tuple
    entities: tuple = ()
    triggers: tuple = ()
    arguments: tuple = ()
    text: str = ""
    start_char: int = -1
    end_char: int = -1

    def __post_init__(self):
        n = len(self.tokens)
        for m in self.entities + self.triggers:
            if not 0 <= m.start <= m.end < n:
                raise ValueError(f"mention {m} outside sentence of {n} tokens")
        for a in self.arguments:
            if not (0 <= a.trigger_idx < len(self.triggers) and 0 <= a.entity_idx < len(self.entities)):
                raise ValueError(f"argument {a} references a missing mention")

    def __len__(self):
        return len(self.tokens)

    @property
    def words(self) -> list[str]:
        return [t.surface for t in self.tokens]

    @cached_property
    def dep_tree(self) -> DepTree:
        return DepTree(tuple(t.head for t in self.tokens), tuple(t.dep_label for t in self.tokens))

    def entity_spans(self) -> list[TypedSpan]:
        return [e.span for e in self.entities]

    def trigger_spans(self) -> list[TypedSpan]:
        return [t.span for t in self.triggers]

    def bio(self, kind: str) -> list[str]:
        spans = self.entity_spans() if kind == "entity" else self.trigger_spans()
        return encode_bio(sorted(set(spans)), len(self.tokens))

    def role_of(self, trigger_idx: int, entity_idx: int) -> str:
        for a in self.arguments:
            if a.trigger_idx == trigger_idx and a.entity_idx == entity_idx:
                return a.role
        return "NONE"

    def events(self) -> list[EventRecord]:
        out = []
        for ti, trig in enumerate(self.triggers):
            args = tuple((self.entities[a.entity_idx].span, a.role)
                         for a in self.arguments if a.trigger_idx == ti)
            out.append(EventRecord(trig.span, args, trig.properties))
        return out

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "start_char": self.start_char,
            "end_char": self.end_char,
            "tokens": [{"surface": t.surface, "pos": t.pos, "ner": t.ner,
                        "dep_label": t.dep_label, "head": t.head,
                        "start": t.start, "end": t.end} for t in self.tokens],
            "entities": [{"type": e.type, "start_tok": e.start, "end_tok": e.end}
                         for e in self.entities],
            "triggers": [{"type": t.type, "start_tok": t.start, "end_tok": t.end,
                          "polarity": t.polarity, "modality": t.modality,
                          "intensity": t.intensity} for t in self.triggers],
            "arguments": [{"trigger_idx": a.trigger_idx, "entity_idx": a.entity_idx,
                           "role": a.role} for a in self.arguments],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Sentence":
        tokens = tuple(Token(t["surface"], t.get("pos", "X"), t.get("ner", "O"),
                             t.get("dep_label", "dep"),
                             ROOT if t.get("head") is None else int(t["head"]),
                             t.get("start", -1), t.get("end", -1)) for t in d["tokens"])
        ents = tuple(EntityMention(e["start_tok"], e["end_tok"], e["type"]) for e in d.get("entities", []))
        trigs = tuple(EventTrigger(t["start_tok"], t["end_tok"], t["type"],
                                   t.get("polarity", "POSITIVE"), t.get("modality", "ASSERTED"),
                                   t.get("intensity", "NEUTRAL")) for t in d.get("triggers", []))
        args = tuple(ArgumentLink(a["trigger_idx"], a["entity_idx"], a["role"])
                     for a in d.get("arguments", []))
        return cls(tokens, ents, trigs, args, d.get("text", ""),
                   d.get("start_char", -1), d.get("end_char", -1))


@dataclass(frozen=True)
class Document:
    doc_id: str
    sentences: tuple

    def to_dict(self) -> dict:
        return {"doc_id": self.doc_id, "sentences": [s.to_dict() for s in self.sentences]}

    @classmethod
    def from_dict(cls, d: dict) -> "Document":
        return cls(d["doc_id"], tuple(Sentence.from_dict(s) for s in d["sentences"]))

    def n_events(self) -> int:
        return sum(len(s.triggers) for s in self.sentences)

    def n_arguments(self) -> int:
        return sum(len(s.arguments) for s in self.sentences)


def _role_name(role: str) -> str:
    return normalize_label(re.sub(r"\d+$", "", role))


def _property(attrs: dict, name: str, default: str) -> str:
    value = attrs.get(name)
    return normalize_label(value) if isinstance(value, str) else default


def _snap(sent: AnnotatedSentence, start: int, end: int) -> Optional[tuple[int, int]]:
    """Smallest token range covering every character of [start, end)."""
    hit = [i for i, t in enumerate(sent.tokens) if t.end > start and t.start < end]
    if not hit:
        return None
    return hit[0], hit[-1]


def _checked_tree(sent: AnnotatedSentence, doc_id: str) -> tuple[list[int], list[str]]:
    heads = [t.head for t in sent.tokens]
    labels = [t.dep_label for t in sent.tokens]
    problem = tree_problem(heads)
    if problem:
        log.warning("%s: sentence at char %d has an invalid parse (%s); using right-branching tree",
                    doc_id, sent.start, problem)
        tree = DepTree.right_branching(len(heads))
        heads, labels = list(tree.head), list(tree.label)
    return heads, labels


def to_canonical(doc: RawStandoffDoc, annotator: Optional[LinguisticAnnotator] = None) -> Document:
    annotator = annotator or FallbackAnnotator()
    try:
        annotated = [s for s in annotator.annotate(doc.text) if s.tokens]
    except Exception as exc:
        raise AnnotatorFailure(f"{doc.doc_id}: {exc}") from exc
    starts = [s.start for s in annotated]

    def locate(tb: TextBound) -> tuple[int, int, int]:
        si = bisect_right(starts, tb.start) - 1
        if si < 0 or tb.end > annotated[si].end:
            # span may start in inter-sentence whitespace
            si = next((i for i, s in enumerate(annotated) if s.end > tb.start), -1)
            if si < 0 or tb.end > annotated[si].end or tb.start > annotated[si].end:
                raise UnalignableSpan(tb.id)
        rng = _snap(annotated[si], tb.start, tb.end)
        if rng is None:
            raise UnalignableSpan(tb.id)
        return si, rng[0], rng[1]

    attrs: dict[str, dict] = {}
    for a in doc.attributes:
        attrs.setdefault(a.target, {})[a.name.lower()] = a.value if a.value is not None else True

    trigger_ids = {ev.trigger for ev in doc.events.values()}
    per_sent_entities: list[dict] = [dict() for _ in annotated]
    for tb in doc.textbounds.values():
        if tb.id in trigger_ids:
            continue
        si, s, e = locate(tb)
        per_sent_entities[si][tb.id] = EntityMention(s, e, normalize_label(tb.type))

    # nested or overlapping mentions are unsupported; keep the earliest, longest
    entity_index: dict[str, tuple[int, int]] = {}
    sent_entities: list[list[EntityMention]] = []
    for si, ents in enumerate(per_sent_entities):
        ordered = sorted(ents.items(), key=lambda kv: (kv[1].start, -kv[1].end, kv[0]))
        kept: list[tuple[str, EntityMention]] = []
        for tid, ent in ordered:
            if kept and ent.start <= kept[-1][1].end:
                if (ent.start, ent.end, ent.type) == (kept[-1][1].start, kept[-1][1].end, kept[-1][1].type):
                    entity_index[tid] = (si, len(kept) - 1)
                else:
                    log.warning("%s: dropping mention %s overlapping %s", doc.doc_id, tid, kept[-1][0])
                continue
            kept.append((tid, ent))
            entity_index[tid] = (si, len(kept) - 1)
        sent_entities.append([e for _, e in kept])

    sent_triggers: list[list[EventTrigger]] = [[] for _ in annotated]
    sent_args: list[list[ArgumentLink]] = [[] for _ in annotated]
    for ev in sorted(doc.events.values(), key=lambda e: (doc.textbounds[e.trigger].start, int(e.id[1:]))):
        tb = doc.textbounds[ev.trigger]
        si, s, e = locate(tb)
        a = attrs.get(ev.id, {})
        trig = EventTrigger(s, e, normalize_label(ev.type),
                            _property(a, "polarity", "POSITIVE"),
                            _property(a, "modality", "ASSERTED"),
                            _property(a, "intensity", "NEUTRAL"))
        ti = len(sent_triggers[si])
        sent_triggers[si].append(trig)
        for role, ref in ev.args:
            if ref not in entity_index:
                log.warning("%s: argument %s of %s is not an entity mention; skipped", doc.doc_id, ref, ev.id)
                continue
            esi, ei = entity_index[ref]
            if esi != si:
                log.warning("%s: cross-sentence argument %s of %s skipped", doc.doc_id, ref, ev.id)
                continue
            sent_args[si].append(ArgumentLink(ti, ei, _role_name(role)))

    sentences = []
    for si, sent in enumerate(annotated):
        heads, labels = _checked_tree(sent, doc.doc_id)
        tokens = tuple(Token(t.surface, t.pos, t.ner, labels[i], heads[i], t.start, t.end)
                       for i, t in enumerate(sent.tokens))
        # sort triggers by position, remapping argument indices
        order = sorted(range(len(sent_triggers[si])),
                       key=lambda i: (sent_triggers[si][i].start, sent_triggers[si][i].end, i))
        remap = {old: new for new, old in enumerate(order)}
        trigs = tuple(sent_triggers[si][i] for i in order)
        args = tuple(sorted({ArgumentLink(remap[a.trigger_idx], a.entity_idx, a.role)
                             for a in sent_args[si]},
                            key=lambda a: (a.trigger_idx, a.entity_idx, a.role)))
        sentences.append(Sentence(tokens, tuple(sent_entities[si]), trigs, args,
                                  doc.text[sent.start:sent.end], sent.start, sent.end))
    return Document(doc.doc_id, tuple(sentences))


# ---------------------------------------------------------------- files


def dump_corpus(docs: Iterable[Document]) -> str:
    blob = {"format": CORPUS_FORMAT, "version": CORPUS_VERSION,
            "documents": [d.to_dict() for d in docs]}
    return json.dumps(blob, ensure_ascii=False, indent=1, sort_keys=True) + "\n"


def save_corpus(docs: Iterable[Document], path: str | Path) -> None:
    Path(path).write_text(dump_corpus(docs), encoding="utf-8")


def load_corpus(path: str | Path) -> list[Document]:
    blob = json.loads(Path(path).read_text("utf-8"))
    if isinstance(blob, dict) and "documents" in blob:
        docs = blob["documents"]
    elif isinstance(blob, list):
        docs = blob
    else:
        docs = [blob]
    return [Document.from_dict(d) for d in docs]


def ingest_directory(in_dir: str | Path, annotator: Optional[LinguisticAnnotator] = None):
    """Parse every ``.ann``/``.txt`` pair under ``in_dir``.

    Returns (documents, failures) where failures maps file name to message.
    """
    docs, failures = [], {}
    for ann_path in sorted(Path(in_dir).rglob("*.ann")):
        try:
            docs.append(to_canonical(read_standoff_pair(ann_path), annotator))
        except Exception as exc:
            failures[str(ann_path)] = f"{type(exc).__name__}: {exc}"
    return docs, failures


def iter_sentences(docs: Iterable[Document]):
    for d in docs:
        yield from d.sentences


def sentence_from_text(text: str, annotator: Optional[LinguisticAnnotator] = None) -> Sentence:
    """Unannotated text as one canonical sentence (no mentions). Text the
    annotator splits into several sentences is merged under a right-branching
    tree."""
    annotator = annotator or FallbackAnnotator()
    try:
        parts = [s for s in annotator.annotate(text) if s.tokens]
    except Exception as exc:
        raise AnnotatorFailure(str(exc)) from exc
    if len(parts) == 1:
        heads, labels = _checked_tree(parts[0], "")
        toks = parts[0].tokens
    else:
        toks = [t for s in parts for t in s.tokens]
        tree = DepTree.right_branching(len(toks))
        heads, labels = list(tree.head), list(tree.label)
    tokens = tuple(Token(t.surface, t.pos, t.ner, labels[i], heads[i], t.start, t.end)
                   for i, t in enumerate(toks))
    return Sentence(tokens, text=text, start_char=0, end_char=len(text))
