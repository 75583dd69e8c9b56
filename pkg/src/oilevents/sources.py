"""Loaders for the negation / uncertainty corpora used as transfer sources.

Each loader reads one native layout:

ConanDoyle
    *SEM 2012 CD-SCO columns, tab separated, blank line between sentences:
    ``chapter  sent  tok  word  lemma  pos  parse  [cue scope event]*`` with
    ``***`` in place of the triples for sentences without negation.
SOCC
    SFU Opinion and Comments negation export, one token per line:
    ``token<TAB>cue<TAB>scope``; a cue column other than ``_``/``O`` marks a
    negation cue token. Blank lines separate sentences, ``#`` lines are skipped.
TenKFin
    CSV (or TSV) with a header naming a text column (``sentence`` or ``text``)
    and a ``label`` column holding ``certain``/``uncertain`` (or 0/1).
WikipediaCoNLL
    CoNLL-2010 XML: ``<sentence certainty="certain|uncertain">`` elements with
    inline ``<ccue>`` hedge cues.
Reviews
    SFU Review corpus XML: ``<SENTENCE>`` elements whose words are ``<W>``
    elements, negation and speculation cues wrapped in ``<cue type=...>``.
SENTiVENT
    JSON lines ``{"text": ..., "polarity": ..., "modality": ...}`` with
    positive/negative and certain/asserted/other/uncertain values; class
    labels only.
"""
from __future__ import annotations

import csv
import enum
import io
import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .errors import EmptyDataset, UnsupportedFormat


class SourceKind(str, enum.Enum):
    CONAN_DOYLE = "ConanDoyle"
    SOCC = "SOCC"
    TENK_FIN = "TenKFin"
    WIKIPEDIA_CONLL = "WikipediaCoNLL"
    REVIEWS = "Reviews"
    SENTIVENT = "SENTiVENT"


# which event properties a source can supervise after label alignment
SUPPORTED_PROPERTIES = {
    SourceKind.CONAN_DOYLE: {"polarity"},
    SourceKind.SOCC: {"polarity"},
    SourceKind.TENK_FIN: {"modality"},
    SourceKind.WIKIPEDIA_CONLL: {"modality"},
    SourceKind.REVIEWS: {"polarity", "modality"},
    SourceKind.SENTIVENT: {"polarity", "modality"},
}

NEGATION = "negation"
UNCERTAINTY = "uncertainty"


@dataclass(frozen=True)
class Cue:
    start: int  # character offsets into the sentence text
    end: int
    kind: str


@dataclass(frozen=True)
class SourceSentence:
    text: str
    cues: Optional[tuple] = None      # None: corpus has no cue annotation
    labels: Optional[dict] = None     # e.g. {"uncertainty": "uncertain"}

    def has_cue(self, kind: str) -> bool:
        return any(c.kind == kind for c in self.cues or ())


@dataclass(frozen=True)
class SourceSentenceSet:
    source_kind: SourceKind
    sentences: tuple
    name: str = ""

    def __len__(self):
        return len(self.sentences)


def _join(words: list[str], cue_flags: list[Optional[str]]) -> SourceSentence:
    text, cues, pos = [], [], 0
    for w, flag in zip(words, cue_flags):
        if text:
            pos += 1
        if flag:
            cues.append(Cue(pos, pos + len(w), flag))
        text.append(w)
        pos += len(w)
    return SourceSentence(" ".join(text), tuple(cues))


def _blocks(raw: str):
    block = []
    for line in raw.splitlines():
        if line.startswith("#"):
            continue
        if not line.strip():
            if block:
                yield block
            block = []
        else:
            block.append(line.rstrip("\n").split("\t"))
    if block:
        yield block


def _load_conan_doyle(raw: str) -> list[SourceSentence]:
    out = []
    for block in _blocks(raw):
        if any(len(row) < 8 for row in block):
            raise UnsupportedFormat("ConanDoyle rows need at least 8 tab-separated columns")
        words, flags = [], []
        for row in block:
            words.append(row[3])
            extra = row[7:]
            if extra == ["***"] or not extra:
                flags.append(None)
                continue
            if len(extra) % 3:
                raise UnsupportedFormat("ConanDoyle negation columns come in cue/scope/event triples")
            cue_cols = extra[0::3]
            flags.append(NEGATION if any(c not in ("_", "") for c in cue_cols) else None)
        out.append(_join(words, flags))
    return out


def _load_socc(raw: str) -> list[SourceSentence]:
    out = []
    for block in _blocks(raw):
        if any(len(row) < 2 for row in block):
            raise UnsupportedFormat("SOCC rows need token and cue columns")
        words = [row[0] for row in block]
        flags = [NEGATION if row[1] not in ("_", "O", "") else None for row in block]
        out.append(_join(words, flags))
    return out


def _load_tenk(raw: str) -> list[SourceSentence]:
    sample = raw[:2048]
    dialect = "excel-tab" if sample.count("\t") > sample.count(",") else "excel"
    reader = csv.DictReader(io.StringIO(raw), dialect=dialect)
    fields = {f.lower(): f for f in reader.fieldnames or []}
    text_col = fields.get("sentence") or fields.get("text")
    label_col = fields.get("label")
    if not text_col or not label_col:
        raise UnsupportedFormat("TenKFin needs a sentence/text column and a label column")
    out = []
    for row in reader:
        value = row[label_col].strip().lower()
        if value in ("1", "uncertain"):
            label = "uncertain"
        elif value in ("0", "certain"):
            label = "certain"
        else:
            raise UnsupportedFormat(f"TenKFin label {value!r}")
        out.append(SourceSentence(row[text_col].strip(), None, {UNCERTAINTY: label}))
    return out


def _parse_xml(raw: str) -> ET.Element:
    try:
        return ET.fromstring(raw)
    except ET.ParseError as exc:
        raise UnsupportedFormat(f"invalid XML: {exc}") from exc


def _load_wikipedia(raw: str) -> list[SourceSentence]:
    root = _parse_xml(raw)
    out = []
    for sent in root.iter("sentence"):
        parts, cues, pos = [], [], 0
        if sent.text:
            parts.append(sent.text)
            pos += len(sent.text)
        for child in sent:
            inner = "".join(child.itertext())
            if child.tag == "ccue":
                cues.append(Cue(pos, pos + len(inner), UNCERTAINTY))
            parts.append(inner)
            pos += len(inner)
            if child.tail:
                parts.append(child.tail)
                pos += len(child.tail)
        text = "".join(parts)
        lead = len(text) - len(text.lstrip())
        text = text.strip()
        cues = [Cue(c.start - lead, c.end - lead, c.kind) for c in cues]
        certainty = sent.get("certainty")
        labels = {UNCERTAINTY: certainty} if certainty in ("certain", "uncertain") else None
        out.append(SourceSentence(text, tuple(cues), labels))
    return out


def _load_reviews(raw: str) -> list[SourceSentence]:
    root = _parse_xml(raw)
    out = []
    kinds = {"negation": NEGATION, "speculation": UNCERTAINTY}

    def walk(node, active, words, flags):
        if node.tag == "W":
            words.append((node.text or "").strip())
            flags.append(active)
            return
        if node.tag == "cue":
            active = kinds.get(node.get("type", "").lower(), active)
        for child in node:
            walk(child, active, words, flags)

    for sent in root.iter("SENTENCE"):
        words, flags = [], []
        walk(sent, None, words, flags)
        if words:
            out.append(_join(words, flags))
    return out


_POLARITY = {"positive": "affirmed", "negative": "negated"}
_MODALITY = {"certain": "certain", "asserted": "certain", "other": "uncertain", "uncertain": "uncertain"}


def _load_sentivent(raw: str) -> list[SourceSentence]:
    out = []
    for line_no, line in enumerate(raw.splitlines(), 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise UnsupportedFormat(f"SENTiVENT line {line_no}: {exc}") from exc
        text = rec.get("text") or rec.get("sentence")
        if text is None:
            raise UnsupportedFormat(f"SENTiVENT line {line_no} has no text")
        labels = {}
        if "polarity" in rec:
            labels[NEGATION] = _POLARITY[str(rec["polarity"]).lower()]
        if "modality" in rec:
            labels[UNCERTAINTY] = _MODALITY[str(rec["modality"]).lower()]
        if not labels:
            raise UnsupportedFormat(f"SENTiVENT line {line_no} has no class label")
        out.append(SourceSentence(text, None, labels))
    return out


_LOADERS = {
    SourceKind.CONAN_DOYLE: _load_conan_doyle,
    SourceKind.SOCC: _load_socc,
    SourceKind.TENK_FIN: _load_tenk,
    SourceKind.WIKIPEDIA_CONLL: _load_wikipedia,
    SourceKind.REVIEWS: _load_reviews,
    SourceKind.SENTIVENT: _load_sentivent,
}


def load_source_dataset(kind: SourceKind | str, path: str | Path) -> SourceSentenceSet:
    try:
        kind = SourceKind(kind)
    except ValueError as exc:
        raise UnsupportedFormat(f"unknown source corpus {kind!r}") from exc
    raw = Path(path).read_text("utf-8")
    if not raw.strip():
        raise EmptyDataset(str(path))
    try:
        sentences = _LOADERS[kind](raw)
    except (KeyError, IndexError) as exc:
        raise UnsupportedFormat(f"{kind.value}: {exc}") from exc
    if not sentences:
        raise EmptyDataset(str(path))
    return SourceSentenceSet(kind, tuple(sentences), Path(path).stem)
