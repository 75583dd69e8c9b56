"""Seeded generators of small brat-annotated commodity-news corpora.

Entity and trigger words come from disjoint lexicons, argument roles follow
from the (event type, entity type) pair, and event properties follow from cue
words:

* polarity NEGATIVE iff the trigger is negated with "not";
* modality OTHER iff a modal ("may", "could", "will", "might") governs it;
* intensity INTENSIFIED / EASED iff an intensifying / easing adverb follows it.

Documents are emitted as brat standoff so tests exercise the full ingest path.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .corpus import Document, parse_standoff, to_canonical

COMMODITIES = ["Brent crude", "WTI crude", "oil", "crude oil", "gasoline", "heating oil", "diesel",
               "jet fuel"]
SUPPLIERS = [("Saudi Arabia", "COUNTRY"), ("Russia", "COUNTRY"), ("Iraq", "COUNTRY"),
             ("Nigeria", "COUNTRY"), ("Kuwait", "COUNTRY"), ("Venezuela", "COUNTRY"),
             ("OPEC", "ORGANIZATION"), ("Aramco", "ORGANIZATION"), ("Rosneft", "ORGANIZATION")]
ECONOMIC_ITEMS = ["output", "production", "exports", "supply", "shipments"]
DATES = ["Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "last week", "this month"]

# event type -> (past form, base form)
MOVES = {
    "MOVEMENT_DOWN_LOSS": [("fell", "fall"), ("dropped", "drop")],
    "MOVEMENT_UP_GAIN": [("rose", "rise"), ("climbed", "climb")],
}
CAUSES = {
    "CAUSE_MOVEMENT_DOWN_LOSS": [("cut", "cut"), ("reduced", "reduce")],
    "CAUSE_MOVEMENT_UP_GAIN": [("boosted", "boost"), ("raised", "raise")],
}
MODALS = ["may", "could", "will", "might"]
INTENSIFIERS = ["sharply", "steeply", "further"]
EASERS = ["slightly", "modestly", "marginally"]


@dataclass
class _Builder:
    """Accumulates space-separated tokens plus standoff annotations."""

    parts: list = field(default_factory=list)
    length: int = 0
    ann: list = field(default_factory=list)
    n_t: int = 0
    n_e: int = 0
    n_a: int = 0

    def add(self, text: str) -> tuple[int, int]:
        if self.parts:
            self.length += 1
        start = self.length
        self.parts.append(text)
        self.length += len(text)
        return start, self.length

    def mention(self, text: str, label: str) -> str:
        start, end = self.add(text)
        self.n_t += 1
        tid = f"T{self.n_t}"
        self.ann.append(f"{tid}\t{label} {start} {end}\t{text}")
        return tid

    def event(self, etype: str, trigger: str, args: list, props: dict) -> None:
        self.n_e += 1
        eid = f"E{self.n_e}"
        self.ann.append(f"{eid}\t{etype}:{trigger}" + "".join(f" {r}:{t}" for r, t in args))
        for name, value in props.items():
            self.n_a += 1
            self.ann.append(f"A{self.n_a}\t{name} {eid} {value}")

    def end_sentence(self) -> None:
        self.add(".")

    @property
    def text(self) -> str:
        return " ".join(self.parts)


def _properties(rng: np.random.Generator) -> dict:
    return {"Polarity": "NEGATIVE" if rng.random() < 0.35 else "POSITIVE",
            "Modality": "OTHER" if rng.random() < 0.35 else "ASSERTED",
            "Intensity": ["NEUTRAL", "INTENSIFIED", "EASED"][int(rng.integers(3))]}


def _verb_group(b: _Builder, forms: tuple, props: dict, etype: str, rng) -> str:
    """Emit modal / negation / trigger / adverb and return the trigger id."""
    past, base = forms
    negated = props["Polarity"] == "NEGATIVE"
    modal = props["Modality"] == "OTHER"
    if modal:
        b.add(MODALS[int(rng.integers(len(MODALS)))])
    elif negated:
        b.add("did")
    if negated:
        b.add("not")
    trig = b.mention(base if (modal or negated) else past, etype)
    if props["Intensity"] == "INTENSIFIED":
        b.add(INTENSIFIERS[int(rng.integers(len(INTENSIFIERS)))])
    elif props["Intensity"] == "EASED":
        b.add(EASERS[int(rng.integers(len(EASERS)))])
    return trig


def _movement(b: _Builder, rng, props: dict, with_date: bool) -> None:
    etype = ["MOVEMENT_DOWN_LOSS", "MOVEMENT_UP_GAIN"][int(rng.integers(2))]
    forms = MOVES[etype][int(rng.integers(len(MOVES[etype])))]
    args = [("Item", b.mention(COMMODITIES[int(rng.integers(len(COMMODITIES)))], "COMMODITY"))]
    trig = _verb_group(b, forms, props, etype, rng)
    args.append(("Difference", b.mention(f"{int(rng.integers(1, 10))} percent", "PERCENT")))
    if with_date and rng.random() < 0.7:
        b.add("on")
        args.append(("Reference_Point", b.mention(DATES[int(rng.integers(len(DATES)))], "DATE")))
    if rng.random() < 0.5:
        b.add("to")
        args.append(("Final_Value", b.mention(f"{int(rng.integers(40, 95))} dollars", "MONEY")))
    b.event(etype, trig, args, props)


def _cause(b: _Builder, rng, props: dict) -> None:
    etype = ["CAUSE_MOVEMENT_DOWN_LOSS", "CAUSE_MOVEMENT_UP_GAIN"][int(rng.integers(2))]
    forms = CAUSES[etype][int(rng.integers(len(CAUSES[etype])))]
    name, ntype = SUPPLIERS[int(rng.integers(len(SUPPLIERS)))]
    args = [("Supplier", b.mention(name, ntype))]
    trig = _verb_group(b, forms, props, etype, rng)
    args.append(("Item", b.mention(ECONOMIC_ITEMS[int(rng.integers(len(ECONOMIC_ITEMS)))], "ECONOMIC_ITEM")))
    if rng.random() < 0.5:
        b.add("by")
        args.append(("Difference", b.mention(f"{int(rng.integers(1, 9)) * 100000} barrels", "QUANTITY")))
    b.event(etype, trig, args, props)


def generate_standoff(n_sentences: int, seed: int = 0, per_doc: int = 5) -> list[tuple[str, str, str]]:
    """(doc id, text, ann) triples holding ``n_sentences`` sentences in total.

    Sentence shapes: a price movement, a supply action, or a movement followed
    by "after" and a supply action. Both events of a two-clause sentence share
    their property values.
    """
    rng = np.random.default_rng(seed)
    docs = []
    for d in range(0, n_sentences, per_doc):
        b = _Builder()
        for _ in range(min(per_doc, n_sentences - d)):
            props = _properties(rng)
            shape = rng.random()
            if shape < 0.4:
                _movement(b, rng, props, with_date=True)
            elif shape < 0.7:
                _cause(b, rng, props)
            else:
                _movement(b, rng, props, with_date=True)
                b.add("after")
                _cause(b, rng, props)
            b.end_sentence()
        docs.append((f"syn{seed}-{d // per_doc:04d}", b.text + "\n", "\n".join(b.ann) + "\n"))
    return docs


def write_standoff(out_dir: str | Path, docs: list[tuple[str, str, str]]) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for doc_id, text, ann in docs:
        (out / f"{doc_id}.txt").write_text(text, encoding="utf-8")
        (out / f"{doc_id}.ann").write_text(ann, encoding="utf-8")
    return out


def to_documents(docs: list[tuple[str, str, str]], annotator=None) -> list[Document]:
    return [to_canonical(parse_standoff(ann, text, doc_id), annotator) for doc_id, text, ann in docs]


def synthetic_corpus(n_sentences: int = 200, seed: int = 0, annotator=None) -> list[Document]:
    return to_documents(generate_standoff(n_sentences, seed), annotator)


# ---------------------------------------------------- distant-cue variant

NEG_FRAMES = [["it", "is", "not", "true", "that"], ["it", "was", "not", "reported", "that"]]
POS_FRAMES = [["it", "is", "widely", "reported", "that"], ["it", "was", "now", "confirmed", "that"]]
SOURCES = ["Traders", "Analysts", "Brokers", "Officials"]


def distant_cue_standoff(n_sentences: int, seed: int = 0, per_doc: int = 5) -> list[tuple[str, str, str]]:
    """Polarity fixtures whose only cue sits at least four tokens before the
    trigger: "<Source> said it is not true that <item> <trigger> <n> percent ."
    versus an affirmative frame of the same length."""
    rng = np.random.default_rng(seed)
    docs = []
    for d in range(0, n_sentences, per_doc):
        b = _Builder()
        for _ in range(min(per_doc, n_sentences - d)):
            negative = rng.random() < 0.5
            frames = NEG_FRAMES if negative else POS_FRAMES
            b.add(SOURCES[int(rng.integers(len(SOURCES)))])
            b.add("said")
            for w in frames[int(rng.integers(len(frames)))]:
                b.add(w)
            etype = ["MOVEMENT_DOWN_LOSS", "MOVEMENT_UP_GAIN"][int(rng.integers(2))]
            past, _ = MOVES[etype][int(rng.integers(len(MOVES[etype])))]
            item = b.mention(COMMODITIES[int(rng.integers(len(COMMODITIES)))], "COMMODITY")
            trig = b.mention(past, etype)
            diff = b.mention(f"{int(rng.integers(1, 10))} percent", "PERCENT")
            b.event(etype, trig, [("Item", item), ("Difference", diff)],
                    {"Polarity": "NEGATIVE" if negative else "POSITIVE", "Modality": "ASSERTED",
                     "Intensity": "NEUTRAL"})
            b.end_sentence()
        docs.append((f"cue{seed}-{d // per_doc:04d}", b.text + "\n", "\n".join(b.ann) + "\n"))
    return docs


# ---------------------------------------------------- worked example

WORKED_TEXT = ("World oil prices could fall as a months-long rout deepens despite Saudi Arabia "
               "denying production cuts to curb a supply surplus .")


def worked_example_standoff() -> tuple[str, str, str]:
    """A single annotated sentence with seven mentions, four events and six
    arguments, in standoff form."""
    text = WORKED_TEXT
    spans = {}
    cursor = 0

    def find(word):
        nonlocal cursor
        i = text.index(word, cursor)
        cursor = i + len(word)
        return i, i + len(word)

    order = [("T1", "LOCATION", "World"), ("T2", "COMMODITY", "oil"), ("T3", "FINANCIAL_ATTRIBUTE", "prices"),
             ("T8", "MOVEMENT_DOWN_LOSS", "fall"), ("T4", "DATE", "months-long"), ("T9", "SLOW_WEAK", "rout"),
             ("T5", "COUNTRY", "Saudi Arabia"), ("T6", "FINANCIAL_ATTRIBUTE", "production"),
             ("T10", "CAUSE_MOVEMENT_DOWN_LOSS", "cuts"), ("T7", "FINANCIAL_ATTRIBUTE", "supply"),
             ("T11", "OVERSUPPLY", "surplus")]
    lines = []
    for tid, label, word in order:
        s, e = find(word)
        spans[tid] = (s, e)
        lines.append(f"{tid}\t{label} {s} {e}\t{word}")
    lines += [
        "E1\tMOVEMENT_DOWN_LOSS:T8 Item:T2 Attribute:T3",
        "E2\tSLOW_WEAK:T9 Duration:T4",
        "E3\tCAUSE_MOVEMENT_DOWN_LOSS:T10 Supplier:T5 Attribute:T6",
        "E4\tOVERSUPPLY:T11 Attribute:T7",
    ]
    props = {"E1": ("POSITIVE", "OTHER", "NEUTRAL"), "E2": ("POSITIVE", "ASSERTED", "INTENSIFIED"),
             "E3": ("NEGATIVE", "OTHER", "NEUTRAL"), "E4": ("POSITIVE", "OTHER", "EASED")}
    n = 0
    for eid, (pol, mod, inten) in props.items():
        for name, value in (("Polarity", pol), ("Modality", mod), ("Intensity", inten)):
            n += 1
            lines.append(f"A{n}\t{name} {eid} {value}")
    return "worked-example", text + "\n", "\n".join(lines) + "\n"


def worked_example(annotator=None) -> Document:
    return to_documents([worked_example_standoff()], annotator)[0]
