"""Linguistic annotation interface plus a deterministic rule-based fallback.

A real toolkit (CoreNLP, stanza, spaCy) is wired in by implementing
``LinguisticAnnotator``; the fallback only exists so that ingest and the test
suite run without one.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Protocol, Sequence

from .graph import ROOT


@dataclass(frozen=True)
class AnnotatedToken:
    surface: str
    start: int
    end: int
    pos: str = "X"
    ner: str = "O"
    head: int = ROOT
    dep_label: str = "dep"


@dataclass(frozen=True)
class AnnotatedSentence:
    start: int
    end: int
    tokens: tuple


class LinguisticAnnotator(Protocol):
    name: str

    def annotate(self, text: str) -> Sequence[AnnotatedSentence]:
        ...


_TOKEN_RE = re.compile(
    r"(?:[A-Za-z]\.){2,}"             # U.S., U.K.
    r"|\d+(?:[.,]\d+)*"               # 1.350, 438,9
    r"|\w+(?:[-']\w+)*|n't"           # months-long, Libya's
    r"|[^\w\s]",
    re.UNICODE,
)
_SENT_END_RE = re.compile(r"[.!?]+(?=\s+|$)")

_DET = {"a", "an", "the", "this", "that", "these", "those", "its", "their", "his", "her",
        "our", "some", "any", "each", "every", "all", "both"}
_ADP = {"of", "in", "on", "at", "by", "for", "from", "to", "with", "into", "over", "under",
        "after", "before", "since", "during", "despite", "amid", "as", "than", "about",
        "between", "through", "against", "toward", "towards", "per"}
_CCONJ = {"and", "or", "but", "nor", "yet"}
_SCONJ = {"while", "because", "although", "though", "if", "whether", "when", "that"}
_AUX = {"will", "would", "may", "might", "could", "can", "should", "must", "shall",
        "is", "are", "was", "were", "be", "been", "being", "has", "have", "had",
        "do", "does", "did"}
_NEG = {"not", "n't", "no", "never"}
_PRON = {"it", "they", "he", "she", "we", "i", "you", "them", "us", "him"}
_VERBS = {"rose", "rise", "rises", "fell", "fall", "falls", "cut", "cuts", "hit", "hits",
          "soar", "soared", "plunge", "plunged", "jump", "jumped", "drop", "dropped",
          "slump", "slumped", "climb", "climbed", "gain", "gained", "lose", "lost",
          "say", "said", "says", "expect", "expected", "agree", "agreed", "refuse",
          "refused", "consider", "extend", "extended", "ease", "eased", "deepen",
          "deepened", "impose", "imposed", "lift", "lifted", "slip", "slipped",
          "surge", "surged", "tumble", "tumbled", "signal", "signalled", "signaled",
          "boost", "boosted", "reduce", "reduced", "raise", "raised", "continue",
          "continues", "continued", "rally", "rallied", "sink", "sank", "become"}


def _pos(word: str, index: int) -> str:
    low = word.lower()
    if not any(ch.isalnum() for ch in word):
        return "PUNCT"
    if re.fullmatch(r"\d+(?:[.,]\d+)*", word):
        return "NUM"
    if low in _NEG:
        return "PART"
    if low in _DET:
        return "DET"
    if low in _ADP:
        return "ADP"
    if low in _CCONJ:
        return "CCONJ"
    if low in _SCONJ:
        return "SCONJ"
    if low in _AUX:
        return "AUX"
    if low in _PRON:
        return "PRON"
    if low in _VERBS:
        return "VERB"
    if word[0].isupper() and (index > 0 or word.isupper()):
        return "PROPN"
    if low.endswith("ly") and len(low) > 4:
        return "ADV"
    if low.endswith("ed") and len(low) > 4:
        return "VERB"
    if low.endswith(("ous", "ful", "ive", "al", "-long")) and len(low) > 4:
        return "ADJ"
    return "NOUN"


def _ner(word: str, pos: str, nxt: str | None) -> str:
    if pos == "NUM":
        return "PERCENT" if nxt in ("%", "percent") else "NUMBER"
    if word == "%":
        return "PERCENT"
    if pos == "PROPN":
        return "MISC"
    return "O"


_LABEL_BY_POS = {"DET": "det", "ADP": "case", "PUNCT": "punct", "NUM": "nummod",
                 "ADJ": "amod", "AUX": "aux", "CCONJ": "cc", "SCONJ": "mark",
                 "ADV": "advmod", "PRON": "nsubj"}


def _dependencies(pos: list[str]) -> tuple[list[int], list[str]]:
    """Root at the first verb (else auxiliary, else last content token);
    left-of-root tokens head rightwards, right-of-root tokens head leftwards."""
    n = len(pos)
    root = next((i for i, p in enumerate(pos) if p == "VERB"), None)
    if root is None:
        root = next((i for i, p in enumerate(pos) if p == "AUX"), None)
    if root is None:
        content = [i for i, p in enumerate(pos) if p != "PUNCT"]
        root = content[-1] if content else n - 1
    heads, labels = [], []
    seen_object = False
    for i, p in enumerate(pos):
        if i == root:
            heads.append(ROOT)
            labels.append("root")
            continue
        heads.append(i + 1 if i < root else i - 1)
        if p == "PART":
            labels.append("neg")
        elif p in _LABEL_BY_POS:
            labels.append(_LABEL_BY_POS[p])
        elif p in ("NOUN", "PROPN"):
            if i < root:
                labels.append("nsubj" if i == root - 1 else "compound")
            elif not seen_object:
                labels.append("obj")
                seen_object = True
            else:
                labels.append("nmod")
        elif p == "VERB":
            labels.append("xcomp" if i > root else "advcl")
        else:
            labels.append("dep")
    return heads, labels


def _split_sentences(text: str) -> list[tuple[int, int]]:
    spans = []
    start = 0
    for m in _SENT_END_RE.finditer(text):
        end = m.end()
        before = text[start:m.start()].split()
        # "U.S." and single initials do not end a sentence
        if before and re.fullmatch(r"(?:[A-Za-z]\.)*[A-Za-z]", before[-1]) and m.group() == ".":
            nxt = text[end:].lstrip()[:1]
            if nxt and not nxt.isupper():
                continue
        if text[start:end].strip():
            spans.append((start, end))
        start = end
    if text[start:].strip():
        spans.append((start, len(text)))
    out = []
    for s, e in spans:
        while s < e and text[s].isspace():
            s += 1
        while e > s and text[e - 1].isspace():
            e -= 1
        out.append((s, e))
    return out


def annotate_sentence(text: str, start: int = 0, end: int | None = None) -> AnnotatedSentence:
    end = len(text) if end is None else end
    matches = list(_TOKEN_RE.finditer(text, start, end))
    words = [m.group() for m in matches]
    pos = [_pos(w, i) for i, w in enumerate(words)]
    heads, labels = _dependencies(pos)
    tokens = []
    for i, m in enumerate(matches):
        nxt = words[i + 1] if i + 1 < len(words) else None
        tokens.append(AnnotatedToken(m.group(), m.start(), m.end(), pos[i],
                                     _ner(m.group(), pos[i], nxt), heads[i], labels[i]))
    return AnnotatedSentence(start, end, tuple(tokens))


def fallback_annotator(text: str) -> list[AnnotatedSentence]:
    """Sentence split, tokenize and assign heuristic POS/NER/dependencies."""
    return [annotate_sentence(text, s, e) for s, e in _split_sentences(text)]


class FallbackAnnotator:
    name = "fallback-rules-v1"

    def annotate(self, text: str) -> list[AnnotatedSentence]:
        return fallback_annotator(text)


class PretokenizedAnnotator:
    """Annotator for text that is already one sentence per line with
    whitespace-separated tokens (as produced by most source corpora)."""

    name = "pretokenized-v1"

    def annotate(self, text: str) -> list[AnnotatedSentence]:
        out = []
        offset = 0
        for line in text.split("\n"):
            if line.strip():
                toks = []
                for m in re.finditer(r"\S+", line):
                    toks.append((m.group(), offset + m.start(), offset + m.end()))
                words = [t[0] for t in toks]
                pos = [_pos(w, i) for i, w in enumerate(words)]
                heads, labels = _dependencies(pos)
                tokens = tuple(
                    AnnotatedToken(w, s, e, pos[i],
                                   _ner(w, pos[i], words[i + 1] if i + 1 < len(words) else None),
                                   heads[i], labels[i])
                    for i, (w, s, e) in enumerate(toks))
                out.append(AnnotatedSentence(toks[0][1], toks[-1][2], tokens))
            offset += len(line) + 1
        return out
