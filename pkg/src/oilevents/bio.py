"""BIO tagging codec for entity mentions and event triggers."""
from __future__ import annotations

from typing import Iterable, NamedTuple, Sequence

from .errors import IndexOutOfRange, OverlappingSpans


class TypedSpan(NamedTuple):
    """Token span with inclusive ``end``."""

    start: int
    end: int
    label: str


def encode_bio(spans: Iterable[TypedSpan], n_tokens: int) -> list[str]:
    tags = ["O"] * n_tokens
    ordered = sorted((TypedSpan(*s) for s in spans), key=lambda s: (s.start, s.end))
    prev = None
    for span in ordered:
        if span.start < 0 or span.end >= n_tokens or span.start > span.end:
            raise IndexOutOfRange(f"span {span} invalid for {n_tokens} tokens")
        if prev is not None and span.start <= prev.end:
            raise OverlappingSpans(prev, span)
        tags[span.start] = f"B-{span.label}"
        for i in range(span.start + 1, span.end + 1):
            tags[i] = f"I-{span.label}"
        prev = span
    return tags


def decode_bio(tags: Sequence[str]) -> list[TypedSpan]:
    """Decode a possibly ill-formed tag sequence.

    An ``I-X`` that does not continue an open ``X`` span starts a new span,
    and anything that is not a ``B-``/``I-`` tag closes the open span.
    """
    spans = []
    start, label = None, None
    for i, tag in enumerate(tags):
        tag = str(tag)
        prefix, _, lab = tag.partition("-")
        if prefix in ("B", "I") and lab:
            if prefix == "I" and label == lab:
                continue
            if label is not None:
                spans.append(TypedSpan(start, i - 1, label))
            start, label = i, lab
        else:
            if label is not None:
                spans.append(TypedSpan(start, i - 1, label))
            start, label = None, None
    if label is not None:
        spans.append(TypedSpan(start, len(tags) - 1, label))
    return spans


def is_well_formed(tags: Sequence[str]) -> bool:
    prev_label = None
    for tag in tags:
        prefix, _, lab = str(tag).partition("-")
        if tag == "O":
            prev_label = None
        elif prefix == "B" and lab:
            prev_label = lab
        elif prefix == "I" and lab:
            if prev_label != lab:
                return False
        else:
            return False
    return True
