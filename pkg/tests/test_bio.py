import pytest
from hypothesis import given, strategies as st

from oilevents.bio import TypedSpan, decode_bio, encode_bio, is_well_formed
from oilevents.errors import IndexOutOfRange, OverlappingSpans

LABELS = ["DATE", "COMMODITY", "COUNTRY"]


def test_encode_simple():
    assert encode_bio([TypedSpan(1, 2, "COMMODITY")], 4) == ["O", "B-COMMODITY", "I-COMMODITY", "O"]
    assert encode_bio([], 3) == ["O", "O", "O"]


def test_decode_simple_and_repair():
    assert decode_bio(["O", "B-DATE", "I-DATE"]) == [TypedSpan(1, 2, "DATE")]
    assert decode_bio(["I-DATE", "O"]) == [TypedSpan(0, 0, "DATE")]
    # type switch inside a span starts a new one
    assert decode_bio(["B-DATE", "I-COUNTRY"]) == [TypedSpan(0, 0, "DATE"), TypedSpan(1, 1, "COUNTRY")]


def test_encode_errors():
    with pytest.raises(OverlappingSpans):
        encode_bio([TypedSpan(0, 2, "DATE"), TypedSpan(2, 3, "DATE")], 5)
    with pytest.raises(IndexOutOfRange):
        encode_bio([TypedSpan(3, 5, "DATE")], 4)


@st.composite
def span_sets(draw):
    n = draw(st.integers(0, 30))
    spans, i = [], 0
    while i < n:
        if draw(st.booleans()):
            length = draw(st.integers(1, 4))
            end = min(n - 1, i + length - 1)
            spans.append(TypedSpan(i, end, draw(st.sampled_from(LABELS))))
            i = end + 1 + draw(st.integers(0, 2))
        else:
            i += 1
    return spans, n


@given(span_sets())
def test_round_trip(case):
    spans, n = case
    tags = encode_bio(spans, n)
    assert is_well_formed(tags)
    assert decode_bio(tags) == spans


TAGS = ["O"] + [f"{p}-{l}" for p in "BI" for l in LABELS] + ["X-DATE", "B-", "garbage"]


@given(st.lists(st.sampled_from(TAGS), max_size=40))
def test_decode_total(tags):
    spans = decode_bio(tags)
    prev_end = -1
    for s in spans:
        assert 0 <= s.start <= s.end < len(tags)
        assert s.start > prev_end
        prev_end = s.end
    # repaired output is itself encodable and stable
    assert decode_bio(encode_bio(spans, len(tags))) == spans


def test_worked_example_entities(worked):
    tags = worked.bio("entity")
    words = worked.words
    got = [(" ".join(words[s.start:s.end + 1]), s.label) for s in decode_bio(tags)]
    assert got == [("World", "LOCATION"), ("oil", "COMMODITY"), ("prices", "FINANCIAL_ATTRIBUTE"),
                   ("months-long", "DATE"), ("Saudi Arabia", "COUNTRY"),
                   ("production", "FINANCIAL_ATTRIBUTE"), ("supply", "FINANCIAL_ATTRIBUTE")]
