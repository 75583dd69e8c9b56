import json

import pytest

from oilevents.annotate import AnnotatedSentence, AnnotatedToken, FallbackAnnotator, fallback_annotator
from oilevents.corpus import (Document, Sentence, dump_corpus, ingest_directory, load_corpus,
                              parse_standoff, save_corpus, sentence_from_text, to_canonical)
from oilevents.errors import DanglingReference, MalformedLine, SpanOutOfBounds
from oilevents.synthetic import generate_standoff, worked_example_standoff, write_standoff


def test_single_textbound():
    doc = parse_standoff("T1\tCOMMODITY 6 9\toil\n", "World oil prices")
    tb = doc.textbounds["T1"]
    assert (tb.start, tb.end, tb.text) == (6, 9, "oil")


def test_parse_errors():
    with pytest.raises(DanglingReference) as exc:
        parse_standoff("T1\tOIL 0 3\toil\nE1\tX:T9\n", "oil up")
    assert exc.value.ref_id == "T9"
    with pytest.raises(MalformedLine):
        parse_standoff("T1 broken\n", "oil up")
    with pytest.raises(SpanOutOfBounds):
        parse_standoff("T1\tOIL 0 30\toil\n", "oil up")


def test_worked_example_standoff_counts():
    _, txt, ann = worked_example_standoff()
    doc = parse_standoff(ann, txt)
    triggers = {e.trigger for e in doc.events.values()}
    assert len(doc.textbounds) - len(triggers) == 7
    assert len(doc.events) == 4


def test_worked_example_canonical(worked):
    words = worked.words
    ents = [(" ".join(words[e.start:e.end + 1]), e.type) for e in worked.entities]
    assert ("Saudi Arabia", "COUNTRY") in ents
    sa = next(e for e in worked.entities if e.type == "COUNTRY")
    assert sa.end - sa.start == 1
    trigs = [(" ".join(words[t.start:t.end + 1]), t.type) for t in worked.triggers]
    assert trigs == [("fall", "MOVEMENT_DOWN_LOSS"), ("rout", "SLOW_WEAK"),
                     ("cuts", "CAUSE_MOVEMENT_DOWN_LOSS"), ("surplus", "OVERSUPPLY")]


def _one_sentence_annotator(bounds):
    class Ann:
        name = "fixed"

        def annotate(self, text):
            toks = tuple(AnnotatedToken(text[s:e], s, e, head=(i + 1 if i + 1 < len(bounds) else -1))
                         for i, (s, e) in enumerate(bounds))
            return [AnnotatedSentence(0, len(text), toks)]
    return Ann()


def test_outward_snapping():
    text = "aa bb cc dddd eeee"
    bounds = [(0, 2), (3, 5), (6, 8), (9, 13), (14, 18)]
    ann = _one_sentence_annotator(bounds)
    exact = to_canonical(parse_standoff("T1\tX 9 13\tdddd\n", text), ann).sentences[0]
    assert (exact.entities[0].start, exact.entities[0].end) == (3, 3)
    half = to_canonical(parse_standoff("T1\tX 11 18\tdd eeee\n", text), ann).sentences[0]
    assert (half.entities[0].start, half.entities[0].end) == (3, 4)


def test_fallback_annotator_snapshot():
    sents = fallback_annotator("Oil rose.")
    assert len(sents) == 1
    toks = sents[0].tokens
    assert [t.surface for t in toks] == ["Oil", "rose", "."]
    assert [t.head for t in toks] == [1, -1, 1]
    assert toks[1].pos == "VERB"
    assert fallback_annotator("") == []
    text = "Brent fell 2 percent. Saudi Arabia cut output."
    assert repr(fallback_annotator(text)) == repr(fallback_annotator(text))


def test_canonical_round_trip(worked):
    doc = Document("d", (worked,))
    back = Document.from_dict(json.loads(json.dumps(doc.to_dict())))
    assert back == doc


def test_save_load_deterministic(tmp_path):
    docs = [to_canonical(parse_standoff(a, t, d)) for d, t, a in generate_standoff(12, seed=5)]
    save_corpus(docs, tmp_path / "a.json")
    save_corpus(load_corpus(tmp_path / "a.json"), tmp_path / "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    assert dump_corpus(docs) == (tmp_path / "a.json").read_text("utf-8")


def test_ingest_directory_reports_failures(tmp_path):
    write_standoff(tmp_path, generate_standoff(6, seed=1, per_doc=3))
    (tmp_path / "bad.ann").write_text("E1\tX:T9\n")
    (tmp_path / "bad.txt").write_text("some text")
    docs, failures = ingest_directory(tmp_path)
    assert len(docs) == 2
    assert list(failures) == [str(tmp_path / "bad.ann")]


def test_sentence_invariants():
    from oilevents.corpus import EntityMention, Token

    with pytest.raises(ValueError):
        Sentence((Token("a"),), entities=(EntityMention(0, 3, "X"),))


def test_sentence_from_text_has_valid_tree():
    s = sentence_from_text("Oil fell. Gas rose.")
    assert not s.entities and not s.triggers
    assert s.dep_tree.n == len(s.tokens)
