import os

import pytest

from oilevents.errors import EmptyDataset, IncompatibleSource, UnsupportedFormat
from oilevents.sources import SourceKind, SourceSentence, SourceSentenceSet, load_source_dataset
from oilevents.transfer import align_source_labels
from conftest import FIXTURES

SRC = os.path.join(FIXTURES, "sources")
FILES = {
    SourceKind.CONAN_DOYLE: "conan_doyle.txt",
    SourceKind.SOCC: "socc.tsv",
    SourceKind.TENK_FIN: "tenk.csv",
    SourceKind.WIKIPEDIA_CONLL: "wiki.xml",
    SourceKind.REVIEWS: "reviews.xml",
    SourceKind.SENTIVENT: "sentivent.jsonl",
}

# (property, expected labels in file order)
EXPECTED = {
    SourceKind.CONAN_DOYLE: [("polarity", ["POSITIVE", "NEGATIVE"])],
    SourceKind.SOCC: [("polarity", ["POSITIVE", "NEGATIVE"])],
    SourceKind.TENK_FIN: [("modality", ["ASSERTED", "OTHER", "OTHER"])],
    SourceKind.WIKIPEDIA_CONLL: [("modality", ["ASSERTED", "OTHER"])],
    SourceKind.REVIEWS: [("polarity", ["POSITIVE", "NEGATIVE", "POSITIVE"]),
                         ("modality", ["ASSERTED", "ASSERTED", "OTHER"])],
    SourceKind.SENTIVENT: [("polarity", ["POSITIVE", "NEGATIVE", "POSITIVE"]),
                           ("modality", ["ASSERTED", "ASSERTED", "OTHER"])],
}


def load(kind):
    return load_source_dataset(kind, os.path.join(SRC, FILES[kind]))


def test_conan_doyle_cues():
    s = load(SourceKind.CONAN_DOYLE)
    assert s.sentences[0].cues == ()
    cue = s.sentences[1].cues[0]
    assert s.sentences[1].text[cue.start:cue.end] == "no"


def test_tenk_labels_only():
    s = load(SourceKind.TENK_FIN)
    assert s.sentences[1].labels == {"uncertainty": "uncertain"}
    assert s.sentences[1].cues is None


@pytest.mark.parametrize("kind", list(SourceKind))
def test_alignment_every_source(kind):
    src = load(kind)
    for prop, labels in EXPECTED[kind]:
        aligned = align_source_labels(src, prop)
        assert list(aligned.labels) == labels
        allowed = {"polarity": {"POSITIVE", "NEGATIVE"}, "modality": {"ASSERTED", "OTHER"}}[prop]
        assert set(aligned.labels) == allowed


def test_alignment_default_property_and_conflicts():
    assert align_source_labels(load(SourceKind.TENK_FIN)).target_property == "modality"
    with pytest.raises(IncompatibleSource):
        align_source_labels(load(SourceKind.TENK_FIN), "polarity")
    with pytest.raises(IncompatibleSource):
        align_source_labels(load(SourceKind.REVIEWS))      # two properties: must choose
    with pytest.raises(IncompatibleSource):
        align_source_labels(load(SourceKind.SOCC), "intensity")


def test_alignment_single_class_raises():
    one = SourceSentenceSet(SourceKind.SOCC, (SourceSentence("fine", ()),))
    with pytest.raises(IncompatibleSource):
        align_source_labels(one)


def test_loader_errors(tmp_path):
    empty = tmp_path / "e.txt"
    empty.write_text("")
    with pytest.raises(EmptyDataset):
        load_source_dataset("SOCC", empty)
    with pytest.raises(UnsupportedFormat):
        load_source_dataset("Nope", empty)
    bad = tmp_path / "b.xml"
    bad.write_text("<doc><sentence>")
    with pytest.raises(UnsupportedFormat):
        load_source_dataset("WikipediaCoNLL", bad)
