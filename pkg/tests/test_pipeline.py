import json

import pytest

from oilevents.errors import ManifestMismatch
from oilevents.features import hash_encoder
from oilevents.pipeline import MANIFEST, EventPipeline
from oilevents.tasks import ATTENTIVE, FeatureSpace, SpanStrategy, TrainConfig, event_instances
from oilevents.tasks.properties import fit_property, new_property_model
from oilevents.transfer import make_setup, train_setup
from oilevents.vocab import PROPERTIES


def overfit(sentences, epochs=80):
    space = FeatureSpace.build(sentences, hash_encoder(32, 0))
    cfg = TrainConfig(epochs=epochs, seed=0, batch_size=1, hidden=32)
    models = train_setup(make_setup("Combo2"), sentences, cfg, space)
    strat = SpanStrategy(ATTENTIVE)
    props = {}
    for prop in PROPERTIES:
        m = new_property_model(prop, strat, cfg, space)
        props[prop] = fit_property(m, space, event_instances(sentences, prop), cfg)
    return EventPipeline(space, models, props, cfg, strategy=strat)


@pytest.fixture(scope="module")
def worked_pipe(worked):
    return overfit([worked])


def test_worked_example_tables(worked, worked_pipe):
    out = worked_pipe.predict_sentences([worked])[0]
    assert [(e["text"], e["type"]) for e in out["entities"]] == [
        ("World", "LOCATION"), ("oil", "COMMODITY"), ("prices", "FINANCIAL_ATTRIBUTE"),
        ("months-long", "DATE"), ("Saudi Arabia", "COUNTRY"), ("production", "FINANCIAL_ATTRIBUTE"),
        ("supply", "FINANCIAL_ATTRIBUTE")]
    events = [(e["trigger"], e["type"], e["polarity"], e["modality"], e["intensity"]) for e in out["events"]]
    assert events == [
        ("fall", "MOVEMENT_DOWN_LOSS", "POSITIVE", "OTHER", "NEUTRAL"),
        ("rout", "SLOW_WEAK", "POSITIVE", "ASSERTED", "INTENSIFIED"),
        ("cuts", "CAUSE_MOVEMENT_DOWN_LOSS", "NEGATIVE", "OTHER", "NEUTRAL"),
        ("surplus", "OVERSUPPLY", "POSITIVE", "OTHER", "EASED")]
    args = {(e["trigger"], a["text"], a["role"]) for e in out["events"] for a in e["arguments"]}
    assert args == {("fall", "oil", "ITEM"), ("fall", "prices", "ATTRIBUTE"),
                    ("rout", "months-long", "DURATION"), ("cuts", "Saudi Arabia", "SUPPLIER"),
                    ("cuts", "production", "ATTRIBUTE"), ("surplus", "supply", "ATTRIBUTE")}


def test_save_load_round_trip(worked, worked_pipe, tmp_path):
    worked_pipe.save(tmp_path / "m")
    man = json.loads((tmp_path / "m" / MANIFEST).read_text())
    assert man["setup"] == "Combo2" and man["strategy"] == "SelfAttentiveSpan"
    assert man["task"] == ["EMD", "ED", "ARP", "intensity", "modality", "polarity"]
    loaded = EventPipeline.load(tmp_path / "m")
    assert loaded.predict_sentences([worked]) == worked_pipe.predict_sentences([worked])
    text = " ".join(worked.words)
    assert loaded.predict_text(text) == worked_pipe.predict_text(text)


def test_empty_input(worked_pipe):
    assert worked_pipe.predict_text("") == []
    assert worked_pipe.predict_sentences([]) == []


def test_manifest_mismatch(worked_pipe, tmp_path):
    d = worked_pipe.save(tmp_path / "m")
    with pytest.raises(ManifestMismatch):
        EventPipeline.load(d, encoder=hash_encoder(16, 0))
    with pytest.raises(ManifestMismatch):
        EventPipeline.load(d, encoder=hash_encoder(32, 1))
    man = json.loads((d / MANIFEST).read_text())
    man["label_vocab_hash"] = "0" * 16
    (d / MANIFEST).write_text(json.dumps(man))
    with pytest.raises(ManifestMismatch):
        EventPipeline.load(d)
    with pytest.raises(ManifestMismatch):
        EventPipeline.load(tmp_path / "missing")
