import re

import pytest
import torch
from hypothesis import given, strategies as st

from oilevents.errors import IncompatibleSource, NonFiniteLoss, SourceTooSmall
from oilevents.features import hash_encoder
from oilevents.sources import NEGATION, Cue, SourceKind, SourceSentence, SourceSentenceSet
from oilevents.tasks import ATTENTIVE, FeatureSpace, SpanStrategy, TrainConfig, train_token_head
from oilevents.transfer import (JointLossSpec, SetupKind, Stage, TaskSetup, TransferPlan, joint_loss,
                                make_setup, run_setup, sequential_transfer, train_setup)


def test_joint_loss_fixed_values():
    assert joint_loss({"EMD": 1.0, "ED": 2.0}, JointLossSpec({"ED": 2.0})) == 5.0
    assert joint_loss({"EMD": 1.0, "ED": 1.0}, make_setup("Combo2").stages[0].loss) == 2.0
    assert joint_loss({"EMD": 1.0, "ED": 2.0}, make_setup("Combo1", literal_joint_loss=True).stages[1].loss) == 5.0
    assert JointLossSpec().weight("ARP") == 1.0
    assert joint_loss({"A": 1.5, "B": 2.5}) == 4.0


def test_joint_loss_rejects_bad_inputs():
    with pytest.raises(ValueError):
        JointLossSpec({"ED": 0.0})
    with pytest.raises(NonFiniteLoss):
        joint_loss({"ED": float("nan")})


def test_joint_loss_tensor_gradient():
    a = torch.tensor(1.0, requires_grad=True)
    b = torch.tensor(2.0, requires_grad=True)
    total = joint_loss({"EMD": a, "ED": b}, JointLossSpec({"ED": 2.0}))
    total.backward()
    assert float(total.detach()) == 5.0 and float(a.grad) == 1.0 and float(b.grad) == 2.0


losses = st.floats(0, 1e3, allow_nan=False)
weights = st.floats(0.01, 10, allow_nan=False)


@given(losses, losses, losses, losses, weights, st.floats(0.01, 10))
def test_joint_loss_linearity(a1, b1, a2, b2, beta, c):
    spec = JointLossSpec({"ED": beta})
    lhs = joint_loss({"EMD": a1 + c * a2, "ED": b1 + c * b2}, spec)
    rhs = joint_loss({"EMD": a1, "ED": b1}, spec) + c * joint_loss({"EMD": a2, "ED": b2}, spec)
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)


def test_setup_stages():
    assert make_setup("Single").stage_tasks() == [{"EMD"}, {"ED"}, {"ARP"}]
    assert not make_setup("Single").share_backbone
    assert make_setup("FullMTL").stage_tasks() == [{"EMD", "ED", "ARP"}]
    assert make_setup("FullSTL").stage_tasks() == [{"EMD"}, {"ED"}, {"ARP"}]
    assert make_setup("Combo1").stage_tasks() == [{"EMD"}, {"ED", "ARP"}]
    assert make_setup("Combo1").stages[1].loss.weight("ED") == 2.0
    assert make_setup("Combo1", literal_joint_loss=True).stage_tasks() == [{"EMD"}, {"EMD", "ED"}, {"ARP"}]
    assert make_setup("Combo2").stage_tasks() == [{"EMD", "ED"}, {"ARP"}]
    with pytest.raises(ValueError):
        make_setup("Combo3")


def test_single_stage_equals_token_head(small_corpus):
    space = FeatureSpace.build(small_corpus, hash_encoder(16, 0))
    cfg = TrainConfig(epochs=2, seed=5, hidden=16)
    setup = TaskSetup(SetupKind.SINGLE, (Stage(("EMD",)),))
    models = train_setup(setup, small_corpus[:30], cfg, space)
    direct = train_token_head("EMD", small_corpus[:30], cfg, space)
    assert models.curves[0] == direct.curve
    for a, b in zip(models.heads["EMD"].state_dict().values(), direct.head.state_dict().values()):
        assert torch.equal(a, b)


def test_backbone_handoff_bit_exact(small_corpus):
    space = FeatureSpace.build(small_corpus, hash_encoder(16, 0))
    models = train_setup(make_setup("FullSTL"), small_corpus[:20], TrainConfig(epochs=1, hidden=16), space)
    for prev, nxt in [("EMD", 1), ("ED", 2)]:
        snap = models.backbones[prev].state_dict()
        assert all(torch.equal(snap[k], v) for k, v in models.handoffs[nxt].items())
    single = train_setup(make_setup("Single"), small_corpus[:20], TrainConfig(epochs=1, hidden=16), space)
    snap = single.backbones["EMD"].state_dict()
    assert not all(torch.equal(snap[k], v) for k, v in single.handoffs[1].items())


def test_single_setup_learns_synthetic():
    from oilevents.corpus import iter_sentences
    from oilevents.synthetic import synthetic_corpus

    sents = list(iter_sentences(synthetic_corpus(200, seed=11)))
    space = FeatureSpace.build(sents, hash_encoder(32, 0))
    _, reports = run_setup(make_setup("Single"), sents[:160], sents[160:],
                           TrainConfig(epochs=20, seed=0), space)
    for task in ("EMD", "ED", "ARP"):
        assert reports[task].f1 >= 0.95, (task, reports[task].f1)


# ---------------------------------------------------------- sequential

def source_from(sentences, kind=SourceKind.SOCC):
    out = []
    for s in sentences:
        text = " ".join(s.words)
        cues = tuple(Cue(m.start(), m.end(), NEGATION) for m in re.finditer(r"\bnot\b", text))
        out.append(SourceSentence(text, cues))
    return SourceSentenceSet(kind, tuple(out), "self")


def test_sequential_transfer(small_corpus):
    src = source_from(small_corpus[:40])
    train, test = small_corpus[:50], small_corpus[50:]
    cfg = TrainConfig(epochs=12, seed=0, hidden=32)
    strat = SpanStrategy(ATTENTIVE)
    base = sequential_transfer(TransferPlan("self", "polarity", phase1_epochs=0), src, train, test,
                               cfg, strat, hash_encoder(32, 0))
    assert base.selected_epoch is None and base.source_size == 40
    full = sequential_transfer(TransferPlan("self", "polarity"), src, train, test, cfg, strat,
                               hash_encoder(32, 0))
    assert full.selected_epoch is not None and 1 <= full.selected_epoch <= cfg.epochs
    assert full.report.f1 >= base.report.f1 - 0.02


def test_sequential_transfer_zero_phase1_is_baseline(small_corpus):
    from oilevents.tasks import event_instances, fit_property, new_property_model
    from oilevents.transfer import property_report

    src = source_from(small_corpus[:30])
    train, test = small_corpus[:50], small_corpus[50:]
    cfg = TrainConfig(epochs=3, seed=1, hidden=16)
    strat = SpanStrategy(ATTENTIVE)
    res = sequential_transfer(TransferPlan("self", "polarity", phase1_epochs=0), src, train, test,
                              cfg, strat, hash_encoder(16, 0))
    model = new_property_model("polarity", strat, cfg, res.space)
    fit_property(model, res.space, event_instances(train, "polarity"), cfg)
    assert property_report(model, res.space, event_instances(test, "polarity")).to_dict() == res.report.to_dict()


def test_sequential_transfer_errors(small_corpus):
    cfg = TrainConfig(epochs=1, hidden=8)
    strat = SpanStrategy(ATTENTIVE)
    tenk = source_from(small_corpus[:30], SourceKind.TENK_FIN)
    with pytest.raises(IncompatibleSource):
        sequential_transfer(TransferPlan("tenk", "polarity"), tenk, small_corpus[:10], small_corpus[10:20],
                            cfg, strat, hash_encoder(8, 0))
    small = source_from(small_corpus[:30])
    with pytest.raises(SourceTooSmall):
        sequential_transfer(TransferPlan("self", "polarity", min_source=31), small, small_corpus[:10],
                            small_corpus[10:20], cfg, strat, hash_encoder(8, 0))
