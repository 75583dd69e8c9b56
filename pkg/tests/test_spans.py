import numpy as np
import pytest

from oilevents.bio import TypedSpan
from oilevents.corpus import Sentence, Token
from oilevents.graph import DepTree
from oilevents.tasks.spans import (SpanStrategy, attentive_backward, extract_span_attentive,
                                   extract_span_subtree, extract_span_window, window_slots)
from oracles import central_diff, rel_err

# "The Trump administration will not consider reimposing sanctions on the OPEC member nation ."
NEG_WORDS = "The Trump administration will not consider reimposing sanctions on the OPEC member nation .".split()
NEG_HEADS = (2, 2, 5, 5, 5, -1, 5, 6, 12, 12, 12, 12, 7, 5)


def test_strategy_parse_round_trip():
    for text in ["FixedWindow(r=1)", "FixedWindow(r=3)", "DepSubtree", "SelfAttentiveSpan",
                 "SelfAttentiveSpan(scope=trigger)"]:
        assert str(SpanStrategy.parse(text)) == text
    assert SpanStrategy.parse("FixedWindow(2)").r == 2
    with pytest.raises(ValueError):
        SpanStrategy.parse("Bogus")


def test_window_cases(worked):
    assert extract_span_window(7, TypedSpan(3, 3, "X"), 0) == [3]
    assert extract_span_window(4, TypedSpan(1, 1, "X"), 3) == [0, 1, 2, 3]
    fall = worked.triggers[0]
    window = extract_span_window(worked, fall.span, 1)
    assert [worked.words[i] for i in window] == ["could", "fall", "as"]
    assert window_slots(3, TypedSpan(0, 0, "X"), 1) == [None, 0, 1]


def test_subtree_cases():
    tree = DepTree(NEG_HEADS)
    assert extract_span_subtree(tree, TypedSpan(0, 0, "X")) == [0]
    assert extract_span_subtree(tree, TypedSpan(5, 5, "X")) == list(range(14))
    sub = extract_span_subtree(tree, TypedSpan(7, 7, "X"))
    assert sub == [7, 8, 9, 10, 11, 12]
    words = [NEG_WORDS[i] for i in sub]
    assert "will" not in words and "not" not in words


def test_attentive_trivial_cases():
    rng = np.random.default_rng(0)
    H = rng.normal(size=(5, 4))
    w = rng.normal(size=4)
    assert np.array_equal(extract_span_attentive(H, (2, 2), w), H[2])
    same = np.tile(rng.normal(size=4), (3, 1))
    out, alpha = extract_span_attentive(same, (0, 2), w, return_weights=True)
    assert np.allclose(alpha, 1 / 3) and np.allclose(out, same[0])
    _, alpha = extract_span_attentive(H, (0, 4), w, return_weights=True)
    assert alpha.sum() == pytest.approx(1.0) and (alpha > 0).all()
    with pytest.raises(IndexError):
        extract_span_attentive(H, (3, 5), w)


def attentive_gradient_errors(seed):
    rng = np.random.default_rng(seed)
    n, d = int(rng.integers(2, 8)), int(rng.integers(2, 6))
    H = rng.normal(size=(n, d))
    w = rng.normal(size=d)
    g = rng.normal(size=d)
    start = int(rng.integers(0, n))
    end = int(rng.integers(start, n))
    dH, dw = attentive_backward(H, (start, end), w, g)
    num_w = central_diff(lambda x: float(extract_span_attentive(H, (start, end), x) @ g), w)
    num_H = central_diff(lambda x: float(extract_span_attentive(x, (start, end), w) @ g), H)
    return rel_err(dw, num_w), rel_err(dH, num_H)


@pytest.mark.parametrize("seed", range(5))
def test_attentive_gradient(seed):
    assert max(attentive_gradient_errors(seed)) < 1e-4


def test_attentive_matches_torch():
    import torch

    rng = np.random.default_rng(1)
    H = rng.normal(size=(6, 3))
    w = rng.normal(size=3)
    Ht = torch.tensor(H)
    alpha = torch.softmax(Ht[1:5] @ torch.tensor(w), dim=0)
    assert np.allclose((alpha @ Ht[1:5]).numpy(), extract_span_attentive(H, (1, 4), w))
