import numpy as np
import pytest

from oilevents.domainsim import (ProfileCache, VocabProfile, make_stopwords, overlap_pct, profile_text,
                                 rank_sources, tokenize, top_vocab)
from oilevents.errors import EmptyCorpus, ProfileMismatch
from oracles import exact_top

NOSTOP = make_stopwords([])


def test_top_vocab_small():
    prof = top_vocab("oil oil price the".split(), 10, ["the"])
    assert prof.words == {"oil", "price"}
    assert top_vocab("gas oil gas oil".split(), 1, NOSTOP).words == {"gas"}
    with pytest.raises(EmptyCorpus):
        top_vocab(["the"], 5, ["the"])


def test_top_vocab_zipf_oracle():
    rng = np.random.default_rng(0)
    words = [f"w{i}" for i in range(3000)]
    draws = rng.zipf(1.3, 50_000) % 3000
    tokens = [words[i] for i in draws]
    stop = {"w1", "w7"}
    assert top_vocab(tokens, 500, stop).words == exact_top(tokens, 500, stop)


def test_overlap_values():
    a = top_vocab([f"a{i}" for i in range(200)], 200, NOSTOP)
    same = top_vocab([f"a{i}" for i in range(200)], 200, NOSTOP)
    disjoint = top_vocab([f"b{i}" for i in range(200)], 200, NOSTOP)
    quarter = top_vocab([f"a{i}" for i in range(50)] + [f"c{i}" for i in range(150)], 200, NOSTOP)
    assert overlap_pct(a, same) == 100.0
    assert overlap_pct(a, disjoint) == 0.0
    assert overlap_pct(a, quarter) == 25.0


def test_overlap_requires_matching_profiles():
    a = top_vocab(["x"], 5, NOSTOP)
    b = top_vocab(["x"], 6, NOSTOP)
    with pytest.raises(ProfileMismatch):
        overlap_pct(a, b)


def test_ranking_deterministic_and_sorted():
    t = top_vocab("oil gas price crude".split(), 10, NOSTOP, "target")
    srcs = {"b": top_vocab("oil gas tea".split(), 10, NOSTOP, "b"),
            "a": top_vocab("oil gas tea".split(), 10, NOSTOP, "a"),
            "c": top_vocab("cat dog".split(), 10, NOSTOP, "c")}
    r = rank_sources(srcs, t)
    assert [s for s, _ in r.rows] == ["a", "b", "c"]
    assert r.rows[-1][1] == 0.0
    assert rank_sources(dict(reversed(list(srcs.items()))), t) == r


def test_profile_cache(tmp_path):
    cache = ProfileCache(tmp_path)
    p1 = profile_text("oil rose and oil fell", 10, NOSTOP, "x", cache)
    assert list(tmp_path.iterdir())
    p2 = profile_text("oil rose and oil fell", 10, NOSTOP, "x", cache)
    assert p1 == p2


def test_tokenize():
    assert tokenize("Months-long rout, Libya's output.") == ["Months-long", "rout", "Libya's", "output"]
