import hashlib

import numpy as np
import pytest

from oilevents.corpus import Sentence, Token
from oilevents.errors import EncoderFailure, TokenCountMismatch
from oilevents.features import (ChannelConfig, EmbeddingTables, HashEncoder, TagVocab, assemble_channels,
                                build_tag_vocabs, encode_tokens, encoder_id, hash_encoder, load_encoder)


def sent(words, dep=None):
    dep = dep or ["dep"] * len(words)
    heads = list(range(1, len(words))) + [-1]
    return Sentence(tuple(Token(w, "NOUN", "O", d, h) for w, d, h in zip(words, dep, heads)))


def test_shape_and_determinism():
    enc = hash_encoder(16, seed=0)
    s = sent(["Oil", "prices", "fell", "sharply", "."])
    a = encode_tokens(enc, s)
    assert a.shape == (5, 16)
    assert np.array_equal(a, encode_tokens(hash_encoder(16, seed=0), s))


def test_subword_mean_pooling_by_hand():
    enc = hash_encoder(16, seed=3)
    word = "productionline"           # 14 chars -> prod, ##ucti, ##onli, ##ne
    assert enc.pieces(word) == ["prod", "##ucti", "##onli", "##ne"]
    word = "deepening"                 # 9 chars -> 3 pieces
    assert len(enc.pieces(word)) == 3

    # rebuild the subword rows independently from the documented construction
    def unit(key):
        d = hashlib.blake2b(f"3\x00{key}".encode(), digest_size=8).digest()
        v = np.random.default_rng(int.from_bytes(d, "little")).standard_normal(16)
        return v / np.linalg.norm(v)

    pos = unit("<pos:1>")             # token index 1 -> bucket floor(log2 2) = 1
    rows = []
    for p in ["deep", "##enin", "##g"]:
        v = unit(p) + 0.25 * pos
        rows.append(v / np.linalg.norm(v))
    got = encode_tokens(enc, sent(["the", "deepening", "rout"]))[1]
    assert np.allclose(got, np.mean(rows, axis=0), atol=1e-12)


def test_unit_norm_rows():
    enc = hash_encoder(32, seed=1)
    sub, owners = enc.encode_subwords(["a", "supercalifragilistic", "oil"])
    assert np.allclose(np.linalg.norm(sub, axis=1), 1.0, atol=1e-6)
    assert owners[0] == 0 and owners[-1] == 2


def test_seed_collisions():
    words = [f"w{i}" for i in range(100)]
    a, _ = hash_encoder(16, 0).encode_subwords(words)
    b, _ = hash_encoder(16, 1).encode_subwords(words)
    same = sum(np.allclose(x, y) for x, y in zip(a, b))
    assert same / len(words) < 0.01


def test_encoder_ids_and_specs():
    enc = load_encoder("hash:dim=24,seed=5")
    assert isinstance(enc, HashEncoder) and enc.dim == 24 and enc.seed == 5
    assert encoder_id(enc) == "hash:v1-seed5:dim=24"
    with pytest.raises(EncoderFailure):
        load_encoder("word2vec:x")


def test_token_count_mismatch():
    class Broken:
        name, version, dim, thread_safe = "broken", "0", 4, False

        def encode_subwords(self, words):
            return np.zeros((1, 4)), [0]

    with pytest.raises(TokenCountMismatch):
        encode_tokens(Broken(), sent(["a", "b"]))


def test_channel_width_and_identity():
    s = sent(["Oil", "did", "not", "rise"], dep=["nsubj", "aux", "neg", "root"])
    word = encode_tokens(hash_encoder(16), s)
    vocabs = build_tag_vocabs([s])
    off = ChannelConfig(use_pos=False, use_ner=False, use_dep=False)
    assert np.array_equal(assemble_channels(word, s, off, EmbeddingTables.init(vocabs, off)), word)
    cfg = ChannelConfig(4, 4, 4)
    tables = EmbeddingTables.init(vocabs, cfg, seed=0)
    out = assemble_channels(word, s, cfg, tables)
    assert out.shape == (4, 28)
    assert np.array_equal(out[2, 24:], tables.weights["dep"][vocabs["dep"].index("neg")])


def test_oov_tags_counted():
    s = sent(["a", "b"])
    vocabs = {c: TagVocab() for c in ("pos", "ner", "dep")}
    cfg = ChannelConfig(2, 2, 2)
    tables = EmbeddingTables.init(vocabs, cfg)
    assemble_channels(np.zeros((2, 3)), s, cfg, tables)
    assert tables.oov_tally[("dep", "dep")] == 2
