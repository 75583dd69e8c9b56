"""Multi-channel token features: contextual word vectors from a pluggable
encoder, concatenated with POS, NER and dependency-label embeddings.

Channel order is fixed: ``[word | pos | ner | dep]``.
"""
from __future__ import annotations

import hashlib
import logging
import math
import threading
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Protocol, Sequence

import numpy as np

from .errors import EncoderFailure, TokenCountMismatch

log = logging.getLogger(__name__)

OOV = "<unk>"
CHANNELS = ("pos", "ner", "dep")


class ContextualEncoder(Protocol):
    name: str
    dim: int
    version: str
    thread_safe: bool

    def encode_subwords(self, words: Sequence[str]) -> tuple[np.ndarray, list[int]]:
        """Return (subword matrix, owning token index per subword row)."""
        ...


def encoder_id(encoder: ContextualEncoder) -> str:
    return f"{encoder.name}:{encoder.version}:dim={encoder.dim}"


class HashEncoder:
    """Deterministic stand-in encoder.

    Words longer than ``max_whole`` characters are cut into pieces of
    ``piece_len`` characters (continuations prefixed ``##``). Each piece gets a
    unit vector derived from a seeded hash of the piece plus a smaller hash of
    its token position bucket.
    """

    name = "hash"
    version = "v1"
    thread_safe = True

    def __init__(self, dim: int, seed: int = 0, piece_len: int = 4, max_whole: int = 8,
                 position_weight: float = 0.25):
        if dim <= 0:
            raise ValueError("dim must be positive")
        self.dim = int(dim)
        self.seed = int(seed)
        self.piece_len = piece_len
        self.max_whole = max_whole
        self.position_weight = position_weight
        self._cache: dict[str, np.ndarray] = {}
        self._lock = threading.Lock()

    @property
    def version(self) -> str:  # type: ignore[override]
        return f"v1-seed{self.seed}"

    def pieces(self, word: str) -> list[str]:
        if len(word) <= self.max_whole:
            return [word]
        step = self.piece_len
        return [word[:step]] + ["##" + word[i:i + step] for i in range(step, len(word), step)]

    def _vector(self, key: str) -> np.ndarray:
        vec = self._cache.get(key)
        if vec is None:
            digest = hashlib.blake2b(f"{self.seed}\x00{key}".encode("utf-8"), digest_size=8).digest()
            rng = np.random.default_rng(int.from_bytes(digest, "little"))
            vec = rng.standard_normal(self.dim)
            vec /= np.linalg.norm(vec)
            with self._lock:
                self._cache[key] = vec
        return vec

    @staticmethod
    def position_bucket(i: int) -> int:
        return min(int(math.log2(i + 1)), 7)

    def encode_subwords(self, words: Sequence[str]) -> tuple[np.ndarray, list[int]]:
        rows, owners = [], []
        for i, w in enumerate(words):
            pos_vec = self._vector(f"<pos:{self.position_bucket(i)}>")
            for piece in self.pieces(w):
                v = self._vector(piece.lower()) + self.position_weight * pos_vec
                rows.append(v / np.linalg.norm(v))
                owners.append(i)
        if not rows:
            return np.zeros((0, self.dim)), []
        return np.vstack(rows), owners


def hash_encoder(dim: int, seed: int = 0) -> HashEncoder:
    return HashEncoder(dim, seed)


class TransformersEncoder:
    """Adapter for a Hugging Face encoder (e.g. a domain-adapted BERT).

    Loaded lazily; word-piece rows come from the last hidden layer with the
    [CLS]/[SEP] rows dropped.
    """

    name = "hf"
    thread_safe = False

    def __init__(self, model_name: str, device: str = "cpu"):
        try:
            from transformers import AutoModel, AutoTokenizer
        except ImportError as exc:  # pragma: no cover - optional dependency
            raise EncoderFailure("transformers is not installed") from exc
        try:
            self.tokenizer = AutoTokenizer.from_pretrained(model_name)
            self.model = AutoModel.from_pretrained(model_name).to(device).eval()
        except Exception as exc:  # pragma: no cover - network / cache dependent
            raise EncoderFailure(f"cannot load {model_name}: {exc}") from exc
        self.model_name = model_name
        self.device = device
        self.dim = int(self.model.config.hidden_size)
        self.version = model_name

    def encode_subwords(self, words: Sequence[str]) -> tuple[np.ndarray, list[int]]:  # pragma: no cover
        import torch

        enc = self.tokenizer(list(words), is_split_into_words=True, return_tensors="pt",
                             truncation=True)
        with torch.no_grad():
            hidden = self.model(**{k: v.to(self.device) for k, v in enc.items()}).last_hidden_state[0]
        owners, rows = [], []
        for j, wid in enumerate(enc.word_ids(0)):
            if wid is not None:
                owners.append(wid)
                rows.append(j)
        return hidden[rows].cpu().numpy().astype(float), owners


def load_encoder(spec: str) -> ContextualEncoder:
    """Resolve ``hash:dim=64,seed=0`` or ``hf:<model-name>``."""
    kind, _, rest = spec.partition(":")
    if kind == "hash":
        opts = dict(kv.split("=", 1) for kv in rest.split(",") if kv)
        return HashEncoder(int(opts.get("dim", 64)), int(opts.get("seed", 0)))
    if kind == "hf":
        return TransformersEncoder(rest)
    raise EncoderFailure(f"unknown encoder spec {spec!r}")


def encoder_spec(encoder: ContextualEncoder) -> str:
    if isinstance(encoder, HashEncoder):
        return f"hash:dim={encoder.dim},seed={encoder.seed}"
    if isinstance(encoder, TransformersEncoder):
        return f"hf:{encoder.model_name}"
    return encoder_id(encoder)


_encoder_locks: dict[int, threading.Lock] = {}


def encode_tokens(encoder: ContextualEncoder, sent) -> np.ndarray:
    """Token-level word vectors: mean of each token's subword rows."""
    words = sent.words if hasattr(sent, "words") else list(sent)
    lock = None
    if not getattr(encoder, "thread_safe", False):
        lock = _encoder_locks.setdefault(id(encoder), threading.Lock())
    try:
        if lock:
            with lock:
                sub, owners = encoder.encode_subwords(words)
        else:
            sub, owners = encoder.encode_subwords(words)
    except EncoderFailure:
        raise
    except Exception as exc:
        raise EncoderFailure(str(exc)) from exc
    sub = np.asarray(sub, dtype=float)
    if len(owners) != len(sub) or set(owners) != set(range(len(words))):
        raise TokenCountMismatch(f"encoder covered {len(set(owners))} of {len(words)} tokens")
    out = np.zeros((len(words), sub.shape[1] if sub.ndim == 2 else encoder.dim))
    counts = np.zeros(len(words))
    np.add.at(out, owners, sub)
    np.add.at(counts, owners, 1.0)
    return out / counts[:, None]


# ----------------------------------------------------------------- channels


@dataclass(frozen=True)
class ChannelConfig:
    pos_dim: int = 8
    ner_dim: int = 8
    dep_dim: int = 8
    use_pos: bool = True
    use_ner: bool = True
    use_dep: bool = True

    def dims(self) -> dict:
        return {"pos": self.pos_dim if self.use_pos else 0,
                "ner": self.ner_dim if self.use_ner else 0,
                "dep": self.dep_dim if self.use_dep else 0}

    def width(self, word_dim: int) -> int:
        return word_dim + sum(self.dims().values())

    def to_dict(self) -> dict:
        return dict(self.__dict__)


class TagVocab:
    """Closed tag inventory with the OOV entry at index 0."""

    def __init__(self, tags: Iterable[str] = ()):
        self.itos = [OOV] + sorted(set(tags) - {OOV})
        self.stoi = {t: i for i, t in enumerate(self.itos)}

    def __len__(self):
        return len(self.itos)

    def index(self, tag: str) -> int:
        return self.stoi.get(tag, 0)

    def __contains__(self, tag):
        return tag in self.stoi


def token_tags(sent, channel: str) -> list[str]:
    attr = {"pos": "pos", "ner": "ner", "dep": "dep_label"}[channel]
    return [getattr(t, attr) for t in sent.tokens]


def build_tag_vocabs(sentences: Iterable) -> dict:
    seen = {c: set() for c in CHANNELS}
    for s in sentences:
        for c in CHANNELS:
            seen[c].update(token_tags(s, c))
    return {c: TagVocab(seen[c]) for c in CHANNELS}


@dataclass
class EmbeddingTables:
    vocabs: dict
    weights: dict
    oov_tally: Counter = field(default_factory=Counter)

    @classmethod
    def init(cls, vocabs: dict, cfg: ChannelConfig, seed: int = 0) -> "EmbeddingTables":
        rng = np.random.default_rng(seed)
        dims = cfg.dims()
        weights = {c: rng.uniform(-0.1, 0.1, (len(vocabs[c]), max(dims[c], 1)))[:, :dims[c]]
                   for c in CHANNELS}
        return cls(vocabs, weights)

    def lookup(self, channel: str, tags: Sequence[str]) -> np.ndarray:
        vocab = self.vocabs[channel]
        idx = []
        for t in tags:
            i = vocab.index(t)
            if i == 0 and t != OOV:
                self.oov_tally[(channel, t)] += 1
            idx.append(i)
        return self.weights[channel][idx]


def assemble_channels(word: np.ndarray, sent, cfg: ChannelConfig, tables: EmbeddingTables) -> np.ndarray:
    """Concatenate ``[word | pos | ner | dep]`` per token, skipping disabled channels."""
    word = np.asarray(word, dtype=float)
    if word.shape[0] != len(sent.tokens):
        raise TokenCountMismatch(f"{word.shape[0]} word rows for {len(sent.tokens)} tokens")
    parts = [word]
    before = sum(tables.oov_tally.values())
    for channel, used in zip(CHANNELS, (cfg.use_pos, cfg.use_ner, cfg.use_dep)):
        if used:
            parts.append(tables.lookup(channel, token_tags(sent, channel)))
    if sum(tables.oov_tally.values()) > before:
        log.warning("unknown tags routed to OOV rows (%d so far)", sum(tables.oov_tally.values()))
    out = np.concatenate(parts, axis=1)
    if not np.isfinite(out).all():
        raise ValueError("non-finite feature values")
    return out
