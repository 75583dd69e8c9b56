"""Domain similarity between corpora as overlap of their top-n vocabularies."""
from __future__ import annotations

import hashlib
import json
import re
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Optional

from .errors import EmptyCorpus, ProfileMismatch

DEFAULT_TOP_N = 10_000
_WORD_RE = re.compile(r"\w+(?:[-']\w+)*", re.UNICODE)


@dataclass(frozen=True)
class Stopwords:
    words: frozenset
    id: str


def _stopword_id(words: Iterable[str]) -> str:
    return hashlib.sha256("\n".join(sorted(words)).encode()).hexdigest()[:12]


def make_stopwords(words: Iterable[str]) -> Stopwords:
    words = frozenset(w.lower() for w in words)
    return Stopwords(words, _stopword_id(words))


@lru_cache(maxsize=None)
def default_stopwords() -> Stopwords:
    text = resources.files(__package__).joinpath("data/stopwords_en.txt").read_text("utf-8")
    return make_stopwords(line.strip() for line in text.splitlines()
                          if line.strip() and not line.startswith("#"))


def load_stopwords(path: Optional[str | Path] = None) -> Stopwords:
    if path is None:
        return default_stopwords()
    lines = Path(path).read_text("utf-8").splitlines()
    return make_stopwords(l.strip() for l in lines if l.strip() and not l.startswith("#"))


def tokenize(text: str) -> list[str]:
    return _WORD_RE.findall(text)


@dataclass(frozen=True)
class VocabProfile:
    corpus_id: str
    words: frozenset
    n: int
    token_count: int
    stopword_id: str


def top_vocab(tokens: Iterable[str], n: int = DEFAULT_TOP_N,
              stopwords: Optional[Stopwords | Iterable[str]] = None,
              corpus_id: str = "") -> VocabProfile:
    """The ``n`` most frequent lowercased word types that are not stopwords;
    ties are broken alphabetically and tokens without a letter or digit are
    ignored."""
    if n <= 0:
        raise ValueError("n must be positive")
    if stopwords is None:
        stopwords = default_stopwords()
    elif not isinstance(stopwords, Stopwords):
        stopwords = make_stopwords(stopwords)
    counts = Counter()
    total = 0
    for tok in tokens:
        total += 1
        low = tok.lower()
        if low in stopwords.words or not any(ch.isalnum() for ch in low):
            continue
        counts[low] += 1
    if not counts:
        raise EmptyCorpus(corpus_id or "corpus has no countable words")
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:n]
    return VocabProfile(corpus_id, frozenset(w for w, _ in ranked), n, total, stopwords.id)


def overlap_pct(source: VocabProfile, target: VocabProfile) -> float:
    """Share of the source vocabulary also found in the target one, in percent."""
    if source.n != target.n or source.stopword_id != target.stopword_id:
        raise ProfileMismatch("profiles were built with different n or stopword lists")
    return 100.0 * len(source.words & target.words) / len(source.words)


@dataclass(frozen=True)
class SimilarityRanking:
    target: str
    rows: tuple  # (source id, overlap percent), most similar first

    def to_dict(self) -> dict:
        return {"target": self.target,
                "ranking": [{"source": s, "overlap_pct": p} for s, p in self.rows]}

    def table(self) -> str:
        width = max([len("source")] + [len(s) for s, _ in self.rows])
        lines = [f"{'source'.ljust(width)} | overlap %", f"{'-' * width}-+----------"]
        lines += [f"{s.ljust(width)} | {p:9.2f}" for s, p in self.rows]
        return "\n".join(lines)


def rank_sources(sources: Mapping[str, VocabProfile], target: VocabProfile) -> SimilarityRanking:
    rows = [(sid, overlap_pct(prof, target)) for sid, prof in sources.items()]
    rows.sort(key=lambda r: (-r[1], r[0]))
    return SimilarityRanking(target.corpus_id, tuple(rows))


class ProfileCache:
    """On-disk profile cache keyed by (corpus content hash, n, stopword id)."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)

    @staticmethod
    def key(corpus_hash: str, n: int, stopword_id: str) -> str:
        return hashlib.sha256(f"{corpus_hash}:{n}:{stopword_id}".encode()).hexdigest()[:24]

    def _path(self, key: str) -> Path:
        return self.directory / f"profile-{key}.json"

    def get(self, corpus_hash: str, n: int, stopword_id: str) -> Optional[VocabProfile]:
        path = self._path(self.key(corpus_hash, n, stopword_id))
        if not path.exists():
            return None
        d = json.loads(path.read_text("utf-8"))
        return VocabProfile(d["corpus_id"], frozenset(d["words"]), d["n"], d["token_count"],
                            d["stopword_id"])

    def put(self, corpus_hash: str, profile: VocabProfile) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self._path(self.key(corpus_hash, profile.n, profile.stopword_id))
        path.write_text(json.dumps({"corpus_id": profile.corpus_id, "words": sorted(profile.words),
                                    "n": profile.n, "token_count": profile.token_count,
                                    "stopword_id": profile.stopword_id}), encoding="utf-8")
        return path


def profile_text(text: str, n: int = DEFAULT_TOP_N, stopwords: Optional[Stopwords] = None,
                 corpus_id: str = "", cache: Optional[ProfileCache] = None) -> VocabProfile:
    stopwords = stopwords or default_stopwords()
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    if cache is not None:
        hit = cache.get(digest, n, stopwords.id)
        if hit is not None:
            return VocabProfile(corpus_id or hit.corpus_id, hit.words, hit.n, hit.token_count,
                                hit.stopword_id)
    prof = top_vocab(tokenize(text), n, stopwords, corpus_id)
    if cache is not None:
        cache.put(digest, prof)
    return prof
