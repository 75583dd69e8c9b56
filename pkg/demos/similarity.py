"""Rank the bundled source fixtures by vocabulary overlap with a synthetic
commodity-news target."""
from pathlib import Path

from oilevents.corpus import iter_sentences
from oilevents.domainsim import load_stopwords, profile_text, rank_sources
from oilevents.synthetic import synthetic_corpus

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "sources"


def main(n=200):
    stop = load_stopwords()
    target_text = "\n".join(" ".join(s.words) for s in iter_sentences(synthetic_corpus(200, seed=0)))
    target = profile_text(target_text, n, stop, "synthetic-news")
    sources = {p.name: profile_text(p.read_text("utf-8"), n, stop, p.name) for p in sorted(FIXTURES.iterdir())}
    print(rank_sources(sources, target).table())


if __name__ == "__main__":
    main()
