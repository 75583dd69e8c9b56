import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=100,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


@pytest.fixture(scope="session")
def worked():
    from oilevents.synthetic import worked_example

    return worked_example().sentences[0]


@pytest.fixture(scope="session")
def small_corpus():
    from oilevents.corpus import iter_sentences
    from oilevents.synthetic import synthetic_corpus

    return list(iter_sentences(synthetic_corpus(80, seed=3)))
