import math
import shutil

import pytest

from uca.fixtures import CorpusSpec, make_corpus
from uca.repository import open_store


@pytest.fixture(scope="session")
def default_corpus(tmp_path_factory):
    """One default corpus shared by read-only tests."""
    out = tmp_path_factory.mktemp("corpus")
    return make_corpus(CorpusSpec(), out / "corpus")


@pytest.fixture()
def corpus_store(default_corpus):
    store = open_store(default_corpus.store_path)
    yield store
    store.close()


@pytest.fixture()
def corpus_store_copy(default_corpus, tmp_path):
    """A private copy of the default corpus store for mutating tests."""
    path = tmp_path / "store-copy.db"
    shutil.copy(default_corpus.store_path, path)
    store = open_store(path)
    yield store
    store.close()


def exact_group(mean: float, sd: float, n: int) -> list[float]:
    """A sample of size n (even) with exactly the given mean and sample sd."""
    assert n % 2 == 0
    spread = sd * math.sqrt((n - 1) / n)
    return [mean - spread, mean + spread] * (n // 2)
