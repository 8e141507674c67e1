import pytest

from ctxlemma.corpus import Corpus, Document, LemmaSample
from ctxlemma.harness.toy import ToySpec, generate_toy_corpus


def corpus_from_pairs(pairs):
    """One single-token document per (word, lemma) pair."""
    docs = [Document(f"d{i}", (w,)) for i, (w, _) in enumerate(pairs)]
    samples = [LemmaSample(f"d{i}", 0, 1, w, l) for i, (w, l) in enumerate(pairs)]
    return Corpus(docs, samples)


MEMO_PAIRS = [
    ("kota", "kot"), ("psa", "pies"), ("domu", "dom"), ("ministerstwie", "ministerstwo"),
    ("kultury", "kultura"), ("Warszawy", "Warszawa"), ("szła", "iść"), ("dzieci", "dziecko"),
    ("ludzie", "człowiek"), ("oknem", "okno"),
]


@pytest.fixture
def memo_corpus():
    return corpus_from_pairs(MEMO_PAIRS)


@pytest.fixture(scope="session")
def small_toy():
    splits = generate_toy_corpus(ToySpec(n_train=120, n_dev=40, n_test=40, seed=11))
    return {name: Corpus(s.documents, s.samples) for name, s in splits.items()}, splits


@pytest.fixture
def polish_doc():
    doc = Document("d1", ("Pracował", "w", "ministerstwie", "kultury", "i", "dziedzictwa", "narodowego", "przez", "lata", "."))
    sample = LemmaSample("d1", 2, 7, "ministerstwie kultury i dziedzictwa narodowego",
                         "ministerstwo kultury i dziedzictwa narodowego")
    return doc, sample
