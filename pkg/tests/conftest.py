import pytest

from unicity import Alphabet, fit_ngram, normalize_text

from pathlib import Path

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
CORPUS_PATH = DATA_DIR / "english_sample.txt"


@pytest.fixture(scope="session")
def latin():
    return Alphabet.latin()


@pytest.fixture(scope="session")
def english_codes(latin):
    text = normalize_text(CORPUS_PATH.read_text(encoding="utf-8"), latin)
    return latin.encode(text)


@pytest.fixture(scope="session")
def english_split(english_codes):
    half = english_codes.size // 2
    return english_codes[:half], english_codes[half:]


@pytest.fixture(scope="session")
def bigram_model(latin, english_split):
    train, _ = english_split
    return fit_ngram(train, order=2, alpha=0.5, alphabet=latin)


@pytest.fixture(scope="session")
def trigram_model(latin, english_codes):
    return fit_ngram(english_codes, order=3, alpha=0.5, alphabet=latin)
