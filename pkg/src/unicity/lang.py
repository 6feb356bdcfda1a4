"""Alphabets, text normalization, and smoothed n-gram letter models.

The model here is deliberately plain: additive-smoothed n-gram counts
over a finite symbol alphabet, with all rates measured in bits per
letter (log base 2 throughout). Models are immutable once fitted and
safe to share across threads.
"""

from __future__ import annotations

import json
import math
import re
import string
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

MODEL_FORMAT = "unicity-ngram-model"
MODEL_FORMAT_VERSION = 1

# refuse count tables above this many cells (G**order)
_MAX_TABLE_CELLS = 1 << 26


class EmptyTextError(ValueError):
    """Raised when normalization leaves no symbols at all."""


@dataclass(frozen=True)
class Alphabet:
    """Ordered set of distinct single-character symbols."""

    symbols: tuple[str, ...]
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.symbols) < 1:
            raise ValueError("alphabet needs at least one symbol")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("alphabet symbols must be distinct")
        for s in self.symbols:
            if not isinstance(s, str) or len(s) != 1:
                raise ValueError(f"symbols must be single characters, got {s!r}")
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.symbols)})

    @classmethod
    def latin(cls) -> "Alphabet":
        """The 26-letter A-Z alphabet."""
        return cls(tuple(string.ascii_uppercase))

    @classmethod
    def first_n(cls, n: int) -> "Alphabet":
        """First n uppercase letters (n <= 26)."""
        if not 1 <= n <= 26:
            raise ValueError("first_n supports 1..26 symbols")
        return cls(tuple(string.ascii_uppercase[:n]))

    @property
    def size(self) -> int:
        return len(self.symbols)

    def index_of(self, symbol: str) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise ValueError(f"symbol {symbol!r} not in alphabet") from None

    def encode(self, text: str) -> np.ndarray:
        """Text -> int64 code array. Every character must be a symbol."""
        try:
            return np.array([self._index[c] for c in text], dtype=np.int64)
        except KeyError as exc:
            raise ValueError(f"character {exc.args[0]!r} not in alphabet") from None

    def decode(self, codes: np.ndarray) -> str:
        arr = np.asarray(codes)
        if arr.size and (arr.min() < 0 or arr.max() >= self.size):
            raise ValueError("code out of alphabet range")
        return "".join(self.symbols[int(c)] for c in arr)


def normalize_text(raw: str, alphabet: Alphabet) -> str:
    """Keep only alphabet symbols, case-folding when the alphabet is
    single-case letters. Raises EmptyTextError when nothing survives."""
    text = raw
    if all(s.isalpha() and s.isupper() for s in alphabet.symbols):
        text = text.upper()
    elif all(s.isalpha() and s.islower() for s in alphabet.symbols):
        text = text.lower()
    keep = re.escape("".join(alphabet.symbols))
    out = re.sub(f"[^{keep}]", "", text)
    if not out:
        raise EmptyTextError("no alphabet symbols in input")
    return out


def absolute_rate(alphabet: Alphabet) -> float:
    """Maximum information per letter: log2 of the alphabet size."""
    return math.log2(alphabet.size)


@dataclass(frozen=True)
class RedundancyEstimate:
    absolute_rate: float
    entropy_rate: float
    redundancy: float


@dataclass(frozen=True, eq=False)
class NGramModel:
    """Additive-smoothed order-n letter model.

    ``counts`` has shape (G**(order-1), G): one row per context (the
    n-1 preceding symbols, base-G encoded), one column per next symbol.
    """

    alphabet: Alphabet
    order: int
    alpha: float
    counts: np.ndarray
    total_symbols: int

    def __post_init__(self):
        g = self.alphabet.size
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if self.alpha <= 0:
            raise ValueError("smoothing alpha must be > 0")
        expected = (g ** (self.order - 1), g)
        if self.counts.shape != expected:
            raise ValueError(f"counts shape {self.counts.shape} != {expected}")
        if (self.counts < 0).any():
            raise ValueError("counts must be nonnegative")
        self.counts.flags.writeable = False

    @cached_property
    def context_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @cached_property
    def conditional_probs(self) -> np.ndarray:
        """(contexts, G) matrix of smoothed next-symbol probabilities."""
        g = self.alphabet.size
        denom = self.context_totals + self.alpha * g
        return (self.counts + self.alpha) / denom[:, None]

    @cached_property
    def nll_flat(self) -> np.ndarray:
        """-log2 conditional probability per full window, flattened to a
        length G**order vector indexed by the window's base-G code."""
        return (-np.log2(self.conditional_probs)).ravel()

    def entropy_rate(self) -> float:
        """Conditional next-letter entropy in bits, with contexts weighted
        by how often they occur in the training windows."""
        totals = self.context_totals
        grand = totals.sum()
        if grand == 0:
            raise ValueError("model has no observed windows")
        weights = totals / grand
        p = self.conditional_probs
        row_h = -(p * np.log2(p)).sum(axis=1)
        return float(weights @ row_h)

    def symbol_weights(self) -> np.ndarray:
        """Marginal next-symbol counts (used for frequency matching)."""
        return self.counts.sum(axis=0).astype(np.float64)

    def sequence_nll(self, codes: np.ndarray) -> float:
        """-log2 probability of the sequence in bits. The first order-1
        symbols serve as free initial context and are not charged."""
        codes = np.asarray(codes, dtype=np.int64)
        if codes.ndim != 1 or codes.shape[0] < self.order:
            raise ValueError(f"sequence shorter than model order {self.order}")
        idx = _window_codes(codes, self.order, self.alphabet.size)
        return float(self.nll_flat[idx].sum())

    def sequence_nll_many(self, rows: np.ndarray) -> np.ndarray:
        """Batch sequence_nll over the rows of a (B, L) code array."""
        rows = np.asarray(rows, dtype=np.int64)
        if rows.ndim != 2 or rows.shape[1] < self.order:
            raise ValueError(f"sequences shorter than model order {self.order}")
        g = self.alphabet.size
        wins = np.lib.stride_tricks.sliding_window_view(rows, self.order, axis=1)
        pows = g ** np.arange(self.order - 1, -1, -1, dtype=np.int64)
        idx = wins @ pows
        return self.nll_flat[idx].sum(axis=1)

    @classmethod
    def uniform(cls, alphabet: Alphabet, order: int = 1) -> "NGramModel":
        """Analytically uniform model: every window seen exactly once."""
        g = alphabet.size
        counts = np.ones((g ** (order - 1), g), dtype=np.int64)
        return cls(alphabet, order, 0.5, counts, total_symbols=0)

    def to_json_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_FORMAT_VERSION,
            "alphabet": list(self.alphabet.symbols),
            "order": self.order,
            "alpha": self.alpha,
            "total_symbols": self.total_symbols,
            "counts": self.counts.ravel().tolist(),
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "NGramModel":
        if doc.get("format") != MODEL_FORMAT:
            raise ValueError("not a model document")
        if doc.get("version") != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model version {doc.get('version')}")
        alphabet = Alphabet(tuple(doc["alphabet"]))
        g = alphabet.size
        order = int(doc["order"])
        counts = np.array(doc["counts"], dtype=np.int64).reshape(g ** (order - 1), g)
        return cls(alphabet, order, float(doc["alpha"]), counts, int(doc["total_symbols"]))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict()), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "NGramModel":
        return cls.from_json_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _window_codes(codes: np.ndarray, order: int, g: int) -> np.ndarray:
    """Base-g integer code of every length-`order` window."""
    wins = np.lib.stride_tricks.sliding_window_view(codes, order)
    pows = g ** np.arange(order - 1, -1, -1, dtype=np.int64)
    return wins @ pows


def fit_ngram(codes: np.ndarray, order: int, alpha: float = 0.5,
              alphabet: Alphabet | None = None) -> NGramModel:
    """Count every length-`order` window of the corpus exactly once.

    `alphabet` defaults to the first-n uppercase letters covering the
    largest code present; pass it explicitly for full generality.
    """
    codes = np.asarray(codes, dtype=np.int64)
    if codes.ndim != 1:
        raise ValueError("corpus must be a 1-d code array")
    if alpha <= 0:
        raise ValueError("smoothing alpha must be > 0")
    if alphabet is None:
        if codes.size == 0:
            raise ValueError("cannot infer alphabet from empty corpus")
        alphabet = Alphabet.first_n(int(codes.max()) + 1)
    g = alphabet.size
    if codes.size < order:
        raise ValueError(f"corpus length {codes.size} shorter than order {order}")
    if codes.min() < 0 or codes.max() >= g:
        raise ValueError("corpus code out of alphabet range")
    if g**order > _MAX_TABLE_CELLS:
        raise ValueError(f"count table G**order = {g**order} too large")
    flat = _window_codes(codes, order, g)
    counts = np.bincount(flat, minlength=g**order).astype(np.int64)
    counts = counts.reshape(g ** (order - 1), g)
    return NGramModel(alphabet, order, alpha, counts, total_symbols=int(codes.size))


def entropy_rate(model: NGramModel) -> float:
    return model.entropy_rate()


def redundancy(model: NGramModel) -> RedundancyEstimate:
    r0 = absolute_rate(model.alphabet)
    r = model.entropy_rate()
    return RedundancyEstimate(absolute_rate=r0, entropy_rate=r, redundancy=r0 - r)


def sequence_log_likelihood(model: NGramModel, codes: np.ndarray) -> float:
    """-log2 P(sequence) under the model, in bits."""
    return model.sequence_nll(codes)
