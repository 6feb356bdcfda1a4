"""Substitution and shift cipher key spaces.

A key is a permutation of alphabet indices mapping plaintext symbol to
ciphertext symbol. Key spaces carry exact key counts and key entropy
under the uniform prior; small spaces can be enumerated exhaustively in
lexicographic order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from .lang import Alphabet

DEFAULT_ENUMERATION_CAP = 10_000_000

SUBSTITUTION = "substitution"
SHIFT = "shift"


class EnumerationCapError(RuntimeError):
    """Key space too large to enumerate; use the Monte Carlo path."""


@dataclass(frozen=True, eq=False)
class SubstitutionKey:
    """Permutation of {0..G-1}: plaintext index -> ciphertext index."""

    mapping: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.mapping, dtype=np.int64)
        if arr.ndim != 1 or not np.array_equal(np.sort(arr), np.arange(arr.size)):
            raise ValueError("key mapping must be a permutation of 0..G-1")
        object.__setattr__(self, "mapping", arr)
        arr.flags.writeable = False

    @property
    def size(self) -> int:
        return int(self.mapping.size)

    def inverse(self) -> "SubstitutionKey":
        inv = np.empty_like(self.mapping)
        inv[self.mapping] = np.arange(self.mapping.size)
        return SubstitutionKey(inv)

    def as_string(self, alphabet: Alphabet) -> str:
        """Ciphertext image of the alphabet, e.g. a 26-char string."""
        if alphabet.size != self.size:
            raise ValueError("alphabet size does not match key size")
        return alphabet.decode(self.mapping)

    @classmethod
    def from_string(cls, image: str, alphabet: Alphabet) -> "SubstitutionKey":
        return cls(alphabet.encode(image))

    @classmethod
    def identity(cls, g: int) -> "SubstitutionKey":
        return cls(np.arange(g, dtype=np.int64))

    @classmethod
    def shift(cls, g: int, offset: int) -> "SubstitutionKey":
        return cls((np.arange(g, dtype=np.int64) + offset) % g)

    def __eq__(self, other):
        if not isinstance(other, SubstitutionKey):
            return NotImplemented
        return np.array_equal(self.mapping, other.mapping)

    def __hash__(self):
        return hash(tuple(self.mapping.tolist()))


def _check_codes(codes: np.ndarray, g: int) -> np.ndarray:
    arr = np.asarray(codes, dtype=np.int64)
    if arr.size and (arr.min() < 0 or arr.max() >= g):
        raise ValueError("symbol code outside key alphabet")
    return arr


def encrypt(key: SubstitutionKey, plaintext: np.ndarray) -> np.ndarray:
    """Position-wise application of the key permutation."""
    arr = _check_codes(plaintext, key.size)
    return key.mapping[arr]


def decrypt(key: SubstitutionKey, ciphertext: np.ndarray) -> np.ndarray:
    arr = _check_codes(ciphertext, key.size)
    return key.inverse().mapping[arr]


@dataclass(frozen=True)
class KeySpace:
    """Uniform prior over all keys of one cipher family."""

    kind: str
    alphabet: Alphabet

    def __post_init__(self):
        if self.kind not in (SUBSTITUTION, SHIFT):
            raise ValueError(f"unknown cipher kind {self.kind!r}")

    @property
    def key_count(self) -> int:
        g = self.alphabet.size
        return math.factorial(g) if self.kind == SUBSTITUTION else g

    @property
    def key_entropy_bits(self) -> float:
        """log2 of the key count, accumulated in the log domain."""
        g = self.alphabet.size
        if self.kind == SUBSTITUTION:
            return float(sum(math.log2(k) for k in range(2, g + 1)))
        return math.log2(g)

    def sample(self, rng: np.random.Generator) -> SubstitutionKey:
        g = self.alphabet.size
        if self.kind == SUBSTITUTION:
            return SubstitutionKey(rng.permutation(g).astype(np.int64))
        return SubstitutionKey.shift(g, int(rng.integers(g)))

    def enumerate_mappings(
        self, cap: int = DEFAULT_ENUMERATION_CAP
    ) -> Iterator[tuple[int, ...]]:
        """All key mappings in lexicographic order, as index tuples."""
        if self.key_count > cap:
            raise EnumerationCapError(
                f"{self.key_count} keys exceeds cap {cap}; use Monte Carlo sampling"
            )
        g = self.alphabet.size
        if self.kind == SUBSTITUTION:
            return iter(itertools.permutations(range(g)))
        return (tuple((np.arange(g) + off) % g) for off in range(g))

    def enumerate_keys(
        self, cap: int = DEFAULT_ENUMERATION_CAP
    ) -> Iterator[SubstitutionKey]:
        for mapping in self.enumerate_mappings(cap):
            yield SubstitutionKey(np.array(mapping, dtype=np.int64))

    def mappings_array(self, cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
        """(K, G) int64 array of all mappings in enumeration order."""
        return np.array(list(self.enumerate_mappings(cap)), dtype=np.int64)


def key_entropy(space: KeySpace) -> float:
    return space.key_entropy_bits


def sample_key(space: KeySpace, seed) -> SubstitutionKey:
    return space.sample(np.random.default_rng(seed))


def read_keys(path: str | Path, alphabet: Alphabet) -> list[SubstitutionKey]:
    """Key file format: one alphabet-image string per line."""
    keys = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line:
            keys.append(SubstitutionKey.from_string(line, alphabet))
    return keys


def write_keys(path: str | Path, keys: list[SubstitutionKey], alphabet: Alphabet) -> None:
    text = "".join(k.as_string(alphabet) + "\n" for k in keys)
    Path(path).write_text(text, encoding="utf-8")
