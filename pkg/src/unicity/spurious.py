"""Spurious-key counting and the unicity bound.

Builds small synthetic languages with an explicit uniform set of
meaningful messages, so that the expected-spurious-key formula
(2**H(K) - 1) * 2**(-N*D) and the bound N >= H(K)/D can be checked by
exhaustive enumeration, and provides Monte Carlo estimation where
enumeration is out of reach.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._kernels import apply_keys_encode
from .cipher import (
    DEFAULT_ENUMERATION_CAP,
    EnumerationCapError,
    KeySpace,
    SubstitutionKey,
)
from .lang import Alphabet, NGramModel

_MAX_CODE_BITS = 62
_CHUNK_KEYS = 1 << 16


def unicity_distance(key_entropy_bits: float, redundancy_bits: float) -> float:
    """Ciphertext length at which spurious keys are expected to die out:
    key entropy divided by per-letter redundancy. Infinite when the
    redundancy is zero (nothing ever rules a key out)."""
    if key_entropy_bits < 0 or redundancy_bits < 0:
        raise ValueError("entropy and redundancy must be nonnegative")
    if redundancy_bits == 0:
        return math.inf
    return key_entropy_bits / redundancy_bits


@dataclass(frozen=True)
class SpuriousExpectation:
    """Expected spurious-key count at one ciphertext length.

    log2_exact is log2((2**H - 1) * 2**(-N*D)), kept in the log domain;
    linear is the same value, or None when it exceeds 2**52.
    log2_approx drops the -1 term; gap is the linear difference between
    the approximation and the exact value, which is exactly 2**(-N*D).
    """

    log2_exact: float
    linear: float | None
    log2_approx: float
    gap: float


def expected_spurious_keys(
    key_entropy_bits: float, redundancy_bits: float, length: float
) -> SpuriousExpectation:
    if length < 0:
        raise ValueError("length must be nonnegative")
    h = key_entropy_bits
    nd = length * redundancy_bits
    # log2(2**h - 1) = h + log(1 - 2**-h)/log(2), stable for large h
    if h <= 0:
        log2_minus_one = -math.inf
    else:
        log2_minus_one = h + math.log1p(-(2.0**-h)) / math.log(2)
    log2_exact = log2_minus_one - nd
    linear = 2.0**log2_exact if log2_exact < 52 else None
    return SpuriousExpectation(
        log2_exact=log2_exact,
        linear=linear,
        log2_approx=h - nd,
        gap=2.0**-nd,
    )


@dataclass(frozen=True, eq=False)
class ToyLanguage:
    """Explicit uniform set of meaningful fixed-length messages."""

    alphabet: Alphabet
    length: int
    codes: np.ndarray  # sorted base-G codes of the member messages
    seed: int

    def __post_init__(self):
        arr = np.asarray(self.codes, dtype=np.int64)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("toy language needs at least one message")
        if np.unique(arr).size != arr.size:
            raise ValueError("toy language messages must be distinct")
        arr = np.sort(arr)
        object.__setattr__(self, "codes", arr)
        arr.flags.writeable = False

    @property
    def size(self) -> int:
        return int(self.codes.size)

    @property
    def rate(self) -> float:
        """Achieved bits per letter: log2(set size) / length."""
        return math.log2(self.size) / self.length

    @cached_property
    def messages(self) -> np.ndarray:
        """(M, length) symbol-code rows, in sorted code order."""
        g = self.alphabet.size
        out = np.empty((self.size, self.length), dtype=np.int64)
        rem = self.codes.copy()
        for j in range(self.length - 1, -1, -1):
            out[:, j] = rem % g
            rem //= g
        out.flags.writeable = False
        return out

    def encode_rows(self, rows: np.ndarray) -> np.ndarray:
        g = self.alphabet.size
        pows = g ** np.arange(self.length - 1, -1, -1, dtype=np.int64)
        return np.asarray(rows, dtype=np.int64) @ pows

    def contains_codes(self, codes: np.ndarray) -> np.ndarray:
        """Vectorized membership test on base-G message codes."""
        pos = np.searchsorted(self.codes, codes)
        pos = np.clip(pos, 0, self.codes.size - 1)
        return self.codes[pos] == codes

    def sample_message(self, rng: np.random.Generator) -> np.ndarray:
        return self.messages[int(rng.integers(self.size))]


def build_toy_language(
    alphabet: Alphabet, length: int, rate_target: float, seed: int
) -> ToyLanguage:
    """Sample round(2**(rate*length)) distinct messages uniformly without
    replacement from all G**length sequences."""
    if length < 1:
        raise ValueError("length must be >= 1")
    if rate_target < 0:
        raise ValueError("rate must be nonnegative")
    g = alphabet.size
    if length * math.log2(g) > _MAX_CODE_BITS:
        raise ValueError("message space too large for 64-bit codes")
    total = g**length
    want = round(2.0 ** (rate_target * length))
    if want > total:
        raise ValueError(
            f"requested {want} meaningful messages but only {total} sequences exist"
        )
    want = max(want, 1)
    rng = np.random.default_rng((seed, length))
    if total <= (1 << 22):
        codes = rng.permutation(total)[:want].astype(np.int64)
    else:
        # sequential rejection sampling; uniform without replacement
        seen: set[int] = set()
        picked: list[int] = []
        while len(picked) < want:
            batch = rng.integers(0, total, size=max(1024, want), dtype=np.int64)
            for c in batch:
                ci = int(c)
                if ci not in seen:
                    seen.add(ci)
                    picked.append(ci)
                    if len(picked) == want:
                        break
        codes = np.array(picked, dtype=np.int64)
    return ToyLanguage(alphabet=alphabet, length=length, codes=codes, seed=seed)


class ExactSetRecognizer:
    """Meaningful means member of an explicit toy-language set."""

    def __init__(self, language: ToyLanguage):
        self.language = language

    def accepts(self, codes: np.ndarray) -> bool:
        arr = np.asarray(codes, dtype=np.int64)
        if arr.size != self.language.length:
            return False
        return bool(self.accept_rows(arr[None, :])[0])

    def accept_rows(self, rows: np.ndarray) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.int64)
        if rows.shape[1] != self.language.length:
            return np.zeros(rows.shape[0], dtype=bool)
        return self.language.contains_codes(self.language.encode_rows(rows))

    def sample_message(self, rng: np.random.Generator) -> np.ndarray:
        return self.language.sample_message(rng)


class LikelihoodRecognizer:
    """Meaningful means per-letter -log2 likelihood at or below a
    threshold (bits per letter) under an n-gram model."""

    def __init__(self, model: NGramModel, threshold_bits_per_letter: float):
        self.model = model
        self.threshold = threshold_bits_per_letter

    @classmethod
    def calibrate(
        cls, model: NGramModel, heldout_codes: np.ndarray, margin_bits: float = 1.0
    ) -> "LikelihoodRecognizer":
        """Threshold = held-out mean per-letter cross-entropy + margin."""
        heldout_codes = np.asarray(heldout_codes, dtype=np.int64)
        per_letter = model.sequence_nll(heldout_codes) / heldout_codes.size
        return cls(model, per_letter + margin_bits)

    def accepts(self, codes: np.ndarray) -> bool:
        arr = np.asarray(codes, dtype=np.int64)
        return self.model.sequence_nll(arr) / arr.size <= self.threshold

    def accept_rows(self, rows: np.ndarray) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.int64)
        return self.model.sequence_nll_many(rows) / rows.shape[1] <= self.threshold


def count_spurious_keys(
    space: KeySpace,
    recognizer,
    ciphertext: np.ndarray,
    true_key: SubstitutionKey,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> int:
    """Number of wrong keys whose decryption the recognizer accepts.

    The true key is excluded. A zero-length ciphertext is vacuously
    consistent with every key, so the count is key_count - 1.
    """
    ciphertext = np.asarray(ciphertext, dtype=np.int64)
    if ciphertext.size == 0:
        return space.key_count - 1
    if space.key_count > cap:
        raise EnumerationCapError(
            f"{space.key_count} keys exceeds cap {cap}; use monte_carlo_spurious"
        )
    g = space.alphabet.size
    true_row = np.asarray(true_key.mapping)
    count = 0
    mappings = space.enumerate_mappings(cap)
    while True:
        chunk = list(_take(mappings, _CHUNK_KEYS))
        if not chunk:
            break
        arr = np.array(chunk, dtype=np.int64)
        inv = np.argsort(arr, axis=1)
        plain = inv[:, ciphertext]
        accepted = recognizer.accept_rows(plain)
        count += int(accepted.sum())
        is_true = (arr == true_row).all(axis=1)
        if is_true.any():
            count -= int(accepted[is_true].sum())
    return count


def _take(iterator, n):
    for _ in range(n):
        try:
            yield next(iterator)
        except StopIteration:
            return


def exhaustive_spurious_counts(
    space: KeySpace, language: ToyLanguage, cap: int = DEFAULT_ENUMERATION_CAP
) -> np.ndarray:
    """Spurious-key count for every (true key, plaintext) pair.

    Returns a (key_count, set size) integer matrix: entry [k, m] is the
    number of wrong keys that decrypt encrypt(key k, message m) to some
    member of the language.
    """
    g = space.alphabet.size
    perms = space.mappings_array(cap)
    k_count = perms.shape[0]
    inv = np.argsort(perms, axis=1)
    msgs = language.messages
    out = np.empty((k_count, language.size), dtype=np.int64)
    for k in range(k_count):
        # candidate plaintext under key j is inv_j applied to perm_k(m)
        composed = inv[:, perms[k]]
        codes = apply_keys_encode(composed, msgs, g)
        accepted = language.contains_codes(codes)
        # row k is the composition with itself: identity, always accepted
        out[k] = accepted.sum(axis=0) - 1
    return out


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    se: float
    trials: int
    seed: int


def monte_carlo_spurious(
    space: KeySpace,
    recognizer,
    length: int,
    trials: int,
    seed: int,
    keys_per_trial: int = 100,
) -> MonteCarloEstimate:
    """Sampling stand-in for exhaustive counting.

    Each trial draws a plaintext from the recognizer's language and a
    true key, then samples candidate keys uniformly and scales the
    acceptance fraction among wrong candidates up to the key_count - 1
    wrong keys. Per-trial generators derive from (seed, trial), so the
    result does not depend on evaluation order.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not hasattr(recognizer, "sample_message"):
        raise TypeError("recognizer must provide sample_message for Monte Carlo")
    wrong_total = space.key_count - 1
    estimates = np.empty(trials, dtype=np.float64)
    for t in range(trials):
        rng = np.random.default_rng((seed, t))
        plain = recognizer.sample_message(rng)
        if plain.size != length:
            raise ValueError(
                f"recognizer messages have length {plain.size}, expected {length}"
            )
        true_key = space.sample(rng)
        ciphertext = true_key.mapping[plain]
        accepted = 0
        wrong = 0
        for _ in range(keys_per_trial):
            cand = space.sample(rng)
            if np.array_equal(cand.mapping, true_key.mapping):
                continue
            wrong += 1
            if recognizer.accepts(cand.inverse().mapping[ciphertext]):
                accepted += 1
        estimates[t] = wrong_total * (accepted / wrong) if wrong else 0.0
    mean = float(estimates.mean())
    se = float(estimates.std(ddof=1) / math.sqrt(trials)) if trials > 1 else math.nan
    return MonteCarloEstimate(mean=mean, se=se, trials=trials, seed=seed)


@dataclass(frozen=True)
class SpuriousTableRow:
    length: int
    log2_exact: float
    log2_approx: float
    linear: float | None


@dataclass(frozen=True)
class UnicityReport:
    key_entropy_bits: float
    redundancy_bits: float
    unicity_letters: float  # math.inf when redundancy is zero
    first_length_below_one: int | None
    table: tuple[SpuriousTableRow, ...]


def unicity_report(
    key_entropy_bits: float, redundancy_bits: float, lengths: list[int]
) -> UnicityReport:
    """Unicity distance plus the expected-spurious-keys curve.

    first_length_below_one is the first swept length where the expected
    count drops under 1 (the curve's crossing, not a claim about where
    uniqueness is certain)."""
    rows = []
    first_below = None
    for n in lengths:
        exp = expected_spurious_keys(key_entropy_bits, redundancy_bits, n)
        rows.append(
            SpuriousTableRow(
                length=n,
                log2_exact=exp.log2_exact,
                log2_approx=exp.log2_approx,
                linear=exp.linear,
            )
        )
        if first_below is None and exp.log2_exact < 0:
            first_below = n
    return UnicityReport(
        key_entropy_bits=key_entropy_bits,
        redundancy_bits=redundancy_bits,
        unicity_letters=unicity_distance(key_entropy_bits, redundancy_bits),
        first_length_below_one=first_below,
        table=tuple(rows),
    )
