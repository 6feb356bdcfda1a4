"""Encryption viewed as a discrete channel with the key as noise.

For toy languages the exact joint distribution over (plaintext,
ciphertext) is built by enumerating every (message, key) pair, which
lets both chain-rule decompositions of the mutual information be
evaluated independently and compared against the idealized straight
line N*R0 - H(K).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._kernels import apply_keys_encode
from .cipher import KeySpace, SubstitutionKey
from .lang import absolute_rate
from .spurious import ToyLanguage, unicity_distance

DEFAULT_PAIR_CAP = 10_000_000


class PairCapError(RuntimeError):
    """Too many (message, key) pairs to enumerate exactly."""


class TheoreticalMI(NamedTuple):
    bits: float
    clamped: bool


def theoretical_mutual_information(
    length: float, rate_max: float, key_entropy_bits: float
) -> TheoreticalMI:
    """Idealized plaintext/ciphertext mutual information N*R0 - H(K),
    clamped to zero below the break-even length H(K)/R0 where the cipher
    still acts like a one-time pad."""
    if length < 0:
        raise ValueError("length must be nonnegative")
    if rate_max <= 0:
        raise ValueError("rate_max must be positive")
    if key_entropy_bits < 0:
        raise ValueError("key entropy must be nonnegative")
    raw = length * rate_max - key_entropy_bits
    if raw <= 0:
        return TheoreticalMI(bits=0.0, clamped=True)
    return TheoreticalMI(bits=raw, clamped=False)


class Reliability(NamedTuple):
    reliable: bool
    min_length: float


def reliability_check(
    length: float, rate: float, rate_max: float, key_entropy_bits: float
) -> Reliability:
    """Is N*R within the idealized capacity N*R0 - H(K)?

    min_length is the crossover H(K)/(R0-R); it coincides with the
    unicity distance for redundancy R0-R.
    """
    if rate > rate_max:
        raise ValueError("rate cannot exceed rate_max")
    reliable = length * rate <= length * rate_max - key_entropy_bits
    if rate < rate_max:
        min_length = unicity_distance(key_entropy_bits, rate_max - rate)
    else:
        min_length = 0.0 if key_entropy_bits == 0 else math.inf
    return Reliability(reliable=reliable, min_length=min_length)


@dataclass(frozen=True, eq=False)
class EncryptionChannelInstance:
    """Exact joint distribution over (plaintext, ciphertext).

    Stored sparsely: parallel arrays of message index, ciphertext code,
    and pair multiplicity; every (message, key) pair carries probability
    1 / (set size * key count).
    """

    language: ToyLanguage
    key_count: int
    msg_index: np.ndarray
    cipher_code: np.ndarray
    pair_count: np.ndarray

    @property
    def total_pairs(self) -> int:
        return self.language.size * self.key_count

    @property
    def probs(self) -> np.ndarray:
        return self.pair_count / self.total_pairs

    def entropy_plaintext(self) -> float:
        p = _group_sums(self.probs, self.msg_index)
        return _entropy_bits(p)

    def entropy_ciphertext(self) -> float:
        order = np.argsort(self.cipher_code, kind="stable")
        p = _group_sums(self.probs[order], self.cipher_code[order])
        return _entropy_bits(p)

    def mutual_information(self) -> tuple[float, float]:
        """Both chain-rule decompositions, computed separately:
        H(P) - H(P|C) and H(C) - H(C|P)."""
        probs = self.probs

        # decomposition A, grouped by ciphertext
        order = np.argsort(self.cipher_code, kind="stable")
        p_sorted = probs[order]
        p_c_per_entry = _group_totals_per_entry(p_sorted, self.cipher_code[order])
        h_p_given_c = float(-(p_sorted * np.log2(p_sorted / p_c_per_entry)).sum())
        i_a = self.entropy_plaintext() - h_p_given_c

        # decomposition B, grouped by plaintext (entries already sorted)
        p_m_per_entry = _group_totals_per_entry(probs, self.msg_index)
        h_c_given_p = float(-(probs * np.log2(probs / p_m_per_entry)).sum())
        i_b = self.entropy_ciphertext() - h_c_given_p
        return i_a, i_b


def _entropy_bits(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def _group_sums(values: np.ndarray, group_ids: np.ndarray) -> np.ndarray:
    """Per-group sums of values; group_ids must be pre-sorted."""
    if values.size == 0:
        return values
    starts = np.flatnonzero(np.r_[True, group_ids[1:] != group_ids[:-1]])
    return np.add.reduceat(values, starts)


def _group_totals_per_entry(values: np.ndarray, group_ids: np.ndarray) -> np.ndarray:
    """Each entry's group total, broadcast back to entry order."""
    starts = np.flatnonzero(np.r_[True, group_ids[1:] != group_ids[:-1]])
    sums = np.add.reduceat(values, starts)
    lengths = np.diff(np.r_[starts, values.size])
    return np.repeat(sums, lengths)


def empirical_mutual_information(
    instance: EncryptionChannelInstance,
) -> tuple[float, float]:
    """Both chain-rule decompositions of I(plaintext; ciphertext) from
    the exact joint; mathematically equal, computed separately."""
    return instance.mutual_information()


def build_joint_distribution(
    language: ToyLanguage,
    space: KeySpace,
    keys: list[SubstitutionKey] | None = None,
    cap: int = DEFAULT_PAIR_CAP,
) -> EncryptionChannelInstance:
    """Enumerate all (message, key) pairs with equal probability and
    accumulate the exact joint. `keys` overrides full enumeration (used
    for restricted key sets and partitioned builds)."""
    if keys is None:
        pairs = language.size * space.key_count
        if pairs > cap:
            raise PairCapError(
                f"{pairs} (message, key) pairs exceeds cap {cap}; "
                "use Monte Carlo estimation instead"
            )
        perms = space.mappings_array(cap)
    else:
        if not keys:
            raise ValueError("keys must be nonempty")
        perms = np.stack([k.mapping for k in keys]).astype(np.int64)
        if language.size * perms.shape[0] > cap:
            raise PairCapError("too many (message, key) pairs")
    g = language.alphabet.size
    codes = apply_keys_encode(perms, language.messages, g)  # (K, M)
    k_count, m_count = codes.shape
    m_idx = np.broadcast_to(np.arange(m_count, dtype=np.int64), codes.shape).ravel()
    c_flat = codes.ravel()
    order = np.lexsort((c_flat, m_idx))
    m_sorted = m_idx[order]
    c_sorted = c_flat[order]
    new_group = np.r_[True, (m_sorted[1:] != m_sorted[:-1]) | (c_sorted[1:] != c_sorted[:-1])]
    starts = np.flatnonzero(new_group)
    counts = np.diff(np.r_[starts, c_sorted.size])
    return EncryptionChannelInstance(
        language=language,
        key_count=k_count,
        msg_index=m_sorted[starts],
        cipher_code=c_sorted[starts],
        pair_count=counts.astype(np.int64),
    )


@dataclass(frozen=True)
class ChannelReport:
    length: int
    rate_max: float
    rate: float
    key_entropy_bits: float
    theoretical_bits: float
    clamped: bool
    empirical_a_bits: float
    empirical_b_bits: float
    reliable: bool
    min_reliable_length: float


def channel_report(language: ToyLanguage, space: KeySpace,
                   cap: int = DEFAULT_PAIR_CAP) -> ChannelReport:
    """Build the exact joint for one toy instance and compare both
    empirical decompositions against the idealized value."""
    r0 = absolute_rate(language.alphabet)
    r = language.rate
    h_k = space.key_entropy_bits
    n = language.length
    instance = build_joint_distribution(language, space, cap=cap)
    i_a, i_b = instance.mutual_information()
    theo = theoretical_mutual_information(n, r0, h_k)
    rel = reliability_check(n, r, r0, h_k)
    return ChannelReport(
        length=n,
        rate_max=r0,
        rate=r,
        key_entropy_bits=h_k,
        theoretical_bits=theo.bits,
        clamped=theo.clamped,
        empirical_a_bits=i_a,
        empirical_b_bits=i_b,
        reliable=rel.reliable,
        min_reliable_length=rel.min_length,
    )
