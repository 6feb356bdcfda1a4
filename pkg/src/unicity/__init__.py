"""Desk-scale toolkit for unicity-distance experiments: language
redundancy estimation, substitution-cipher key spaces, spurious-key
counting, the encryption-as-channel view, and MCMC key recovery."""

from .lang import (
    Alphabet,
    EmptyTextError,
    NGramModel,
    RedundancyEstimate,
    absolute_rate,
    entropy_rate,
    fit_ngram,
    normalize_text,
    redundancy,
    sequence_log_likelihood,
)
from .cipher import (
    SHIFT,
    SUBSTITUTION,
    EnumerationCapError,
    KeySpace,
    SubstitutionKey,
    decrypt,
    encrypt,
    key_entropy,
    sample_key,
)
from .spurious import (
    ExactSetRecognizer,
    LikelihoodRecognizer,
    MonteCarloEstimate,
    SpuriousExpectation,
    ToyLanguage,
    UnicityReport,
    build_toy_language,
    count_spurious_keys,
    exhaustive_spurious_counts,
    expected_spurious_keys,
    monte_carlo_spurious,
    unicity_distance,
    unicity_report,
)
from .channel import (
    ChannelReport,
    EncryptionChannelInstance,
    PairCapError,
    build_joint_distribution,
    channel_report,
    empirical_mutual_information,
    reliability_check,
    theoretical_mutual_information,
)
from .attack import (
    AttackConfig,
    AttackResult,
    RecoveryCurveResult,
    mcmc_crack,
    recovery_curve,
)

__version__ = "0.1.0"

__all__ = [
    "Alphabet",
    "AttackConfig",
    "AttackResult",
    "ChannelReport",
    "EmptyTextError",
    "EncryptionChannelInstance",
    "EnumerationCapError",
    "ExactSetRecognizer",
    "KeySpace",
    "LikelihoodRecognizer",
    "MonteCarloEstimate",
    "NGramModel",
    "PairCapError",
    "RecoveryCurveResult",
    "RedundancyEstimate",
    "SHIFT",
    "SUBSTITUTION",
    "SpuriousExpectation",
    "SubstitutionKey",
    "ToyLanguage",
    "UnicityReport",
    "absolute_rate",
    "build_joint_distribution",
    "build_toy_language",
    "channel_report",
    "count_spurious_keys",
    "decrypt",
    "empirical_mutual_information",
    "encrypt",
    "entropy_rate",
    "exhaustive_spurious_counts",
    "expected_spurious_keys",
    "fit_ngram",
    "key_entropy",
    "mcmc_crack",
    "monte_carlo_spurious",
    "normalize_text",
    "recovery_curve",
    "redundancy",
    "sample_key",
    "sequence_log_likelihood",
    "unicity_distance",
    "unicity_report",
    "__version__",
]
