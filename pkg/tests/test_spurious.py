import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from unicity import (
    SUBSTITUTION,
    Alphabet,
    EnumerationCapError,
    ExactSetRecognizer,
    KeySpace,
    LikelihoodRecognizer,
    build_toy_language,
    count_spurious_keys,
    decrypt,
    encrypt,
    exhaustive_spurious_counts,
    expected_spurious_keys,
    monte_carlo_spurious,
    unicity_distance,
    unicity_report,
)


class TestUnicityDistance:
    def test_english_substitution(self):
        assert abs(unicity_distance(88.3817, 3.2) - 27.62) < 0.01

    def test_shift(self):
        assert abs(unicity_distance(4.7004, 3.2) - 1.469) < 0.001

    def test_zero_redundancy_unbounded(self):
        assert unicity_distance(88.0, 0.0) == math.inf

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            unicity_distance(-1.0, 3.2)
        with pytest.raises(ValueError):
            unicity_distance(1.0, -0.5)

    def test_product_identity(self):
        rng = np.random.default_rng(2)
        for _ in range(500):
            h = float(rng.uniform(0.01, 200))
            d = float(rng.uniform(1e-6, 4.7))
            u = unicity_distance(h, d)
            assert abs(u * d - h) <= 1e-9 * max(1.0, h)


class TestExpectedSpurious:
    def test_exact_rational_case(self):
        exp = expected_spurious_keys(math.log2(24), 1.0, 3)
        oracle = Fraction(24 - 1, 2**3)
        assert exp.linear is not None
        assert abs(exp.linear - float(oracle)) < 1e-12
        assert abs(exp.log2_exact - math.log2(float(oracle))) < 1e-12

    def test_zero_length(self):
        exp = expected_spurious_keys(math.log2(24), 1.0, 0)
        assert abs(exp.linear - 23.0) < 1e-9

    def test_brackets_unicity_point(self):
        h = sum(math.log2(k) for k in range(2, 27))
        below = expected_spurious_keys(h, 3.2, 27)
        above = expected_spurious_keys(h, 3.2, 28)
        assert below.linear >= 1.0
        assert above.linear < 1.0

    def test_strictly_decreasing_in_length(self):
        vals = [expected_spurious_keys(10.0, 0.8, n).log2_exact for n in range(30)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_constant_when_redundancy_zero(self):
        vals = [expected_spurious_keys(10.0, 0.0, n).log2_exact for n in range(10)]
        assert all(v == vals[0] for v in vals)

    def test_approximation_bound_and_gap(self):
        rng = np.random.default_rng(6)
        for _ in range(200):
            h = float(rng.uniform(0.1, 40))
            d = float(rng.uniform(0, 3))
            n = int(rng.integers(0, 20))
            exp = expected_spurious_keys(h, d, n)
            assert exp.log2_exact <= exp.log2_approx
            if exp.linear is not None:
                approx_lin = 2.0**exp.log2_approx
                assert exp.linear <= approx_lin + 1e-12
                # 2**x amplifies log-domain rounding by ~value*|x|*eps, and
                # the identity is a difference of two near-equal values
                tol = 1e-9 * max(1.0, exp.gap) + approx_lin * (abs(exp.log2_approx) + 2) * 1e-14
                assert abs((approx_lin - exp.linear) - exp.gap) < tol
            assert exp.gap <= 2.0 ** (-n * d) + 1e-15

    def test_large_entropy_stays_in_log_domain(self):
        exp = expected_spurious_keys(400.0, 3.2, 10)
        assert exp.linear is None
        assert abs(exp.log2_exact - (400.0 - 32.0)) < 1e-9

    def test_negative_length_rejected(self):
        with pytest.raises(ValueError):
            expected_spurious_keys(1.0, 1.0, -1)


class TestToyLanguage:
    def test_g4_n3_r1(self):
        toy = build_toy_language(Alphabet.first_n(4), 3, 1.0, seed=0)
        assert toy.size == 8
        assert toy.rate == 1.0
        assert np.unique(toy.codes).size == 8
        assert toy.messages.shape == (8, 3)

    def test_full_space(self):
        toy = build_toy_language(Alphabet.first_n(2), 2, 1.0, seed=1)
        assert toy.size == 4
        assert sorted(toy.codes.tolist()) == [0, 1, 2, 3]

    def test_boundary_arithmetic(self):
        ab = Alphabet.first_n(4)
        toy = build_toy_language(ab, 3, 1.9, seed=2)
        assert toy.size == round(2 ** (1.9 * 3))  # 52 of 64
        with pytest.raises(ValueError):
            build_toy_language(ab, 3, 2.1, seed=2)  # 79 > 64

    def test_rate_matches_size(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            g = int(rng.integers(2, 6))
            n = int(rng.integers(1, 5))
            r_max = math.log2(g)
            r = float(rng.uniform(0, r_max))
            toy = build_toy_language(Alphabet.first_n(g), n, r, seed=int(rng.integers(1 << 30)))
            assert abs(toy.rate - math.log2(toy.size) / n) < 1e-12
            assert toy.size <= g**n

    def test_deterministic_by_seed(self):
        ab = Alphabet.first_n(5)
        a = build_toy_language(ab, 3, 1.2, seed=9)
        b = build_toy_language(ab, 3, 1.2, seed=9)
        c = build_toy_language(ab, 3, 1.2, seed=10)
        assert np.array_equal(a.codes, b.codes)
        assert not np.array_equal(a.codes, c.codes)

    def test_membership(self):
        toy = build_toy_language(Alphabet.first_n(4), 3, 1.0, seed=4)
        assert toy.contains_codes(toy.codes).all()
        outside = np.setdiff1d(np.arange(64), toy.codes)
        assert not toy.contains_codes(outside).any()


class TestRecognizers:
    def test_exact_set(self):
        toy = build_toy_language(Alphabet.first_n(4), 3, 1.0, seed=5)
        rec = ExactSetRecognizer(toy)
        member = toy.messages[0]
        assert rec.accepts(member)
        assert not rec.accepts(np.array([0, 0]))  # wrong length
        outside_code = np.setdiff1d(np.arange(64), toy.codes)[0]
        row = np.array([outside_code // 16, (outside_code // 4) % 4, outside_code % 4])
        assert not rec.accepts(row)

    def test_likelihood_threshold(self, bigram_model, english_split):
        _, heldout = english_split
        rec = LikelihoodRecognizer.calibrate(bigram_model, heldout, margin_bits=1.0)
        assert rec.accepts(heldout[100:160])
        rng = np.random.default_rng(11)
        rejected = sum(
            not rec.accepts(rng.integers(0, 26, size=60)) for _ in range(20)
        )
        assert rejected >= 18

    def test_likelihood_batch_agrees(self, bigram_model, english_split):
        _, heldout = english_split
        rec = LikelihoodRecognizer.calibrate(bigram_model, heldout)
        rng = np.random.default_rng(12)
        rows = rng.integers(0, 26, size=(10, 40))
        batch = rec.accept_rows(rows)
        singles = np.array([rec.accepts(r) for r in rows])
        assert np.array_equal(batch, singles)


class TestCountSpurious:
    def _setup(self, seed=0):
        ab = Alphabet.first_n(4)
        space = KeySpace(SUBSTITUTION, ab)
        toy = build_toy_language(ab, 3, 1.0, seed=seed)
        return ab, space, toy

    def test_empty_ciphertext(self):
        _, space, toy = self._setup()
        rec = ExactSetRecognizer(toy)
        key = space.sample(np.random.default_rng(0))
        assert count_spurious_keys(space, rec, np.array([], dtype=np.int64), key) == 23

    def test_full_space_language_always_23(self):
        ab = Alphabet.first_n(4)
        space = KeySpace(SUBSTITUTION, ab)
        toy = build_toy_language(ab, 3, 2.0, seed=1)  # all 64 messages
        rec = ExactSetRecognizer(toy)
        rng = np.random.default_rng(2)
        for _ in range(10):
            key = space.sample(rng)
            plain = toy.sample_message(rng)
            assert count_spurious_keys(space, rec, encrypt(key, plain), key) == 23
        assert (exhaustive_spurious_counts(space, toy) == 23).all()

    def test_matrix_matches_pure_python_oracle(self):
        """Full cross-check of the vectorized enumeration against a
        from-scratch loop using only the public cipher API."""
        _, space, toy = self._setup(seed=7)
        rec = ExactSetRecognizer(toy)
        got = exhaustive_spurious_counts(space, toy)
        keys = list(space.enumerate_keys())
        member_set = {tuple(m.tolist()) for m in toy.messages}
        for ki, key in enumerate(keys):
            for mi, msg in enumerate(toy.messages):
                cipher = encrypt(key, msg)
                brute = sum(
                    1
                    for cand in keys
                    if cand != key and tuple(decrypt(cand, cipher).tolist()) in member_set
                )
                assert got[ki, mi] == brute

    def test_count_matches_matrix_entries(self):
        _, space, toy = self._setup(seed=8)
        rec = ExactSetRecognizer(toy)
        matrix = exhaustive_spurious_counts(space, toy)
        keys = list(space.enumerate_keys())
        rng = np.random.default_rng(3)
        for _ in range(12):
            ki = int(rng.integers(len(keys)))
            mi = int(rng.integers(toy.size))
            cipher = encrypt(keys[ki], toy.messages[mi])
            assert count_spurious_keys(space, rec, cipher, keys[ki]) == matrix[ki, mi]

    def test_cap_exceeded(self, latin):
        space = KeySpace(SUBSTITUTION, latin)
        toy = build_toy_language(Alphabet.first_n(4), 3, 1.0, seed=0)
        rec = ExactSetRecognizer(toy)
        with pytest.raises(EnumerationCapError):
            count_spurious_keys(space, rec, np.array([0, 1, 2]), space.sample(np.random.default_rng(0)))

    def test_grand_mean_matches_combinatorial_expectation(self):
        """Independent oracle for the exhaustive counter: under uniform
        random distinct-set toys, E[count] = sum over non-identity
        permutations p of Pr[p fixes the plaintext] * 1 +
        Pr[not fixed] * (m-1)/(T-1), with Pr[fixed] = f(p)**N / T.
        """
        ab = Alphabet.first_n(4)
        space = KeySpace(SUBSTITUTION, ab)
        g, n, m = 4, 3, 8
        t = g**n
        expected = 0.0
        for perm in itertools.permutations(range(g)):
            if perm == tuple(range(g)):
                continue
            fixed = sum(1 for i in range(g) if perm[i] == i)
            p_fix = fixed**n / t
            expected += p_fix + (1 - p_fix) * (m - 1) / (t - 1)

        seeds = 300
        means = np.empty(seeds)
        for s in range(seeds):
            toy = build_toy_language(ab, n, 1.0, seed=s)
            means[s] = exhaustive_spurious_counts(space, toy).mean()
        grand = means.mean()
        se = means.std(ddof=1) / math.sqrt(seeds)
        assert abs(grand - expected) <= 3 * se
        # and the combinatorial value is what it is: 10/3 at these sizes
        assert abs(expected - 10 / 3) < 1e-12


class TestMonteCarlo:
    def test_matches_exhaustive(self):
        ab = Alphabet.first_n(4)
        space = KeySpace(SUBSTITUTION, ab)
        toy = build_toy_language(ab, 3, 1.0, seed=21)
        rec = ExactSetRecognizer(toy)
        exact = exhaustive_spurious_counts(space, toy).mean()
        est = monte_carlo_spurious(space, rec, 3, trials=400, seed=5)
        assert est.se > 0
        assert abs(est.mean - exact) <= 3 * est.se

    def test_single_trial_se_undefined(self):
        ab = Alphabet.first_n(4)
        space = KeySpace(SUBSTITUTION, ab)
        toy = build_toy_language(ab, 3, 1.0, seed=22)
        est = monte_carlo_spurious(space, ExactSetRecognizer(toy), 3, trials=1, seed=0)
        assert math.isnan(est.se)

    def test_deterministic(self):
        ab = Alphabet.first_n(4)
        space = KeySpace(SUBSTITUTION, ab)
        toy = build_toy_language(ab, 3, 1.0, seed=23)
        rec = ExactSetRecognizer(toy)
        a = monte_carlo_spurious(space, rec, 3, trials=37, seed=77)
        b = monte_carlo_spurious(space, rec, 3, trials=37, seed=77)
        assert a == b

    def test_requires_sampling_recognizer(self, bigram_model):
        space = KeySpace(SUBSTITUTION, Alphabet.latin())
        rec = LikelihoodRecognizer(bigram_model, 5.0)
        with pytest.raises(TypeError):
            monte_carlo_spurious(space, rec, 10, trials=2, seed=0)

    def test_trials_validation(self):
        ab = Alphabet.first_n(4)
        space = KeySpace(SUBSTITUTION, ab)
        toy = build_toy_language(ab, 3, 1.0, seed=1)
        with pytest.raises(ValueError):
            monte_carlo_spurious(space, ExactSetRecognizer(toy), 3, trials=0, seed=0)


class TestUnicityReport:
    def test_table_and_crossing(self):
        h = sum(math.log2(k) for k in range(2, 27))
        report = unicity_report(h, 3.2, list(range(0, 51)))
        assert abs(report.unicity_letters - 27.6193) < 1e-3
        assert report.first_length_below_one == 28
        assert len(report.table) == 51
        logs = [row.log2_exact for row in report.table]
        assert all(a > b for a, b in zip(logs, logs[1:]))

    def test_unbounded(self):
        report = unicity_report(10.0, 0.0, [1, 2, 3])
        assert report.unicity_letters == math.inf
        assert report.first_length_below_one is None
