#!/usr/bin/env python3
"""Times the numba kernels against their pure-numpy fallbacks.

The JIT path is what you get by default; the fallback is selected by
setting UNICITY_NO_NUMBA=1 (or when numba is missing). Both paths are
called directly here so one process can compare them. Outputs agree up
to floating-point summation order, which the script verifies.

Usage: python benchmarks/bench_kernels.py [--iterations 20000]
"""

import argparse
import time

import numpy as np

from unicity import Alphabet, KeySpace, SUBSTITUTION, build_toy_language, fit_ngram
from unicity._kernels import (
    HAVE_NUMBA,
    _apply_keys_encode_np,
    _mcmc_sweep_np,
)


def timeit(fn, *args, repeat=5):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def bench_apply_keys():
    ab = Alphabet.first_n(7)
    space = KeySpace(SUBSTITUTION, ab)
    perms = space.mappings_array()  # 5040 x 7
    toy = build_toy_language(ab, 5, 2.0, seed=0)  # 1024 messages of length 5
    msgs = toy.messages
    args = (perms, msgs, ab.size)
    rows = []
    t_np, out_np = timeit(_apply_keys_encode_np, *args)
    rows.append(("apply_keys_encode", "numpy", t_np))
    if HAVE_NUMBA:
        from unicity._kernels import _apply_keys_encode_jit

        _apply_keys_encode_jit(*args)  # compile
        t_jit, out_jit = timeit(_apply_keys_encode_jit, *args)
        assert np.array_equal(out_np, out_jit), "paths disagree"
        rows.append(("apply_keys_encode", "numba", t_jit))
    return rows


def bench_mcmc(iterations):
    rng = np.random.default_rng(0)
    ab = Alphabet.first_n(26)
    corpus = rng.integers(0, 26, size=50_000)
    model = fit_ngram(corpus, 2, 0.5, ab)
    cipher = rng.integers(0, 26, size=2_000)
    wins_all = np.lib.stride_tricks.sliding_window_view(cipher, 2)
    codes = wins_all @ np.array([26, 1])
    uniq, counts = np.unique(codes, return_counts=True)
    wins = np.stack([uniq // 26, uniq % 26], axis=1).astype(np.int64)
    wcounts = counts.astype(np.float64)

    inv0 = rng.permutation(26).astype(np.int64)
    pair_a = rng.integers(0, 26, size=iterations)
    raw_b = rng.integers(0, 25, size=iterations)
    pair_b = raw_b + (raw_b >= pair_a)
    log2_u = np.log2(rng.random(size=iterations))
    args = (wins, wcounts, model.nll_flat, 26, inv0, pair_a, pair_b, log2_u, 1.0, 100)

    rows = []
    t_np, (best_np, score_np, _) = timeit(_mcmc_sweep_np, *args, repeat=3)
    rows.append(("mcmc_sweep", "numpy", t_np))
    if HAVE_NUMBA:
        from unicity._kernels import _mcmc_sweep_jit

        _mcmc_sweep_jit(*args)  # compile
        t_jit, (best_jit, score_jit, _) = timeit(_mcmc_sweep_jit, *args, repeat=3)
        assert abs(score_np - score_jit) < 1e-6, "paths disagree"
        rows.append(("mcmc_sweep", "numba", t_jit))
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--iterations", type=int, default=20_000)
    args = parser.parse_args()

    print(f"numba available: {HAVE_NUMBA}")
    rows = bench_apply_keys() + bench_mcmc(args.iterations)

    print(f"\n{'kernel':<20} {'path':<8} {'best time':>12}")
    print("-" * 42)
    by_kernel = {}
    for kernel, path, t in rows:
        print(f"{kernel:<20} {path:<8} {t*1e3:>10.2f} ms")
        by_kernel.setdefault(kernel, {})[path] = t
    print()
    for kernel, paths in by_kernel.items():
        if "numba" in paths and "numpy" in paths:
            print(f"{kernel}: numba is {paths['numpy']/paths['numba']:.1f}x faster")


if __name__ == "__main__":
    main()
