#!/usr/bin/env python3
"""Benchmark: compiled vs pure-Python edit-distance kernels.

The constrained edit DP is the hot inner loop of the exhaustive ball
sweeps, so the package ships a Cython kernel with a pure-Python twin
selected at import.  This script times both backends on the same
workloads and reports the speedup.

    python benchmarks/bench_editdp.py [--pairs 20000] [--len 8] [--alpha 4]
"""

from __future__ import annotations

import argparse
import time

import numpy as np


def make_pairs(n_pairs: int, max_len: int, alphabet: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    pairs = []
    for _ in range(n_pairs):
        la, lb = rng.integers(0, max_len + 1, size=2)
        pairs.append(
            (
                rng.integers(0, alphabet, size=la).astype(np.intc),
                rng.integers(0, alphabet, size=lb).astype(np.intc),
            )
        )
    return pairs


def bench(fn, pairs, ops=(True, True, True)) -> tuple[float, int]:
    t0 = time.perf_counter()
    acc = 0
    for a, b in pairs:
        acc += fn(a, b, *ops)
    return time.perf_counter() - t0, acc


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--pairs", type=int, default=20000)
    parser.add_argument("--len", dest="max_len", type=int, default=8)
    parser.add_argument("--alpha", type=int, default=4)
    args = parser.parse_args()

    from delcert import _editdp as py_impl

    try:
        from delcert import _editdp_cy as cy_impl
    except ImportError:
        cy_impl = None

    pairs = make_pairs(args.pairs, args.max_len, args.alpha)
    list_pairs = [(a.tolist(), b.tolist()) for a, b in pairs]

    print(f"{args.pairs} random pairs, length <= {args.max_len}, alphabet {args.alpha}")
    header = f"{'backend':<10} {'full ops':>12} {'del only':>12} {'lcs':>12}"
    print(header)
    print("-" * len(header))

    t_py, acc_py = bench(py_impl.edit_distance_ids, list_pairs)
    t_py_del, _ = bench(py_impl.edit_distance_ids, list_pairs, (True, False, False))
    t0 = time.perf_counter()
    for a, b in list_pairs:
        py_impl.lcs_length_ids(a, b)
    t_py_lcs = time.perf_counter() - t0
    print(f"{'python':<10} {t_py:>11.3f}s {t_py_del:>11.3f}s {t_py_lcs:>11.3f}s")

    if cy_impl is None:
        print("compiled kernel not built; install with the extension to compare")
        return

    t_cy, acc_cy = bench(cy_impl.edit_distance_ids, pairs)
    t_cy_del, _ = bench(cy_impl.edit_distance_ids, pairs, (True, False, False))
    t0 = time.perf_counter()
    for a, b in pairs:
        cy_impl.lcs_length_ids(a, b)
    t_cy_lcs = time.perf_counter() - t0
    print(f"{'cython':<10} {t_cy:>11.3f}s {t_cy_del:>11.3f}s {t_cy_lcs:>11.3f}s")
    assert acc_py == acc_cy, "backends disagree"
    print(f"\nspeedup (full ops): {t_py / t_cy:.1f}x")


if __name__ == "__main__":
    main()
