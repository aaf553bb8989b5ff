"""Pure-Python edit-distance kernels (fallback twin of ``_editdp_cy``).

Both implementations operate on integer-id sequences and must stay
behaviorally identical; ``tests/test_kernels.py`` enforces this cell by
cell and the ``benchmarks`` script compares their speed.
"""

from __future__ import annotations

from typing import Sequence

INF = 1 << 28


def edit_distance_ids(
    a: Sequence[int],
    b: Sequence[int],
    allow_del: bool,
    allow_ins: bool,
    allow_sub: bool,
) -> int:
    """Minimum number of allowed edits transforming ``a`` into ``b``.

    del removes a token of ``a``, ins inserts a token of ``b``, sub
    replaces one token by another.  Returns -1 when ``b`` is unreachable
    under the allowed operations.
    """
    n, m = len(a), len(b)
    prev = [0] * (m + 1)
    if allow_ins:
        for j in range(1, m + 1):
            prev[j] = j
    else:
        for j in range(1, m + 1):
            prev[j] = INF
    cur = [0] * (m + 1)
    for i in range(1, n + 1):
        ai = a[i - 1]
        cur[0] = i if allow_del else INF
        for j in range(1, m + 1):
            best = prev[j - 1] if ai == b[j - 1] else INF
            if allow_sub and ai != b[j - 1] and prev[j - 1] + 1 < best:
                best = prev[j - 1] + 1
            if allow_del and prev[j] + 1 < best:
                best = prev[j] + 1
            if allow_ins and cur[j - 1] + 1 < best:
                best = cur[j - 1] + 1
            cur[j] = best
        prev, cur = cur, prev
    return prev[m] if prev[m] < INF else -1


def lcs_length_ids(a: Sequence[int], b: Sequence[int]) -> int:
    """Length of a longest common subsequence of the two id sequences."""
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        return 0
    prev = [0] * (m + 1)
    cur = [0] * (m + 1)
    for i in range(1, n + 1):
        ai = a[i - 1]
        for j in range(1, m + 1):
            if ai == b[j - 1]:
                cur[j] = prev[j - 1] + 1
            else:
                up = prev[j]
                left = cur[j - 1]
                cur[j] = up if up >= left else left
        prev, cur = cur, prev
    return prev[m]
