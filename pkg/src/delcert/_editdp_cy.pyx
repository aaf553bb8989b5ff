# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled edit-distance kernels (hot path of the exhaustive sweeps).

Behavioral twin of ``_editdp``; keep the two in lockstep.
"""

from libc.stdlib cimport free, malloc

DEF INF = 1 << 28


def edit_distance_ids(int[::1] a, int[::1] b,
                      bint allow_del, bint allow_ins, bint allow_sub):
    """Minimum number of allowed edits transforming ``a`` into ``b``; -1 if unreachable."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = b.shape[0]
    cdef Py_ssize_t i, j
    cdef int ai, best, cand, result
    cdef int *prev = <int *> malloc((m + 1) * sizeof(int))
    cdef int *cur = <int *> malloc((m + 1) * sizeof(int))
    cdef int *tmp
    if prev == NULL or cur == NULL:
        free(prev)
        free(cur)
        raise MemoryError()
    try:
        prev[0] = 0
        for j in range(1, m + 1):
            prev[j] = <int> j if allow_ins else INF
        for i in range(1, n + 1):
            ai = a[i - 1]
            cur[0] = <int> i if allow_del else INF
            for j in range(1, m + 1):
                best = prev[j - 1] if ai == b[j - 1] else INF
                if allow_sub and ai != b[j - 1]:
                    cand = prev[j - 1] + 1
                    if cand < best:
                        best = cand
                if allow_del:
                    cand = prev[j] + 1
                    if cand < best:
                        best = cand
                if allow_ins:
                    cand = cur[j - 1] + 1
                    if cand < best:
                        best = cand
                cur[j] = best
            tmp = prev
            prev = cur
            cur = tmp
        result = prev[m]
    finally:
        free(prev)
        free(cur)
    return result if result < INF else -1


def lcs_length_ids(int[::1] a, int[::1] b):
    """Length of a longest common subsequence of the two id sequences."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = b.shape[0]
    cdef Py_ssize_t i, j
    cdef int ai, up, left, result
    if n == 0 or m == 0:
        return 0
    cdef int *prev = <int *> malloc((m + 1) * sizeof(int))
    cdef int *cur = <int *> malloc((m + 1) * sizeof(int))
    cdef int *tmp
    if prev == NULL or cur == NULL:
        free(prev)
        free(cur)
        raise MemoryError()
    try:
        for j in range(m + 1):
            prev[j] = 0
            cur[j] = 0
        for i in range(1, n + 1):
            ai = a[i - 1]
            for j in range(1, m + 1):
                if ai == b[j - 1]:
                    cur[j] = prev[j - 1] + 1
                else:
                    up = prev[j]
                    left = cur[j - 1]
                    cur[j] = up if up >= left else left
            tmp = prev
            prev = cur
            cur = tmp
        result = prev[m]
    finally:
        free(prev)
        free(cur)
    return result
