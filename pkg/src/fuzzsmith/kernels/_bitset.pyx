# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled cover-set kernel: packed uint64 words, popcount in C.

Must stay swap-for-swap identical to fuzzsmith.kernels.pure.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef extern from *:
    """
    static inline unsigned long long fz_popcnt64(unsigned long long x) {
    #if defined(_MSC_VER)
        return __popcnt64(x);
    #else
        return __builtin_popcountll(x);
    #endif
    }
    """
    unsigned long long fz_popcnt64(unsigned long long x) nogil


cdef inline long _union_or_popcount(cnp.uint64_t[:, ::1] masks,
                                    cnp.uint64_t[::1] base,
                                    Py_ssize_t row,
                                    Py_ssize_t words) nogil:
    cdef Py_ssize_t k
    cdef long total = 0
    for k in range(words):
        total += <long>fz_popcnt64(base[k] | masks[row, k])
    return total


def union_size(cnp.uint64_t[:, ::1] masks, indices):
    cdef Py_ssize_t words = masks.shape[1]
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] acc = np.zeros(words, dtype=np.uint64)
    cdef cnp.uint64_t[::1] acc_v = acc
    cdef Py_ssize_t i, k
    for i in indices:
        for k in range(words):
            acc_v[k] |= masks[i, k]
    cdef long total = 0
    for k in range(words):
        total += <long>fz_popcnt64(acc_v[k])
    return total


def greedy_scan(cnp.uint64_t[:, ::1] masks, initial):
    """First-improvement substitution scan; returns (sorted members, evals)."""
    cdef Py_ssize_t m = masks.shape[0]
    cdef Py_ssize_t words = masks.shape[1]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] in_sel = np.zeros(m, dtype=np.uint8)
    cdef cnp.uint8_t[::1] in_sel_v = in_sel
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] u_minus = np.zeros(words, dtype=np.uint64)
    cdef cnp.uint64_t[::1] u_minus_v = u_minus
    cdef Py_ssize_t s, t, j, k, snap_i, snap_n
    cdef long base, cand, evals = 0
    cdef bint changed = True

    cdef cnp.ndarray[cnp.int64_t, ndim=1] snapshot = np.empty(m, dtype=np.int64)
    cdef cnp.int64_t[::1] snap_v = snapshot

    for s in initial:
        in_sel_v[s] = 1

    while changed:
        changed = False
        snap_n = 0
        for j in range(m):
            if in_sel_v[j]:
                snap_v[snap_n] = j
                snap_n += 1
        for snap_i in range(snap_n):
            s = snap_v[snap_i]
            for k in range(words):
                u_minus_v[k] = 0
            for j in range(m):
                if in_sel_v[j] and j != s:
                    for k in range(words):
                        u_minus_v[k] |= masks[j, k]
            base = _union_or_popcount(masks, u_minus_v, s, words)
            for t in range(m):
                if in_sel_v[t]:
                    continue
                evals += 1
                cand = _union_or_popcount(masks, u_minus_v, t, words)
                if cand > base:
                    in_sel_v[s] = 0
                    in_sel_v[t] = 1
                    changed = True
                    break

    members = [int(j) for j in range(m) if in_sel_v[j]]
    return members, int(evals)
