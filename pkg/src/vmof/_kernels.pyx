# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled dominance kernels. Must stay bit-identical to ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()


cdef inline int _compare(const double[:, ::1] F, Py_ssize_t i, Py_ssize_t j, Py_ssize_t m) noexcept nogil:
    # 1: i dominates j, -1: j dominates i, 0: neither
    cdef bint i_better = 0, j_better = 0
    cdef Py_ssize_t k
    for k in range(m):
        if F[i, k] < F[j, k]:
            i_better = 1
        elif F[j, k] < F[i, k]:
            j_better = 1
        if i_better and j_better:
            return 0
    if i_better:
        return 1
    if j_better:
        return -1
    return 0


def nondominated_ranks(const double[:, ::1] F):
    cdef Py_ssize_t n = F.shape[0], m = F.shape[1]
    cdef Py_ssize_t i, j, p, q, head, tail, nxt
    cdef int c
    rank_arr = np.zeros(n, dtype=np.int64)
    cdef cnp.int64_t[::1] rank = rank_arr
    if n == 0:
        return rank_arr
    cdef cnp.uint8_t[:, ::1] dom = np.zeros((n, n), dtype=np.uint8)
    cdef cnp.int64_t[::1] count = np.zeros(n, dtype=np.int64)
    cdef cnp.int64_t[::1] queue = np.empty(n, dtype=np.int64)

    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                c = _compare(F, i, j, m)
                if c == 1:
                    dom[i, j] = 1
                    count[j] += 1
                elif c == -1:
                    dom[j, i] = 1
                    count[i] += 1
        tail = 0
        for i in range(n):
            if count[i] == 0:
                queue[tail] = i
                tail += 1
        head = 0
        while head < tail:
            nxt = tail
            for p in range(head, tail):
                i = queue[p]
                for q in range(n):
                    if dom[i, q]:
                        count[q] -= 1
                        if count[q] == 0:
                            rank[q] = rank[i] + 1
                            queue[nxt] = q
                            nxt += 1
            head = tail
            tail = nxt
    return rank_arr


def nondominated_mask(const double[:, ::1] F):
    cdef Py_ssize_t n = F.shape[0], m = F.shape[1]
    cdef Py_ssize_t i, j
    mask_arr = np.ones(n, dtype=bool)
    cdef cnp.uint8_t[::1] mask = mask_arr.view(np.uint8)
    with nogil:
        for i in range(n):
            for j in range(n):
                if j != i and _compare(F, j, i, m) == 1:
                    mask[i] = 0
                    break
    return mask_arr


def dominator_counts(const double[:, ::1] F):
    cdef Py_ssize_t n = F.shape[0], m = F.shape[1]
    cdef Py_ssize_t i, j
    cdef int c
    out = np.zeros(n, dtype=np.int64)
    cdef cnp.int64_t[::1] count = out
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                c = _compare(F, i, j, m)
                if c == 1:
                    count[j] += 1
                elif c == -1:
                    count[i] += 1
    return out


def crowding_distance(const double[:, ::1] F):
    cdef Py_ssize_t n = F.shape[0], m = F.shape[1]
    cdef Py_ssize_t i, k
    cdef double span
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] dist = out
    cdef cnp.intp_t[::1] order
    if n <= 2:
        out[:] = INFINITY
        return out
    arr = np.asarray(F)
    for k in range(m):
        order = np.argsort(arr[:, k], kind="stable")
        span = F[order[n - 1], k] - F[order[0], k]
        if span <= 0.0:
            continue
        for i in range(1, n - 1):
            dist[order[i]] += (F[order[i + 1], k] - F[order[i - 1], k]) / span
        dist[order[0]] = INFINITY
        dist[order[n - 1]] = INFINITY
    return out
