# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled ordered tree edit distance (Zhang-Shasha), unit costs.

Same contract as the pure-Python fallback in ``_ted_py``: flattened postorder
labels, leftmost-leaf-descendant indices, and keyroots for both trees; insert
and delete cost 1, relabel 1 when labels differ.
"""

import numpy as np


def ted_distance(labels1, lmld1, keyroots1, labels2, lmld2, keyroots2):
    cdef int[::1] l1 = np.ascontiguousarray(labels1, dtype=np.intc)
    cdef int[::1] d1 = np.ascontiguousarray(lmld1, dtype=np.intc)
    cdef int[::1] k1 = np.ascontiguousarray(keyroots1, dtype=np.intc)
    cdef int[::1] l2 = np.ascontiguousarray(labels2, dtype=np.intc)
    cdef int[::1] d2 = np.ascontiguousarray(lmld2, dtype=np.intc)
    cdef int[::1] k2 = np.ascontiguousarray(keyroots2, dtype=np.intc)
    cdef int n1 = l1.shape[0]
    cdef int n2 = l2.shape[0]
    if n1 == 0 or n2 == 0:
        return n1 + n2
    td_arr = np.zeros((n1, n2), dtype=np.intc)
    fd_arr = np.zeros((n1 + 1, n2 + 1), dtype=np.intc)
    cdef int[:, ::1] td = td_arr
    cdef int[:, ::1] fd = fd_arr
    _fill(l1, d1, k1, l2, d2, k2, td, fd)
    return int(td[n1 - 1, n2 - 1])


cdef void _fill(int[::1] labels1, int[::1] lmld1, int[::1] keyroots1,
                int[::1] labels2, int[::1] lmld2, int[::1] keyroots2,
                int[:, ::1] td, int[:, ::1] fd) nogil:
    cdef int a, b, x, y, lx, ly, m, n, ioff, joff
    cdef int i, j, li, cost, best, alt, p, q
    for a in range(keyroots1.shape[0]):
        x = keyroots1[a]
        lx = lmld1[x]
        m = x - lx + 2
        ioff = lx - 1
        for b in range(keyroots2.shape[0]):
            y = keyroots2[b]
            ly = lmld2[y]
            n = y - ly + 2
            joff = ly - 1

            fd[0, 0] = 0
            for i in range(1, m):
                fd[i, 0] = fd[i - 1, 0] + 1
            for j in range(1, n):
                fd[0, j] = fd[0, j - 1] + 1

            for i in range(1, m):
                li = lmld1[i + ioff]
                for j in range(1, n):
                    if li == lx and lmld2[j + joff] == ly:
                        cost = 0 if labels1[i + ioff] == labels2[j + joff] else 1
                        best = fd[i - 1, j] + 1
                        alt = fd[i, j - 1] + 1
                        if alt < best:
                            best = alt
                        alt = fd[i - 1, j - 1] + cost
                        if alt < best:
                            best = alt
                        fd[i, j] = best
                        td[i + ioff, j + joff] = best
                    else:
                        p = li - 1 - ioff
                        q = lmld2[j + joff] - 1 - joff
                        best = fd[i - 1, j] + 1
                        alt = fd[i, j - 1] + 1
                        if alt < best:
                            best = alt
                        alt = fd[p, q] + td[i + ioff, j + joff]
                        if alt < best:
                            best = alt
                        fd[i, j] = best
