# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: survival sampling counts and set-partition enumeration."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def count_k_of_n(const double[:, ::1] draws, const double[::1] p,
                 const cnp.int64_t[::1] group, const cnp.int64_t[::1] req):
    cdef Py_ssize_t m = draws.shape[0], n = draws.shape[1], G = req.shape[0]
    cdef Py_ssize_t t, i, g
    cdef long long hits = 0
    cdef cnp.int64_t[::1] alive = np.zeros(G, dtype=np.int64)
    cdef bint ok
    for t in range(m):
        for g in range(G):
            alive[g] = 0
        for i in range(n):
            if draws[t, i] < p[i]:
                alive[group[i]] += 1
        ok = True
        for g in range(G):
            if alive[g] < req[g]:
                ok = False
                break
        if ok:
            hits += 1
    return hits


def count_blocks(const double[:, ::1] draws, const double[::1] p,
                 const cnp.int64_t[::1] group, const cnp.int64_t[::1] req):
    cdef Py_ssize_t m = draws.shape[0], n = draws.shape[1], G = req.shape[0]
    cdef Py_ssize_t t, i, g
    cdef long long hits = 0
    cdef cnp.int64_t[::1] size = np.zeros(G, dtype=np.int64)
    cdef cnp.int64_t[::1] run = np.zeros(G, dtype=np.int64)
    cdef cnp.int64_t[::1] good = np.zeros(G, dtype=np.int64)
    # per instance: 0 = outside any complete block, 1 = first of a block, 2 = inside
    cdef cnp.int8_t[::1] role = np.zeros(n, dtype=np.int8)
    cdef cnp.int64_t k
    cdef bint ok
    for i in range(n):
        size[group[i]] += 1
    for g in range(G):
        if size[g] // req[g] == 0:
            return 0
    for g in range(G):
        size[g] = 0
    for i in range(n):
        g = group[i]
        k = size[g]
        size[g] += 1
        role[i] = 0
        if k < (_count(group, g) // req[g]) * req[g]:
            role[i] = 1 if k % req[g] == 0 else 2
    for t in range(m):
        for g in range(G):
            run[g] = 0
            good[g] = 0
        for i in range(n):
            if role[i] == 0:
                continue
            g = group[i]
            if role[i] == 1:
                run[g] = 0
            if draws[t, i] < p[i]:
                run[g] += 1
                if run[g] == req[g]:
                    good[g] = 1
        ok = True
        for g in range(G):
            if not good[g]:
                ok = False
                break
        if ok:
            hits += 1
    return hits


cdef Py_ssize_t _count(const cnp.int64_t[::1] group, Py_ssize_t g):
    cdef Py_ssize_t i, c = 0
    for i in range(group.shape[0]):
        if group[i] == g:
            c += 1
    return c


def restricted_growth_strings(int n):
    if n == 0:
        return np.zeros((1, 0), dtype=np.int8)
    # Bell number via the Bell triangle
    cdef list row = [1]
    cdef int k
    for k in range(n - 1):
        nxt = [row[len(row) - 1]]
        for v in row:
            nxt.append(nxt[len(nxt) - 1] + v)
        row = nxt
    cdef Py_ssize_t total = row[len(row) - 1]
    out_arr = np.zeros((total, n), dtype=np.int8)
    cdef cnp.int8_t[:, ::1] out = out_arr
    cdef cnp.int8_t[::1] a = np.zeros(n, dtype=np.int8)
    cdef cnp.int8_t[::1] top = np.zeros(n, dtype=np.int8)  # top[i] = blocks opened in a[:i+1]
    cdef Py_ssize_t r = 0, i, j
    top[0] = 1
    for i in range(1, n):
        top[i] = 1
    while True:
        for j in range(n):
            out[r, j] = a[j]
        r += 1
        # next string in lexicographic order
        i = n - 1
        while i >= 1 and a[i] == top[i - 1]:
            i -= 1
        if i < 1:
            break
        a[i] += 1
        top[i] = top[i - 1] if top[i - 1] > a[i] + 1 else a[i] + 1
        for j in range(i + 1, n):
            a[j] = 0
            top[j] = top[i]
    return out_arr
