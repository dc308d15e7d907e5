# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels; see ``_purepy`` for the reference."""

from cpython.tuple cimport PyTuple_New, PyTuple_SET_ITEM
from cpython.ref cimport Py_INCREF
from libc.math cimport sqrt

import numpy as np

cdef enum:
    MAXB = 16

MAX_BOSONS = MAXB

cdef double SQRT_FACT[MAXB + 1]


cdef void _init_table():
    cdef int k
    cdef double f = 1.0
    SQRT_FACT[0] = 1.0
    for k in range(1, MAXB + 1):
        f *= k
        SQRT_FACT[k] = sqrt(f)


_init_table()


cdef inline double _norm_sorted(long long* keys, int k):
    cdef double norm = 1.0
    cdef int run = 1
    cdef int i
    if k == 0:
        return 1.0
    for i in range(1, k):
        if keys[i] == keys[i - 1]:
            run += 1
        else:
            norm *= SQRT_FACT[run]
            run = 1
    return norm * SQRT_FACT[run]


cdef inline tuple _as_tuple(long long* keys, int k):
    cdef tuple t = PyTuple_New(k)
    cdef int i
    cdef object item
    for i in range(k):
        item = keys[i]
        Py_INCREF(item)
        PyTuple_SET_ITEM(t, i, item)
    return t


def apply_linear(dict terms, const long long[::1] indptr,
                 const long long[::1] indices,
                 const double complex[::1] data, double prune):
    cdef dict out = {}
    cdef long long inkey[MAXB]
    cdef long long rows[MAXB]
    cdef long long cur[MAXB]
    cdef long long lo[MAXB]
    cdef long long hi[MAXB]
    cdef int k, i, j
    cdef long long m, tmp
    cdef double complex coeff, value
    cdef bint empty
    cdef tuple new

    for key, amp in terms.items():
        k = len(key)
        if k > MAXB:
            raise ValueError(f"at most {MAXB} bosons per term")
        empty = False
        for i in range(k):
            m = key[i]
            inkey[i] = m
            lo[i] = indptr[m]
            hi[i] = indptr[m + 1]
            cur[i] = lo[i]
            if lo[i] == hi[i]:
                empty = True
        if empty:
            continue
        coeff = <double complex>amp / _norm_sorted(inkey, k)
        while True:
            value = coeff
            for i in range(k):
                value = value * data[cur[i]]
                rows[i] = indices[cur[i]]
            # insertion sort, k is tiny
            for i in range(1, k):
                tmp = rows[i]
                j = i - 1
                while j >= 0 and rows[j] > tmp:
                    rows[j + 1] = rows[j]
                    j -= 1
                rows[j + 1] = tmp
            value = value * _norm_sorted(rows, k)
            new = _as_tuple(rows, k)
            prev = out.get(new)
            if prev is None:
                out[new] = value
            else:
                out[new] = <double complex>prev + value
            # mixed-radix increment, last digit fastest
            i = k - 1
            while i >= 0:
                cur[i] += 1
                if cur[i] < hi[i]:
                    break
                cur[i] = lo[i]
                i -= 1
            if i < 0:
                break
    return {key: val for key, val in out.items() if abs(val) >= prune}


def permanent(a):
    cdef double complex[:, ::1] mat = np.ascontiguousarray(a, dtype=complex)
    cdef Py_ssize_t n = mat.shape[0]
    if mat.shape[1] != n:
        raise ValueError("permanent needs a square matrix")
    if n == 0:
        return 1.0 + 0j
    if n > 62:
        raise ValueError("matrix too large for subset enumeration")
    cdef double complex[::1] row_sums = np.zeros(n, dtype=complex)
    cdef double complex total = 0
    cdef double complex prod
    cdef unsigned long long gray = 0
    cdef unsigned long long k, limit = 1ULL << n
    cdef int j, bits = 0
    cdef Py_ssize_t i
    for k in range(1, limit):
        j = 0
        while not (k >> j) & 1:
            j += 1
        gray ^= 1ULL << j
        if (gray >> j) & 1:
            bits += 1
            for i in range(n):
                row_sums[i] = row_sums[i] + mat[i, j]
        else:
            bits -= 1
            for i in range(n):
                row_sums[i] = row_sums[i] - mat[i, j]
        prod = 1
        for i in range(n):
            prod = prod * row_sums[i]
        if bits & 1:
            total = total - prod
        else:
            total = total + prod
    if n & 1:
        total = -total
    return complex(total)
