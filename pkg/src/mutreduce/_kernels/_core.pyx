# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled reduction kernel: first-killer selection and kill counting.

Semantics are fixed by mutreduce._kernels.pure; this file only exists to
make the per-evaluation inner loop cheap. Typed memoryviews only, no
numpy C API.
"""

import numpy as np


def select_and_count(int[:] mprime,
                     long long[:] killer_indptr,
                     int[:] killer_tests,
                     long long[:] test_indptr,
                     int[:] test_mutants,
                     Py_ssize_t n_tests,
                     Py_ssize_t n_mutants):
    selected_mask = np.zeros(n_tests, dtype=np.uint8)
    killed_mask = np.zeros(n_mutants, dtype=np.uint8)
    cdef unsigned char[:] sel = selected_mask
    cdef unsigned char[:] dead = killed_mask
    cdef Py_ssize_t i, j, t
    cdef long long m, k
    cdef Py_ssize_t n_selected = 0
    cdef long long killed = 0

    for i in range(mprime.shape[0]):
        m = mprime[i]
        if killer_indptr[m] < killer_indptr[m + 1]:
            t = killer_tests[killer_indptr[m]]
            if sel[t] == 0:
                sel[t] = 1
                n_selected += 1

    out = np.empty(n_selected, dtype=np.int32)
    cdef int[:] out_view = out
    j = 0
    for t in range(n_tests):
        if sel[t]:
            out_view[j] = <int> t
            j += 1
            for k in range(test_indptr[t], test_indptr[t + 1]):
                m = test_mutants[k]
                if dead[m] == 0:
                    dead[m] = 1
                    killed += 1
    return out, int(killed)
