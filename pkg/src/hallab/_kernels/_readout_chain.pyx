# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of readout_chain_py.simulate_chain.

Consumes the same pre-drawn uniform matrices in the same order as the NumPy
fallback, so both implementations are bit-identical for a given seed.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def simulate_chain(pi_flags, double p_pi, double eps, double leak,
                   double leaked_bias, flip_u, assign_u, leak_u, leaked_u):
    cdef cnp.uint8_t[::1] flags = np.ascontiguousarray(pi_flags, dtype=np.uint8)
    cdef double[:, ::1] fu = np.ascontiguousarray(flip_u)
    cdef double[:, ::1] au = np.ascontiguousarray(assign_u)
    cdef double[:, ::1] lu = np.ascontiguousarray(leak_u)
    cdef double[:, ::1] xu = np.ascontiguousarray(leaked_u)

    cdef Py_ssize_t n = flags.shape[0]
    cdef Py_ssize_t shots = au.shape[0]
    bits_arr = np.empty((shots, n + 1), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] bits = bits_arr

    cdef Py_ssize_t i, j
    cdef int state
    cdef cnp.uint8_t bit
    for i in range(shots):
        state = 0
        for j in range(n + 1):
            if j > 0 and flags[j - 1] and state < 2:
                if fu[i, j - 1] >= p_pi:
                    state ^= 1
            if state < 2:
                bit = <cnp.uint8_t>(state == 1)
                if au[i, j] < eps:
                    bit ^= 1
                bits[i, j] = bit
                if lu[i, j] < leak:
                    state = 2
            else:
                bits[i, j] = <cnp.uint8_t>(xu[i, j] < leaked_bias)
    return bits_arr
