# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled discrete-time step kernel.

Bit-identical to the NumPy fallback: each cell consumes its own uniform from
the caller-supplied array, and nodes outside the array count as never
infected.
"""

import numpy as np

cimport numpy as cnp

BACKEND = "cython"


def step_kernel(cnp.uint8_t[:, ::1] state, double[:, ::1] u, double[::1] p_dt,
                double[::1] ql_dt, double[::1] qr_dt, double[::1] r_dt):
    """Advance every replication by one time step, in place."""
    cdef Py_ssize_t m = state.shape[0]
    cdef Py_ssize_t n = state.shape[1]
    cdef Py_ssize_t i, j
    cdef cnp.uint8_t cur, left_old
    cdef double prob

    for i in range(m):
        left_old = 0
        for j in range(n):
            cur = state[i, j]
            if cur == 0:
                prob = p_dt[j]
                if j > 0 and left_old == 1:
                    prob = prob + ql_dt[j]
                if j + 1 < n and state[i, j + 1] == 1:
                    prob = prob + qr_dt[j]
                if u[i, j] < prob:
                    state[i, j] = 1
            elif cur == 1:
                if u[i, j] < r_dt[j]:
                    state[i, j] = 2
            left_old = cur
