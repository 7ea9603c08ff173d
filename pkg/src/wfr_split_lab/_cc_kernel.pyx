# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled flux-update kernel: C loop twin of ``_kernels_py.advance_flux``."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def advance_flux(values, b_plus, b_minus, double r, long n_substeps):
    """Advance a field by ``n_substeps`` explicit zero-flux updates."""
    v_arr = np.array(values, dtype=np.float64)
    cdef double[::1] v = v_arr
    cdef const double[::1] bp = np.ascontiguousarray(b_plus, dtype=np.float64)
    cdef const double[::1] bm = np.ascontiguousarray(b_minus, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0]
    cdef double[::1] flux = np.empty(n - 1, dtype=np.float64)
    cdef Py_ssize_t i, j
    cdef long step
    for step in range(n_substeps):
        for j in range(n - 1):
            flux[j] = bp[j] * v[j + 1] - bm[j] * v[j]
        v[0] += r * flux[0]
        for i in range(1, n - 1):
            v[i] += r * (flux[i] - flux[i - 1])
        v[n - 1] -= r * flux[n - 2]
    return v_arr
