# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Cyclic Jacobi eigendecomposition, compiled kernel.

Algorithm and stopping rule are identical to the pure-Python twin in
_jacobi_py.py; only the execution speed differs.
"""
from libc.math cimport sqrt

import numpy as np


def jacobi_eigh(a_in, int max_sweeps=60, double rel_tol=1e-15):
    """Diagonalize a symmetric matrix with cyclic Jacobi rotations.

    Returns (values, vectors) with eigenvalues unordered and eigenvectors
    as the columns of ``vectors``.
    """
    a_arr = np.array(a_in, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t n = a_arr.shape[0]
    v_arr = np.eye(n, dtype=np.float64)
    cdef double[:, ::1] a = a_arr
    cdef double[:, ::1] v = v_arr
    cdef Py_ssize_t p, q, k, sweep
    cdef double anorm, off, apq, app, aqq, tau, t, c, s
    cdef double akp, akq, vkp, vkq

    anorm = 0.0
    for p in range(n):
        for q in range(n):
            anorm += a[p, q] * a[p, q]
    anorm = sqrt(anorm)

    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += a[p, q] * a[p, q]
        off = sqrt(2.0 * off)
        if off == 0.0 or off <= rel_tol * anorm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                tau = (aqq - app) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + sqrt(1.0 + tau * tau))
                c = 1.0 / sqrt(1.0 + t * t)
                s = t * c
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(n):
                    if k == p or k == q:
                        continue
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[p, k] = a[k, p]
                    a[k, q] = s * akp + c * akq
                    a[q, k] = a[k, q]
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq

    values = np.empty(n, dtype=np.float64)
    for p in range(n):
        values[p] = a[p, p]
    return values, v_arr
