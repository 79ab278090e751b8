"""Cyclic Jacobi eigendecomposition, pure-Python reference implementation.

Same algorithm as the compiled twin in _jacobi_cy.pyx: row-cyclic sweeps of
two-sided Givens rotations until the off-diagonal Frobenius mass falls below
rel_tol times the Frobenius norm of the input.  Works on plain lists of
floats internally; the compiled module is preferred at import time when
available.
"""
import math

import numpy as np


def jacobi_eigh(a_in, max_sweeps=60, rel_tol=1e-15):
    """Diagonalize a symmetric matrix with cyclic Jacobi rotations.

    Parameters
    ----------
    a_in : (n, n) array_like, symmetric
    max_sweeps : int
        Upper bound on full row-cyclic sweeps.
    rel_tol : float
        Stop once sqrt(2 * sum_{p<q} A_pq^2) <= rel_tol * ||A||_F.

    Returns
    -------
    values : (n,) ndarray
        Eigenvalues in no particular order.
    vectors : (n, n) ndarray
        Orthonormal eigenvectors as columns, matching ``values``.
    """
    arr = np.array(a_in, dtype=np.float64, copy=True)
    n = arr.shape[0]
    a = [list(map(float, row)) for row in arr]
    v = [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]

    anorm = math.sqrt(sum(a[p][q] * a[p][q] for p in range(n) for q in range(n)))
    for _ in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            row = a[p]
            for q in range(p + 1, n):
                off += row[q] * row[q]
        off = math.sqrt(2.0 * off)
        if off == 0.0 or off <= rel_tol * anorm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                if apq == 0.0:
                    continue
                app = a[p][p]
                aqq = a[q][q]
                tau = (aqq - app) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                a[p][p] = app - t * apq
                a[q][q] = aqq + t * apq
                a[p][q] = 0.0
                a[q][p] = 0.0
                for k in range(n):
                    if k == p or k == q:
                        continue
                    akp = a[k][p]
                    akq = a[k][q]
                    a[k][p] = c * akp - s * akq
                    a[p][k] = a[k][p]
                    a[k][q] = s * akp + c * akq
                    a[q][k] = a[k][q]
                for k in range(n):
                    vkp = v[k][p]
                    vkq = v[k][q]
                    v[k][p] = c * vkp - s * vkq
                    v[k][q] = s * vkp + c * vkq

    values = np.array([a[i][i] for i in range(n)], dtype=np.float64)
    vectors = np.array(v, dtype=np.float64)
    return values, vectors
