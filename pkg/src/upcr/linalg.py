"""Small dense linear-algebra layer used by the estimator.

Covariance formation and least squares delegate to numpy (BLAS/LAPACK);
the symmetric eigendecomposition runs on the package's own cyclic Jacobi
kernel so results are deterministic for a given input and identical
across the compiled and pure-Python backends up to floating-point
round-off of the same rotation sequence.
"""
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InputError, NumericalError

# Eigenvectors are accepted as orthonormal within these bounds.
_UNIT_NORM_TOL = 1e-12
_ORTHO_TOL = 1e-10


@dataclass(frozen=True)
class SymMatrix:
    """Square symmetric matrix with symmetry enforced at construction.

    The stored array is rebuilt from the upper triangle, so
    entries[i, j] == entries[j, i] holds exactly regardless of
    round-off in the caller's arithmetic.  Construction rejects input
    whose asymmetry exceeds floating-point noise.
    """

    entries: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InputError(f"symmetric matrix must be square, got shape {arr.shape}")
        if arr.shape[0] < 1:
            raise InputError("symmetric matrix must have dimension >= 1")
        if not np.all(np.isfinite(arr)):
            raise InputError("symmetric matrix entries must be finite")
        scale = float(np.max(np.abs(arr))) if arr.size else 0.0
        asym = float(np.max(np.abs(arr - arr.T))) if arr.size else 0.0
        if asym > 1e-12 * max(scale, 1.0):
            raise InputError(f"matrix is not symmetric: max |A - A^T| = {asym:g}")
        upper = np.triu(arr)
        sym = upper + np.triu(arr, k=1).T
        sym.setflags(write=False)
        object.__setattr__(self, "entries", sym)

    @property
    def dim(self):
        return self.entries.shape[0]

    def trace(self):
        return float(np.trace(self.entries))


@dataclass(frozen=True)
class EigenPairs:
    """Leading eigenvalues (non-increasing) with matching eigenvectors.

    vectors[k] is the unit-norm eigenvector for values[k].  Sign is
    normalized so each vector's entries sum to a positive number; on an
    exactly zero sum, the first nonzero entry is positive.
    """

    values: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        vecs = np.asarray(self.vectors, dtype=np.float64)
        if vals.ndim != 1 or vecs.ndim != 2 or vecs.shape[0] != vals.shape[0]:
            raise InputError("eigenpairs require k values and a (k, m) vector block")
        if np.any(np.diff(vals) > 0):
            raise InputError("eigenvalues must be non-increasing")
        norms = np.linalg.norm(vecs, axis=1)
        if np.any(np.abs(norms - 1.0) > _UNIT_NORM_TOL):
            raise InputError("eigenvectors must have unit norm")
        gram = vecs @ vecs.T
        np.fill_diagonal(gram, 0.0)
        if gram.size and np.max(np.abs(gram)) > _ORTHO_TOL:
            raise InputError("eigenvectors must be pairwise orthogonal")
        vals = vals.copy()
        vecs = vecs.copy()
        vals.setflags(write=False)
        vecs.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "vectors", vecs)

    @property
    def count(self):
        return self.values.shape[0]


@dataclass(frozen=True)
class LeastSquaresResult:
    """Minimum-norm least-squares solution with rank diagnostics."""

    x: np.ndarray
    rank: int
    rank_deficient: bool


def _fix_sign(vec):
    s = float(vec.sum())
    if s < 0.0:
        return -vec
    if s == 0.0:
        nz = np.nonzero(vec)[0]
        if nz.size and vec[nz[0]] < 0.0:
            return -vec
    return vec


def sample_covariance(z):
    """Covariance of pre-centered rows, normalized by the sample count.

    Parameters
    ----------
    z : (m, n) array_like
        Each row is one variable over n samples and must already be
        centered: the row mean may deviate from zero only by
        floating-point noise (1e-8 relative to the row's magnitude).

    Returns
    -------
    SymMatrix
        z @ z.T / n, symmetrized by construction.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 2:
        raise InputError(f"prediction block must be 2-d, got shape {z.shape}")
    m, n = z.shape
    if n < 2:
        raise InputError(f"covariance needs at least 2 samples, got {n}")
    if not np.all(np.isfinite(z)):
        raise InputError("covariance input must be finite")
    means = z.mean(axis=1)
    scales = np.maximum(np.abs(z).max(axis=1, initial=0.0), 1.0)
    bad = np.nonzero(np.abs(means) > 1e-8 * scales)[0]
    if bad.size:
        i = int(bad[0])
        raise InputError(
            f"row {i} is not centered: mean {means[i]:g} exceeds tolerance"
        )
    c = z @ z.T / n
    upper = np.triu(c)
    return SymMatrix(upper + np.triu(c, k=1).T)


def top_eigenpairs(s, k):
    """Leading k eigenpairs of a symmetric matrix via cyclic Jacobi.

    Deterministic: fixed input yields a fixed rotation sequence, hence
    bitwise-identical output on repeat calls with the same backend.
    """
    if not isinstance(s, SymMatrix):
        s = SymMatrix(np.asarray(s))
    if not 1 <= k <= s.dim:
        raise InputError(f"k must be in [1, {s.dim}], got {k}")
    raw_vals, raw_vecs = _kernels.jacobi_eigh(s.entries)
    order = np.argsort(-raw_vals, kind="stable")
    vals = raw_vals[order][:k]
    vecs = raw_vecs[:, order][:, :k].T.copy()
    for i in range(k):
        vecs[i] = _fix_sign(vecs[i])
    return EigenPairs(vals, vecs)


def least_squares(a, b):
    """Minimum-norm least-squares solution of a x ~= b.

    Parameters
    ----------
    a : (p, r) array_like with p >= r
    b : (p,) array_like

    Returns
    -------
    LeastSquaresResult
        x minimizes ||a x - b||_2; among minimizers the one of smallest
        norm is returned.  rank_deficient is True when rank(a) < r.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2:
        raise InputError(f"design matrix must be 2-d, got shape {a.shape}")
    p, r = a.shape
    if b.shape != (p,):
        raise InputError(f"rhs shape {b.shape} does not match design rows {p}")
    if p < r:
        raise InputError(f"system must not be underdetermined: {p} rows < {r} unknowns")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise InputError("least-squares input must be finite")
    try:
        x, _, rank, _ = np.linalg.lstsq(a, b, rcond=None)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"least-squares solve failed: {exc}") from exc
    return LeastSquaresResult(x=x, rank=int(rank), rank_deficient=int(rank) < r)
