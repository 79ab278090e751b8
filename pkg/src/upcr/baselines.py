"""Reference combiners and evaluation helpers.

Everything here needs labels or is label-free but trivially simple;
these are comparison points for the unsupervised pipeline, not part of
the fitting path.
"""
from dataclasses import dataclass

import numpy as np

from .errors import InputError, NumericalError
from .linalg import SymMatrix, least_squares, top_eigenpairs
from .model import PredictionMatrix, ResponseMoments

# Normalized-MSE difficulty bands.
_EASY_MAX = 0.1
_CHALLENGING_MAX = 0.8


def ensemble_mean(preds):
    """Plain average of all regressors, sample by sample."""
    if not isinstance(preds, PredictionMatrix):
        raise InputError("ensemble_mean expects a PredictionMatrix")
    return preds.values.mean(axis=0)


def ensemble_median(preds):
    """Coordinatewise median of all regressors."""
    if not isinstance(preds, PredictionMatrix):
        raise InputError("ensemble_median expects a PredictionMatrix")
    return np.median(preds.values, axis=0)


@dataclass(frozen=True)
class OracleWeights:
    """Label-informed optimal linear weights on centered predictions."""

    weights: np.ndarray
    rank_deficient: bool


def oracle_weights(z, y, moments):
    """Best linear-in-centered-predictions weights given true labels.

    Solves min_w ||(y - mean_y) - z^T w||_2 with the minimum-norm rule
    when z z^T is singular (e.g. duplicated experts).  Evaluation-only:
    this uses the very labels the unsupervised pipeline never sees.
    """
    z = np.asarray(z, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if z.ndim != 2 or y.shape != (z.shape[1],):
        raise InputError("oracle_weights expects z (m, n) and y (n,)")
    if not isinstance(moments, ResponseMoments):
        raise InputError("oracle_weights expects ResponseMoments")
    result = least_squares(z.T, y - moments.mean_y)
    return OracleWeights(weights=result.x, rank_deficient=result.rank_deficient)


def misfit_covariance(preds, y):
    """Second-moment matrix of prediction errors, normalized by n.

    Entry (i, j) is mean over samples of (f_i - y)(f_j - y); errors are
    deliberately not centered.
    """
    if not isinstance(preds, PredictionMatrix):
        raise InputError("misfit_covariance expects a PredictionMatrix")
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (preds.n_samples,):
        raise InputError("label count must match the sample count")
    errs = preds.values - y[None, :]
    c = errs @ errs.T / preds.n_samples
    return SymMatrix(np.triu(c) + np.triu(c, k=1).T)


def gem_weights(c_star, condition_bound=1e12):
    """Generalized-ensemble weights w_i proportional to row sums of C*^-1.

    Requires the misfit matrix to be invertible within the condition
    bound; nearly identical experts make it numerically singular and
    raise instead of returning unstable weights.
    """
    if not isinstance(c_star, SymMatrix):
        raise InputError("gem_weights expects a SymMatrix")
    eigen = top_eigenpairs(c_star, c_star.dim)
    mags = np.abs(eigen.values)
    lo = float(mags.min())
    hi = float(mags.max())
    if lo == 0.0 or hi / lo > condition_bound:
        raise NumericalError(
            "misfit matrix condition number exceeds "
            f"{condition_bound:g}; weights would be unstable"
        )
    ones = np.ones(c_star.dim)
    coeff = (eigen.vectors @ ones) / eigen.values
    raw = eigen.vectors.T @ coeff
    denom = float(raw.sum())
    if abs(denom) < 1e-300:
        raise NumericalError("misfit matrix yields a vanishing weight normalizer")
    return raw / denom


def difficulty_band(normalized_mse):
    """Map normalized MSE to the easy / challenging / hard bands."""
    delta = float(normalized_mse)
    if delta <= _EASY_MAX:
        return "easy"
    if delta <= _CHALLENGING_MAX:
        return "challenging"
    return "hard"


@dataclass(frozen=True)
class EvalResult:
    """MSE of a prediction vector with its variance-normalized form."""

    mse: float
    normalized_mse: float
    band: str


def evaluate(y_hat, y, moments):
    """Score predictions against labels; normalized MSE uses var_y."""
    y_hat = np.asarray(y_hat, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if y_hat.shape != y.shape or y_hat.ndim != 1:
        raise InputError("evaluate expects matching 1-d prediction and label vectors")
    if not isinstance(moments, ResponseMoments):
        raise InputError("evaluate expects ResponseMoments")
    mse = float(np.mean((y_hat - y) ** 2))
    normalized = mse / moments.var_y
    return EvalResult(mse=mse, normalized_mse=normalized, band=difficulty_band(normalized))
