"""Unsupervised accuracy estimation and ensemble weighting.

Given only a prediction matrix and the first two response moments, the
pipeline estimates each regressor's correlation with the response from
the additive off-diagonal structure of the prediction covariance,
resolves the unidentified signal-variance shift by picking the point
where the correlation vector is most collinear with the leading
covariance eigenvector, prunes weak experts, and combines the survivors
with principal-component regression weights.
"""
from dataclasses import dataclass

import numpy as np

from .errors import InputError, NumericalError
from .linalg import EigenPairs, SymMatrix, least_squares, sample_covariance, top_eigenpairs
from .model import (
    DIFFICULTY_HARD,
    DIFFICULTY_TRACTABLE,
    LOSS_ABSOLUTE,
    LOSS_SQUARED,
    CenteredData,
    FittedEnsemble,
    PipelineConfig,
    PredictionMatrix,
    ResponseMoments,
    RhoFamily,
)

# A residual-curve point with correlation norm below this is uninformative.
_DEGENERATE_RHO_NORM = 1e-12
# A curve whose informative points all fall below this is flat collinear.
_COLLINEAR_RES = 1e-10

_IRLS_MAX_ITER = 100
_IRLS_REL_TOL = 1e-10


def center_predictions(preds, moments):
    """Remove each regressor's own sample mean.

    The removed mean doubles as a bias estimate against mean_y, so a
    systematically offset regressor is re-usable after centering.
    """
    if not isinstance(preds, PredictionMatrix):
        raise InputError("center_predictions expects a PredictionMatrix")
    if not isinstance(moments, ResponseMoments):
        raise InputError("center_predictions expects ResponseMoments")
    means = preds.values.mean(axis=1)
    z = preds.values - means[:, None]
    return CenteredData(z=z, regressor_means=means, bias_estimates=means - moments.mean_y)


def _pair_indices(m):
    return np.triu_indices(m, k=1)


def fit_additive_offsets(c_hat, q, loss=LOSS_SQUARED):
    """Fit offsets a with C_ij ~= q + a_i + a_j over all pairs i < j.

    Parameters
    ----------
    c_hat : SymMatrix, dim >= 3
        Sample covariance of centered predictions.  Only off-diagonal
        entries enter the fit.
    q : float
        Candidate common covariance level (signal-variance surrogate).
    loss : {"squared", "absolute"}
        Squared loss has a closed-form normal-equation solution;
        absolute loss is solved by smoothed iteratively reweighted
        least squares started from the squared solution.

    Returns
    -------
    (m,) ndarray of offsets.
    """
    if not isinstance(c_hat, SymMatrix):
        raise InputError("fit_additive_offsets expects a SymMatrix")
    m = c_hat.dim
    if m < 3:
        raise InputError(f"additive fit needs at least 3 regressors, got {m}")
    if loss not in (LOSS_SQUARED, LOSS_ABSOLUTE):
        raise InputError(f"unknown loss {loss!r}")
    q = float(q)
    iu, ju = _pair_indices(m)
    t = c_hat.entries[iu, ju] - q

    # Normal equations (m-2) I + ones ones^T reduce to a rank-one update,
    # so the squared-loss solution is explicit.
    row_sums = c_hat.entries.sum(axis=1) - np.diag(c_hat.entries) - (m - 1) * q
    a_sq = row_sums / (m - 2) - row_sums.sum() / ((m - 2) * (2 * m - 2))
    if loss == LOSS_SQUARED:
        return a_sq

    design = np.zeros((t.shape[0], m))
    design[np.arange(t.shape[0]), iu] = 1.0
    design[np.arange(t.shape[0]), ju] = 1.0
    a = a_sq
    r = t - a[iu] - a[ju]
    scale = float(np.sqrt(np.mean(r * r)))
    # Smoothing keeps the reweighting bounded near exact fits; tying it
    # to the initial residual scale keeps the solve scale-invariant.
    delta = 1e-6 * max(scale, 1e-9 * (1.0 + float(np.max(np.abs(t), initial=0.0))))
    obj = float(np.sum(np.sqrt(r * r + delta * delta)))
    for _ in range(_IRLS_MAX_ITER):
        w = 1.0 / np.sqrt(r * r + delta * delta)
        sw = np.sqrt(w)
        a = least_squares(design * sw[:, None], t * sw).x
        r = t - a[iu] - a[ju]
        new_obj = float(np.sum(np.sqrt(r * r + delta * delta)))
        done = abs(obj - new_obj) <= _IRLS_REL_TOL * max(obj, 1e-300)
        obj = new_obj
        if done:
            break
    return a


@dataclass(frozen=True)
class ResidualCurve:
    """RES(q) samples over the clamped grid q in [0, var_y].

    res[k] measures how far the candidate correlation vector at qs[k]
    is from the span of the supplied eigenvector, normalized to [0, 1].
    Points where the candidate vector nearly vanishes are flagged
    degenerate and assigned RES = 1.  collinear is True when every
    informative point is numerically zero, i.e. the curve cannot
    identify q at all.
    """

    qs: np.ndarray
    res: np.ndarray
    degenerate: np.ndarray
    collinear: bool


def residual_curve(family, v1, grid_points=201):
    """Sample the eigenvector-alignment residual over the q grid."""
    if not isinstance(family, RhoFamily):
        raise InputError("residual_curve expects a RhoFamily")
    v1 = np.asarray(v1, dtype=np.float64)
    if v1.shape != (family.size,):
        raise InputError("eigenvector length must match the family size")
    if grid_points < 2:
        raise InputError(f"grid needs at least 2 points, got {grid_points}")
    qs = np.linspace(0.0, family.var_y, int(grid_points))
    rho = family.a0[:, None] + qs[None, :] / 2.0
    norms = np.linalg.norm(rho, axis=0)
    degenerate = norms < _DEGENERATE_RHO_NORM
    proj = v1 @ rho
    resid = rho - v1[:, None] * proj[None, :]
    res = np.ones_like(qs)
    ok = ~degenerate
    res[ok] = np.linalg.norm(resid[:, ok], axis=0) / norms[ok]
    np.clip(res, 0.0, 1.0, out=res)
    collinear = not np.any(ok) or float(res[ok].max()) < _COLLINEAR_RES
    qs.setflags(write=False)
    res.setflags(write=False)
    degenerate.setflags(write=False)
    return ResidualCurve(qs=qs, res=res, degenerate=degenerate, collinear=collinear)


@dataclass(frozen=True)
class G2Estimate:
    """Signal-variance estimate with the attained curve minimum."""

    g2_hat: float
    res_min: float
    used_lambda_fallback: bool


def estimate_g2(curve, lambda1=None, m=None):
    """Pick q minimizing RES(q); earliest grid point wins ties.

    A flat collinear curve cannot identify q; then the leading
    eigenvalue divided by the ensemble size is used instead (exact when
    all experts coincide), clamped to the grid domain.
    """
    if not isinstance(curve, ResidualCurve):
        raise InputError("estimate_g2 expects a ResidualCurve")
    informative = ~curve.degenerate
    if curve.collinear:
        if lambda1 is None or m is None:
            raise NumericalError(
                "residual curve is degenerate-collinear and no leading "
                "eigenvalue was supplied for the fallback estimate"
            )
        g2 = min(max(float(lambda1) / int(m), 0.0), float(curve.qs[-1]))
        res_min = float(curve.res[informative].min()) if np.any(informative) else 1.0
        return G2Estimate(g2_hat=g2, res_min=res_min, used_lambda_fallback=True)
    k = int(np.argmin(curve.res))
    return G2Estimate(g2_hat=float(curve.qs[k]), res_min=float(curve.res[k]),
                      used_lambda_fallback=False)


def estimate_regressor_mse(rho_hat, c_hat, moments):
    """Per-regressor MSE estimates var_y - 2 rho_i + C_ii.

    Estimates may come out negative when correlations are
    overestimated; they are returned as-is so the ranking stays
    faithful.  Use clamp_mse for display.
    """
    rho_hat = np.asarray(rho_hat, dtype=np.float64)
    if not isinstance(c_hat, SymMatrix):
        raise InputError("estimate_regressor_mse expects a SymMatrix")
    if rho_hat.shape != (c_hat.dim,):
        raise InputError("rho length must match the covariance dimension")
    return moments.var_y - 2.0 * rho_hat + np.diag(c_hat.entries)


def clamp_mse(mse_estimates):
    """Non-negative copy of MSE estimates for display."""
    return np.maximum(np.asarray(mse_estimates, dtype=np.float64), 0.0)


def prune_regressors(rho_hat, moments, config):
    """Indices surviving both correlation thresholds.

    A regressor is kept only if rho_i >= prune_abs_frac * var_y and
    rho_i >= prune_rel_frac * max_j(rho_j).  Both rules are applied
    jointly in a single pass.
    """
    rho_hat = np.asarray(rho_hat, dtype=np.float64)
    abs_thr = config.prune_abs_frac * moments.var_y
    rel_thr = config.prune_rel_frac * float(rho_hat.max())
    kept = np.nonzero((rho_hat >= abs_thr) & (rho_hat >= rel_thr))[0]
    return kept


def compute_weights(eigen, rho_hat, trace, config):
    """Principal-component regression weights for the centered combination.

    Always uses the leading eigenpair; the second is added when its
    eigenvalue exceeds two_pc_trace_frac of the covariance trace.

    Returns (weights, used_two_pcs).
    """
    if not isinstance(eigen, EigenPairs):
        raise InputError("compute_weights expects EigenPairs")
    rho_hat = np.asarray(rho_hat, dtype=np.float64)
    if rho_hat.shape != (eigen.vectors.shape[1],):
        raise InputError("rho length must match the eigenvector length")
    lam1 = float(eigen.values[0])
    if lam1 <= 1e-12 * max(float(trace), 1.0):
        raise NumericalError(
            f"leading eigenvalue {lam1:g} is too small for stable weights"
        )
    v1 = eigen.vectors[0]
    weights = (float(v1 @ rho_hat) / lam1) * v1
    used_two = False
    if eigen.count >= 2:
        lam2 = float(eigen.values[1])
        if lam2 > config.two_pc_trace_frac * float(trace):
            v2 = eigen.vectors[1]
            weights = weights + (float(v2 @ rho_hat) / lam2) * v2
            used_two = True
    return weights, used_two


@dataclass(frozen=True)
class FitDiagnostics:
    """Intermediates exposed for reporting, not needed for prediction."""

    curve: ResidualCurve
    curve_stage: str
    trace: float
    prune_abs_threshold: float | None
    prune_rel_threshold: float | None


def _hard(names, moments, g2est, eigen, rho0, mse0, means, reason):
    return FittedEnsemble(
        regressor_names=names,
        mean_y=moments.mean_y,
        var_y=moments.var_y,
        difficulty=DIFFICULTY_HARD,
        g2_hat=g2est.g2_hat,
        g2_res_min=g2est.res_min,
        g2_used_lambda_fallback=g2est.used_lambda_fallback,
        eigen=eigen,
        rho_initial=rho0,
        mse_estimates=mse0,
        regressor_means=means,
        kept=None,
        rho_hat=None,
        weights=None,
        used_two_pcs=False,
        used_fallback_average=False,
        stop_reason=reason,
    )


def upcr_fit(preds, moments, config=None):
    """Fit the unsupervised ensemble; see upcr_fit_with_diagnostics."""
    return upcr_fit_with_diagnostics(preds, moments, config)[0]


def upcr_fit_with_diagnostics(preds, moments, config=None):
    """Full fitting pipeline.

    Stages: center, covariance, leading eigenpairs, additive
    off-diagonal fit, signal-variance search on the residual curve,
    difficulty gate, joint pruning, one recompute on the survivors,
    second difficulty gate, then either principal-component weights or
    a uniform-average fallback for small ensembles.

    Returns (FittedEnsemble, FitDiagnostics).
    """
    if config is None:
        config = PipelineConfig()
    if not isinstance(preds, PredictionMatrix):
        raise InputError("upcr_fit expects a PredictionMatrix")
    if not isinstance(moments, ResponseMoments):
        raise InputError("upcr_fit expects ResponseMoments")
    m = preds.n_regressors
    if m < 3:
        raise InputError(f"the pipeline needs at least 3 regressors, got {m}")
    if preds.n_samples < 2:
        raise InputError("the pipeline needs at least 2 samples")

    names = preds.regressor_names
    centered = center_predictions(preds, moments)
    c0 = sample_covariance(centered.z)
    eig0 = top_eigenpairs(c0, 2)
    fam0 = RhoFamily(a0=fit_additive_offsets(c0, 0.0, config.loss), var_y=moments.var_y)
    curve0 = residual_curve(fam0, eig0.vectors[0], config.grid_points)
    g2est0 = estimate_g2(curve0, lambda1=eig0.values[0], m=m)
    rho0 = fam0.rho_of(g2est0.g2_hat)
    mse0 = estimate_regressor_mse(rho0, c0, moments)
    means = centered.regressor_means

    diag0 = FitDiagnostics(curve=curve0, curve_stage="initial", trace=c0.trace(),
                           prune_abs_threshold=None, prune_rel_threshold=None)
    if g2est0.g2_hat < config.eps_l * moments.var_y:
        fit = _hard(names, moments, g2est0, eig0, rho0, mse0, means,
                    "signal variance below threshold before pruning")
        return fit, diag0

    abs_thr = config.prune_abs_frac * moments.var_y
    rel_thr = config.prune_rel_frac * float(rho0.max())
    kept = prune_regressors(rho0, moments, config)
    diag0 = FitDiagnostics(curve=curve0, curve_stage="initial", trace=c0.trace(),
                           prune_abs_threshold=abs_thr, prune_rel_threshold=rel_thr)
    if kept.size == 0:
        fit = _hard(names, moments, g2est0, eig0, rho0, mse0, means,
                    "no regressor survived pruning")
        return fit, diag0

    base = dict(
        regressor_names=names,
        mean_y=moments.mean_y,
        var_y=moments.var_y,
        difficulty=DIFFICULTY_TRACTABLE,
        rho_initial=rho0,
        mse_estimates=mse0,
        regressor_means=means,
        kept=tuple(int(i) for i in kept),
        stop_reason=None,
    )

    if kept.size < 3:
        # Too few survivors to refit the additive structure; keep the
        # pre-pruning estimates and average the survivors.
        c1 = sample_covariance(centered.z[kept])
        eig1 = top_eigenpairs(c1, min(2, int(kept.size)))
        fit = FittedEnsemble(
            g2_hat=g2est0.g2_hat,
            g2_res_min=g2est0.res_min,
            g2_used_lambda_fallback=g2est0.used_lambda_fallback,
            eigen=eig1,
            rho_hat=rho0[kept],
            weights=np.full(kept.size, 1.0 / kept.size),
            used_two_pcs=False,
            used_fallback_average=True,
            **base,
        )
        diag = FitDiagnostics(curve=curve0, curve_stage="initial", trace=c1.trace(),
                              prune_abs_threshold=abs_thr, prune_rel_threshold=rel_thr)
        return fit, diag

    c1 = sample_covariance(centered.z[kept])
    eig1 = top_eigenpairs(c1, 2)
    fam1 = RhoFamily(a0=fit_additive_offsets(c1, 0.0, config.loss), var_y=moments.var_y)
    curve1 = residual_curve(fam1, eig1.vectors[0], config.grid_points)
    g2est1 = estimate_g2(curve1, lambda1=eig1.values[0], m=int(kept.size))
    diag = FitDiagnostics(curve=curve1, curve_stage="after_pruning", trace=c1.trace(),
                          prune_abs_threshold=abs_thr, prune_rel_threshold=rel_thr)
    if g2est1.g2_hat < config.eps_l * moments.var_y:
        fit = _hard(names, moments, g2est1, eig1, rho0, mse0, means,
                    "signal variance below threshold after pruning")
        return fit, diag

    rho1 = fam1.rho_of(g2est1.g2_hat)
    if kept.size <= config.min_ensemble_size - 1:
        weights = np.full(kept.size, 1.0 / kept.size)
        used_two = False
        fallback = True
    else:
        weights, used_two = compute_weights(eig1, rho1, c1.trace(), config)
        fallback = False
    fit = FittedEnsemble(
        g2_hat=g2est1.g2_hat,
        g2_res_min=g2est1.res_min,
        g2_used_lambda_fallback=g2est1.used_lambda_fallback,
        eigen=eig1,
        rho_hat=rho1,
        weights=weights,
        used_two_pcs=used_two,
        used_fallback_average=fallback,
        **base,
    )
    return fit, diag


def predict(fit, preds):
    """Combine predictions with a fitted ensemble, joining rows by name.

    Each kept regressor is re-centered with its training mean, weighted
    and shifted back to the response mean.
    """
    if not isinstance(fit, FittedEnsemble):
        raise InputError("predict expects a FittedEnsemble")
    if not isinstance(preds, PredictionMatrix):
        raise InputError("predict expects a PredictionMatrix")
    if fit.difficulty != DIFFICULTY_TRACTABLE:
        raise InputError("cannot predict with a hard-verdict model")
    missing = [fit.regressor_names[i] for i in fit.kept
               if fit.regressor_names[i] not in preds.regressor_names]
    if missing:
        raise InputError(f"prediction matrix is missing regressors: {missing}")
    out = np.full(preds.n_samples, fit.mean_y)
    for w, i in zip(fit.weights, fit.kept):
        name = fit.regressor_names[i]
        out = out + w * (preds.row(name) - fit.regressor_means[i])
    return out
