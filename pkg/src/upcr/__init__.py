"""Unsupervised ensemble regression.

Estimates regressor accuracies from a prediction matrix and the first
two response moments alone, prunes weak experts and combines the rest
with principal-component regression weights.
"""
from ._kernels import backend_name
from .baselines import (
    EvalResult,
    OracleWeights,
    difficulty_band,
    ensemble_mean,
    ensemble_median,
    evaluate,
    gem_weights,
    misfit_covariance,
    oracle_weights,
)
from .errors import InputError, NumericalError, UpcrError
from .estimator import (
    FitDiagnostics,
    G2Estimate,
    ResidualCurve,
    center_predictions,
    clamp_mse,
    compute_weights,
    estimate_g2,
    estimate_regressor_mse,
    fit_additive_offsets,
    predict,
    prune_regressors,
    residual_curve,
    upcr_fit,
    upcr_fit_with_diagnostics,
)
from .linalg import (
    EigenPairs,
    LeastSquaresResult,
    SymMatrix,
    least_squares,
    sample_covariance,
    top_eigenpairs,
)
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
from .synth import (
    Lemma2Report,
    SignalSpec,
    SyntheticEnsembleSpec,
    SyntheticTruth,
    generate,
    population_covariance,
    signal_moments,
    verify_lemma2,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "backend_name",
    "CenteredData",
    "DIFFICULTY_HARD",
    "DIFFICULTY_TRACTABLE",
    "EigenPairs",
    "EvalResult",
    "FitDiagnostics",
    "FittedEnsemble",
    "G2Estimate",
    "InputError",
    "LOSS_ABSOLUTE",
    "LOSS_SQUARED",
    "LeastSquaresResult",
    "Lemma2Report",
    "NumericalError",
    "OracleWeights",
    "PipelineConfig",
    "PredictionMatrix",
    "ResidualCurve",
    "ResponseMoments",
    "RhoFamily",
    "SignalSpec",
    "SymMatrix",
    "SyntheticEnsembleSpec",
    "SyntheticTruth",
    "UpcrError",
    "center_predictions",
    "clamp_mse",
    "compute_weights",
    "difficulty_band",
    "ensemble_mean",
    "ensemble_median",
    "estimate_g2",
    "estimate_regressor_mse",
    "evaluate",
    "fit_additive_offsets",
    "gem_weights",
    "generate",
    "least_squares",
    "misfit_covariance",
    "oracle_weights",
    "population_covariance",
    "predict",
    "prune_regressors",
    "residual_curve",
    "sample_covariance",
    "signal_moments",
    "top_eigenpairs",
    "upcr_fit",
    "upcr_fit_with_diagnostics",
    "verify_lemma2",
]
