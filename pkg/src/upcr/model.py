"""Core data types: prediction matrices, response moments, fitted ensembles.

Arrays held by these types are frozen (non-writeable views) so a fitted
model cannot drift after construction.
"""
from dataclasses import dataclass, fields

import numpy as np

from .errors import InputError
from .linalg import EigenPairs

LOSS_SQUARED = "squared"
LOSS_ABSOLUTE = "absolute"
LOSSES = (LOSS_SQUARED, LOSS_ABSOLUTE)

DIFFICULTY_HARD = "hard"
DIFFICULTY_TRACTABLE = "tractable"
DIFFICULTIES = (DIFFICULTY_HARD, DIFFICULTY_TRACTABLE)


def _frozen(arr, dtype=np.float64):
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class PredictionMatrix:
    """Out-of-sample predictions of m regressors on n shared samples.

    values[i, j] is regressor i's prediction for sample j.  Names and
    sample ids are unique; all entries are finite.
    """

    regressor_names: tuple
    sample_ids: tuple
    values: np.ndarray

    def __post_init__(self):
        names = tuple(str(x) for x in self.regressor_names)
        ids = tuple(str(x) for x in self.sample_ids)
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2:
            raise InputError(f"prediction values must be 2-d, got shape {vals.shape}")
        m, n = vals.shape
        if m < 1 or n < 1:
            raise InputError("prediction matrix must be non-empty")
        if len(names) != m:
            raise InputError(f"{len(names)} regressor names for {m} rows")
        if len(ids) != n:
            raise InputError(f"{len(ids)} sample ids for {n} columns")
        if len(set(names)) != m:
            raise InputError("regressor names must be unique")
        if len(set(ids)) != n:
            raise InputError("sample ids must be unique")
        if not np.all(np.isfinite(vals)):
            i, j = np.argwhere(~np.isfinite(vals))[0]
            raise InputError(
                f"non-finite prediction for regressor {names[i]!r}, sample {ids[j]!r}"
            )
        object.__setattr__(self, "regressor_names", names)
        object.__setattr__(self, "sample_ids", ids)
        object.__setattr__(self, "values", _frozen(vals))

    @property
    def n_regressors(self):
        return self.values.shape[0]

    @property
    def n_samples(self):
        return self.values.shape[1]

    def row(self, name):
        try:
            i = self.regressor_names.index(name)
        except ValueError:
            raise InputError(f"unknown regressor name {name!r}") from None
        return self.values[i]

    def subset(self, indices):
        """New matrix keeping the given regressor rows, order preserved."""
        idx = list(indices)
        return PredictionMatrix(
            regressor_names=tuple(self.regressor_names[i] for i in idx),
            sample_ids=self.sample_ids,
            values=self.values[idx],
        )


@dataclass(frozen=True)
class ResponseMoments:
    """First two moments of the response: mean and (positive) variance."""

    mean_y: float
    var_y: float

    def __post_init__(self):
        mean_y = float(self.mean_y)
        var_y = float(self.var_y)
        if not np.isfinite(mean_y) or not np.isfinite(var_y):
            raise InputError("response moments must be finite")
        if var_y <= 0.0:
            raise InputError(f"var_y must be positive, got {var_y:g}")
        object.__setattr__(self, "mean_y", mean_y)
        object.__setattr__(self, "var_y", var_y)


@dataclass(frozen=True)
class CenteredData:
    """Per-regressor centered predictions with the removed means.

    z[i] = predictions[i] - mean(predictions[i]); bias_estimates[i] is
    the regressor's estimated systematic offset mean_i - mean_y.
    """

    z: np.ndarray
    regressor_means: np.ndarray
    bias_estimates: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.z, dtype=np.float64)
        means = np.asarray(self.regressor_means, dtype=np.float64)
        biases = np.asarray(self.bias_estimates, dtype=np.float64)
        if z.ndim != 2:
            raise InputError("centered block must be 2-d")
        m, n = z.shape
        if means.shape != (m,) or biases.shape != (m,):
            raise InputError("per-regressor vectors must match the row count")
        sums = z.sum(axis=1)
        # cancellation noise scales with the magnitude before centering,
        # so a near-constant row must be judged against its mean too
        scales = np.maximum(np.abs(z).max(axis=1, initial=0.0), np.abs(means))
        bad = np.abs(sums) > 1e-8 * n * np.maximum(scales, 1e-300)
        if np.any(bad):
            i = int(np.nonzero(bad)[0][0])
            raise InputError(f"row {i} is not centered: sum {sums[i]:g}")
        object.__setattr__(self, "z", _frozen(z))
        object.__setattr__(self, "regressor_means", _frozen(means))
        object.__setattr__(self, "bias_estimates", _frozen(biases))


@dataclass(frozen=True)
class RhoFamily:
    """One-parameter family of response-correlation vectors.

    The additive off-diagonal fit determines rho only up to the shift
    rho_hat(q) = a0 + (q / 2) * ones, with q the candidate signal
    variance; a0 is the fit at q = 0.  a_of(q) gives the matching
    offset vector a0 - (q / 2) * ones.
    """

    a0: np.ndarray
    var_y: float

    def __post_init__(self):
        a0 = np.asarray(self.a0, dtype=np.float64)
        var_y = float(self.var_y)
        if a0.ndim != 1 or a0.shape[0] < 1:
            raise InputError("a0 must be a non-empty vector")
        if not np.all(np.isfinite(a0)):
            raise InputError("a0 must be finite")
        if var_y <= 0.0:
            raise InputError(f"var_y must be positive, got {var_y:g}")
        object.__setattr__(self, "a0", _frozen(a0))
        object.__setattr__(self, "var_y", var_y)

    def _check_q(self, q):
        q = float(q)
        if not -1e-12 * self.var_y <= q <= self.var_y * (1.0 + 1e-12):
            raise InputError(f"q must lie in [0, var_y], got {q:g}")
        return q

    def rho_of(self, q):
        return self.a0 + self._check_q(q) / 2.0

    def a_of(self, q):
        return self.a0 - self._check_q(q) / 2.0

    @property
    def size(self):
        return self.a0.shape[0]


@dataclass(frozen=True)
class PipelineConfig:
    """Tuning constants of the fitting pipeline with the standard defaults."""

    loss: str = LOSS_SQUARED
    grid_points: int = 201
    eps_l: float = 0.1
    prune_abs_frac: float = 0.05
    prune_rel_frac: float = 1.0 / 3.0
    two_pc_trace_frac: float = 0.1
    min_ensemble_size: int = 5

    def __post_init__(self):
        if self.loss not in LOSSES:
            raise InputError(f"loss must be one of {LOSSES}, got {self.loss!r}")
        if int(self.grid_points) != self.grid_points or self.grid_points < 2:
            raise InputError(f"grid_points must be an integer >= 2, got {self.grid_points}")
        object.__setattr__(self, "grid_points", int(self.grid_points))
        for name in ("eps_l", "prune_abs_frac", "prune_rel_frac", "two_pc_trace_frac"):
            val = float(getattr(self, name))
            if not 0.0 < val < 1.0:
                raise InputError(f"{name} must lie in (0, 1), got {val:g}")
            object.__setattr__(self, name, val)
        if int(self.min_ensemble_size) != self.min_ensemble_size or self.min_ensemble_size < 1:
            raise InputError(
                f"min_ensemble_size must be an integer >= 1, got {self.min_ensemble_size}"
            )
        object.__setattr__(self, "min_ensemble_size", int(self.min_ensemble_size))

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class FittedEnsemble:
    """Result of the fitting pipeline.

    A tractable fit carries the surviving regressor indices (into the
    training prediction matrix), their combination weights and the
    post-pruning correlation estimates.  A hard verdict leaves kept,
    weights and rho_hat as None and records why in stop_reason.
    rho_initial and mse_estimates always cover all m regressors of the
    training matrix, so excluded experts remain explainable.
    """

    regressor_names: tuple
    mean_y: float
    var_y: float
    difficulty: str
    g2_hat: float
    g2_res_min: float
    g2_used_lambda_fallback: bool
    eigen: EigenPairs
    rho_initial: np.ndarray
    mse_estimates: np.ndarray
    regressor_means: np.ndarray
    kept: tuple | None
    rho_hat: np.ndarray | None
    weights: np.ndarray | None
    used_two_pcs: bool
    used_fallback_average: bool
    stop_reason: str | None = None

    def __post_init__(self):
        if self.difficulty not in DIFFICULTIES:
            raise InputError(f"difficulty must be one of {DIFFICULTIES}")
        m = len(self.regressor_names)
        rho0 = np.asarray(self.rho_initial, dtype=np.float64)
        mses = np.asarray(self.mse_estimates, dtype=np.float64)
        means = np.asarray(self.regressor_means, dtype=np.float64)
        if rho0.shape != (m,) or mses.shape != (m,) or means.shape != (m,):
            raise InputError("per-regressor arrays must have one entry per regressor")
        object.__setattr__(self, "regressor_names", tuple(self.regressor_names))
        object.__setattr__(self, "rho_initial", _frozen(rho0))
        object.__setattr__(self, "mse_estimates", _frozen(mses))
        object.__setattr__(self, "regressor_means", _frozen(means))
        if self.difficulty == DIFFICULTY_TRACTABLE:
            if self.kept is None or self.weights is None or self.rho_hat is None:
                raise InputError("a tractable fit requires kept, weights and rho_hat")
            kept = tuple(int(i) for i in self.kept)
            if not kept:
                raise InputError("a tractable fit must keep at least one regressor")
            if any(not 0 <= i < m for i in kept) or len(set(kept)) != len(kept):
                raise InputError("kept indices must be unique and in range")
            w = np.asarray(self.weights, dtype=np.float64)
            rho = np.asarray(self.rho_hat, dtype=np.float64)
            if w.shape != (len(kept),) or rho.shape != (len(kept),):
                raise InputError("weights and rho_hat must match the kept count")
            object.__setattr__(self, "kept", kept)
            object.__setattr__(self, "weights", _frozen(w))
            object.__setattr__(self, "rho_hat", _frozen(rho))
        else:
            if self.kept is not None or self.weights is not None or self.rho_hat is not None:
                raise InputError("a hard verdict carries no kept set, weights or rho_hat")

    @property
    def kept_names(self):
        if self.kept is None:
            return ()
        return tuple(self.regressor_names[i] for i in self.kept)

    def to_dict(self):
        """JSON-compatible dict; float64 survives the round trip exactly."""
        return {
            "regressor_names": list(self.regressor_names),
            "mean_y": self.mean_y,
            "var_y": self.var_y,
            "difficulty": self.difficulty,
            "g2_hat": self.g2_hat,
            "g2_res_min": self.g2_res_min,
            "g2_used_lambda_fallback": self.g2_used_lambda_fallback,
            "eigen": {
                "values": self.eigen.values.tolist(),
                "vectors": self.eigen.vectors.tolist(),
            },
            "rho_initial": self.rho_initial.tolist(),
            "mse_estimates": self.mse_estimates.tolist(),
            "regressor_means": self.regressor_means.tolist(),
            "kept": None if self.kept is None else list(self.kept),
            "rho_hat": None if self.rho_hat is None else self.rho_hat.tolist(),
            "weights": None if self.weights is None else self.weights.tolist(),
            "used_two_pcs": self.used_two_pcs,
            "used_fallback_average": self.used_fallback_average,
            "stop_reason": self.stop_reason,
        }

    @classmethod
    def from_dict(cls, data):
        try:
            eigen = EigenPairs(
                values=np.asarray(data["eigen"]["values"], dtype=np.float64),
                vectors=np.asarray(data["eigen"]["vectors"], dtype=np.float64),
            )
            return cls(
                regressor_names=tuple(data["regressor_names"]),
                mean_y=float(data["mean_y"]),
                var_y=float(data["var_y"]),
                difficulty=data["difficulty"],
                g2_hat=float(data["g2_hat"]),
                g2_res_min=float(data["g2_res_min"]),
                g2_used_lambda_fallback=bool(data["g2_used_lambda_fallback"]),
                eigen=eigen,
                rho_initial=np.asarray(data["rho_initial"], dtype=np.float64),
                mse_estimates=np.asarray(data["mse_estimates"], dtype=np.float64),
                regressor_means=np.asarray(data["regressor_means"], dtype=np.float64),
                kept=None if data["kept"] is None else tuple(data["kept"]),
                rho_hat=None
                if data["rho_hat"] is None
                else np.asarray(data["rho_hat"], dtype=np.float64),
                weights=None
                if data["weights"] is None
                else np.asarray(data["weights"], dtype=np.float64),
                used_two_pcs=bool(data["used_two_pcs"]),
                used_fallback_average=bool(data["used_fallback_average"]),
                stop_reason=data.get("stop_reason"),
            )
        except KeyError as exc:
            raise InputError(f"model data is missing field {exc.args[0]!r}") from None
