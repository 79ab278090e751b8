"""Synthetic ensembles with known population structure.

Experts share a common conditional-mean signal g(X) and deviate from it
by epsilon * h_i where the h_i are pairwise uncorrelated, have
prescribed variances D_i and prescribed signal alignments
E[g h_i] = a_i.  That makes every population quantity of interest
available in closed form:

    rho_i            = g2 + epsilon * a_i
    C_ij (i != j)    = g2 + epsilon * (a_i + a_j)
    C_ii             = g2 + 2 * epsilon * a_i + epsilon^2 * D_i

The deviations are realized as h_i = (a_i / g2) * g_c + w_i with
Gaussian w ~ N(0, diag(D) - a a^T / g2), which matches all three
moment requirements exactly and is feasible iff
sum_i a_i^2 / D_i <= g2.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .linalg import SymMatrix, top_eigenpairs
from .model import PredictionMatrix

SIGNAL_KINDS = ("normal", "friedman1", "friedman2", "friedman3")

# Sample count and root seed for the frozen Monte-Carlo signal moments.
_MOMENT_SAMPLES = 1 << 21
_MOMENT_SEED = 857104203
_moment_cache = {}


@dataclass(frozen=True)
class SignalSpec:
    """Conditional-mean signal descriptor.

    kind "normal" draws g ~ N(mean, g2) and requires g2; the friedman
    kinds apply the classic benchmark response surfaces to uniform
    inputs and carry their own intrinsic moments, so g2 must be None
    and mean 0.
    """

    kind: str
    g2: float | None = None
    mean: float = 0.0

    def __post_init__(self):
        if self.kind not in SIGNAL_KINDS:
            raise InputError(f"signal kind must be one of {SIGNAL_KINDS}, got {self.kind!r}")
        if self.kind == "normal":
            if self.g2 is None or not np.isfinite(self.g2) or self.g2 <= 0.0:
                raise InputError("normal signal requires a positive g2")
            object.__setattr__(self, "g2", float(self.g2))
            object.__setattr__(self, "mean", float(self.mean))
        else:
            if self.g2 is not None:
                raise InputError(f"{self.kind} has intrinsic variance; leave g2 unset")
            if self.mean != 0.0:
                raise InputError(f"{self.kind} has an intrinsic mean; leave mean at 0")


def _friedman_signal(kind, rng, n):
    if kind == "friedman1":
        x = rng.uniform(size=(n, 10))
        return (10.0 * np.sin(np.pi * x[:, 0] * x[:, 1]) + 20.0 * (x[:, 2] - 0.5) ** 2
                + 10.0 * x[:, 3] + 5.0 * x[:, 4])
    x0 = rng.uniform(0.0, 100.0, size=n)
    x1 = rng.uniform(40.0 * np.pi, 560.0 * np.pi, size=n)
    x2 = rng.uniform(0.0, 1.0, size=n)
    x3 = rng.uniform(1.0, 11.0, size=n)
    core = x1 * x2 - 1.0 / (x1 * x3)
    if kind == "friedman2":
        return np.sqrt(x0 ** 2 + core ** 2)
    return np.arctan(core / x0)


def signal_moments(kind):
    """(mean, variance) of the named friedman signal.

    Computed once per process from a large fixed-seed Monte-Carlo draw
    (about 2e6 points), so values are deterministic across runs.  The
    sampling error on the mean is a few parts in 1e3 of the standard
    deviation.
    """
    if kind not in ("friedman1", "friedman2", "friedman3"):
        raise InputError(f"no tabulated moments for signal kind {kind!r}")
    if kind not in _moment_cache:
        idx = SIGNAL_KINDS.index(kind)
        rng = np.random.default_rng(np.random.SeedSequence([_MOMENT_SEED, idx]))
        s = _friedman_signal(kind, rng, _MOMENT_SAMPLES)
        _moment_cache[kind] = (float(s.mean()), float(s.var()))
    return _moment_cache[kind]


@dataclass(frozen=True)
class SyntheticEnsembleSpec:
    """Generator settings for one synthetic prediction ensemble.

    h_variances are the deviation variances D_i (one per expert);
    a_values the signal alignments E[g h_i]; epsilon scales all
    deviations; noise_on_y is the variance of the label noise added on
    top of the signal.
    """

    m: int
    n: int
    signal: SignalSpec
    epsilon: float
    h_variances: tuple
    a_values: tuple | None = None
    noise_on_y: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise InputError(f"m must be a positive integer, got {self.m}")
        if int(self.n) != self.n or self.n < 1:
            raise InputError(f"n must be a positive integer, got {self.n}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "n", int(self.n))
        if not isinstance(self.signal, SignalSpec):
            raise InputError("signal must be a SignalSpec")
        eps = float(self.epsilon)
        if not np.isfinite(eps) or eps < 0.0:
            raise InputError(f"epsilon must be non-negative, got {eps}")
        object.__setattr__(self, "epsilon", eps)
        d = tuple(float(v) for v in np.atleast_1d(self.h_variances))
        if len(d) == 1:
            d = d * self.m
        if len(d) != self.m or any(not np.isfinite(v) or v < 0.0 for v in d):
            raise InputError("h_variances must be m non-negative values")
        object.__setattr__(self, "h_variances", d)
        if self.a_values is None:
            a = (0.0,) * self.m
        else:
            a = tuple(float(v) for v in np.atleast_1d(self.a_values))
        if len(a) != self.m or any(not np.isfinite(v) for v in a):
            raise InputError("a_values must be m finite values")
        object.__setattr__(self, "a_values", a)
        noise = float(self.noise_on_y)
        if not np.isfinite(noise) or noise < 0.0:
            raise InputError(f"noise_on_y must be non-negative, got {noise}")
        object.__setattr__(self, "noise_on_y", noise)
        object.__setattr__(self, "seed", int(self.seed))

    def signal_g2(self):
        if self.signal.kind == "normal":
            return self.signal.g2
        return signal_moments(self.signal.kind)[1]

    def signal_mean(self):
        if self.signal.kind == "normal":
            return self.signal.mean
        return signal_moments(self.signal.kind)[0]


@dataclass(frozen=True)
class SyntheticTruth:
    """Population quantities of a generated ensemble."""

    g2: float
    a: np.ndarray
    rho: np.ndarray
    c_population: np.ndarray
    mean_y: float
    var_y: float

    def to_dict(self):
        return {
            "g2": self.g2,
            "a": self.a.tolist(),
            "rho": self.rho.tolist(),
            "c_population": self.c_population.tolist(),
            "mean_y": self.mean_y,
            "var_y": self.var_y,
        }


def _deviation_root(d, a, g2):
    """Symmetric square root of diag(d) - a a^T / g2, with feasibility check."""
    d = np.asarray(d)
    a = np.asarray(a)
    if np.any((d == 0.0) & (a != 0.0)):
        raise InputError("an expert with zero deviation variance cannot have a nonzero alignment")
    load = float(np.sum(np.where(d > 0.0, a * a / np.where(d > 0.0, d, 1.0), 0.0)))
    if load > g2 * (1.0 + 1e-12):
        raise InputError(
            f"infeasible alignment: sum a_i^2 / D_i = {load:g} exceeds g2 = {g2:g}"
        )
    r = np.diag(d) - np.outer(a, a) / g2
    eigen = top_eigenpairs(SymMatrix(r), r.shape[0])
    vals = eigen.values.copy()
    top = max(float(vals[0]), 0.0)
    vals[vals < 0.0] = 0.0  # feasible input leaves only round-off negatives
    return eigen.vectors.T @ (np.sqrt(vals)[:, None] * eigen.vectors), top


def population_covariance(g2, epsilon, a, d):
    """Exact covariance matrix of the centered expert predictions."""
    a = np.asarray(a, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    m = a.shape[0]
    c = np.full((m, m), g2)
    c += epsilon * (a[:, None] + a[None, :])
    c[np.diag_indices(m)] += epsilon ** 2 * d
    return c


def generate(spec):
    """Draw one synthetic ensemble.

    Returns (PredictionMatrix, labels, SyntheticTruth).  Substreams are
    spawned per expert from the root seed, so results are reproducible
    and individual experts keep their draws when m changes.
    """
    if not isinstance(spec, SyntheticEnsembleSpec):
        raise InputError("generate expects a SyntheticEnsembleSpec")
    m, n = spec.m, spec.n
    g2 = spec.signal_g2()
    mean = spec.signal_mean()
    a = np.asarray(spec.a_values)
    d = np.asarray(spec.h_variances)

    root = np.random.SeedSequence(spec.seed)
    sig_ss, noise_ss, *expert_ss = root.spawn(2 + m)

    rng_sig = np.random.default_rng(sig_ss)
    if spec.signal.kind == "normal":
        g_c = math.sqrt(g2) * rng_sig.standard_normal(n)
    else:
        g_c = _friedman_signal(spec.signal.kind, rng_sig, n) - mean

    noise = math.sqrt(spec.noise_on_y) * np.random.default_rng(noise_ss).standard_normal(n)
    y = mean + g_c + noise

    z = np.empty((m, n))
    for i in range(m):
        z[i] = np.random.default_rng(expert_ss[i]).standard_normal(n)
    if np.any(a != 0.0):
        root_r, _ = _deviation_root(d, a, g2)
        w = root_r @ z
        h = (a / g2)[:, None] * g_c[None, :] + w
    else:
        h = np.sqrt(d)[:, None] * z

    values = mean + g_c[None, :] + spec.epsilon * h
    width = max(len(str(n)), 4)
    preds = PredictionMatrix(
        regressor_names=tuple(f"expert_{i + 1:02d}" for i in range(m)),
        sample_ids=tuple(f"s{j + 1:0{width}d}" for j in range(n)),
        values=values,
    )
    truth = SyntheticTruth(
        g2=g2,
        a=a.copy(),
        rho=g2 + spec.epsilon * a,
        c_population=population_covariance(g2, spec.epsilon, a, d),
        mean_y=mean,
        var_y=g2 + spec.noise_on_y,
    )
    return preds, y, truth


@dataclass(frozen=True)
class Lemma2Report:
    """Observed first-order-expansion errors over an epsilon grid.

    lambda_errors[k] is |lambda_1(eps_k) - (g2 m + 2 sum(a) eps_k)| and
    eigvec_errors[k] the norm distance between the computed leading
    eigenvector and the normalized first-order prediction
    g2 ones + eps (a - mean(a) ones).  The error orders are log-log
    slopes over the points above the floating-point floor; second-order
    accuracy of the expansion shows as slopes near 2.  None means every
    point sat at round-off level, i.e. the expansion was exact.
    """

    eps_grid: np.ndarray
    lambda_errors: np.ndarray
    eigvec_errors: np.ndarray
    lambda_error_order: float | None
    eigvec_error_order: float | None


def _slope(eps, errs, floor):
    valid = errs > floor
    if int(valid.sum()) < 2:
        return None
    return float(np.polyfit(np.log(eps[valid]), np.log(errs[valid]), 1)[0])


def verify_lemma2(g2, a_values, h_variances, eps_grid=None):
    """Check the small-epsilon expansion of the leading eigenpair.

    Uses exact population covariances (no sampling noise) on a grid of
    epsilon values in (0, 0.1].
    """
    g2 = float(g2)
    if g2 <= 0.0:
        raise InputError(f"g2 must be positive, got {g2:g}")
    a = np.asarray(a_values, dtype=np.float64)
    d = np.asarray(h_variances, dtype=np.float64)
    if a.ndim != 1 or a.shape != d.shape or a.shape[0] < 2:
        raise InputError("a_values and h_variances must be matching vectors, m >= 2")
    if eps_grid is None:
        eps_grid = np.logspace(-3.0, -1.0, 8)
    eps_grid = np.asarray(eps_grid, dtype=np.float64)
    if np.any(eps_grid <= 0.0) or np.any(eps_grid > 0.1 * (1.0 + 1e-12)):
        raise InputError("epsilon grid must lie in (0, 0.1]")

    m = a.shape[0]
    lam_err = np.empty_like(eps_grid)
    vec_err = np.empty_like(eps_grid)
    for k, eps in enumerate(eps_grid):
        c = SymMatrix(population_covariance(g2, eps, a, d))
        eigen = top_eigenpairs(c, 1)
        lam_pred = g2 * m + 2.0 * float(a.sum()) * eps
        v_pred = g2 * np.ones(m) + eps * (a - a.mean())
        v_pred /= np.linalg.norm(v_pred)
        lam_err[k] = abs(float(eigen.values[0]) - lam_pred)
        vec_err[k] = float(np.linalg.norm(eigen.vectors[0] - v_pred))
    lam_floor = 1e-11 * max(1.0, g2 * m)
    return Lemma2Report(
        eps_grid=eps_grid,
        lambda_errors=lam_err,
        eigvec_errors=vec_err,
        lambda_error_order=_slope(eps_grid, lam_err, lam_floor),
        eigvec_error_order=_slope(eps_grid, vec_err, 1e-11),
    )
