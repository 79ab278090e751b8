"""Reference combiners: mean, median, oracle, misfit weights, scoring."""
import numpy as np
import pytest

from upcr.baselines import (
    difficulty_band,
    ensemble_mean,
    ensemble_median,
    evaluate,
    gem_weights,
    misfit_covariance,
    oracle_weights,
)
from upcr.errors import InputError, NumericalError
from upcr.estimator import center_predictions, predict, upcr_fit
from upcr.linalg import SymMatrix
from upcr.model import PredictionMatrix, ResponseMoments
from upcr.synth import SignalSpec, SyntheticEnsembleSpec, generate


def toy_preds():
    return PredictionMatrix(
        ("a", "b", "c"), ("s1", "s2"),
        np.array([[1.0, 4.0], [2.0, 5.0], [6.0, 9.0]]),
    )


def test_ensemble_mean():
    assert np.array_equal(ensemble_mean(toy_preds()), [3.0, 6.0])


def test_ensemble_median():
    assert np.array_equal(ensemble_median(toy_preds()), [2.0, 5.0])


class TestOracleWeights:
    def test_recovers_exact_linear_combination(self):
        rng = np.random.default_rng(2)
        z = rng.standard_normal((3, 200))
        z -= z.mean(axis=1, keepdims=True)
        w_true = np.array([0.5, -0.2, 0.3])
        y = 4.0 + z.T @ w_true
        res = oracle_weights(z, y, ResponseMoments(mean_y=4.0, var_y=1.0))
        assert not res.rank_deficient
        assert np.max(np.abs(res.weights - w_true)) < 1e-10

    def test_duplicate_experts_minimum_norm(self):
        rng = np.random.default_rng(3)
        row = rng.standard_normal(100)
        row -= row.mean()
        z = np.vstack([row, row])
        y = row  # best fit: total weight 1 split across duplicates
        res = oracle_weights(z, y, ResponseMoments(mean_y=0.0, var_y=1.0))
        assert res.rank_deficient
        assert np.allclose(res.weights, [0.5, 0.5], atol=1e-10)

    def test_never_worse_than_fitted_ensemble(self):
        # the fitted combination lies inside the oracle's search class
        spec = SyntheticEnsembleSpec(
            m=8, n=5000, signal=SignalSpec("normal", g2=0.5), epsilon=0.25,
            h_variances=(1.0,) * 8,
            a_values=(0.2, -0.1, 0.0, 0.1, -0.2, 0.15, 0.0, -0.05),
            noise_on_y=0.5, seed=19)
        preds, y, truth = generate(spec)
        mom = ResponseMoments(truth.mean_y, truth.var_y)
        fit = upcr_fit(preds, mom)
        centered = center_predictions(preds, mom)
        oracle = oracle_weights(centered.z, y, mom)
        mse_oracle = float(np.mean((mom.mean_y + centered.z.T @ oracle.weights - y) ** 2))
        mse_fit = float(np.mean((predict(fit, preds) - y) ** 2))
        assert mse_oracle <= mse_fit + 1e-12


class TestMisfitCovariance:
    def test_matches_brute_force(self):
        preds = toy_preds()
        y = np.array([2.0, 6.0])
        c = misfit_covariance(preds, y).entries
        f = preds.values
        for i in range(3):
            for j in range(3):
                ref = np.mean((f[i] - y) * (f[j] - y))
                assert c[i, j] == pytest.approx(ref, abs=1e-14)

    def test_errors_not_centered(self):
        # a biased expert keeps its bias in the diagonal
        preds = PredictionMatrix(("a",), ("s1", "s2"), np.array([[3.0, 3.0]]))
        c = misfit_covariance(preds, np.array([1.0, 1.0]))
        assert c.entries[0, 0] == 4.0


class TestGemWeights:
    def test_identity_gives_uniform(self):
        w = gem_weights(SymMatrix(np.eye(4)))
        assert np.allclose(w, 0.25, atol=1e-14)

    def test_diagonal_inverse_variance(self):
        w = gem_weights(SymMatrix(np.diag([1.0, 4.0])))
        assert np.allclose(w, [0.8, 0.2], atol=1e-14)

    def test_by_hand_two_by_two(self):
        c = np.array([[2.0, 1.0], [1.0, 3.0]])
        w = gem_weights(SymMatrix(c))
        inv = np.linalg.inv(c)
        ref = inv.sum(axis=1) / inv.sum()
        assert np.allclose(w, ref, atol=1e-12)

    def test_near_singular_raises(self):
        c = np.array([[1.0, 1.0 - 1e-13], [1.0 - 1e-13, 1.0]])
        with pytest.raises(NumericalError, match="condition"):
            gem_weights(SymMatrix(c))

    def test_exactly_singular_raises(self):
        c = np.ones((2, 2))
        with pytest.raises(NumericalError):
            gem_weights(SymMatrix(c))


class TestEvaluate:
    def test_mse_and_normalization(self):
        mom = ResponseMoments(mean_y=0.0, var_y=4.0)
        r = evaluate(np.array([1.0, 3.0]), np.array([0.0, 1.0]), mom)
        assert r.mse == pytest.approx(2.5)
        assert r.normalized_mse == pytest.approx(0.625)
        assert r.band == "challenging"

    @pytest.mark.parametrize("nmse,band", [
        (0.05, "easy"), (0.1, "easy"),
        (0.11, "challenging"), (0.8, "challenging"),
        (0.81, "hard"), (1.5, "hard"),
    ])
    def test_bands(self, nmse, band):
        assert difficulty_band(nmse) == band

    def test_shape_mismatch(self):
        with pytest.raises(InputError):
            evaluate(np.zeros(3), np.zeros(4), ResponseMoments(0.0, 1.0))
