"""Synthetic generator: population moments, determinism, expansion check."""
import numpy as np
import pytest
from scipy.special import sici

from upcr.errors import InputError
from upcr.linalg import SymMatrix, top_eigenpairs
from upcr.synth import (
    Lemma2Report,
    SignalSpec,
    SyntheticEnsembleSpec,
    generate,
    population_covariance,
    signal_moments,
    verify_lemma2,
)


def normal_spec(**overrides):
    base = dict(
        m=5, n=1000, signal=SignalSpec("normal", g2=0.8), epsilon=0.2,
        h_variances=(1.0, 1.5, 2.0, 1.2, 0.9),
        a_values=(0.3, -0.2, 0.1, 0.0, -0.1),
        noise_on_y=0.5, seed=7)
    base.update(overrides)
    return SyntheticEnsembleSpec(**base)


class TestSpecValidation:
    def test_normal_requires_g2(self):
        with pytest.raises(InputError, match="positive g2"):
            SignalSpec("normal")

    def test_friedman_rejects_g2_and_mean(self):
        with pytest.raises(InputError, match="intrinsic variance"):
            SignalSpec("friedman1", g2=1.0)
        with pytest.raises(InputError, match="intrinsic mean"):
            SignalSpec("friedman2", mean=3.0)

    def test_unknown_kind(self):
        with pytest.raises(InputError, match="signal kind"):
            SignalSpec("gauss")

    def test_scalar_variance_broadcasts(self):
        spec = normal_spec(h_variances=(1.3,), a_values=None)
        assert spec.h_variances == (1.3,) * 5

    def test_default_alignments_are_zero(self):
        assert normal_spec(a_values=None).a_values == (0.0,) * 5

    def test_negative_epsilon(self):
        with pytest.raises(InputError, match="epsilon"):
            normal_spec(epsilon=-0.1)

    def test_wrong_length_variances(self):
        with pytest.raises(InputError, match="h_variances"):
            normal_spec(h_variances=(1.0, 2.0))

    def test_negative_noise(self):
        with pytest.raises(InputError, match="noise_on_y"):
            normal_spec(noise_on_y=-1.0)

    def test_generate_rejects_other_types(self):
        with pytest.raises(InputError):
            generate({"m": 3})


class TestGenerate:
    def test_deterministic(self):
        p1, y1, t1 = generate(normal_spec())
        p2, y2, t2 = generate(normal_spec())
        assert np.array_equal(p1.values, y2 * 0 + p2.values)
        assert np.array_equal(y1, y2)
        assert p1.sample_ids == p2.sample_ids
        assert np.array_equal(t1.c_population, t2.c_population)

    def test_names_and_ids(self):
        preds, _, _ = generate(normal_spec(m=3, n=12, h_variances=(1.0,), a_values=None))
        assert preds.regressor_names == ("expert_01", "expert_02", "expert_03")
        assert preds.sample_ids[0] == "s0001"
        assert preds.sample_ids[-1] == "s0012"

    def test_truth_fields(self):
        spec = normal_spec()
        _, _, truth = generate(spec)
        assert truth.g2 == 0.8
        assert truth.var_y == pytest.approx(0.8 + 0.5)
        assert np.allclose(truth.rho, 0.8 + 0.2 * np.array(spec.a_values))
        assert np.array_equal(
            truth.c_population,
            population_covariance(0.8, 0.2, spec.a_values, spec.h_variances))

    def test_empirical_covariance_matches_population(self):
        spec = normal_spec(n=200_000)
        preds, y, truth = generate(spec)
        emp = np.cov(preds.values, ddof=0)
        assert np.max(np.abs(emp - truth.c_population)) < 0.03

    def test_empirical_alignment_matches_rho(self):
        spec = normal_spec(n=200_000)
        preds, y, truth = generate(spec)
        z = preds.values - preds.values.mean(axis=1, keepdims=True)
        rho_emp = z @ (y - y.mean()) / spec.n
        assert np.max(np.abs(rho_emp - truth.rho)) < 0.03
        assert abs(y.var() - truth.var_y) < 0.03

    def test_zero_variance_expert_tracks_signal(self):
        spec = normal_spec(h_variances=(0.0, 0.0, 1.0, 1.0, 1.0), a_values=None)
        preds, _, _ = generate(spec)
        assert np.array_equal(preds.values[0], preds.values[1])

    def test_zero_variance_with_alignment_rejected(self):
        with pytest.raises(InputError, match="zero deviation variance"):
            generate(normal_spec(h_variances=(0.0, 1.0, 1.0, 1.0, 1.0)))

    def test_infeasible_alignment_rejected(self):
        with pytest.raises(InputError, match="infeasible alignment"):
            generate(normal_spec(a_values=(0.9, 0.9, 0.0, 0.0, 0.0),
                                 h_variances=(1.0,) * 5))

    def test_expert_streams_survive_widening(self):
        # per-expert substreams: adding experts must not disturb earlier ones
        small = normal_spec(m=3, h_variances=(1.0, 1.5, 2.0), a_values=None)
        wide = normal_spec(m=5, h_variances=(1.0, 1.5, 2.0, 1.2, 0.9), a_values=None)
        p_small, _, _ = generate(small)
        p_wide, _, _ = generate(wide)
        assert np.array_equal(p_small.values, p_wide.values[:3])


class TestFriedmanSignals:
    def test_friedman1_moments_match_closed_form(self):
        # E sin(pi u v) = Cin(pi)/pi and E sin^2 = 1/2 - Si(2 pi)/(4 pi)
        # for independent u, v ~ U(0,1); remaining terms are polynomial.
        si_2pi = sici(2.0 * np.pi)[0]
        ci_pi = sici(np.pi)[1]
        cin_pi = np.euler_gamma + np.log(np.pi) - ci_pi
        e_sin = cin_pi / np.pi
        var_sin = 0.5 - si_2pi / (4.0 * np.pi) - e_sin ** 2
        mean_ref = 10.0 * e_sin + 20.0 / 12.0 + 5.0 + 2.5
        var_ref = 100.0 * var_sin + 400.0 / 180.0 + 100.0 / 12.0 + 25.0 / 12.0
        mean, var = signal_moments("friedman1")
        assert mean == pytest.approx(mean_ref, abs=0.02)
        assert var == pytest.approx(var_ref, abs=0.15)

    def test_moments_cached_and_deterministic(self):
        assert signal_moments("friedman2") == signal_moments("friedman2")
        for kind in ("friedman1", "friedman2", "friedman3"):
            mean, var = signal_moments(kind)
            assert np.isfinite(mean) and var > 0.0

    def test_no_moments_for_normal(self):
        with pytest.raises(InputError, match="tabulated"):
            signal_moments("normal")

    def test_friedman_generation_matches_tabulated_var(self):
        spec = SyntheticEnsembleSpec(
            m=4, n=100_000, signal=SignalSpec("friedman1"), epsilon=0.1,
            h_variances=(1.0,), noise_on_y=1.0, seed=11)
        preds, y, truth = generate(spec)
        mean, var = signal_moments("friedman1")
        assert truth.mean_y == mean
        assert truth.var_y == var + 1.0
        assert y.mean() == pytest.approx(mean, abs=0.05)
        assert y.var() == pytest.approx(var + 1.0, abs=0.3)


class TestLemma2:
    def test_generic_orders_near_two(self):
        report = verify_lemma2(
            g2=0.7,
            a_values=(0.3, -0.2, 0.15, 0.0, -0.1, 0.25),
            h_variances=(1.0, 1.4, 0.8, 1.1, 1.3, 0.9))
        assert isinstance(report, Lemma2Report)
        assert report.lambda_error_order is not None
        assert 1.8 <= report.lambda_error_order <= 2.2
        assert report.eigvec_error_order is not None
        assert 1.8 <= report.eigvec_error_order <= 2.2

    def test_isotropic_case_is_exact(self):
        # a = 0, D = s I: C = g2 J + eps^2 s I, so the leading pair is
        # known exactly and the eigenvector prediction has no error term
        g2, s, m = 0.5, 1.3, 6
        report = verify_lemma2(g2, (0.0,) * m, (s,) * m)
        assert report.eigvec_error_order is None
        assert report.lambda_error_order == pytest.approx(2.0, abs=1e-3)
        for eps in (0.01, 0.05, 0.1):
            c = SymMatrix(population_covariance(g2, eps, np.zeros(m), np.full(m, s)))
            eigen = top_eigenpairs(c, 1)
            assert eigen.values[0] == pytest.approx(g2 * m + eps ** 2 * s, abs=1e-10)
            assert np.allclose(eigen.vectors[0], np.full(m, m ** -0.5), atol=1e-10)

    def test_grid_validation(self):
        with pytest.raises(InputError, match="0, 0.1"):
            verify_lemma2(0.5, (0.1, -0.1), (1.0, 1.0), eps_grid=[0.2])
        with pytest.raises(InputError, match="0, 0.1"):
            verify_lemma2(0.5, (0.1, -0.1), (1.0, 1.0), eps_grid=[-0.01])
        with pytest.raises(InputError, match="g2"):
            verify_lemma2(0.0, (0.1, -0.1), (1.0, 1.0))
        with pytest.raises(InputError, match="matching"):
            verify_lemma2(0.5, (0.1,), (1.0, 1.0))
