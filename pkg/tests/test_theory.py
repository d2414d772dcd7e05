import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from hdbf import (
    Covariance,
    ModelSpec,
    PsiSpec,
    gn_cdf,
    local_power_predict,
    mixture_limit_sample,
    psi_eigenvalues,
    psi_matrix,
    psi_spec,
    reference_qf_sample,
    sigma_oracle,
)
from hdbf.models import group_covariance
from hdbf.simulation import null_standardized_draws
from hdbf.theory import ReferenceDistribution, sigma_oracle_sq


def expand(eigs):
    vals, counts = eigs
    return np.repeat(vals, counts)


def pair_loop_variance(per1, per2):
    """Var T_CQ as a sum over uncorrelated pair terms: Var(X_i'X_j) = tr(S_i S_j)."""
    total = 0.0
    for per in (per1, per2):
        n = len(per)
        for i in range(n):
            for j in range(i + 1, n):
                total += 4.0 * np.sum(per[i] * per[j]) / (n * (n - 1)) ** 2
    n1, n2 = len(per1), len(per2)
    for a in per1:
        for b in per2:
            total += 4.0 * np.sum(a * b) / (n1 * n2) ** 2
    return total


def skewness(x):
    return stats.skew(x)


class TestCovariance:
    @pytest.fixture
    def structured(self, rng):
        f = rng.normal(size=(7, 2))
        return [
            Covariance.identity(7, 2.0),
            Covariance.diagonal(rng.uniform(0.5, 2.0, 7)),
            Covariance.low_rank_plus_identity(f, [1.5, 0.3], 0.7),
            Covariance.from_dense(np.cov(rng.normal(size=(7, 20)))),
        ]

    def test_traces_match_dense(self, structured):
        for a in structured:
            da = a.to_dense()
            assert a.trace() == pytest.approx(np.trace(da), rel=1e-12)
            assert a.trace_sq() == pytest.approx(np.sum(da * da), rel=1e-12)
            for b in structured:
                assert a.trace_product(b) == pytest.approx(np.sum(da * b.to_dense()), rel=1e-12)

    def test_sum_and_scale(self, structured):
        a, b = structured[1], structured[2]
        np.testing.assert_allclose((a.scaled(0.5) + b).to_dense(), 0.5 * a.to_dense() + b.to_dense(), rtol=1e-13)

    def test_eigenvalues_match_dense(self, structured):
        for a in structured:
            vals, counts = a.eigenvalues()
            assert counts.sum() == 7
            np.testing.assert_allclose(np.sort(expand((vals, counts))), np.linalg.eigvalsh(a.to_dense()), atol=1e-10)

    def test_from_dense_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            Covariance.from_dense([[1.0, 0.5], [0.0, 1.0]])

    def test_sample_covariance(self, structured, rng):
        for a in structured[1:3]:
            x = a.sample(rng, 40000)
            np.testing.assert_allclose(np.cov(x.T), a.to_dense(), atol=0.08 * np.abs(a.to_dense()).max())


class TestPsi:
    def test_identity(self):
        n, p = 10, 6
        spec = PsiSpec(n, n, Covariance.identity(p), Covariance.identity(p))
        np.testing.assert_allclose(psi_matrix(spec).to_dense(), 2 / n * np.eye(p))
        assert psi_matrix(spec).trace_sq() == pytest.approx(4 * p / n**2)

    def test_model_two_eigenvalues(self):
        p = 100
        vals, counts = group_covariance(ModelSpec("II", 8, 12, p), 1).eigenvalues()
        got = sorted(zip(vals.round(10), counts), reverse=True)
        assert got == [(p + 1.0, 1), (p / 2 + 1.0, 1), (1.0, p - 2)]
        np.testing.assert_allclose(np.linalg.eigvalsh(group_covariance(ModelSpec("II", 8, 12, p), 2).to_dense())[-2:],
                                   [p / 2 + 1, p + 1], rtol=1e-10)

    @pytest.mark.parametrize("gamma", [0.2, 0.5, 1.0])
    def test_gamma_eigenvalues(self, gamma):
        p, n1, n2 = 50, 16, 24
        vals, counts = psi_eigenvalues(psi_spec(ModelSpec("gamma", n1, n2, p, gamma=gamma)))
        s = 1 / n1 + 1 / n2
        expected = {round(s * (p * gamma + 1 - gamma), 10): 1}
        if gamma < 1:
            expected[round(s * (1 - gamma), 10)] = p - 1
        assert {round(v, 10): int(c) for v, c in zip(vals, counts) if v > 1e-14} == expected

    def test_per_observation_must_average(self):
        p = 3
        with pytest.raises(ValueError, match="average"):
            PsiSpec(2, 2, Covariance.identity(p), Covariance.identity(p),
                    per_obs1=[Covariance.identity(p), Covariance.identity(p, 2.0)])


class TestSigmaOracle:
    def test_identity_hand_value(self):
        spec = PsiSpec(4, 4, Covariance.identity(2), Covariance.identity(2))
        assert sigma_oracle_sq(spec) == pytest.approx(7 / 6, rel=1e-14)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 5), st.integers(2, 5))
    def test_matches_pair_loop(self, seed, n1, n2):
        rng = np.random.default_rng(seed)
        p = 4
        d1 = [rng.uniform(0.1, 3.0, p) for _ in range(n1)]
        d2 = [rng.uniform(0.1, 3.0, p) for _ in range(n2)]
        per1 = [Covariance.diagonal(d) for d in d1]
        per2 = [Covariance.diagonal(d) for d in d2]
        spec = PsiSpec(n1, n2, Covariance.diagonal(np.mean(d1, axis=0)), Covariance.diagonal(np.mean(d2, axis=0)),
                       per1, per2)
        assert sigma_oracle_sq(spec) == pytest.approx(pair_loop_variance(d1, d2), rel=1e-10)

    def test_large_n_ratio(self):
        spec = psi_spec(ModelSpec("II", 64, 64, 100))
        ratio = sigma_oracle_sq(spec) / (2 * psi_matrix(spec).trace_sq())
        assert abs(ratio - 1) < 0.03

    def test_monte_carlo_variance_model_one(self):
        draws = null_standardized_draws(ModelSpec("I", 8, 12, 20), 20000, seed=5)
        assert abs(draws.var() - 1) < 0.05


class TestSamplers:
    def test_single_eigenvalue(self):
        n = 100000
        x = reference_qf_sample([3.0], n, seed=1)
        assert abs(x.mean()) < 4 / math.sqrt(n)
        assert abs(x.var() - 1) < 5 / math.sqrt(n) * 3
        assert x.min() >= -1 / math.sqrt(2) - 1e-12

    def test_many_equal_eigenvalues_nearly_normal(self):
        x = reference_qf_sample((np.array([1.0]), np.array([10000])), 100000, seed=2)
        assert abs(skewness(x)) < 0.05

    @pytest.mark.parametrize("eigs", [[1.0, 2.0, 0.5], [5.0, 0.1, 0.1, 0.1], list(np.linspace(0.1, 1, 30))])
    def test_standardized(self, eigs):
        x = reference_qf_sample(eigs, 100000, seed=3)
        assert abs(x.mean()) < 0.02 and abs(x.var() - 1) < 0.03

    def test_zero_eigenvalues_rejected(self):
        with pytest.raises(ValueError):
            reference_qf_sample([0.0, 0.0], 10, seed=0)
        with pytest.raises(ValueError):
            reference_qf_sample([1.0, -1.0], 10, seed=0)

    def test_mixture_empty_is_normal(self):
        n = 50000
        x = mixture_limit_sample([], n, seed=4)
        assert stats.kstest(x, "norm").statistic < 1.63 / math.sqrt(n)

    def test_mixture_single_chi2(self):
        x = mixture_limit_sample([1.0], 200000, seed=5)
        assert skewness(x) == pytest.approx(2 * math.sqrt(2), rel=0.05)

    @pytest.mark.parametrize("kappas", [[0.5], [0.6, 0.3, 0.1], [1 / math.sqrt(2)]])
    def test_mixture_standardized(self, kappas):
        x = mixture_limit_sample(kappas, 100000, seed=6)
        assert abs(x.mean()) < 0.02 and abs(x.var() - 1) < 0.03

    def test_mixture_rejects_excess_weight(self):
        with pytest.raises(ValueError):
            mixture_limit_sample([0.8, 0.8], 10, seed=0)

    def test_reference_equals_full_mixture(self):
        lam = np.array([4.0, 2.0, 1.0, 1.0, 0.5, 0.25])
        n = 100000
        a = reference_qf_sample(lam, n, seed=7)
        b = mixture_limit_sample(lam / np.sqrt(np.sum(lam**2)), n, seed=8)
        assert stats.ks_2samp(a, b).statistic < 1.63 * math.sqrt(2 / n)

    def test_deterministic_across_workers(self):
        lam = [1.0, 0.5]
        np.testing.assert_array_equal(reference_qf_sample(lam, 200000, 9, workers=1),
                                      reference_qf_sample(lam, 200000, 9, workers=4))


class TestGn:
    def test_limits(self):
        assert gn_cdf([1.0, 2.0], np.inf, 1000, seed=0) == 1.0
        assert gn_cdf([1.0, 2.0], -np.inf, 1000, seed=0) == 0.0

    def test_support_boundary(self):
        assert gn_cdf([2.0], -1 / math.sqrt(2) - 1e-9, 10000, seed=0) == 0.0

    def test_monotone(self):
        dist = ReferenceDistribution([1.0, 0.5, 0.2], 5000, seed=1)
        vals = dist.cdf(np.linspace(-3, 5, 400))
        assert np.all(np.diff(vals) >= 0)

    def test_normal_limit_median(self):
        assert gn_cdf((np.array([1.0]), np.array([10000])), 0.0, 200000, seed=2) == pytest.approx(0.5, abs=0.01)

    def test_invalid_count(self):
        with pytest.raises(ValueError):
            gn_cdf([1.0], 0.0, 0)


class TestLocalPower:
    @pytest.mark.parametrize("alpha", [0.01, 0.05, 0.2])
    def test_zero_shift_gives_alpha(self, alpha):
        n = 50000
        assert abs(local_power_predict([1.0, 0.3], alpha, 0.0, n, seed=3) - alpha) <= 1 / n

    def test_normal_limit(self):
        lam = 2 / 40
        eigs = (np.array([lam]), np.array([10000]))
        shift = 1.0 * math.sqrt(2 * 10000 * lam**2)
        got = local_power_predict(eigs, 0.05, shift, 200000, seed=4)
        assert got == pytest.approx(1 - stats.norm.cdf(stats.norm.ppf(0.95) - 1), abs=0.01)

    def test_huge_shift(self):
        assert local_power_predict([1.0], 0.05, 1e6, 10000, seed=5) == 1.0

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            local_power_predict([1.0], 0.0, 1.0, 100)
        with pytest.raises(ValueError):
            local_power_predict([1.0], 0.05, -1.0, 100)
