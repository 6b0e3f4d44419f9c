"""Tests for the deterministic data generators and their RNG.

Oracles: the published splitmix64 test vector for seed 0, scipy's normal
quantile for the inverse-CDF approximation, and least squares fits on the
generated benchmark data.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
import scipy.stats

from modejump.datagen import (
    CounterRng,
    EXAMPLE1_BETA,
    GeneratorSpec,
    _inv_normal_cdf,
    generate_example1,
    generate_gaussian,
    generate_small_fixture,
)
from modejump.errors import InvalidArgumentError


class TestCounterRng:
    def test_splitmix64_reference_vector(self):
        # First three outputs for seed 0 from the reference implementation.
        rng = CounterRng(0)
        assert rng.next_u64() == 0xE220A8397B1DCDAF
        assert rng.next_u64() == 0x6E789E6AA1B965F4
        assert rng.next_u64() == 0x06C45D188009454F

    def test_seed_masked_to_64_bits(self):
        assert CounterRng(1 << 64).next_u64() == CounterRng(0).next_u64()

    def test_uniform_in_open_interval(self):
        rng = CounterRng(123)
        for _ in range(1000):
            u = rng.uniform()
            assert 0.0 < u < 1.0

    def test_uniform_mean(self):
        rng = CounterRng(7)
        xs = [rng.uniform() for _ in range(20000)]
        assert np.mean(xs) == pytest.approx(0.5, abs=0.01)

    def test_normal_moments(self):
        rng = CounterRng(9)
        xs = np.array([rng.normal() for _ in range(20000)])
        assert xs.mean() == pytest.approx(0.0, abs=0.03)
        assert xs.std() == pytest.approx(1.0, abs=0.03)

    def test_bernoulli_rate(self):
        rng = CounterRng(5)
        xs = [rng.bernoulli(0.3) for _ in range(20000)]
        assert np.mean(xs) == pytest.approx(0.3, abs=0.015)


class TestInverseNormalCdf:
    def test_matches_scipy_ppf(self):
        for p in [1e-9, 1e-4, 0.01, 0.02425, 0.3, 0.5, 0.7, 0.975, 0.9999, 1 - 1e-9]:
            assert _inv_normal_cdf(p) == pytest.approx(
                scipy.stats.norm.ppf(p), rel=2e-8, abs=1e-8
            )

    def test_symmetry(self):
        for p in [0.01, 0.2, 0.4]:
            assert _inv_normal_cdf(p) == pytest.approx(-_inv_normal_cdf(1 - p))

    def test_domain(self):
        with pytest.raises(InvalidArgumentError):
            _inv_normal_cdf(0.0)
        with pytest.raises(InvalidArgumentError):
            _inv_normal_cdf(1.0)


class TestGeneratorSpec:
    def test_beta_length_check(self):
        with pytest.raises(InvalidArgumentError):
            GeneratorSpec(p=3, T=10, beta0=0.0, beta=(1.0, 2.0))

    def test_correlation_checks(self):
        with pytest.raises(InvalidArgumentError):
            GeneratorSpec(p=2, T=10, beta0=0.0, beta=(1.0, 0.0),
                          correlated_pair=(1, 1, 0.5))
        with pytest.raises(InvalidArgumentError):
            GeneratorSpec(p=2, T=10, beta0=0.0, beta=(1.0, 0.0),
                          correlated_pair=(1, 2, 1.0))


class TestExample1:
    def test_shape_and_family(self):
        data = generate_example1(1)
        assert data.T == 100
        assert data.p == 15
        assert data.family == "gaussian"

    def test_deterministic_in_seed(self):
        a = generate_example1(3)
        b = generate_example1(3)
        assert np.array_equal(a.X, b.X)
        assert np.array_equal(a.y, b.y)
        c = generate_example1(4)
        assert not np.array_equal(a.X, c.X)

    def test_columns_centered(self):
        data = generate_example1(2)
        assert np.abs(data.X.mean(axis=0)).max() < 1e-12

    def test_column_pair_correlation_band(self):
        for seed in range(1, 21):
            data = generate_example1(seed)
            corr = np.corrcoef(data.X[:, 1], data.X[:, 8])[0, 1]
            assert 0.97 <= corr <= 0.999

    def test_true_model_fits_well(self):
        data = generate_example1(5)
        active = [j for j, b in enumerate(EXAMPLE1_BETA) if b != 0.0]
        D = np.column_stack([np.ones(100), data.X[:, active]])
        beta, *_ = np.linalg.lstsq(D, data.y, rcond=None)
        resid = data.y - D @ beta
        tss = float(np.sum((data.y - data.y.mean()) ** 2))
        r2 = 1.0 - float(resid @ resid) / tss
        assert r2 > 0.9

    def test_recovers_generating_coefficients(self):
        data = generate_example1(6)
        D = np.column_stack([np.ones(100), data.X])
        beta, *_ = np.linalg.lstsq(D, data.y, rcond=None)
        # Large signals recovered within loose bands at unit noise.
        assert beta[2] == pytest.approx(8.72, abs=1.5)
        assert beta[0] == pytest.approx(2.0, abs=0.5)


class TestSmallFixture:
    def test_deterministic(self):
        a = generate_small_fixture(p=6, T=40, seed=2)
        b = generate_small_fixture(p=6, T=40, seed=2)
        assert np.array_equal(a.X, b.X)
        assert np.array_equal(a.y, b.y)

    def test_p_limit(self):
        with pytest.raises(InvalidArgumentError):
            generate_small_fixture(p=13, T=10)

    def test_binary_structure(self):
        data = generate_small_fixture(p=10, T=1000, structure="binary", seed=1)
        assert set(np.unique(data.X)) <= {0.0, 1.0}
        # First two columns are positively correlated via the shared latent.
        corr = np.corrcoef(data.X[:, 0], data.X[:, 1])[0, 1]
        assert corr > 0.2
        rates = data.X.mean(axis=0)
        assert np.all(np.abs(rates - 0.3) < 0.08)

    def test_logistic_structure(self):
        data = generate_small_fixture(p=4, T=200, structure="logistic", seed=3)
        assert data.family == "binomial-logit"
        assert set(np.unique(data.y)) <= {0.0, 1.0}

    def test_unknown_structure(self):
        with pytest.raises(InvalidArgumentError):
            generate_small_fixture(p=3, T=10, structure="copula")

    def test_active_set_is_map_under_enumeration(self):
        from modejump.likelihood import PriorSpec, make_scorer
        from modejump.models import ModelVector, enumerate_all

        data = generate_small_fixture(
            p=10, T=1000, structure="binary", seed=1, active=[1, 5, 8]
        )
        scorer = make_scorer(data, PriorSpec(g=1000.0))
        best = max(enumerate_all(10), key=lambda g: sum(scorer(g)))
        assert best == ModelVector.from_indices(10, [1, 5, 8])

    def test_custom_beta_validation(self):
        with pytest.raises(InvalidArgumentError):
            generate_small_fixture(p=4, T=10, active=[1, 2], beta=[1.0])
        with pytest.raises(InvalidArgumentError):
            generate_small_fixture(p=4, T=10, active=[9])


class TestGenerateGaussian:
    def test_correlated_pair_direction(self):
        spec = GeneratorSpec(
            p=4, T=500, beta0=0.0, beta=(0.0,) * 4, noise_sd=1.0,
            correlated_pair=(1, 3, -0.8), seed=11,
        )
        data = generate_gaussian(spec)
        corr = np.corrcoef(data.X[:, 0], data.X[:, 2])[0, 1]
        assert corr == pytest.approx(-0.8, abs=0.06)
