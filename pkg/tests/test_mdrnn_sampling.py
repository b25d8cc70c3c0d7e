import math

import numpy as np
import pytest

from impsy import mdrnn


def single_component(mu, sigma):
    return mdrnn.MixtureParams(
        pi=np.array([1.0]),
        mu=np.asarray(mu, dtype=np.float64).reshape(1, -1),
        sigma=np.asarray(sigma, dtype=np.float64).reshape(1, -1),
    )


class TestSample:
    def test_k1_sigma_temp_zero_returns_mu_exactly(self):
        mix = single_component([0.3, -0.7], [0.5, 2.0])
        out = mdrnn.sample(mix, sigma_temp=0.0, rng=np.random.default_rng(0))
        assert np.array_equal(out, mix.mu[0])

    def test_pi_temp_to_zero_selects_argmax(self):
        mix = mdrnn.MixtureParams(
            pi=np.array([0.2, 0.5, 0.3]),
            mu=np.array([[0.0], [10.0], [20.0]]),
            sigma=np.full((3, 1), 1e-6),
        )
        rng = np.random.default_rng(1)
        for _ in range(200):
            out = mdrnn.sample(mix, pi_temp=1e-9, sigma_temp=0.0, rng=rng)
            assert out[0] == 10.0

    def test_monte_carlo_mean_and_variance(self):
        n = 10_000
        mix = single_component([0.0], [1.0])
        rng = np.random.default_rng(123)
        draws = np.array([mdrnn.sample(mix, rng=rng)[0] for _ in range(n)])
        assert abs(draws.mean()) < 4.0 / math.sqrt(n)
        assert abs(draws.var() - 1.0) < 0.10

    def test_sigma_temp_scales_spread(self):
        mix = single_component([0.0], [1.0])
        rng = np.random.default_rng(7)
        hot = np.array([mdrnn.sample(mix, sigma_temp=2.0, rng=rng)[0] for _ in range(4000)])
        rng = np.random.default_rng(7)
        cold = np.array([mdrnn.sample(mix, sigma_temp=0.5, rng=rng)[0] for _ in range(4000)])
        assert hot.std() == pytest.approx(4 * cold.std(), rel=1e-9)

    def test_pi_temp_one_respects_mixture_weights(self):
        mix = mdrnn.MixtureParams(
            pi=np.array([0.8, 0.2]),
            mu=np.array([[0.0], [100.0]]),
            sigma=np.full((2, 1), 1e-9),
        )
        rng = np.random.default_rng(99)
        picks = np.array([mdrnn.sample(mix, sigma_temp=0.0, rng=rng)[0] for _ in range(5000)])
        share_high = float(np.mean(picks > 50.0))
        assert abs(share_high - 0.2) < 0.02

    def test_invalid_temperatures_rejected(self):
        mix = single_component([0.0], [1.0])
        with pytest.raises(ValueError):
            mdrnn.sample(mix, pi_temp=0.0)
        with pytest.raises(ValueError):
            mdrnn.sample(mix, sigma_temp=-0.1)
