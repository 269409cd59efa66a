import numpy as np
import pytest

from galqr import gal
from galqr.calibration import draw_from_prior, rank_statistic, run_sbc, simulate_dataset
from galqr.sampler import QuantRegConfig


def test_rank_statistic_counts_smaller_thinned_draws():
    draws = np.arange(1000.0)
    assert rank_statistic(-1.0, draws, 99) == 0
    assert rank_statistic(2000.0, draws, 99) == 99
    # evenly spaced picks 0, ~10.1, ... so 500.5 sits in the middle
    assert rank_statistic(500.5, draws, 99) == 50


def test_draw_from_prior_respects_support_and_moments():
    cfg = QuantRegConfig(p0=0.25, gamma_prior=(2.0, 2.0), a_sigma=3.0, b_sigma=2.0)
    r = np.random.default_rng(0)
    draws = [draw_from_prior(cfg, 3, r) for _ in range(4000)]
    L, U = gal.gamma_support(0.25)
    gammas = np.array([d[2] for d in draws])
    sigmas = np.array([d[1] for d in draws])
    assert np.all((gammas > L) & (gammas < U))
    # Beta(2, 2) on the rescaled shape is centred on the midpoint
    assert gammas.mean() == pytest.approx((L + U) / 2, abs=0.05)
    assert sigmas.mean() == pytest.approx(2.0 / (3.0 - 1.0), rel=0.05)
    assert draws[0][0].shape == (3,)
    assert draw_from_prior(QuantRegConfig(gamma_fixed_at_zero=True), 2, r)[2] == 0.0


def test_simulated_dataset_has_intercept_and_pinned_quantile():
    r = np.random.default_rng(1)
    data = simulate_dataset(np.array([1.0, 0.0]), 1.0, 0.5, 0.25, 20_000, r)
    assert data.x.shape == (20_000, 2) and np.all(data.x[:, 0] == 1.0)
    assert np.mean(data.y <= 1.0) == pytest.approx(0.25, abs=0.01)


def test_run_sbc_shapes_and_determinism():
    cfg = QuantRegConfig(p0=0.5, burn_in=50, thin=1, keep=40)
    a = run_sbc(cfg, runs=4, n=15, n_slopes=1, seed=2, n_rank=19, bins=5)
    b = run_sbc(cfg, runs=4, n=15, n_slopes=1, seed=2, n_rank=19, bins=5)
    assert set(a.ranks) == {"beta_0", "beta_1", "sigma", "gamma"}
    for k, v in a.ranks.items():
        assert v.shape == (4,) and np.all((v >= 0) & (v <= 19))
        np.testing.assert_array_equal(v, b.ranks[k])
        assert a.counts(k).sum() == 4 and 0 <= a.pvalues[k] <= 1
    with pytest.raises(ValueError):
        run_sbc(cfg, runs=1, n=5, n_slopes=1, seed=0, n_rank=3, bins=10)
