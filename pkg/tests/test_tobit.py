import math

import numpy as np
import pytest
from scipy import integrate, stats

from galqr import gal
from galqr import sampler as S
from galqr import tobit as T
from galqr.data import Dataset, add_intercept
from galqr.gal import GalParams


def censored_toy(threshold=0.0):
    y = np.array([1.3, 0.4, 2.8, 0.9, 0.0, 0.0]) + threshold
    cens = np.array([False, False, False, False, True, True])
    return Dataset(np.ones((6, 1)), y, cens, threshold)


def test_censor_helper():
    y, mask = T.censor([-1.0, 0.0, 2.0], 0.0)
    np.testing.assert_array_equal(y, [0.0, 0.0, 2.0])
    np.testing.assert_array_equal(mask, [True, True, False])


def test_update_w_below_threshold_and_ks():
    data = censored_toy(threshold=0.5)
    st = S.ChainState(beta=np.array([1.0]), sigma=0.8, gamma=0.5, v=np.full(6, 0.9), s=np.full(6, 0.4),
                      y=data.y.copy())
    cfg = S.QuantRegConfig(p0=0.4)
    c = S._coefs(st, cfg)
    mean = 1.0 + 0.8 * c.alpha * 0.4 + c.A * 0.9
    sd = math.sqrt(0.8 * c.B * 0.9)
    r = np.random.default_rng(0)
    w = np.concatenate([T.update_w(st, data, cfg, r) for _ in range(10_000)])
    assert np.all(w <= 0.5)
    ref = stats.truncnorm(-np.inf, (0.5 - mean) / sd, loc=mean, scale=sd)
    assert stats.kstest(w, ref.cdf).pvalue > 0.01


def test_update_w_noop_without_censoring():
    data = Dataset(np.ones((3, 1)), np.array([1.0, 2.0, 3.0]))
    st = S.ChainState(beta=np.zeros(1), sigma=1.0, gamma=0.0, v=np.ones(3), s=np.ones(3), y=data.y.copy())
    assert T.update_w(st, data, S.QuantRegConfig(), np.random.default_rng()).size == 0


def test_zero_censoring_identical_to_plain_chain():
    r = np.random.default_rng(1)
    x, _ = add_intercept(r.normal(size=(40, 1)))
    y = x @ np.array([1.0, 1.0]) + r.normal(size=40)
    cfg = S.QuantRegConfig(p0=0.3, burn_in=100, thin=2, keep=100, seed=4)
    a = T.run_tobit_chain(Dataset(x, y), cfg)
    b = S.run_chain(Dataset(x, y), cfg)
    np.testing.assert_array_equal(a.beta, b.beta)
    np.testing.assert_array_equal(a.gamma, b.gamma)
    assert a.diagnostics["censoring_rate"] == 0.0


def grid_posterior(data, p0, gammas, betas, sigmas, cfg):
    """Posterior on a (gamma, beta, sigma) grid from the censored likelihood:
    densities at observed rows, CDF at the threshold for censored rows."""
    obs, cens = data.y[~data.censored], data.censored.sum()
    B, Sg = np.meshgrid(betas, sigmas, indexing="ij")
    logp = np.empty((gammas.size, betas.size, sigmas.size))
    L, U = gal.gamma_support(p0)
    for k, g in enumerate(gammas):
        std = GalParams(p0, g)
        t = (obs[None, None, :] - B[..., None]) / Sg[..., None]
        ll = np.sum(gal.gal_logpdf(t, std), axis=-1) - obs.size * np.log(Sg)
        tc = (data.threshold - B) / Sg
        ll += cens * np.log(gal.gal_cdf(tc, std))
        logp[k] = (ll + stats.norm.logpdf(B, 0, 10) + stats.invgamma.logpdf(Sg, cfg.a_sigma, scale=cfg.b_sigma)
                   + stats.beta.logpdf((g - L) / (U - L), *cfg.gamma_prior))
    return logp


def test_augmentation_matches_censored_likelihood_al():
    data = censored_toy()
    cfg = S.QuantRegConfig(p0=0.4, burn_in=2000, thin=5, keep=4000, seed=2, gamma_fixed_at_zero=True)
    betas, sigmas = np.linspace(-12, 12, 801), np.linspace(0.01, 40, 800)
    logp = grid_posterior(data, 0.4, np.array([0.0]), betas, sigmas, cfg)[0]
    w = np.exp(logp - logp.max())
    marg = integrate.trapezoid(w, sigmas, axis=1)
    cdf = integrate.cumulative_trapezoid(marg, betas, initial=0)
    cdf /= cdf[-1]
    out = T.run_tobit_chain(data, cfg)
    assert stats.kstest(out.beta[:, 0], lambda b: np.interp(b, betas, cdf)).pvalue > 0.01


def test_augmentation_matches_censored_likelihood_gal():
    data = censored_toy()
    p0 = 0.4
    cfg = S.QuantRegConfig(p0=p0, burn_in=3000, thin=5, keep=6000, seed=3)
    L, U = gal.gamma_support(p0)
    gammas = np.linspace(L + 1e-3, U - 1e-3, 60)
    betas, sigmas = np.linspace(-8, 10, 181), np.linspace(0.01, 25, 250)
    logp = grid_posterior(data, p0, gammas, betas, sigmas, cfg)
    w = np.exp(logp - logp.max())
    total = integrate.trapezoid(integrate.trapezoid(integrate.trapezoid(w, sigmas), betas), gammas)
    beta_marg = integrate.trapezoid(integrate.trapezoid(w, sigmas, axis=2), gammas, axis=0) / total
    gamma_marg = integrate.trapezoid(integrate.trapezoid(w, sigmas, axis=2), betas, axis=1) / total
    out = T.run_tobit_chain(data, cfg)
    for draws, grid, marg in [(out.beta[:, 0], betas, beta_marg), (out.gamma, gammas, gamma_marg)]:
        mean = integrate.trapezoid(grid * marg, grid)
        sd = math.sqrt(integrate.trapezoid((grid - mean) ** 2 * marg, grid))
        ess = S.effective_sample_size(draws)
        assert abs(draws.mean() - mean) < 4 * sd / math.sqrt(ess)
        assert draws.std() == pytest.approx(sd, rel=0.1)


def test_recovery_and_predictive_censoring_rate():
    # one dataset; interval coverage across datasets is the job of the calibration check
    r = np.random.default_rng(6)
    n, p0 = 400, 0.25
    x, names = add_intercept(r.normal(size=(n, 2)))
    beta = np.array([0.4, 1.0, -0.7])
    par = GalParams(p0, 1.0, 0.0, 1.0)
    ystar = x @ beta + gal.gal_sample(par, r, n)
    y, mask = T.censor(ystar)
    assert 0.2 <= mask.mean() <= 0.4
    out = T.run_tobit_chain(Dataset(x, y, mask, 0.0, names),
                            S.QuantRegConfig(p0=p0, burn_in=2000, thin=2, keep=2000, seed=6))
    cols = out.columns()
    for k, v in dict(beta_0=0.4, beta_1=1.0, beta_2=-0.7, sigma=1.0, gamma=1.0).items():
        lo, hi = np.quantile(cols[k], [0.025, 0.975])
        assert lo < v < hi, k
    reps = S.posterior_predictive_replicates(out, x, np.random.default_rng(7), mc_draws=500)
    rate = np.mean(reps <= 0.0)
    assert abs(rate - mask.mean()) < 4 * math.sqrt(mask.mean() * (1 - mask.mean()) / n)
