"""Lasso-regularized quantile regression.

Slopes get the conditional Laplace prior with rate ``eta`` written as a
normal scale mixture,

    beta_k | omega_k ~ N(0, omega_k),  omega_k ~ Exp(rate eta^2 / 2),
    eta^2 ~ Gamma(a_eta, rate b_eta),

and the intercept (column 0 of the design) keeps a normal prior.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ._linalg import draw_mvn_precision
from .data import Dataset
from .kernels import sample_gig_half
from .sampler import (
    ChainState,
    PosteriorSamples,
    QuantRegConfig,
    _coefs,
    beta_precision_terms,
    run_chain,
)


@dataclass
class LassoPriorConfig:
    """Defaults give eta^2 prior mean 1 and variance 10."""

    intercept_mean: float = 0.0
    intercept_var: float = 100.0
    a_eta: float = 0.1
    b_eta: float = 0.1

    def __post_init__(self):
        if not (self.a_eta > 0 and self.b_eta > 0 and self.intercept_var > 0):
            raise ValueError("lasso prior parameters must be positive")


@dataclass
class LassoLatents:
    omega: np.ndarray
    eta2: float


def slope_prior(omega, cfg: LassoPriorConfig):
    prec = np.diag(np.concatenate([[1.0 / cfg.intercept_var], 1.0 / np.asarray(omega, dtype=float)]))
    rhs = np.zeros(prec.shape[0])
    rhs[0] = cfg.intercept_mean / cfg.intercept_var
    return prec, rhs


def update_slopes(state: ChainState, data: Dataset, config: QuantRegConfig, rng, stats=None):
    """Joint normal draw of (intercept, slopes) with prior precision diag(1/var0, 1/omega)."""
    coefs = _coefs(state, config)
    prior_prec, prior_rhs = slope_prior(state.omega, config.lasso)
    prec, rhs = beta_precision_terms(state, data.x, coefs, prior_prec, prior_rhs)
    beta, jittered = draw_mvn_precision(prec, rhs, rng)
    if jittered and stats is not None:
        stats["jitter"] += 1
    return beta


def update_omega(beta_slopes, eta2, rng):
    """omega_k ~ GIG(1/2, beta_k^2, eta^2), i.e. 1/omega_k ~ IG(sqrt(eta^2/beta_k^2), eta^2).

    For |beta_k| < 1e-12 the draw is the beta_k -> 0 limit Gamma(1/2, rate eta^2/2).
    """
    if not eta2 > 0:
        raise ValueError("eta2 must be positive")
    b = np.asarray(beta_slopes, dtype=float)
    a = np.where(np.abs(b) < 1e-12, 0.0, b * b)
    omega = np.asarray(sample_gig_half(a, np.full_like(a, eta2), rng), dtype=float).reshape(b.shape)
    return np.maximum(omega, np.finfo(float).tiny)


def update_eta2(omega, cfg: LassoPriorConfig, rng):
    """eta^2 ~ Gamma(a_eta + d, rate b_eta + sum(omega)/2)."""
    omega = np.asarray(omega, dtype=float)
    shape = cfg.a_eta + omega.size
    rate = cfg.b_eta + 0.5 * omega.sum()
    return float(rng.gamma(shape, 1.0 / rate))


def standardized_effects(beta_draws, data: Dataset, intercept: bool = True):
    """beta*_j = (s_xj / s_y) beta_j for every slope in every draw.

    With ``intercept`` the first design column is skipped (both in ``data``
    and in ``beta_draws`` when it has one column more than the slopes).
    """
    x = data.x[:, 1:] if intercept else data.x
    beta = np.atleast_2d(np.asarray(beta_draws, dtype=float))
    if beta.shape[1] == x.shape[1] + 1:
        beta = beta[:, 1:]
    if beta.shape[1] != x.shape[1]:
        raise ValueError("beta draws do not match the number of slopes")
    sx = x.std(axis=0, ddof=1)
    sy = data.y.std(ddof=1)
    if np.any(sx == 0) or sy == 0:
        raise ValueError("standardized effects need covariates and response with nonzero SD")
    return beta * (sx / sy)


def standardize_design(x):
    """Center and scale every column after the intercept column."""
    x = np.asarray(x, dtype=float)
    center = x[:, 1:].mean(axis=0)
    scale = x[:, 1:].std(axis=0, ddof=1)
    if np.any(scale == 0):
        raise ValueError("cannot standardize a constant covariate")
    xs = x.copy()
    xs[:, 1:] = (x[:, 1:] - center) / scale
    return xs, center, scale


def unstandardize_draws(beta_std, center, scale):
    beta = np.array(beta_std, dtype=float)
    beta[:, 1:] = beta_std[:, 1:] / scale
    beta[:, 0] = beta_std[:, 0] - beta[:, 1:] @ center
    return beta


def fit_lasso(data: Dataset, config: QuantRegConfig, rng=None, standardize: bool = True) -> PosteriorSamples:
    """Run the lasso chain on standardized covariates (response left raw).

    ``beta`` of the result is on the original covariate scale; the
    standardized-scale draws are in ``extras['beta_standardized']``.
    """
    if config.lasso is None:
        config = replace(config, lasso=LassoPriorConfig())
    if not standardize:
        return run_chain(data, config, rng)
    xs, center, scale = standardize_design(data.x)
    std_data = Dataset(xs, data.y, data.censored, data.threshold, list(data.names), data.response_name)
    samples = run_chain(std_data, config, rng)
    samples.extras["beta_standardized"] = samples.beta
    samples.beta = unstandardize_draws(samples.beta, center, scale)
    samples.diagnostics["standardization"] = dict(center=center.tolist(), scale=scale.tolist())
    return samples
