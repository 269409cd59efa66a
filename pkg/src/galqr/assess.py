"""Model assessment: check loss, mean check loss, correct inclusion/exclusion
scores, posterior predictive loss (quadratic and check loss) and BIC.

Predictive criteria take a replicate matrix of shape (draws, n), as produced
by ``sampler.posterior_predictive_replicates``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import gal
from .data import Dataset
from .gal import check_loss
from .lasso import standardized_effects

CIE_THRESHOLD = 0.1

__all__ = [
    "CieReport",
    "PplReport",
    "bic",
    "bic_censored",
    "bic_from_samples",
    "check_loss",
    "cie_score",
    "log_likelihood",
    "mean_check_loss",
    "ppl_check",
    "ppl_quadratic",
    "report_rows",
    "write_report",
]


def mean_check_loss(beta_hat, beta_true, test_x, p0):
    """N^-1 sum rho_p0(x_i'beta_hat - x_i'beta_true) over the test rows."""
    x = np.atleast_2d(np.asarray(test_x, dtype=float))
    beta_hat = np.asarray(beta_hat, dtype=float)
    beta_true = np.asarray(beta_true, dtype=float)
    if beta_hat.shape != beta_true.shape or x.shape[1] != beta_hat.shape[0]:
        raise ValueError("beta_hat, beta_true and test_x dimensions disagree")
    return float(np.mean(check_loss(x @ beta_hat - x @ beta_true, p0)))


@dataclass
class CieReport:
    per_draw: np.ndarray
    included: np.ndarray
    threshold: float = CIE_THRESHOLD

    @property
    def score(self) -> float:
        return float(self.per_draw.mean())


def cie_score(beta_draws, data: Dataset, true_beta, intercept: bool = True,
              threshold: float = CIE_THRESHOLD) -> CieReport:
    """Fraction of slopes correctly included (|beta*| > threshold) or excluded.

    ``true_beta`` holds the true slopes (without intercept); a slope is
    truly active when it is nonzero.
    """
    effects = standardized_effects(beta_draws, data, intercept=intercept)
    truth = np.asarray(true_beta, dtype=float).reshape(-1) != 0
    if truth.shape[0] != effects.shape[1]:
        raise ValueError("true_beta must have one entry per slope")
    included = np.abs(effects) > threshold
    per_draw = (included == truth).mean(axis=1)
    return CieReport(per_draw, included, threshold)


@dataclass
class PplReport:
    P: float
    G: float
    D: float
    loss_kind: str
    m_weight: float | None = None


def _replicates(replicates, y):
    reps = np.atleast_2d(np.asarray(replicates, dtype=float))
    y = np.asarray(y, dtype=float).reshape(-1)
    if reps.size == 0 or reps.shape[1] != y.shape[0]:
        raise ValueError("replicates must be a nonempty (draws, n) matrix matching y")
    return reps, y


def ppl_quadratic(replicates, y, m_weight=math.inf) -> PplReport:
    """D_m = P + m/(m+1) G with P the summed predictive variances."""
    if not m_weight >= 0:
        raise ValueError("m_weight must be nonnegative")
    reps, y = _replicates(replicates, y)
    P = float(reps.var(axis=0).sum())
    G = float(np.sum((y - reps.mean(axis=0)) ** 2))
    w = 1.0 if math.isinf(m_weight) else m_weight / (m_weight + 1.0)
    return PplReport(P, G, P + w * G, "quadratic", float(m_weight))


def ppl_check(replicates, y, p0) -> PplReport:
    """Check-loss version: D = sum E rho(y - y*), G = sum rho(y - E y*), P = D - G."""
    reps, y = _replicates(replicates, y)
    D = float(check_loss(y - reps, p0).mean(axis=0).sum())
    G = float(check_loss(y - reps.mean(axis=0), p0).sum())
    # Jensen makes P >= 0; clip round-off
    return PplReport(max(D - G, 0.0), G, D, "check")


def bic(loglik, k_params, n_obs):
    if n_obs < 1:
        raise ValueError("n_obs must be at least 1")
    return -2.0 * loglik + k_params * math.log(n_obs)


def bic_censored(loglik, k_params, n_uncensored):
    """Revised BIC: the penalty counts only uncensored observations."""
    return bic(loglik, k_params, n_uncensored)


def log_likelihood(data: Dataset, beta, sigma, gamma, p0):
    """GAL log-likelihood; censored rows contribute log F(threshold)."""
    params = gal.GalParams(p0, float(gamma), 0.0, float(sigma))
    resid = data.y - data.x @ np.asarray(beta, dtype=float)
    if not data.is_censored:
        return float(np.sum(gal.gal_logpdf(resid, params)))
    obs = ~data.censored
    ll = float(np.sum(gal.gal_logpdf(resid[obs], params)))
    cdf = np.asarray(gal.gal_cdf(resid[data.censored], params))
    with np.errstate(divide="ignore"):
        return ll + float(np.sum(np.log(cdf)))


def bic_from_samples(samples, data: Dataset):
    """(loglik, BIC) with the likelihood at the posterior means.

    The parameter count is the coefficients plus sigma, plus gamma unless it
    was pinned at zero. Censored data use the revised BIC.
    """
    m = samples.posterior_mean()
    gamma = 0.0 if samples.config.gamma_fixed_at_zero else m["gamma"]
    ll = log_likelihood(data, m["beta"], m["sigma"], gamma, samples.p0)
    k = data.p + 1 + (0 if samples.config.gamma_fixed_at_zero else 1)
    if data.is_censored:
        return ll, bic_censored(ll, k, data.n_uncensored)
    return ll, bic(ll, k, data.n)


def report_rows(model: str, p0: float, criteria: dict) -> list[dict]:
    return [dict(model=model, p0=p0, criterion=k, value=float(v)) for k, v in criteria.items()]


def write_report(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["model", "p0", "criterion", "value"], lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({**row, "value": repr(float(row["value"]))})
