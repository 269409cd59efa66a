"""Tobit quantile regression: responses left-censored at a threshold.

Latent responses of censored rows are imputed from their truncated normal
full conditionals and the rest of the sweep runs on the completed data.
"""
from __future__ import annotations

import numpy as np

from .data import Dataset
from .kernels import sample_truncnorm_below
from .sampler import ChainState, PosteriorSamples, QuantRegConfig, _coefs, run_chain


def w_conditional_params(state: ChainState, data: Dataset, coefs):
    rows = data.censored
    mean = (data.x[rows] @ state.beta + state.sigma * coefs.alpha * state.s[rows]
            + coefs.A * state.v[rows])
    var = state.sigma * coefs.B * state.v[rows]
    return mean, var


def update_w(state: ChainState, data: Dataset, config: QuantRegConfig, rng):
    """Latent responses of the censored rows, each from N(.,.) truncated to (-inf, c]."""
    if data.censored is None or not data.censored.any():
        return np.empty(0)
    coefs = _coefs(state, config)
    mean, var = w_conditional_params(state, data, coefs)
    w = np.asarray(sample_truncnorm_below(mean, var, data.threshold, rng), dtype=float).reshape(-1)
    return np.minimum(w, data.threshold)


def run_tobit_chain(data: Dataset, config: QuantRegConfig, rng=None) -> PosteriorSamples:
    samples = run_chain(data, config, rng)
    rate = float(data.censored.mean()) if data.censored is not None and data.n else 0.0
    samples.diagnostics["censoring_rate"] = rate
    return samples


def censor(y, threshold=0.0):
    """Observed responses max(threshold, y*) and the censoring mask."""
    y = np.asarray(y, dtype=float)
    mask = y <= threshold
    return np.where(mask, threshold, y), mask
