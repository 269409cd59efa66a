"""Bayesian quantile regression with generalized asymmetric Laplace errors."""
from __future__ import annotations

__version__ = "0.1.0"

from .data import Dataset, add_intercept
from .gal import (
    GalParams,
    GalRawParams,
    gal_cdf,
    gal_logpdf,
    gal_pdf,
    gal_sample,
    gamma_support,
    g_func,
    h_func,
    p_of_gamma,
)
from .lasso import LassoPriorConfig, fit_lasso
from .sampler import PosteriorSamples, QuantRegConfig, run_chain
from .tobit import run_tobit_chain

__all__ = [
    "Dataset",
    "GalParams",
    "GalRawParams",
    "LassoPriorConfig",
    "PosteriorSamples",
    "QuantRegConfig",
    "add_intercept",
    "fit_lasso",
    "g_func",
    "gal_cdf",
    "gal_logpdf",
    "gal_pdf",
    "gal_sample",
    "gamma_support",
    "h_func",
    "p_of_gamma",
    "run_chain",
    "run_tobit_chain",
]
