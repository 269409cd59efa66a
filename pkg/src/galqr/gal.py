"""Generalized asymmetric Laplace (GAL) distribution.

Two parameterizations are provided:

* raw ``(p, alpha, mu, sigma)``: the mixture
  ``mu + sigma*alpha*s + sigma*A(p)*z + sigma*sqrt(B(p)*z)*eps`` with
  ``z ~ Exp(1)``, ``s ~ N+(0, 1)``, ``eps ~ N(0, 1)``;
* quantile-fixed ``(p0, gamma, mu, sigma)``: ``mu`` is the ``p0``-quantile
  for every admissible ``gamma``.

Conditional on ``s`` the standardized variable is asymmetric Laplace
shifted by ``alpha*s``, so densities and CDFs are half-normal integrals of
AL pieces. Each piece is ``exp(linear in s) * phi(s)`` and integrates in
closed form; everything is evaluated on the log scale.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import NamedTuple

import numpy as np
from scipy.special import log_ndtr, ndtr

from .kernels import log_ndtr_diff, _scalarize

LOG2 = math.log(2.0)
# |gamma| below this is evaluated through the AL limit
GAMMA_ZERO_TOL = 1e-8


# ---------------------------------------------------------------------------
# asymmetric Laplace
# ---------------------------------------------------------------------------

def check_loss(u, p):
    """rho_p(u) = u (p - I(u < 0))."""
    u = np.asarray(u, dtype=float)
    return _scalarize(u * (p - (u < 0)))


def al_logpdf(y, p, mu=0.0, sigma=1.0):
    u = (np.asarray(y, dtype=float) - mu) / sigma
    return _scalarize(math.log(p * (1.0 - p) / sigma) - u * (p - (u < 0)))


def al_cdf(y, p, mu=0.0, sigma=1.0):
    u = (np.asarray(y, dtype=float) - mu) / sigma
    with np.errstate(over="ignore"):
        out = np.where(u < 0, p * np.exp((1.0 - p) * np.minimum(u, 0.0)),
                       1.0 - (1.0 - p) * np.exp(-p * np.maximum(u, 0.0)))
    return _scalarize(out)


def al_coefficients(p):
    """A(p), B(p) of the normal-exponential mixture."""
    pq = p * (1.0 - p)
    return (1.0 - 2.0 * p) / pq, 2.0 / pq


# ---------------------------------------------------------------------------
# g(gamma), support, p(gamma)
# ---------------------------------------------------------------------------

def log_g(gamma):
    gamma = np.asarray(gamma, dtype=float)
    return _scalarize(LOG2 + log_ndtr(-np.abs(gamma)) + 0.5 * gamma * gamma)


def g_func(gamma):
    """g(gamma) = 2 Phi(-|gamma|) exp(gamma^2 / 2), evaluated in log space."""
    return _scalarize(np.exp(log_g(gamma)))


def _bisect(f, lo, hi, tol=1e-13, maxiter=400):
    flo = f(lo)
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


@lru_cache(maxsize=256)
def gamma_support(p0: float) -> tuple[float, float]:
    """(L, U): L < 0 solves g(L) = 1 - p0, U > 0 solves g(U) = p0."""
    if not 0 < p0 < 1:
        raise ValueError("p0 must lie in (0, 1)")

    def root(target):
        f = lambda x: log_g(x) - math.log(target)
        hi = 1.0
        while f(hi) > 0:
            hi *= 2.0
        return _bisect(f, 0.0, hi)

    return -root(1.0 - p0), root(p0)


def p_of_gamma(gamma, p0):
    """Internal mixing probability p = I(gamma<0) + (p0 - I(gamma<0)) / g(gamma)."""
    L, U = gamma_support(p0)
    gamma = np.asarray(gamma, dtype=float)
    if np.any((gamma < L) | (gamma > U)):
        raise ValueError(f"gamma outside support ({L}, {U}) for p0={p0}")
    neg = (gamma < 0).astype(float)
    return _scalarize(neg + (p0 - neg) / np.exp(log_g(gamma)))


def h_func(gamma, p0):
    """H(gamma) = gamma g / (g - |p0 - I(gamma<0)|); equals C |gamma|."""
    gamma = np.asarray(gamma, dtype=float)
    g = np.exp(log_g(gamma))
    with np.errstate(invalid="ignore", divide="ignore"):
        out = gamma * g / (g - np.abs(p0 - (gamma < 0)))
    return _scalarize(np.where(gamma == 0, 0.0, out))


class GalCoefficients(NamedTuple):
    p: float
    alpha: float
    A: float
    B: float
    C: float


def coefficients(gamma: float, p0: float) -> GalCoefficients:
    """Scalar (p, alpha, A, B, C) for a quantile-fixed gamma; fast path for samplers.

    Returns ``p = nan`` when rounding pushes p out of (0, 1) near the support ends.
    """
    if gamma == 0.0:
        p = p0
    else:
        g = math.exp(LOG2 + float(log_ndtr(-abs(gamma))) + 0.5 * gamma * gamma)
        p = 1.0 + (p0 - 1.0) / g if gamma < 0 else p0 / g
    if not 0.0 < p < 1.0:
        nan = math.nan
        return GalCoefficients(nan, nan, nan, nan, nan)
    pq = p * (1.0 - p)
    C = 1.0 / ((1.0 if gamma > 0 else 0.0) - p)
    return GalCoefficients(p, C * abs(gamma), (1.0 - 2.0 * p) / pq, 2.0 / pq, C)


# ---------------------------------------------------------------------------
# parameter records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GalRawParams:
    p: float
    alpha: float
    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if not 0 < self.p < 1:
            raise ValueError("p must lie in (0, 1)")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    @property
    def p_alpha_plus(self):
        return self.p - (self.alpha > 0)

    @property
    def p_alpha_minus(self):
        return self.p - (self.alpha < 0)

    @property
    def A(self):
        return al_coefficients(self.p)[0]

    @property
    def B(self):
        return al_coefficients(self.p)[1]


@dataclass(frozen=True)
class GalParams:
    """Quantile-fixed GAL: ``mu`` is the ``p0``-quantile, ``gamma`` the shape."""

    p0: float
    gamma: float = 0.0
    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if not 0 < self.p0 < 1:
            raise ValueError("p0 must lie in (0, 1)")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        L, U = gamma_support(self.p0)
        if not L < self.gamma < U:
            raise ValueError(f"gamma={self.gamma} outside support ({L:.6g}, {U:.6g})")
        if not 0 < self.p < 1:
            raise ValueError("gamma too close to the support boundary")

    @cached_property
    def support(self):
        return gamma_support(self.p0)

    @property
    def L(self):
        return self.support[0]

    @property
    def U(self):
        return self.support[1]

    @cached_property
    def g(self):
        return g_func(self.gamma)

    @cached_property
    def p(self):
        return p_of_gamma(self.gamma, self.p0)

    @property
    def A(self):
        return al_coefficients(self.p)[0]

    @property
    def B(self):
        return al_coefficients(self.p)[1]

    @property
    def C(self):
        return 1.0 / (float(self.gamma > 0) - self.p)

    @property
    def H(self):
        return h_func(self.gamma, self.p0)

    @property
    def alpha(self):
        return self.C * abs(self.gamma)

    @property
    def p_gamma_plus(self):
        return self.p - (self.gamma > 0)

    @property
    def p_gamma_minus(self):
        return self.p - (self.gamma < 0)

    def to_raw(self) -> GalRawParams:
        if abs(self.gamma) < GAMMA_ZERO_TOL:
            return GalRawParams(self.p0, 0.0, self.mu, self.sigma)
        return GalRawParams(self.p, self.alpha, self.mu, self.sigma)


# ---------------------------------------------------------------------------
# density and CDF
# ---------------------------------------------------------------------------

def _log_terms_pos(t, p, alpha):
    """Log of the two half-normal integrals for alpha > 0, standardized t.

    Returns (left, right): left covers s with t - alpha s < 0 (AL lower
    branch), right covers 0 < s < t/alpha (upper branch, only for t > 0).
    """
    q = 1.0 - p
    c = math.log(p * q) + LOG2
    tpos = np.maximum(t, 0.0) / alpha
    qa = q * alpha
    pa = p * alpha
    left = c + q * t + 0.5 * qa * qa + log_ndtr(-tpos - qa)
    with np.errstate(divide="ignore", invalid="ignore"):
        right = c - p * t + 0.5 * pa * pa + log_ndtr_diff(tpos - pa, -pa)
    right = np.where(t > 0, right, -np.inf)
    return left, right


def _std_logpdf(t, p, alpha):
    t = np.asarray(t, dtype=float)
    if alpha == 0.0:
        return math.log(p * (1.0 - p)) - t * (p - (t < 0))
    if alpha < 0:
        return _std_logpdf(-t, 1.0 - p, -alpha)
    left, right = _log_terms_pos(t, p, alpha)
    return np.logaddexp(left, right)


def _std_cdf(t, p, alpha):
    t = np.asarray(t, dtype=float)
    if alpha == 0.0:
        return al_cdf(t, p)
    if alpha < 0:
        return 1.0 - _std_cdf(-t, 1.0 - p, -alpha)
    q = 1.0 - p
    tpos = np.maximum(t, 0.0) / alpha
    qa, pa = q * alpha, p * alpha
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        low = p * np.exp(q * t + LOG2 + 0.5 * qa * qa + log_ndtr(-tpos - qa))
        mid = (2.0 * ndtr(tpos) - 1.0) - q * np.exp(
            -p * t + LOG2 + 0.5 * pa * pa + log_ndtr_diff(tpos - pa, -pa)
        )
    out = np.where(t > 0, mid + low, low)
    return np.clip(out, 0.0, 1.0)


def gal_logpdf_raw(y, params: GalRawParams):
    t = (np.asarray(y, dtype=float) - params.mu) / params.sigma
    return _scalarize(_std_logpdf(t, params.p, params.alpha) - math.log(params.sigma))


def gal_pdf_raw(y, params: GalRawParams):
    return _scalarize(np.exp(gal_logpdf_raw(y, params)))


def gal_cdf_raw(y, params: GalRawParams):
    t = (np.asarray(y, dtype=float) - params.mu) / params.sigma
    return _scalarize(_std_cdf(t, params.p, params.alpha))


def gal_logpdf(y, params: GalParams):
    return gal_logpdf_raw(y, params.to_raw())


def gal_pdf(y, params: GalParams):
    return _scalarize(np.exp(gal_logpdf(y, params)))


def gal_cdf(y, params: GalParams):
    return gal_cdf_raw(y, params.to_raw())


def gal_sample_raw(params: GalRawParams, rng, size=None):
    A, B = al_coefficients(params.p)
    z = rng.exponential(size=size)
    s = np.abs(rng.standard_normal(size))
    eps = rng.standard_normal(size)
    x = params.alpha * s + A * z + np.sqrt(B * z) * eps
    return _scalarize(params.mu + params.sigma * x)


def gal_sample(params: GalParams, rng, size=None):
    """Draw through the exponential / half-normal / normal mixture."""
    return gal_sample_raw(params.to_raw(), rng, size)


def gal_mean(params: GalParams):
    raw = params.to_raw()
    return params.mu + params.sigma * (raw.alpha * math.sqrt(2.0 / math.pi) + raw.A)


def gal_mode(params: GalParams, width=20.0, num=20001):
    """Numerical argmax of the density on a grid around mu."""
    grid = params.mu + params.sigma * np.linspace(-width, width, num)
    return float(grid[np.argmax(gal_logpdf(grid, params))])
