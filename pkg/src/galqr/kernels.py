"""Random variate generators and density kernels for the auxiliary
distributions used by the GAL quantile regression samplers.

Every sampler takes an explicit ``numpy.random.Generator``; nothing here
touches global random state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, kve, log_ndtr, ndtr, ndtri

LOG_2PI = math.log(2.0 * math.pi)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _check_variance(variance):
    variance = np.asarray(variance, dtype=float)
    if np.any(~(variance > 0)):
        raise ValueError("variance must be positive")
    return variance


def _scalarize(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


# ---------------------------------------------------------------------------
# normal
# ---------------------------------------------------------------------------

def normal_logpdf(x, mean=0.0, variance=1.0):
    variance = _check_variance(variance)
    z2 = (np.asarray(x, dtype=float) - mean) ** 2 / variance
    return _scalarize(-0.5 * (LOG_2PI + np.log(variance) + z2))


def normal_pdf(x, mean=0.0, variance=1.0):
    return _scalarize(np.exp(normal_logpdf(x, mean, variance)))


def normal_cdf(x, mean=0.0, variance=1.0):
    variance = _check_variance(variance)
    return _scalarize(ndtr((np.asarray(x, dtype=float) - mean) / np.sqrt(variance)))


def normal_logcdf(x, mean=0.0, variance=1.0):
    """log Phi, finite far into the lower tail (erfc-based asymptotics)."""
    variance = _check_variance(variance)
    return _scalarize(log_ndtr((np.asarray(x, dtype=float) - mean) / np.sqrt(variance)))


def log_ndtr_diff(upper, lower):
    """log(Phi(upper) - Phi(lower)) for upper >= lower, stable in both tails."""
    upper = np.asarray(upper, dtype=float)
    lower = np.asarray(lower, dtype=float)
    # in the upper tail work with the survival function instead
    flip = lower > 0
    hi = np.where(flip, -lower, upper)
    lo = np.where(flip, -upper, lower)
    log_hi = log_ndtr(hi)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = log_hi + np.log(-np.expm1(log_ndtr(lo) - log_hi))
    return _scalarize(out)


# ---------------------------------------------------------------------------
# truncated normal
# ---------------------------------------------------------------------------

_TAIL_SWITCH = 0.5


def _std_truncnorm_excess(alpha, rng):
    """Draw ``z - alpha`` where z ~ N(0,1) truncated to (alpha, inf).

    Returning the excess rather than z keeps full relative precision when
    alpha is large. Above ``_TAIL_SWITCH`` a translated-exponential proposal
    is used (Robert, 1995); below it plain rejection from N(0, 1).
    """
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    out = np.empty_like(alpha)

    tail = alpha > _TAIL_SWITCH
    idx = np.flatnonzero(tail)
    if idx.size:
        a = alpha[idx]
        lam = 0.5 * (a + np.sqrt(a * a + 4.0))
        pending = np.arange(idx.size)
        while pending.size:
            e = rng.exponential(size=pending.size) / lam[pending]
            z = a[pending] + e
            ok = rng.random(pending.size) <= np.exp(-0.5 * (z - lam[pending]) ** 2)
            out[idx[pending[ok]]] = e[ok]
            pending = pending[~ok]

    idx = np.flatnonzero(~tail)
    if idx.size:
        a = alpha[idx]
        pending = np.arange(idx.size)
        while pending.size:
            z = rng.standard_normal(pending.size)
            ok = z > a[pending]
            out[idx[pending[ok]]] = z[ok] - a[pending[ok]]
            pending = pending[~ok]
    return out


def sample_truncnorm_positive(mean, variance, rng):
    """Draw from N(mean, variance) restricted to (0, inf); broadcasts."""
    variance = _check_variance(variance)
    mean, variance = np.broadcast_arrays(np.asarray(mean, dtype=float), variance)
    shape = mean.shape
    sd = np.sqrt(variance).ravel()
    alpha = -mean.ravel() / sd
    excess = _std_truncnorm_excess(alpha, rng)
    x = np.maximum(sd * excess, np.finfo(float).tiny)
    return _scalarize(x.reshape(shape))


def sample_truncnorm_negative(mean, variance, rng):
    """Draw from N(mean, variance) restricted to (-inf, 0)."""
    return _scalarize(-np.asarray(sample_truncnorm_positive(-np.asarray(mean, dtype=float), variance, rng)))


def sample_truncnorm_below(mean, variance, upper, rng):
    """Draw from N(mean, variance) restricted to (-inf, upper]."""
    upper = np.asarray(upper, dtype=float)
    return _scalarize(upper + np.asarray(sample_truncnorm_negative(np.asarray(mean, dtype=float) - upper, variance, rng)))


_TN_SWITCH = 0.66


def _std_tn_tail(lo, hi, rng):
    """N(0,1) on [lo, hi] with lo > 0: Rayleigh proposal truncated at hi."""
    c = 0.5 * lo * lo
    with np.errstate(over="ignore"):
        f = np.expm1(c - 0.5 * hi * hi)
    out = np.empty_like(lo)
    pending = np.arange(lo.size)
    while pending.size:
        cp = c[pending]
        x = cp - np.log1p(rng.random(pending.size) * f[pending])
        ok = rng.random(pending.size) ** 2 * x <= cp
        out[pending[ok]] = np.sqrt(2.0 * x[ok])
        pending = pending[~ok]
    return out


def _std_tn_body(lo, hi, rng):
    """N(0,1) on [lo, hi] straddling the centre: rejection or inverse CDF."""
    out = np.empty_like(lo)
    wide = hi - lo > 2.0
    idx = np.flatnonzero(wide)
    pending = idx
    while pending.size:
        z = rng.standard_normal(pending.size)
        ok = (z >= lo[pending]) & (z <= hi[pending])
        out[pending[ok]] = z[ok]
        pending = pending[~ok]
    idx = np.flatnonzero(~wide)
    if idx.size:
        pl, pu = ndtr(lo[idx]), ndtr(hi[idx])
        out[idx] = np.clip(ndtri(pl + (pu - pl) * rng.random(idx.size)), lo[idx], hi[idx])
    return out


def sample_std_truncnorm(lo, hi, rng):
    """N(0,1) restricted to [lo, hi]; vectorized, accurate in either tail.

    Follows the case split of Botev (2017): tail rejection when the interval
    lies beyond +-0.66, otherwise plain rejection or inverse transform.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if lo.shape != hi.shape:
        lo, hi = np.broadcast_arrays(lo, hi)
    shape = lo.shape
    lo, hi = lo.ravel(), hi.ravel()
    if np.any(~(hi > lo)):
        raise ValueError("truncation interval must have hi > lo")
    out = np.empty_like(lo)
    right = lo > _TN_SWITCH
    left = hi < -_TN_SWITCH
    mid = ~(right | left)
    if right.any():
        out[right] = _std_tn_tail(lo[right], hi[right], rng)
    if left.any():
        out[left] = -_std_tn_tail(-hi[left], -lo[left], rng)
    if mid.any():
        out[mid] = _std_tn_body(lo[mid], hi[mid], rng)
    return _scalarize(out.reshape(shape))


def sample_exponential(mean, rng, size=None):
    if np.any(np.asarray(mean) <= 0):
        raise ValueError("mean must be positive")
    return rng.exponential(mean, size=size)


# ---------------------------------------------------------------------------
# generalized inverse Gaussian
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GigParams:
    """GIG(nu, a, b) with density proportional to x^(nu-1) exp(-(a/x + b x)/2)."""

    nu: float
    a: float
    b: float

    def __post_init__(self):
        check_gig(self.nu, self.a, self.b)


def check_gig(nu, a, b):
    if np.isscalar(nu) and np.isscalar(a) and np.isscalar(b):
        if (
            not math.isfinite(nu) or not a >= 0 or not b >= 0 or (a == 0 and b == 0)
            or (nu <= 0 and a == 0) or (nu >= 0 and b == 0)
        ):
            raise ValueError(f"invalid GIG parameters nu={nu}, a={a}, b={b}")
        return
    nu, a, b = (np.asarray(v, dtype=float) for v in (nu, a, b))
    bad = (
        ~np.isfinite(nu) | ~(a >= 0) | ~(b >= 0)
        | ((a == 0) & (b == 0))
        | ((nu <= 0) & (a == 0))
        | ((nu >= 0) & (b == 0))
    )
    if np.any(bad):
        raise ValueError(f"invalid GIG parameters nu={nu}, a={a}, b={b}")


def gig_logdensity(x, nu, a, b):
    """Normalized GIG log-density, including the gamma / inverse-gamma limits."""
    check_gig(nu, a, b)
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        logx = np.log(x)
    if a == 0:
        # Gamma(nu, rate b/2)
        lognorm = gammaln(nu) - nu * math.log(b / 2.0)
    elif b == 0:
        # inverse gamma: x^(nu-1) exp(-a/(2x))
        lognorm = gammaln(-nu) + nu * math.log(a / 2.0)
    else:
        w = math.sqrt(a * b)
        lognorm = math.log(2.0) + 0.5 * nu * math.log(a / b) + math.log(kve(nu, w)) - w
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (nu - 1.0) * logx - 0.5 * (a / x + b * x) - lognorm
    out = np.where(x > 0, out, -np.inf)
    return _scalarize(out)


def gig_mean(nu, a, b):
    check_gig(nu, a, b)
    if a == 0:
        return 2.0 * nu / b
    if b == 0:
        return a / (2.0 * (-nu - 1.0)) if nu < -1 else math.inf
    w = math.sqrt(a * b)
    return math.sqrt(a / b) * kve(nu + 1.0, w) / kve(nu, w)


def gig_variance(nu, a, b):
    check_gig(nu, a, b)
    if a == 0:
        return 4.0 * nu / b**2
    if b == 0:
        if nu >= -2:
            return math.inf
        k = -nu
        return (a / 2.0) ** 2 / ((k - 1.0) ** 2 * (k - 2.0))
    w = math.sqrt(a * b)
    r = a / b
    m1 = kve(nu + 1.0, w) / kve(nu, w)
    m2 = kve(nu + 2.0, w) / kve(nu, w)
    return r * (m2 - m1 * m1)


def sample_gig_half(a, b, rng):
    """Vectorized GIG(1/2, a, b).

    If X ~ GIG(1/2, a, b) then 1/X is inverse Gaussian with mean sqrt(b/a)
    and shape b. The Michael-Schucany-Haas transformation is rewritten in
    terms of r = sqrt(a/b) so a = 0 (the Gamma(1/2, rate b/2) limit) needs no
    special branch.
    """
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    if np.any(a < 0) or np.any(~(b > 0)):
        raise ValueError("GIG(1/2, a, b) requires a >= 0 and b > 0")
    shape = a.shape
    r = np.sqrt(a / b)
    y = rng.standard_normal(shape) ** 2
    h = y / (2.0 * b)
    d = r + h + np.sqrt(y * r / b + h * h)
    u = rng.random(shape)
    take_big = u * (d + r) <= d
    with np.errstate(divide="ignore", invalid="ignore"):
        x = np.where(take_big, d, r * r / d)
    return _scalarize(x)


def _hl_log_quasi(x, lam, omega):
    return (lam - 1.0) * math.log(x) - 0.5 * omega * (x + 1.0 / x)


def _gig_std_scalar(lam, omega, rng):
    """One draw with density ~ x^(lam-1) exp(-omega (x + 1/x)/2), lam >= 0.

    Three-regime rejection scheme of Hoermann & Leydold (2014): ratio of
    uniforms with mode shift for lam > 1 or omega > 1, plain ratio of
    uniforms for moderate omega, and a piecewise dominating density for
    small omega.
    """
    if lam > 1.0 or omega > 1.0:
        m = ((lam - 1.0) + math.sqrt((lam - 1.0) ** 2 + omega * omega)) / omega
        log_gm = _hl_log_quasi(m, lam, omega)
        a = -2.0 * (lam + 1.0) / omega - m
        b = 2.0 * (lam - 1.0) * m / omega - 1.0
        p = b - a * a / 3.0
        q = 2.0 * a**3 / 27.0 - a * b / 3.0 + m
        phi = math.acos(max(-1.0, min(1.0, -q / 2.0 * math.sqrt(-27.0 / p**3))))
        fd = math.sqrt(-4.0 * p / 3.0)
        xminus = fd * math.cos(phi / 3.0 + 4.0 * math.pi / 3.0) - a / 3.0
        xplus = fd * math.cos(phi / 3.0) - a / 3.0
        vplus = (xplus - m) * math.exp(0.5 * (_hl_log_quasi(xplus, lam, omega) - log_gm))
        vminus = (xminus - m) * math.exp(0.5 * (_hl_log_quasi(xminus, lam, omega) - log_gm))
        while True:
            u = rng.random()
            if u == 0.0:
                continue
            v = vminus + (vplus - vminus) * rng.random()
            x = v / u + m
            if x <= 0.0:
                continue
            if 2.0 * math.log(u) <= _hl_log_quasi(x, lam, omega) - log_gm:
                return x

    if omega >= min(0.5, 2.0 / 3.0 * math.sqrt(1.0 - lam)):
        m = omega / ((1.0 - lam) + math.sqrt((1.0 - lam) ** 2 + omega * omega))
        xplus = ((1.0 + lam) + math.sqrt((1.0 + lam) ** 2 + omega * omega)) / omega
        log_gm = _hl_log_quasi(m, lam, omega)
        uplus = xplus * math.exp(0.5 * (_hl_log_quasi(xplus, lam, omega) - log_gm))
        while True:
            v = rng.random()
            if v == 0.0:
                continue
            x = uplus * rng.random() / v
            if x > 0.0 and 2.0 * math.log(v) <= _hl_log_quasi(x, lam, omega) - log_gm:
                return x

    m = omega / ((1.0 - lam) + math.sqrt((1.0 - lam) ** 2 + omega * omega))
    x0 = omega / (1.0 - lam)
    xs = max(x0, 2.0 / omega)
    k1 = math.exp(_hl_log_quasi(m, lam, omega))
    area1 = k1 * x0
    if x0 < 2.0 / omega:
        k2 = math.exp(-omega)
        if lam > 0:
            area2 = k2 * ((2.0 / omega) ** lam - x0**lam) / lam
        else:
            area2 = k2 * math.log(2.0 / omega**2)
    else:
        k2 = area2 = 0.0
    k3 = xs ** (lam - 1.0)
    area3 = 2.0 * k3 * math.exp(-xs * omega / 2.0) / omega
    total = area1 + area2 + area3
    while True:
        u = rng.random()
        v = total * rng.random()
        if v <= area1:
            x = x0 * v / area1
            h = k1
        elif v <= area1 + area2:
            v -= area1
            if lam > 0:
                x = (x0**lam + v * lam / k2) ** (1.0 / lam)
            else:
                x = omega * math.exp(v * math.exp(omega))
            h = k2 * x ** (lam - 1.0)
        else:
            v -= area1 + area2
            z = math.exp(-xs * omega / 2.0) - v * omega / (2.0 * k3)
            if z <= 0.0:
                continue
            x = -2.0 / omega * math.log(z)
            h = k3 * math.exp(-x * omega / 2.0)
        if x > 0.0 and u * h <= math.exp(_hl_log_quasi(x, lam, omega)):
            return x


# below this sqrt(ab) the GIG is replaced by its gamma / inverse-gamma limit
_OMEGA_TINY = 1e-12


def _gig_scalar(nu, a, b, rng):
    if a == 0 or (nu > 0 and math.sqrt(a * b) < _OMEGA_TINY):
        return rng.gamma(nu, 2.0 / b)
    if b == 0 or (nu < 0 and math.sqrt(a * b) < _OMEGA_TINY):
        return 1.0 / rng.gamma(-nu, 2.0 / a)
    omega = math.sqrt(a * b)
    eta = math.sqrt(a / b)
    y = _gig_std_scalar(abs(nu), omega, rng)
    return eta * y if nu >= 0 else eta / y


def sample_gig(nu, a, b, rng, size=None):
    """Draw from GIG(nu, a, b); parameters broadcast elementwise (and to ``size``).

    nu = +-1/2 goes through the vectorized inverse-Gaussian route, every
    other order through the scalar rejection sampler.
    """
    if isinstance(nu, GigParams):
        nu, a, b = nu.nu, nu.a, nu.b
    check_gig(nu, a, b)
    if size is not None:
        nu, a, b = (np.broadcast_to(np.asarray(v, dtype=float), size) for v in (nu, a, b))
    if np.isscalar(nu) and np.isscalar(a) and np.isscalar(b) and abs(nu) != 0.5:
        return _gig_scalar(float(nu), float(a), float(b), rng)
    nu_arr, a_arr, b_arr = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (nu, a, b)))
    if np.all(nu_arr == 0.5):
        return sample_gig_half(a_arr, b_arr, rng)
    if np.all(nu_arr == -0.5):
        return _scalarize(1.0 / np.asarray(sample_gig_half(b_arr, a_arr, rng)))
    out = np.empty(nu_arr.shape)
    for i in np.ndindex(nu_arr.shape):
        out[i] = _gig_scalar(float(nu_arr[i]), float(a_arr[i]), float(b_arr[i]), rng)
    return _scalarize(out)


def sample_inverse_gaussian(mean, shape, rng):
    """Inverse Gaussian IG(mean, shape), i.e. GIG(-1/2, shape, shape/mean^2)."""
    mean, shape = np.broadcast_arrays(np.asarray(mean, dtype=float), np.asarray(shape, dtype=float))
    # 1/X ~ GIG(1/2, shape/mean^2, shape)
    return _scalarize(1.0 / np.asarray(sample_gig_half(shape / mean**2, shape, rng)))


# ---------------------------------------------------------------------------
# skew normal
# ---------------------------------------------------------------------------

def skew_normal_logpdf(y, xi, omega, lam):
    """Azzalini skew normal, 2/omega phi((y-xi)/omega) Phi(lam (y-xi)/omega)."""
    if not omega > 0:
        raise ValueError("omega must be positive")
    z = (np.asarray(y, dtype=float) - xi) / omega
    return _scalarize(math.log(2.0 / omega) - 0.5 * (LOG_2PI + z * z) + log_ndtr(lam * z))


def skew_normal_pdf(y, xi, omega, lam):
    return _scalarize(np.exp(skew_normal_logpdf(y, xi, omega, lam)))


def skew_normal_from_mixture(xi, tau, psi):
    """Map the (xi, tau, psi) mixture form to (xi, omega, lambda)."""
    return xi, math.hypot(tau, psi), psi / tau


# ---------------------------------------------------------------------------
# log-transformed generalized Pareto
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GpdParams:
    sigma: float
    xi: float

    def __post_init__(self):
        if not (self.sigma > 0 and self.xi > 0):
            raise ValueError("GPD requires sigma > 0 and xi > 0")


def gpd_log_logpdf(eps, params: GpdParams):
    eps = np.asarray(eps, dtype=float)
    s, xi = params.sigma, params.xi
    # log1p(xi e^eps / s) computed as a softplus so huge eps does not overflow
    out = -math.log(s) + eps - (1.0 + 1.0 / xi) * np.logaddexp(0.0, eps + math.log(xi / s))
    return _scalarize(out)


def gpd_log_pdf(eps, params: GpdParams):
    return _scalarize(np.exp(gpd_log_logpdf(eps, params)))


def gpd_log_cdf(eps, params: GpdParams):
    s, xi = params.sigma, params.xi
    t = np.log1p(xi * np.exp(np.asarray(eps, dtype=float)) / s)
    return _scalarize(-np.expm1(-t / xi))


def gpd_log_ppf(prob, params: GpdParams):
    s, xi = params.sigma, params.xi
    prob = np.asarray(prob, dtype=float)
    return _scalarize(np.log(s / xi * np.expm1(-xi * np.log1p(-prob))))


def sample_gpd_log(params: GpdParams, rng, size=None):
    """Log of a generalized Pareto draw, generated by inverse CDF."""
    return gpd_log_ppf(rng.random(size), params)
