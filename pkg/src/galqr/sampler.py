"""Gibbs / Metropolis sampler for linear quantile regression with GAL errors.

The augmented model is

    y_i | beta, sigma, gamma, v_i, s_i ~ N(x_i'beta + sigma*alpha*s_i + A*v_i, sigma*B*v_i)
    v_i ~ Exp(mean sigma),  s_i ~ N+(0, 1)

with ``alpha = C|gamma|`` and ``(p, A, B, C)`` functions of ``(gamma, p0)``.

Two sweep layouts are available (``QuantRegConfig.latent_block``):

``"full"`` (default)
    beta, then the block (gamma, sigma, s, v): a joint random-walk
    Metropolis move on (logit gamma, log sigma) against the closed-form GAL
    likelihood (both latents integrated out), s | gamma, sigma with v
    integrated out (a two-piece truncated normal), v | s exactly; then the
    usual GIG draw of sigma given the latents.
``"partial"``
    beta, gamma | beta, sigma, s, y with v integrated out (an AL likelihood
    given s) followed by the exact v draw, then s | v and sigma.

Both leave the same posterior invariant; the full block mixes far better
in gamma and sigma because neither has to move against fixed latents.
The proposal covariance of the joint move is learned during burn-in.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable

import numpy as np

from . import gal
from ._linalg import draw_mvn_precision
from .data import Dataset
from .kernels import sample_gig, sample_gig_half, sample_std_truncnorm, sample_truncnorm_positive

if TYPE_CHECKING:
    from .lasso import LassoPriorConfig


@dataclass
class QuantRegConfig:
    """Model, prior and chain settings for one fit.

    ``m0``/``Sigma0`` default to N(0, 100 I). The gamma prior is a Beta on
    ``(gamma - L)/(U - L)``; (1, 1) is uniform over the support.
    """

    p0: float = 0.5
    m0: np.ndarray | None = None
    Sigma0: np.ndarray | None = None
    a_sigma: float = 2.0
    b_sigma: float = 2.0
    gamma_prior: tuple[float, float] = (1.0, 1.0)
    burn_in: int = 50_000
    thin: int = 20
    keep: int = 5_000
    seed: int | None = None
    gamma_fixed_at_zero: bool = False
    lasso: "LassoPriorConfig | None" = None
    step_init: float = 1.0
    target_accept: float = 0.35
    adapt: bool = True
    latent_block: str = "full"

    def __post_init__(self):
        if self.latent_block not in ("full", "partial"):
            raise ValueError("latent_block must be 'full' or 'partial'")
        if not 0 < self.p0 < 1:
            raise ValueError("p0 must lie in (0, 1)")
        if not (self.a_sigma > 0 and self.b_sigma > 0):
            raise ValueError("a_sigma and b_sigma must be positive")
        if min(self.burn_in, self.thin, self.keep) < 1:
            raise ValueError("burn_in, thin and keep must all be >= 1")
        if min(self.gamma_prior) <= 0:
            raise ValueError("gamma prior shapes must be positive")
        self._prec0 = None
        if self.Sigma0 is not None:
            S = np.atleast_2d(np.asarray(self.Sigma0, dtype=float))
            if not np.allclose(S, S.T) or np.any(np.linalg.eigvalsh(S) <= 0):
                raise ValueError("Sigma0 must be symmetric positive definite")
            self.Sigma0 = S
            self._prec0 = np.linalg.inv(S)
        if self.m0 is not None:
            self.m0 = np.atleast_1d(np.asarray(self.m0, dtype=float))

    @property
    def support(self):
        return gal.gamma_support(self.p0)

    def beta_prior(self, p: int):
        """(precision, precision @ mean) of the normal prior on beta."""
        m0 = np.zeros(p) if self.m0 is None else self.m0
        prec = np.eye(p) / 100.0 if self._prec0 is None else self._prec0
        if m0.shape != (p,) or prec.shape != (p, p):
            raise ValueError(f"beta prior has wrong dimension for {p} coefficients")
        return prec, prec @ m0

    def chain_settings(self) -> dict:
        return dict(burn_in=self.burn_in, thin=self.thin, keep=self.keep, seed=self.seed)

    def to_dict(self) -> dict:
        d = dict(
            p0=self.p0,
            m0=None if self.m0 is None else self.m0.tolist(),
            Sigma0=None if self.Sigma0 is None else self.Sigma0.tolist(),
            a_sigma=self.a_sigma,
            b_sigma=self.b_sigma,
            gamma_prior=list(self.gamma_prior),
            burn_in=self.burn_in,
            thin=self.thin,
            keep=self.keep,
            seed=self.seed,
            gamma_fixed_at_zero=self.gamma_fixed_at_zero,
            step_init=self.step_init,
            target_accept=self.target_accept,
            adapt=self.adapt,
            latent_block=self.latent_block,
            lasso=None,
        )
        if self.lasso is not None:
            d["lasso"] = dict(vars(self.lasso))
        return d


@dataclass
class ChainState:
    """Current values of all unknowns.

    ``y`` is the working response: observed values, with the latent responses
    of censored rows filled in. ``omega``/``eta2`` are used by the lasso prior.
    """

    beta: np.ndarray
    sigma: float
    gamma: float
    v: np.ndarray
    s: np.ndarray
    y: np.ndarray
    omega: np.ndarray | None = None
    eta2: float | None = None
    gamma_step: float = 1.0

    def coefficients(self, p0: float) -> gal.GalCoefficients:
        return gal.coefficients(self.gamma, p0)


@dataclass
class PosteriorSamples:
    """Retained draws after burn-in and thinning."""

    beta: np.ndarray
    sigma: np.ndarray
    gamma: np.ndarray
    iterations: np.ndarray
    p0: float
    acceptance_rate: float
    config: QuantRegConfig
    seed: int | None = None
    names: list[str] = field(default_factory=list)
    extras: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.names:
            self.names = [f"beta_{j}" for j in range(self.beta.shape[1])]

    @property
    def keep(self) -> int:
        return self.sigma.shape[0]

    def posterior_mean(self) -> dict:
        return dict(beta=self.beta.mean(axis=0), sigma=float(self.sigma.mean()), gamma=float(self.gamma.mean()))

    def columns(self) -> dict[str, np.ndarray]:
        cols = {f"beta_{j}": self.beta[:, j] for j in range(self.beta.shape[1])}
        cols["sigma"] = self.sigma
        cols["gamma"] = self.gamma
        if "omega" in self.extras:
            for k in range(self.extras["omega"].shape[1]):
                cols[f"omega_{k + 1}"] = self.extras["omega"][:, k]
        if "eta2" in self.extras:
            cols["eta2"] = self.extras["eta2"]
        return cols

    def summary(self) -> list[dict]:
        rows = []
        for name, x in self.columns().items():
            q = np.quantile(x, [0.025, 0.5, 0.975])
            rows.append(dict(parameter=name, mean=float(x.mean()), sd=float(x.std(ddof=1)) if x.size > 1 else 0.0,
                             q2_5=float(q[0]), q50=float(q[1]), q97_5=float(q[2])))
        return rows


# ---------------------------------------------------------------------------
# full conditionals
# ---------------------------------------------------------------------------

def _coefs(state, config):
    c = gal.coefficients(state.gamma, config.p0)
    if math.isnan(c.p):
        raise FloatingPointError(f"gamma={state.gamma} gives p outside (0, 1)")
    return c


def beta_working_terms(state: ChainState, x, coefs):
    """Weights 1/(B sigma v_i) and targets y_i - sigma alpha s_i - A v_i."""
    w = 1.0 / (coefs.B * state.sigma * state.v)
    target = state.y - state.sigma * coefs.alpha * state.s - coefs.A * state.v
    return w, target


def beta_precision_terms(state, x, coefs, prior_prec, prior_rhs):
    w, target = beta_working_terms(state, x, coefs)
    xw = x.T * w
    return prior_prec + xw @ x, prior_rhs + xw @ target


def update_beta(state: ChainState, data: Dataset, config: QuantRegConfig, rng, stats=None):
    """beta ~ N(m*, Sigma*) under the normal prior N(m0, Sigma0)."""
    coefs = _coefs(state, config)
    prior_prec, prior_rhs = config.beta_prior(data.p)
    prec, rhs = beta_precision_terms(state, data.x, coefs, prior_prec, prior_rhs)
    beta, jittered = draw_mvn_precision(prec, rhs, rng)
    if jittered and stats is not None:
        stats["jitter"] += 1
    return beta


def gamma_log_prior(gamma, config: QuantRegConfig):
    L, U = config.support
    a, b = config.gamma_prior
    t = (gamma - L) / (U - L)
    if not 0.0 < t < 1.0:
        return -math.inf
    out = 0.0
    if a != 1.0:
        out += (a - 1.0) * math.log(t)
    if b != 1.0:
        out += (b - 1.0) * math.log1p(-t)
    return out


def gamma_log_target(gamma, state: ChainState, data: Dataset, config: QuantRegConfig):
    """log pi(gamma | beta, sigma, s, y) up to a constant, v_i integrated out.

    Given s_i the error y_i - x_i'beta - sigma*alpha*s_i is AL(p, sigma).
    """
    c = gal.coefficients(gamma, config.p0)
    if math.isnan(c.p):
        return -math.inf
    u = state.y - data.x @ state.beta - state.sigma * c.alpha * state.s
    loss = np.dot(u, c.p - (u < 0))
    return u.shape[0] * math.log(c.p * (1.0 - c.p)) - loss / state.sigma + gamma_log_prior(gamma, config)


def _raw_alpha(gamma, c):
    return 0.0 if abs(gamma) < gal.GAMMA_ZERO_TOL else c.alpha


def gamma_log_target_marginal(gamma, state: ChainState, data: Dataset, config: QuantRegConfig):
    """log pi(gamma | beta, sigma, y) up to a constant, v and s integrated out."""
    c = gal.coefficients(gamma, config.p0)
    if math.isnan(c.p):
        return -math.inf
    t = (state.y - data.x @ state.beta) / state.sigma
    return float(np.sum(gal._std_logpdf(t, c.p, _raw_alpha(gamma, c)))) + gamma_log_prior(gamma, config)


def sigma_log_prior(sigma, config: QuantRegConfig):
    """Inverse-gamma(a_sigma, b_sigma) log density up to a constant."""
    return -(config.a_sigma + 1.0) * math.log(sigma) - config.b_sigma / sigma


def joint_log_target(theta, state: ChainState, data: Dataset, config: QuantRegConfig):
    """log pi(logit t, log sigma | beta, y) with t the rescaled gamma; Jacobians included."""
    L, U = config.support
    tg, ls = theta
    if not (abs(tg) < 700 and abs(ls) < 700):
        return -math.inf
    t = 1.0 / (1.0 + math.exp(-tg))
    gamma = L + (U - L) * t
    if not L < gamma < U:
        return -math.inf
    sigma = math.exp(ls)
    c = gal.coefficients(gamma, config.p0)
    if math.isnan(c.p):
        return -math.inf
    r = (state.y - data.x @ state.beta) / sigma
    ll = float(np.sum(gal._std_logpdf(r, c.p, _raw_alpha(gamma, c)))) - r.shape[0] * ls
    return (ll + gamma_log_prior(gamma, config) + sigma_log_prior(sigma, config)
            + math.log(t) + math.log1p(-t) + ls)


def to_joint_coords(gamma, sigma, config: QuantRegConfig):
    L, U = config.support
    t = (gamma - L) / (U - L)
    return np.array([math.log(t) - math.log1p(-t), math.log(sigma)])


def from_joint_coords(theta, config: QuantRegConfig):
    L, U = config.support
    t = 1.0 / (1.0 + math.exp(-theta[0]))
    return L + (U - L) * t, math.exp(theta[1])


def update_gamma_sigma(state: ChainState, data: Dataset, config: QuantRegConfig, rng, chol):
    """Joint random-walk step on (logit t, log sigma) with proposal ``step * chol @ z``.

    Returns ``(gamma, sigma, accepted, accept_prob)``.
    """
    theta = to_joint_coords(state.gamma, state.sigma, config)
    prop = theta + state.gamma_step * (chol @ rng.standard_normal(2))
    lt_new = joint_log_target(prop, state, data, config)
    if lt_new == -math.inf:
        return state.gamma, state.sigma, False, 0.0
    log_ratio = lt_new - joint_log_target(theta, state, data, config)
    prob = 1.0 if log_ratio >= 0 else math.exp(log_ratio)
    if rng.random() < prob:
        gamma, sigma = from_joint_coords(prop, config)
        return gamma, sigma, True, prob
    return state.gamma, state.sigma, False, prob


def logit_rw_step(value, lo, hi, log_target: Callable[[float], float], step, rng, current_log_target=None):
    """Random-walk Metropolis on logit((value - lo)/(hi - lo)).

    Returns ``(new_value, accept_probability, accepted)``. The acceptance
    ratio carries the Jacobian t(1 - t) of the logit map.
    """
    t = (value - lo) / (hi - lo)
    theta = math.log(t) - math.log1p(-t)
    theta_new = theta + step * rng.standard_normal()
    t_new = 1.0 / (1.0 + math.exp(-theta_new)) if theta_new > -700 else 0.0
    new = lo + (hi - lo) * t_new
    if not lo < new < hi:
        return value, 0.0, False
    lt_cur = log_target(value) if current_log_target is None else current_log_target
    log_ratio = (
        log_target(new) - lt_cur
        + math.log(t_new) + math.log1p(-t_new) - math.log(t) - math.log1p(-t)
    )
    prob = 1.0 if log_ratio >= 0 else math.exp(log_ratio)
    if rng.random() < prob:
        return new, prob, True
    return value, prob, False


def update_gamma(state: ChainState, data: Dataset, config: QuantRegConfig, rng):
    """Metropolis step for gamma; returns ``(gamma, accepted, accept_prob)``."""
    if config.gamma_fixed_at_zero:
        return 0.0, False, 0.0
    L, U = config.support
    if config.latent_block == "full":
        target = lambda g: gamma_log_target_marginal(g, state, data, config)
    else:
        target = lambda g: gamma_log_target(g, state, data, config)
    new, prob, accepted = logit_rw_step(state.gamma, L, U, target, state.gamma_step, rng)
    return new, accepted, prob


def v_conditional_params(state: ChainState, data: Dataset, coefs):
    """(a_i, b) of the GIG(1/2, a_i, b) conditional of v_i."""
    r = state.y - data.x @ state.beta - state.sigma * coefs.alpha * state.s
    bs = coefs.B * state.sigma
    return r * r / bs, 2.0 / state.sigma + coefs.A**2 / bs


def update_v(state: ChainState, data: Dataset, config: QuantRegConfig, rng):
    coefs = _coefs(state, config)
    a, b = v_conditional_params(state, data, coefs)
    v = np.asarray(sample_gig_half(a, np.full_like(a, b), rng), dtype=float).reshape(-1)
    return np.maximum(v, np.finfo(float).tiny)


def s_conditional_params(state: ChainState, data: Dataset, coefs):
    """Mean and variance of the N+(mu_s, var_s) conditional of each s_i."""
    bv = coefs.B * state.v
    var = 1.0 / (coefs.alpha**2 * state.sigma / bv + 1.0)
    e = state.y - data.x @ state.beta - coefs.A * state.v
    return var * coefs.alpha * e / bv, var


def update_s(state: ChainState, data: Dataset, config: QuantRegConfig, rng):
    coefs = _coefs(state, config)
    mean, var = s_conditional_params(state, data, coefs)
    return np.asarray(sample_truncnorm_positive(mean, var, rng), dtype=float).reshape(-1)


def s_marginal_pieces(state: ChainState, data: Dataset, coefs, gamma=None):
    """Two-piece form of s_i | gamma, beta, sigma, y_i with v_i integrated out.

    Given s_i the error is AL, so the conditional of s_i is a half-normal
    tilted by an exponential that switches rate at ``cut = t_i/alpha``
    (t_i the standardized residual). Returns ``(log_w_lo, log_w_hi, cut,
    mean_lo, mean_hi, flip)``: on (0, cut) s_i ~ N(mean_lo, 1), on
    (cut, inf) s_i ~ N(mean_hi, 1), with unnormalized log masses
    ``log_w_lo``/``log_w_hi``. For alpha < 0 the pieces are computed for the
    reflected problem (``flip``), which only swaps p and the sign of t.
    """
    gamma = state.gamma if gamma is None else gamma
    alpha = _raw_alpha(gamma, coefs)
    t = (state.y - data.x @ state.beta) / state.sigma
    p = coefs.p
    flip = alpha < 0
    if flip:
        t, p, alpha = -t, 1.0 - p, -alpha
    hi_piece, lo_piece = gal._log_terms_pos(t, p, alpha)
    cut = np.maximum(t, 0.0) / alpha
    return lo_piece, hi_piece, cut, p * alpha, -(1.0 - p) * alpha, flip


def update_s_marginal(state: ChainState, data: Dataset, config: QuantRegConfig, rng):
    """Draw s_i from its conditional with v_i integrated out."""
    coefs = _coefs(state, config)
    if _raw_alpha(state.gamma, coefs) == 0.0:
        return np.abs(rng.standard_normal(state.y.shape[0]))
    log_lo, log_hi, cut, m_lo, m_hi, _ = s_marginal_pieces(state, data, coefs)
    # probability of the bounded piece (0, cut)
    prob_lo = np.exp(log_lo - np.logaddexp(log_lo, log_hi))
    use_lo = rng.random(cut.shape[0]) < prob_lo
    mean = np.where(use_lo, m_lo, m_hi)
    lo = np.where(use_lo, 0.0, cut) - mean
    hi = np.where(use_lo, cut - mean, np.inf)
    out = mean + sample_std_truncnorm(lo, hi, rng)
    return np.maximum(out, np.finfo(float).tiny)


def sigma_conditional_params(state: ChainState, data: Dataset, config: QuantRegConfig, coefs):
    """(nu, c, d) of the GIG(nu, c, d) conditional of sigma."""
    n = state.y.shape[0]
    bv = coefs.B * state.v
    e = state.y - data.x @ state.beta - coefs.A * state.v
    nu = -(config.a_sigma + 1.5 * n)
    c = 2.0 * config.b_sigma + 2.0 * state.v.sum() + np.sum(e * e / bv)
    d = float(np.sum((coefs.alpha * state.s) ** 2 / bv))
    return nu, float(c), d


def update_sigma(state: ChainState, data: Dataset, config: QuantRegConfig, rng):
    coefs = _coefs(state, config)
    nu, c, d = sigma_conditional_params(state, data, config, coefs)
    if d == 0.0:
        # gamma = 0: the GIG kernel is an inverse gamma
        return 1.0 / rng.gamma(-nu, 2.0 / c)
    return sample_gig(nu, c, d, rng)


# ---------------------------------------------------------------------------
# chain driver
# ---------------------------------------------------------------------------

def initial_state(data: Dataset, config: QuantRegConfig, rng) -> ChainState:
    beta = np.linalg.lstsq(data.x, data.y, rcond=None)[0] if data.n else np.zeros(data.p)
    state = ChainState(
        beta=beta,
        sigma=1.0,
        gamma=0.0,
        v=np.ones(data.n),
        s=np.asarray(sample_truncnorm_positive(np.zeros(data.n), 1.0, rng), dtype=float).reshape(-1),
        y=data.y.copy(),
        gamma_step=config.step_init,
    )
    if config.lasso is not None:
        state.omega = np.ones(data.p - 1)
        state.eta2 = config.lasso.a_eta / config.lasso.b_eta
    return state


def effective_sample_size(x) -> float:
    """ESS from Geyer's initial positive sequence of autocorrelations."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 4 or np.ptp(x) == 0:
        return float(n)
    xc = x - x.mean()
    f = np.fft.rfft(xc, 2 * n)
    acf = np.fft.irfft(f * np.conj(f))[:n]
    acf /= acf[0]
    pair_sums = acf[:-1:2] + acf[1::2]
    total = 0.0
    prev = math.inf
    for k, ps in enumerate(pair_sums):
        if ps <= 0:
            break
        ps = min(ps, prev)
        total += ps
        prev = ps
    tau = -1.0 + 2.0 * total
    return float(n / max(tau, 1e-12))


class _RunningCovariance:
    """Welford accumulator for the proposal covariance of the joint move."""

    def __init__(self, dim):
        self.count = 0
        self.mean = np.zeros(dim)
        self.m2 = np.zeros((dim, dim))

    def add(self, x):
        self.count += 1
        delta = x - self.mean
        self.mean += delta / self.count
        self.m2 += np.outer(delta, x - self.mean)

    def cholesky(self):
        cov = self.m2 / (self.count - 1)
        return np.linalg.cholesky(cov + 1e-8 * np.eye(cov.shape[0]))


def run_chain(data: Dataset, config: QuantRegConfig, rng=None, progress=None) -> PosteriorSamples:
    """Run one chain. Deterministic given ``config.seed`` (or the passed rng).

    Censored rows (``data.censored``) switch on latent-response imputation;
    ``config.lasso`` switches the beta prior to the hierarchical Laplace.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    lasso_cfg = config.lasso
    if lasso_cfg is not None:
        from . import lasso
        if data.p < 2:
            raise ValueError("the lasso prior needs an intercept column plus at least one slope")
    censored = data.censored if data.is_censored else None
    if censored is not None:
        from .tobit import update_w

    state = initial_state(data, config, rng)
    full_block = config.latent_block == "full"
    p = data.p
    total = config.burn_in + config.thin * config.keep
    keep = config.keep
    out_beta = np.empty((keep, p))
    out_sigma = np.empty(keep)
    out_gamma = np.empty(keep)
    out_iter = np.empty(keep, dtype=np.int64)
    out_omega = np.empty((keep, p - 1)) if lasso_cfg is not None else None
    out_eta2 = np.empty(keep) if lasso_cfg is not None else None
    stats = {"jitter": 0}
    n_acc_burn = n_acc = 0
    log_step = math.log(config.step_init)
    joint_move = full_block and not config.gamma_fixed_at_zero
    chol = np.diag([1.0, 0.1])
    adapt = _RunningCovariance(2)
    adapt_from = config.burn_in // 5
    adapted = False
    j = 0
    for it in range(total):
        if censored is not None:
            state.y[censored] = update_w(state, data, config, rng)
        if lasso_cfg is not None:
            state.beta = lasso.update_slopes(state, data, config, rng, stats)
            state.omega = lasso.update_omega(state.beta[1:], state.eta2, rng)
            state.eta2 = lasso.update_eta2(state.omega, lasso_cfg, rng)
        else:
            state.beta = update_beta(state, data, config, rng, stats)
        if joint_move:
            state.gamma, state.sigma, accepted, prob = update_gamma_sigma(state, data, config, rng, chol)
        else:
            state.gamma, accepted, prob = update_gamma(state, data, config, rng)
        if full_block:
            state.s = update_s_marginal(state, data, config, rng)
            state.v = update_v(state, data, config, rng)
        else:
            state.v = update_v(state, data, config, rng)
            state.s = update_s(state, data, config, rng)
        state.sigma = update_sigma(state, data, config, rng)
        if not (math.isfinite(state.sigma) and 0.0 < state.sigma < 1e12):
            raise FloatingPointError(f"sigma diverged to {state.sigma} at iteration {it}")

        if it < config.burn_in:
            n_acc_burn += accepted
            if config.adapt and not config.gamma_fixed_at_zero:
                log_step += (prob - config.target_accept) / (it + 1) ** 0.6
                log_step = min(max(log_step, -10.0), 5.0)
                state.gamma_step = math.exp(log_step)
                if joint_move and it >= adapt_from:
                    adapt.add(to_joint_coords(state.gamma, state.sigma, config))
                    if adapt.count >= 200 and (it - adapt_from) % 100 == 99:
                        if not adapted:
                            log_step = math.log(2.38 / math.sqrt(2.0))
                            state.gamma_step = math.exp(log_step)
                            adapted = True
                        chol = adapt.cholesky()
        else:
            n_acc += accepted
            if (it - config.burn_in + 1) % config.thin == 0:
                out_beta[j] = state.beta
                out_sigma[j] = state.sigma
                out_gamma[j] = state.gamma
                out_iter[j] = it
                if lasso_cfg is not None:
                    out_omega[j] = state.omega
                    out_eta2[j] = state.eta2
                j += 1
        if progress is not None:
            progress(it, total)

    n_post = total - config.burn_in
    acc_rate = 0.0 if config.gamma_fixed_at_zero else n_acc / n_post
    diagnostics = dict(
        gamma_step=state.gamma_step,
        proposal_chol=chol.tolist() if joint_move else None,
        burn_in_acceptance=0.0 if config.gamma_fixed_at_zero else n_acc_burn / config.burn_in,
        jitter_count=stats["jitter"],
        ess={f"beta_{k}": effective_sample_size(out_beta[:, k]) for k in range(p)},
    )
    diagnostics["ess"]["sigma"] = effective_sample_size(out_sigma)
    if not config.gamma_fixed_at_zero:
        diagnostics["ess"]["gamma"] = effective_sample_size(out_gamma)
        if n_acc == 0:
            diagnostics["gamma_all_rejected"] = True
            warnings.warn("every post-burn-in gamma proposal was rejected", RuntimeWarning, stacklevel=2)
    if stats["jitter"]:
        warnings.warn(f"beta precision needed diagonal jitter {stats['jitter']} times", RuntimeWarning, stacklevel=2)
    extras = {}
    if lasso_cfg is not None:
        extras = dict(omega=out_omega, eta2=out_eta2)
    return PosteriorSamples(
        beta=out_beta,
        sigma=out_sigma,
        gamma=out_gamma,
        iterations=out_iter,
        p0=config.p0,
        acceptance_rate=acc_rate,
        config=config,
        seed=config.seed,
        names=list(data.names),
        extras=extras,
        diagnostics=diagnostics,
    )


# ---------------------------------------------------------------------------
# posterior predictive
# ---------------------------------------------------------------------------

def _draw_subset(samples: PosteriorSamples, mc_draws, rng):
    idx = np.arange(samples.keep)
    if mc_draws is not None and mc_draws < samples.keep:
        rng = rng if rng is not None else np.random.default_rng(0)
        idx = np.sort(rng.choice(samples.keep, size=mc_draws, replace=False))
    return idx


def predictive_error_density(samples: PosteriorSamples, grid, mc_draws=None, rng=None):
    """Posterior predictive error density on ``grid``.

    Averages the GAL density f_p0(eps | gamma, 0, sigma) over posterior draws
    (all draws, or a random subset of ``mc_draws`` of them).
    """
    grid = np.asarray(grid, dtype=float)
    idx = _draw_subset(samples, mc_draws, rng)
    acc = np.zeros_like(grid)
    for k in idx:
        c = gal.coefficients(float(samples.gamma[k]), samples.p0)
        raw = gal.GalRawParams(c.p, c.alpha if abs(samples.gamma[k]) >= gal.GAMMA_ZERO_TOL else 0.0,
                               0.0, float(samples.sigma[k]))
        acc += gal.gal_pdf_raw(grid, raw)
    return acc / idx.size


def posterior_predictive_replicates(samples: PosteriorSamples, x, rng, mc_draws=None):
    """Replicated responses y*, one per retained draw and row of ``x``; shape (draws, n)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    idx = _draw_subset(samples, mc_draws, rng)
    coefs = np.array([gal.coefficients(float(samples.gamma[k]), samples.p0)[:4] for k in idx])
    _, alpha, A, B = coefs.T
    sigma = samples.sigma[idx][:, None]
    mu = samples.beta[idx] @ x.T
    shape = mu.shape
    z = rng.exponential(size=shape)
    s = np.abs(rng.standard_normal(shape))
    eps = rng.standard_normal(shape)
    return mu + sigma * (alpha[:, None] * s + A[:, None] * z + np.sqrt(B[:, None] * z) * eps)
