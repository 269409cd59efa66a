"""Simulation study: AL versus GAL lasso quantile regression on synthetic data.

Every error law is shifted (or rescaled) so that its p0-quantile is exactly
zero, which makes the true p0-quantile regression function x'beta. Both
models see the same training and test data in each replicate.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy import optimize, stats

from . import assess
from .data import Dataset, add_intercept
from .kernels import GpdParams, gpd_log_cdf, gpd_log_ppf, sample_gpd_log
from .lasso import LassoPriorConfig, fit_lasso
from .sampler import QuantRegConfig, posterior_predictive_replicates, run_chain

ERROR_LAWS = ("normal", "laplace", "normal_mixture", "gpd_log")
BETA_SETTINGS = {
    "sparse": (3.0, 1.5, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0),
    "dense": (0.85,) * 8,
    "very_sparse": (5.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0),
}
CRITERIA = ("cie", "mcl", "ppl_quadratic", "ppl_check")
THREADS_ENV = "GALQR_THREADS"

NORMAL_SD = 3.0
LAPLACE_SCALE = 3.0
MIX_WEIGHT = 0.1
MIX_SHIFT = 1.0
MIX_VAR = 5.0
GPD_XI = 3.0


# ---------------------------------------------------------------------------
# error laws
# ---------------------------------------------------------------------------

def _mixture_cdf(x, mu):
    return (MIX_WEIGHT * stats.norm.cdf(x, mu, 1.0)
            + (1.0 - MIX_WEIGHT) * stats.norm.cdf(x, mu + MIX_SHIFT, math.sqrt(MIX_VAR)))


def solve_quantile_offset(law: str, p0: float) -> float:
    """Location (or, for gpd_log, the GPD scale) that puts the p0-quantile at 0."""
    if not 0 < p0 < 1:
        raise ValueError("p0 must lie in (0, 1)")
    if law == "normal":
        return -NORMAL_SD * stats.norm.ppf(p0)
    if law == "laplace":
        return -LAPLACE_SCALE * (math.log(2 * p0) if p0 < 0.5 else -math.log(2 * (1 - p0)))
    if law == "normal_mixture":
        f = lambda mu: _mixture_cdf(0.0, mu) - p0
        lo, hi = -50.0, 50.0
        if not f(lo) > 0 > f(hi):
            raise ValueError(f"mixture offset for p0={p0} is not bracketed")
        return optimize.brentq(f, lo, hi, xtol=1e-14, rtol=1e-15)
    if law == "gpd_log":
        return GPD_XI / math.expm1(-GPD_XI * math.log1p(-p0))
    raise ValueError(f"unknown error law {law!r}; expected one of {ERROR_LAWS}")


@dataclass(frozen=True)
class ErrorLawSpec:
    """An error law of the simulation with its p0-quantile pinned at zero.

    ``offset`` is the location mu for normal, laplace and normal_mixture and
    the GPD scale sigma for gpd_log.
    """

    law: str
    p0: float
    offset: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "offset", solve_quantile_offset(self.law, self.p0))

    def sample(self, rng, size):
        mu = self.offset
        if self.law == "normal":
            return mu + NORMAL_SD * rng.standard_normal(size)
        if self.law == "laplace":
            return rng.laplace(mu, LAPLACE_SCALE, size)
        if self.law == "normal_mixture":
            first = rng.random(size) < MIX_WEIGHT
            return np.where(first, mu + rng.standard_normal(size),
                            mu + MIX_SHIFT + math.sqrt(MIX_VAR) * rng.standard_normal(size))
        return sample_gpd_log(GpdParams(mu, GPD_XI), rng, size)

    def cdf(self, x):
        mu = self.offset
        if self.law == "normal":
            return stats.norm.cdf(x, mu, NORMAL_SD)
        if self.law == "laplace":
            return stats.laplace.cdf(x, mu, LAPLACE_SCALE)
        if self.law == "normal_mixture":
            return _mixture_cdf(x, mu)
        return gpd_log_cdf(x, GpdParams(mu, GPD_XI))

    def quantile(self, prob):
        mu = self.offset
        if self.law == "normal":
            return stats.norm.ppf(prob, mu, NORMAL_SD)
        if self.law == "laplace":
            return stats.laplace.ppf(prob, mu, LAPLACE_SCALE)
        if self.law == "normal_mixture":
            return optimize.brentq(lambda x: _mixture_cdf(x, mu) - prob, mu - 60, mu + 60, xtol=1e-14)
        return gpd_log_ppf(prob, GpdParams(mu, GPD_XI))


# ---------------------------------------------------------------------------
# design and scenarios
# ---------------------------------------------------------------------------

def design_covariance(dim: int = 8, rho: float = 0.5):
    idx = np.arange(dim)
    return rho ** np.abs(idx[:, None] - idx[None, :])


def make_design(n: int, rng, dim: int = 8, rho: float = 0.5):
    """Rows i.i.d. N(0, S) with S_ij = rho^|i-j|."""
    if n < 1:
        raise ValueError("n must be at least 1")
    chol = np.linalg.cholesky(design_covariance(dim, rho))
    return rng.standard_normal((n, dim)) @ chol.T


@dataclass
class SimScenario:
    p0: float = 0.05
    error_law: str = "normal"
    beta_setting: str = "sparse"
    n_train: int = 100
    n_test: int = 100
    replicates: int = 20
    burn_in: int = 10_000
    thin: int = 5
    keep: int = 2_000
    models: tuple[str, ...] = ("al", "gal")
    lasso: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.error_law not in ERROR_LAWS:
            raise ValueError(f"unknown error law {self.error_law!r}")
        if self.beta_setting not in BETA_SETTINGS:
            raise ValueError(f"unknown beta setting {self.beta_setting!r}")
        if min(self.n_train, self.n_test, self.replicates) < 1:
            raise ValueError("sizes must be positive")
        self.models = tuple(self.models)
        if not self.models or any(m not in ("al", "gal") for m in self.models):
            raise ValueError("models must be a nonempty subset of ('al', 'gal')")

    @property
    def beta(self):
        return np.array(BETA_SETTINGS[self.beta_setting])

    def full_scale(self) -> "SimScenario":
        """The full protocol: 100 replicates, burn-in 50,000, thin 20, keep 5,000."""
        return replace(self, replicates=100, burn_in=50_000, thin=20, keep=5_000)

    def model_config(self, model: str) -> QuantRegConfig:
        return QuantRegConfig(
            p0=self.p0, burn_in=self.burn_in, thin=self.thin, keep=self.keep,
            gamma_fixed_at_zero=model == "al",
            lasso=LassoPriorConfig() if self.lasso else None,
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["models"] = list(self.models)
        return d


def generate_data(scenario: SimScenario, rng):
    """(train, test) datasets with an intercept column; the true intercept is 0."""
    law = ErrorLawSpec(scenario.error_law, scenario.p0)
    out = []
    for n in (scenario.n_train, scenario.n_test):
        x = make_design(n, rng, dim=scenario.beta.shape[0])
        y = x @ scenario.beta + law.sample(rng, n)
        xi, names = add_intercept(x)
        out.append(Dataset(xi, y, names=names))
    return tuple(out)


# ---------------------------------------------------------------------------
# replicates
# ---------------------------------------------------------------------------

def fit_model(scenario: SimScenario, model: str, train: Dataset, rng):
    cfg = scenario.model_config(model)
    if scenario.lasso:
        return fit_lasso(train, cfg, rng)
    return run_chain(train, cfg, rng)


def evaluate(samples, train: Dataset, test: Dataset, scenario: SimScenario, rng) -> dict:
    beta_true = np.concatenate([[0.0], scenario.beta])
    beta_hat = samples.beta.mean(axis=0)
    reps = posterior_predictive_replicates(samples, train.x, rng)
    quad = assess.ppl_quadratic(reps, train.y)
    chk = assess.ppl_check(reps, train.y, scenario.p0)
    return dict(
        cie=assess.cie_score(samples.beta, train, scenario.beta).score,
        mcl=assess.mean_check_loss(beta_hat, beta_true, test.x, scenario.p0),
        ppl_quadratic=quad.D,
        ppl_quadratic_P=quad.P,
        ppl_quadratic_G=quad.G,
        ppl_check=chk.D,
        ppl_check_P=chk.P,
        ppl_check_G=chk.G,
        gamma_mean=float(samples.gamma.mean()),
        acceptance=samples.acceptance_rate,
    )


def run_replicate(scenario: SimScenario, index: int, seq: np.random.SeedSequence) -> list[dict]:
    """Fit every model on one shared dataset; failures become rows with status 'failed'."""
    data_seq, *model_seqs = seq.spawn(1 + len(scenario.models))
    train, test = generate_data(scenario, np.random.default_rng(data_seq))
    rows = []
    for model, mseq in zip(scenario.models, model_seqs):
        chain_rng, pred_rng = (np.random.default_rng(s) for s in mseq.spawn(2))
        row = dict(replicate=index, model=model, status="ok", error="")
        try:
            samples = fit_model(scenario, model, train, chain_rng)
            row.update(evaluate(samples, train, test, scenario, pred_rng))
        except (FloatingPointError, np.linalg.LinAlgError, ValueError) as exc:
            row.update(status="failed", error=f"{type(exc).__name__}: {exc}")
        rows.append(row)
    return rows


def _run_replicate_args(args):
    return run_replicate(*args)


@dataclass
class SimResult:
    scenario: SimScenario
    rows: list[dict]

    @property
    def failures(self) -> dict[str, int]:
        return {m: sum(r["model"] == m and r["status"] != "ok" for r in self.rows)
                for m in self.scenario.models}

    def values(self, model: str, criterion: str) -> np.ndarray:
        return np.array([r[criterion] for r in self.rows if r["model"] == model and r["status"] == "ok"])

    def summary(self) -> list[dict]:
        """Median and SD of every criterion per model over successful replicates."""
        out = []
        for model in self.scenario.models:
            for crit in CRITERIA:
                v = self.values(model, crit)
                out.append(dict(
                    model=model, criterion=crit, n_ok=int(v.size), n_failed=self.failures[model],
                    median=float(np.median(v)) if v.size else math.nan,
                    sd=float(v.std(ddof=1)) if v.size > 1 else math.nan,
                ))
        return out

    def table(self) -> list[dict]:
        """One row per criterion, one 'median (SD)' column per model."""
        cells = {(r["model"], r["criterion"]): f"{r['median']:.3f} ({r['sd']:.3f})" for r in self.summary()}
        return [dict(criterion=c, **{m.upper(): cells[m, c] for m in self.scenario.models}) for c in CRITERIA]


def default_workers() -> int:
    value = os.environ.get(THREADS_ENV, "1")
    try:
        workers = int(value)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {value!r}") from None
    return max(workers, 1)


def run_scenario(scenario: SimScenario, workers: int | None = None) -> SimResult:
    """Run all replicates; streams are spawned from ``scenario.seed``, one per replicate.

    Results do not depend on ``workers`` (defaults to the GALQR_THREADS
    environment variable, else 1).
    """
    workers = default_workers() if workers is None else workers
    seqs = np.random.SeedSequence(scenario.seed).spawn(scenario.replicates)
    tasks = [(scenario, i, s) for i, s in enumerate(seqs)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(_run_replicate_args, tasks))
    else:
        batches = [run_replicate(*t) for t in tasks]
    return SimResult(scenario, [row for batch in batches for row in batch])
