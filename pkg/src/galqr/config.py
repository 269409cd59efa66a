"""TOML run configuration with a strict schema.

Unknown sections or keys are errors: a misspelled prior name would otherwise
silently fall back to a default.

Fit config::

    [data]
    response = "y"
    covariates = ["x", "x^2", "log(z)", "x*z"]   # transform directives
    censored = "cens"        # optional 0/1 column; switches on Tobit
    threshold = 0.0
    intercept = true

    [model]
    p0 = 0.5
    type = "gal"             # or "al"
    lasso = false
    tobit = false

    [prior]
    m0 = [0.0, 0.0]          # default zeros
    Sigma0 = [[100.0, 0.0], [0.0, 100.0]]   # or beta_var = 100.0
    a_sigma = 2.0
    b_sigma = 2.0
    gamma = [1.0, 1.0]

    [lasso]
    a_eta = 0.1
    b_eta = 0.1
    intercept_mean = 0.0
    intercept_var = 100.0

    [chain]
    burn_in = 50000
    thin = 20
    keep = 5000
    seed = 1
    step_init = 1.0
    target_accept = 0.35
    latent_block = "full"

    [output]
    density_points = 512
    density_width = 8.0
    mc_draws = 0              # 0 = all draws

Simulation config: a single ``[scenario]`` table with the fields of
``SimScenario``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .lasso import LassoPriorConfig
from .sampler import QuantRegConfig
from .simulate import SimScenario

_NUM = (int, float)
FIT_SCHEMA = {
    "data": {"response": str, "covariates": list, "censored": str, "threshold": _NUM, "intercept": bool},
    "model": {"p0": _NUM, "type": str, "lasso": bool, "tobit": bool},
    "prior": {"m0": list, "Sigma0": list, "beta_var": _NUM, "a_sigma": _NUM, "b_sigma": _NUM, "gamma": list},
    "lasso": {"a_eta": _NUM, "b_eta": _NUM, "intercept_mean": _NUM, "intercept_var": _NUM},
    "chain": {"burn_in": int, "thin": int, "keep": int, "seed": int, "step_init": _NUM,
              "target_accept": _NUM, "latent_block": str},
    "output": {"density_points": int, "density_width": _NUM, "mc_draws": int},
}
SIM_SCHEMA = {
    "scenario": {"p0": _NUM, "error_law": str, "beta_setting": str, "n_train": int, "n_test": int,
                 "replicates": int, "burn_in": int, "thin": int, "keep": int, "models": list,
                 "lasso": bool, "seed": int},
}


def validate(raw: dict, schema: dict, source="config") -> dict:
    for section, body in raw.items():
        if section not in schema:
            raise ValueError(f"{source}: unknown section [{section}]; allowed: {sorted(schema)}")
        if not isinstance(body, dict):
            raise ValueError(f"{source}: [{section}] must be a table")
        for key, value in body.items():
            if key not in schema[section]:
                raise ValueError(f"{source}: unknown key {section}.{key}; allowed: {sorted(schema[section])}")
            kind = schema[section][key]
            ok = isinstance(value, kind) and not (kind is not bool and isinstance(value, bool))
            if not ok:
                raise ValueError(f"{source}: {section}.{key} has the wrong type ({type(value).__name__})")
    return raw


def load_toml(path) -> dict:
    with open(path, "rb") as fh:
        try:
            return tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ValueError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# covariate transforms
# ---------------------------------------------------------------------------

_IDENT = r"[A-Za-z_][A-Za-z0-9_.]*"
_POWER = re.compile(rf"^({_IDENT})\s*\^\s*(\d+)$")
_FUNC = re.compile(rf"^(log|exp|sqrt)\(\s*({_IDENT})\s*\)$")
_PRODUCT = re.compile(rf"^({_IDENT})\s*\*\s*({_IDENT})$")
_PLAIN = re.compile(rf"^{_IDENT}$")


def _column(table, name, directive):
    if name not in table:
        raise ValueError(f"covariate {directive!r} refers to missing column {name!r}")
    return table[name]


def apply_transform(table: dict, directive: str) -> np.ndarray:
    """Evaluate a covariate directive: ``x``, ``x^k``, ``log(x)``, ``exp(x)``, ``sqrt(x)``, ``x*z``."""
    d = directive.strip()
    if _PLAIN.match(d):
        return _column(table, d, directive)
    m = _POWER.match(d)
    if m:
        return _column(table, m.group(1), directive) ** int(m.group(2))
    m = _FUNC.match(d)
    if m:
        x = _column(table, m.group(2), directive)
        if m.group(1) == "log":
            if np.any(x <= 0):
                raise ValueError(f"{directive!r}: log of a nonpositive value")
            return np.log(x)
        if m.group(1) == "sqrt":
            if np.any(x < 0):
                raise ValueError(f"{directive!r}: sqrt of a negative value")
            return np.sqrt(x)
        return np.exp(x)
    m = _PRODUCT.match(d)
    if m:
        return _column(table, m.group(1), directive) * _column(table, m.group(2), directive)
    raise ValueError(f"cannot parse covariate directive {directive!r}")


# ---------------------------------------------------------------------------
# fit settings
# ---------------------------------------------------------------------------

@dataclass
class FitSettings:
    response: str = "y"
    covariates: list[str] = field(default_factory=list)
    censored: str | None = None
    threshold: float = 0.0
    intercept: bool = True
    model: str = "gal"
    lasso: bool = False
    tobit: bool = False
    density_points: int = 512
    density_width: float = 8.0
    mc_draws: int = 0
    beta_var: float | None = None
    config: QuantRegConfig = field(default_factory=QuantRegConfig)


def fit_settings(raw: dict, overrides: dict | None = None) -> FitSettings:
    """Build FitSettings from a validated fit config plus CLI overrides.

    Overrides (``p0``, ``seed``, ``model``, ``lasso``, ``tobit``) win over the file.
    """
    raw = validate(raw, FIT_SCHEMA)
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    data = raw.get("data", {})
    model = raw.get("model", {})
    prior = raw.get("prior", {})
    chain = raw.get("chain", {})
    output = raw.get("output", {})

    kind = overrides.get("model", model.get("type", "gal"))
    if kind not in ("al", "gal"):
        raise ValueError(f"model type must be 'al' or 'gal', got {kind!r}")
    use_lasso = bool(overrides.get("lasso", model.get("lasso", False)))
    lasso_cfg = None
    if use_lasso or "lasso" in raw:
        lasso_cfg = LassoPriorConfig(**raw.get("lasso", {}))
    if "Sigma0" in prior and "beta_var" in prior:
        raise ValueError("give either prior.Sigma0 or prior.beta_var, not both")
    beta_var = prior.get("beta_var")
    if beta_var is not None and not beta_var > 0:
        raise ValueError("prior.beta_var must be positive")
    gamma_prior = tuple(prior.get("gamma", (1.0, 1.0)))
    if len(gamma_prior) != 2:
        raise ValueError("prior.gamma must have two shape values")

    cfg = QuantRegConfig(
        p0=float(overrides.get("p0", model.get("p0", 0.5))),
        m0=prior.get("m0"),
        Sigma0=prior.get("Sigma0"),
        a_sigma=float(prior.get("a_sigma", 2.0)),
        b_sigma=float(prior.get("b_sigma", 2.0)),
        gamma_prior=gamma_prior,
        burn_in=chain.get("burn_in", 50_000),
        thin=chain.get("thin", 20),
        keep=chain.get("keep", 5_000),
        seed=overrides.get("seed", chain.get("seed")),
        gamma_fixed_at_zero=kind == "al",
        lasso=lasso_cfg if use_lasso else None,
        step_init=float(chain.get("step_init", 1.0)),
        target_accept=float(chain.get("target_accept", 0.35)),
        latent_block=chain.get("latent_block", "full"),
    )
    settings = FitSettings(
        response=data.get("response", "y"),
        covariates=list(data.get("covariates", [])),
        censored=data.get("censored"),
        threshold=float(data.get("threshold", 0.0)),
        intercept=bool(data.get("intercept", True)),
        model=kind,
        lasso=use_lasso,
        tobit=bool(overrides.get("tobit", model.get("tobit", False))),
        density_points=output.get("density_points", 512),
        density_width=float(output.get("density_width", 8.0)),
        mc_draws=output.get("mc_draws", 0),
        beta_var=None if beta_var is None else float(beta_var),
        config=cfg,
    )
    if not all(isinstance(c, str) for c in settings.covariates):
        raise ValueError("data.covariates must be a list of strings")
    if settings.tobit and not settings.censored:
        raise ValueError("Tobit fit requested but no data.censored column configured")
    if settings.density_points < 2 or not settings.density_width > 0:
        raise ValueError("output.density_points must be >= 2 and density_width > 0")
    if settings.mc_draws < 0:
        raise ValueError("output.mc_draws must be >= 0")
    if not math.isfinite(settings.threshold):
        raise ValueError("data.threshold must be finite")
    return settings


def resolve_prior(settings: FitSettings, n_coef: int) -> QuantRegConfig:
    """Config with ``beta_var`` expanded to beta_var * I for ``n_coef`` coefficients."""
    if settings.beta_var is None:
        return settings.config
    return replace(settings.config, Sigma0=settings.beta_var * np.eye(n_coef))


def sim_scenario(raw: dict, overrides: dict | None = None) -> SimScenario:
    raw = validate(raw, SIM_SCHEMA)
    body = dict(raw.get("scenario", {}))
    body.update({k: v for k, v in (overrides or {}).items() if v is not None})
    if "models" in body:
        body["models"] = tuple(body["models"])
    return SimScenario(**body)
