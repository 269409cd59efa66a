"""
Tobit quantile regression
=========================

Responses below zero are recorded as zero. The sampler imputes the latent
responses, so the fit targets the quantile of the uncensored response.
"""
import numpy as np

from galqr import gal
from galqr.data import Dataset, add_intercept
from galqr.gal import GalParams
from galqr.sampler import QuantRegConfig, run_chain
from galqr.tobit import censor, run_tobit_chain

rng = np.random.default_rng(11)
n, p0 = 400, 0.5
x, names = add_intercept(rng.normal(size=(n, 1)), ["x"])
beta_true = np.array([0.5, 1.0])
ystar = x @ beta_true + gal.gal_sample(GalParams(p0, 0.5, 0.0, 0.8), rng, n)
y, mask = censor(ystar)
print(f"censored: {mask.mean():.1%}")

cfg = QuantRegConfig(p0=p0, burn_in=2000, thin=2, keep=2000, seed=2)
tob = run_tobit_chain(Dataset(x, y, mask, 0.0, names), cfg)
naive = run_chain(Dataset(x, y, names=names), cfg)
for label, s in (("tobit", tob), ("ignoring censoring", naive)):
    b = s.beta.mean(axis=0)
    print(f"{label:>20}: intercept {b[0]:.3f}, slope {b[1]:.3f}")
print(f"{'truth':>20}: intercept {beta_true[0]:.3f}, slope {beta_true[1]:.3f}")
