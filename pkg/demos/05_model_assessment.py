"""
Posterior predictive loss and BIC
=================================

Both criteria favour the error model that matches the data. The check-loss
version splits into a goodness-of-fit term G and a nonnegative penalty P.
"""
import numpy as np

from galqr import assess, gal
from galqr.data import Dataset, add_intercept
from galqr.gal import GalParams
from galqr.sampler import QuantRegConfig, posterior_predictive_replicates, run_chain

rng = np.random.default_rng(5)
n, p0 = 250, 0.1
x, names = add_intercept(rng.normal(size=(n, 2)))
y = x @ np.array([0.0, 1.0, 1.0]) + gal.gal_sample(GalParams(p0, 3.0, 0.0, 1.0), rng, n)
data = Dataset(x, y, names=names)

print(f"{'model':>5} {'D_inf':>9} {'check D':>9} {'check P':>9} {'check G':>9} {'BIC':>9}")
for model in ("al", "gal"):
    s = run_chain(data, QuantRegConfig(p0=p0, burn_in=2000, thin=2, keep=2000, seed=3,
                                       gamma_fixed_at_zero=model == "al"))
    reps = posterior_predictive_replicates(s, data.x, np.random.default_rng(0))
    quad, chk = assess.ppl_quadratic(reps, y), assess.ppl_check(reps, y, p0)
    _, bic = assess.bic_from_samples(s, data)
    print(f"{model:>5} {quad.D:9.1f} {chk.D:9.2f} {chk.P:9.2f} {chk.G:9.2f} {bic:9.1f}")
