"""
The quantile-fixed GAL distribution
===================================

The shape parameter gamma moves skewness, mode and tails while the p0-quantile
stays pinned at mu. Its admissible range (L, U) depends on p0.
"""
import numpy as np

from galqr import gal
from galqr.gal import GalParams

# admissible shape range for a few quantile levels
for p0 in (0.05, 0.25, 0.5, 0.75):
    L, U = gal.gamma_support(p0)
    print(f"p0={p0:<5} gamma in ({L:8.4f}, {U:8.4f})")

# gamma = 0 is the asymmetric Laplace; moving gamma reshapes the density
# but F(mu) stays at p0
p0 = 0.25
y = np.linspace(-6, 10, 9)
for gamma in (-0.3, 0.0, 0.8, 1.5):
    par = GalParams(p0, gamma, mu=0.0, sigma=1.0)
    print(f"gamma={gamma:5.2f}  F(0)={gal.gal_cdf(0.0, par):.6f}  mode={gal.gal_mode(par):6.3f}  "
          f"pdf: " + " ".join(f"{v:.3f}" for v in gal.gal_pdf(y, par)))

# draws come from the normal / exponential / half-normal mixture
rng = np.random.default_rng(1)
par = GalParams(p0, 1.0, mu=2.0, sigma=0.5)
x = gal.gal_sample(par, rng, 100_000)
print(f"fraction of draws below mu: {np.mean(x <= 2.0):.4f} (p0 = {p0})")
print(f"sample mean {x.mean():.4f}, analytic mean {gal.gal_mean(par):.4f}")
