"""
Simulation-based calibration
============================

Parameters drawn from the prior should have uniform posterior ranks. This
short run uses 20 datasets; the acceptance gate uses 100.
"""
from galqr.calibration import run_sbc
from galqr.sampler import QuantRegConfig

result = run_sbc(QuantRegConfig(p0=0.25, burn_in=1000, thin=2, keep=1000), runs=20, n=50, n_slopes=2, seed=3)
for name, p in result.pvalues.items():
    print(f"{name:>7}  rank counts {result.counts(name)}  chi-square p {p:.3f}")
