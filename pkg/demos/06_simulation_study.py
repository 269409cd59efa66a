"""
A small AL-versus-GAL simulation study
======================================

Each replicate draws training and test data with the p0-quantile of the
error pinned at zero, fits lasso AL and GAL models, and scores them.
Set GALQR_THREADS to run replicates in parallel.
"""
from galqr.simulate import SimScenario, run_scenario

scenario = SimScenario(p0=0.05, error_law="normal", beta_setting="sparse", replicates=4,
                       burn_in=2000, thin=2, keep=1000, seed=1)
result = run_scenario(scenario)
print(f"{'criterion':>14} {'AL':>16} {'GAL':>16}")
for row in result.table():
    print(f"{row['criterion']:>14} {row['AL']:>16} {row['GAL']:>16}")
print("failed fits:", result.failures)
