"""Monte-Carlo law of large numbers for W_n(t) = exp(A_1 t/n) ... exp(A_n t/n).

Run: python demos/04_lln_sweep.py
"""
import numpy as np

from prechannel_lln import ExperimentConfig, SeedSpec, TimeGrid, rank_one, run_lln_sweep, shipped

config = ExperimentConfig(
    ensemble=shipped("two-point"),
    x=rank_one(np.ones(2) / np.sqrt(2)),
    grid=TimeGrid.uniform(1.0, 65),
    n_schedule=(8, 32, 128, 512),
    trials=200,
    eps=0.1,
    seed=SeedSpec(7),
)
result = run_lln_sweep(config)

print(f"{'n':>5} {'median':>10} {'q90':>10} {'max':>10} {'Pr>eps':>8} {'chernoff':>10} {'bound':>10}")
for r in result.records:
    print(
        f"{r.n:>5} {r.median:>10.4e} {r.q90:>10.4e} {r.max:>10.4e} "
        f"{r.exceedance:>8.3f} {r.chernoff_error:>10.3e} {r.bound:>10.3e}"
    )
# A log-log slope near -1/2 is what a central-limit heuristic suggests.
print("fitted slope:", result.slope)
print("config hash:", result.config_hash)
