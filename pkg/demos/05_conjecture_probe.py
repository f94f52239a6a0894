"""Sweep medians measured in Schatten p-norms, 1 <= p <= 2.

Empirical evidence only: nothing here is a pass/fail check.

Run: python demos/05_conjecture_probe.py
"""
import numpy as np

from prechannel_lln import SeedSpec, TimeGrid, conjecture_probe, default_test_vector, shipped

E = shipped("lindblad-like")
x = default_test_vector(2)
grid = TimeGrid.uniform(1.0, 33)
schedule = (8, 32, 128, 512)

for p in (1.0, 4 / 3, 1.5, 2.0):
    probe = conjecture_probe(E, x, schedule, grid, p, SeedSpec(11), trials=100)
    slope = np.polyfit(np.log(schedule), np.log(probe.medians), 1)[0]
    print(f"p={p:.3f} medians {np.array2string(probe.medians, precision=4)}  slope {slope:.3f}")
