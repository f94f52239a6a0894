"""The deterministic half of the limit: (E exp(A t/n))^n -> exp(E[A] t).

The gap is computed exactly (no sampling) and roughly halves when n doubles.

Run: python demos/03_chernoff_side.py
"""
import numpy as np

from prechannel_lln import TimeGrid, chernoff_error, default_test_vector, shipped
from prechannel_lln.semigroup import chernoff_trajectory

grid = TimeGrid.uniform(1.0, 65)
x = default_test_vector(2)

for family in ("two-point", "ginibre", "lindblad-like"):
    E = shipped(family)
    errs = [chernoff_error(E, x, n, grid) for n in (8, 16, 32, 64, 128)]
    ratios = np.array(errs[1:]) / errs[:-1]
    print(f"{family:>14}: errors {np.array2string(np.array(errs), precision=3)}")
    print(f"{'':>14}  ratios {np.array2string(ratios, precision=4)}")

# The gap as a function of t; the sup over [0, T] is attained late for these ensembles.
traj = chernoff_trajectory(shipped("two-point"), x, 16, grid)
print("argmax t:", grid.points[int(np.argmax(traj))], "max:", traj.max())
