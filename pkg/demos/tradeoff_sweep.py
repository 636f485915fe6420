"""Sweep the penalty weight and watch cost trade against sparsity.

Solves one small plant for a ladder of gamma values under the weighted
l1 regime and prints the resulting frontier: certified upper bound,
exact closed-loop cost of the recovered gain, and the number of zero
gain entries.  Larger gamma buys more zeros at a higher cost.

Run:  python3 demos/tradeoff_sweep.py
"""

import time

import numpy as np

from sparselq import (PlantData, h2_cost, lift_plant, regime_l1,
                      solve_relaxed, validate_plant)

A = np.array([[0.2220, 0.9186, 0.7659],
              [0.8707, 0.4884, 0.5184],
              [0.2067, 0.6117, 0.2968]])
B2 = np.array([[0.9315, 0.7939],
               [0.9722, 0.1061],
               [0.5317, 0.7750]])
B1 = np.eye(3)
C = np.zeros((3, 3)); C[0, 0] = 1.0
D = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])

plant = validate_plant(PlantData(A=A, B2=B2, B1=B1, C=C, D=D))
lifted = lift_plant(plant)

print(f"{'gamma':>8} {'J_upper':>9} {'J(K)':>9} {'zeros':>6} "
      f"{'iters':>7} {'wall':>6}")
for gamma in (1e-8, 1.0, 5.0, 10.0, 20.0, 50.0):
    t0 = time.perf_counter()
    sol = solve_relaxed(lifted, regime_l1(gamma))
    wall = time.perf_counter() - t0
    J = float(np.max(h2_cost(plant, sol.K)))
    print(f"{gamma:>8.0e} {sol.J_upper:>9.4f} {J:>9.4f} {sol.n_zeros:>6d} "
          f"{sol.iterations:>7d} {wall:>5.1f}s")

print()
print("gain at gamma = 10:")
sol = solve_relaxed(lifted, regime_l1(10.0))
with np.printoptions(precision=4, suppress=True):
    print(sol.K)
print("pattern (1 = nonzero):")
print(sol.pattern)
