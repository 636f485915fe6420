"""Drive the gain toward a target cardinality with the surrogate ladder.

The l1 penalty buys zeros but also shrinks the surviving entries.  The
continuation regime replaces it with a concave surrogate 1 - e^(-|x|/s)
whose sharpness s steps down a geometric ladder; each stage reweights
and re-solves, so the final gain counts zeros rather than magnitudes.
The stage trace shows the surrogate objective descending inside every
stage (to solver tolerance) while zeros accumulate.

Run:  python3 demos/cardinality_ladder.py
"""

import numpy as np

from sparselq import (ContinuationOptions, PlantData, lift_plant, regime_l1,
                      solve_l0, solve_relaxed, validate_plant)

rng = np.random.default_rng(5)
n, m = 3, 2
d = 0.5 + rng.random(n)
B2 = rng.standard_normal((n, m))
K0 = rng.standard_normal((m, n))
A = -np.diag(d) + B2 @ K0
B1 = np.eye(n)
C = np.vstack([np.eye(n), np.zeros((m, n))])
D = np.vstack([np.zeros((n, m)), np.eye(m)])

lifted = lift_plant(validate_plant(PlantData(A=A, B2=B2, B1=B1, C=C, D=D)))

gamma = 0.8
l1 = solve_relaxed(lifted, regime_l1(gamma))
ladder = ContinuationOptions(sigma0=1.0, sigma_min=0.05, sigma_decay=0.5)
l0 = solve_l0(lifted, gamma, continuation=ladder)

print(f"l1 baseline: {l1.n_zeros} zeros, J_upper {l1.J_upper:.4f}")
print(f"continuation: {l0.n_zeros} zeros, J_upper {l0.J_upper:.4f}, "
      f"certified {l0.certified}")
print()
print(f"{'sigma':>8} {'pass':>5} {'objective':>11} {'nnz':>4}")
for sigma, passno, h, nnz in l0.stage_trace:
    print(f"{sigma:>8.3f} {passno:>5d} {h:>11.5f} {nnz:>4d}")

print()
print("final gain:")
with np.printoptions(precision=4, suppress=True):
    print(l0.K)
