"""
Matching poles between two ROMs
================================

Eigen-solvers return poles in arbitrary order. Before ROMs at different
parameter values can be interpolated, their rows must be lined up so that
row k always follows the same physical pole.
"""

import numpy as np

from polematch import PoleResidueROM, branch_and_bound, brute_force, distance, match
from polematch.matching import objective_d

rng = np.random.default_rng(0)

# six complex pairs, then the "next" ROM: slightly moved and shuffled
D1 = np.column_stack([-rng.uniform(1, 30, 6), rng.uniform(10, 300, 6), rng.standard_normal(6), np.zeros(6)])
perm = rng.permutation(6)
D2 = D1[perm] + 1e-3 * rng.standard_normal(D1.shape)

res = branch_and_bound(D1, D2)
print("shuffle applied:      ", perm)
print("mapping found:        ", res.v, "(inverse of the shuffle:", np.argsort(perm), ")")
print("objective:            ", res.objective)
print("brute force objective:", objective_d(D1, D2, brute_force(D1, D2)))
print("swap evaluations:     ", res.evaluations, "vs 6! =", 720)

# when nothing needs to move, every single swap is tried once: n(n-1)
res = branch_and_bound(D1, D1 + 1e-6)
print("already aligned:", res.evaluations, "evaluations")

# on whole ROMs the D and S blocks are matched independently
a = PoleResidueROM(D1, [[-1.0, 1.0], [-4.0, 2.0]], 0.0)
b = PoleResidueROM(D2, [[-4.1, 2.0], [-1.05, 1.0]], 0.1)
aligned = match(a, b)
print(aligned.S)
print(distance(a, b))
