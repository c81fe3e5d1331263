"""
Compressing a repository and keeping it stable
==============================================

Each matched pole and residue is fitted by a low-degree polynomial in the
parameter. A separate example shows why cubic splines need a guard.
"""

import math

import numpy as np

from polematch import (
    AdaptiveConfig,
    PoleResidueROM,
    Repository,
    build_repository,
    evaluate_regressed,
    guarded_interpolate,
    interpolate_at,
    regress,
    stability_margin,
)
from polematch import benchmarks
from polematch.prom import regression_disagreement

oracle = benchmarks.FomOracle(benchmarks.TruncationConfig(4, benchmarks.select_n_real(1e-3)))
repo = build_repository(oracle, AdaptiveConfig(-10.0, 10.0, math.pi / 3, 1e-3))

n_d, n_s = repo.sizes
for q in (0, 2, 5):
    rp = regress(repo, q)
    gap = regression_disagreement(repo, rp, np.linspace(-10, 10, 41)).max()
    print(f"q={q}: {rp.storage} coefficients (raw {len(repo) * (4 * n_d + 2 * n_s)}), "
          f"max disagreement with interpolation {gap:.1e}")

rp = regress(repo, 5)
p = 2.5
err = benchmarks.frf_relative_error(benchmarks.fom_transfer, evaluate_regressed(rp, p), p)
print(f"regressed pROM at p={p}: FRF error {err:.2e}")

# four stable nodes; the middle two sit close to the imaginary axis
a = [-1.0, -1e-3, -1e-3, -1.0]
nodes = [PoleResidueROM([[ak, 10.0, 1.0, 0.0]], [[-5.0, 1.0]], float(k)) for k, ak in enumerate(a)]
toy = Repository([0.0, 1.0, 2.0, 3.0], nodes, 4)

print("cubic margin at 1.5: ", stability_margin(interpolate_at(toy, 1.5, "cubic-spline")))
rom, fell_back = guarded_interpolate(toy, 1.5, "cubic-spline")
print("guarded margin:      ", stability_margin(rom), "fallback:", fell_back)
