"""
From a state-space ROM to poles and residues
=============================================

A small real system (A, B, C) is rewritten as one row per complex pole
pair plus one row per real pole. The transfer function does not change.
"""

import numpy as np

from polematch import StateSpaceROM, state_space_transfer, to_pole_residue, transfer_function

# a damped oscillator at 200 rad/s plus one real mode, mixed by a similarity
L = np.zeros((3, 3))
L[:2, :2] = [[-42.0, 200.0], [-200.0, -42.0]]
L[2, 2] = -7.0
T = np.array([[1.0, 0.3, 0.0], [0.2, 1.0, 0.5], [0.0, -0.4, 1.0]])
A = T @ L @ np.linalg.inv(T)
rom = StateSpaceROM(A, [1.0, 2.0, 0.5], [3.0, -1.0, 2.0])

prom = to_pole_residue(rom, p=0.0)
print("D rows (a, b, c1, c2):")
print(prom.D)
print("S rows (lambda, c):")
print(prom.S)

# both forms give the same response
for s in (1j, 50j, 200j, 3.0 + 10j):
    print(f"s={s!s:>9}  dense={state_space_transfer(rom, s):.10f}  poles={transfer_function(prom, s):.10f}")

# the pole-residue data serializes to plain JSON
print(prom.to_dict())
