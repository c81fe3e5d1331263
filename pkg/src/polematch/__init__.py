"""Parametric reduced-order models by pole matching and interpolation.

Local ROMs built at individual parameter values are converted to a
pole-residue realization, their poles are matched with a swap-based branch
and bound, and the matched pole/residue data are interpolated (or regressed)
in the parameter.
"""

from .adaptive import AdaptiveConfig, Repository, build_from_roms, build_repository
from .matching import branch_and_bound, brute_force, distance, match
from .prom import (
    InterpolationScheme,
    RegressedPROM,
    evaluate_regressed,
    guarded_interpolate,
    interpolate_at,
    regress,
    stability_margin,
)
from .rom import (
    PoleResidueROM,
    StateSpaceROM,
    Weights,
    canonicalize,
    state_space_transfer,
    to_pole_residue,
    transfer_function,
)

__version__ = "0.1.0"
