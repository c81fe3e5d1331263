"""Online evaluation of parametric ROMs: interpolation, regression, stability."""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.polynomial import legendre
from numpy.polynomial import polynomial as poly
from scipy.interpolate import CubicSpline

from .errors import IllConditioned, OutOfDomain, PoleMatchError, Underdetermined
from .matching import relative_error
from .rom import PoleResidueROM, Weights

__all__ = [
    "InterpolationScheme",
    "RegressedPROM",
    "interpolate_entries",
    "interpolate_at",
    "regress",
    "evaluate_regressed",
    "stability_margin",
    "guarded_interpolate",
    "regression_disagreement",
]

#: Legendre-Vandermonde condition numbers above this refuse to fit.
MAX_CONDITION = 1e12


class InterpolationScheme(str, Enum):
    LINEAR = "linear"
    CUBIC = "cubic-spline"


def _stack(roms):
    D = np.stack([r.D for r in roms])
    S = np.stack([r.S for r in roms])
    return D, S


def _node_index(params, p):
    hit = np.flatnonzero(params == p)
    return int(hit[0]) if hit.size else None


def interpolate_entries(params, roms, p, scheme=InterpolationScheme.LINEAR):
    """Interpolate every ``D``/``S`` entry of matched ROMs at ``p``.

    ``params`` must be strictly increasing and ``p`` inside their range.
    At a node the stored ROM is returned unchanged.
    """
    params = np.asarray(params, dtype=float)
    scheme = InterpolationScheme(scheme)
    if not params[0] <= p <= params[-1]:
        raise OutOfDomain(f"p={p!r} outside [{params[0]!r}, {params[-1]!r}]")
    k = _node_index(params, p)
    if k is not None:
        return roms[k].replace(param=p)
    if len(roms) == 1:
        return roms[0].replace(param=p)
    D, S = _stack(roms)
    if scheme is InterpolationScheme.LINEAR or len(roms) == 2:
        k = int(np.searchsorted(params, p, side="right")) - 1
        k = min(k, len(params) - 2)
        t = (p - params[k]) / (params[k + 1] - params[k])
        Dp = (1.0 - t) * D[k] + t * D[k + 1]
        Sp = (1.0 - t) * S[k] + t * S[k + 1]
    else:
        Dp = CubicSpline(params, D, axis=0)(p)
        Sp = CubicSpline(params, S, axis=0)(p)
    return PoleResidueROM(Dp, Sp, p)


def _require_validated(repo):
    if repo.high_fidelity_index != len(repo):
        raise PoleMatchError(
            f"repository only validated up to entry {repo.high_fidelity_index} of {len(repo)}"
        )


def interpolate_at(repo, p, scheme=InterpolationScheme.LINEAR):
    """Evaluate a validated repository at ``p`` (no extrapolation)."""
    _require_validated(repo)
    return interpolate_entries(repo.params, repo.roms, p, scheme)


def stability_margin(prom):
    """Largest real part over all poles; negative means asymptotically stable."""
    parts = np.concatenate([prom.D[:, 0], prom.S[:, 0]])
    return float(parts.max())


def guarded_interpolate(repo, p, preferred=InterpolationScheme.CUBIC):
    """Interpolate with ``preferred`` unless that breaks stability.

    When both bracketing repository ROMs are stable but the preferred scheme
    returns an unstable ROM, linear interpolation is used instead.

    Returns
    -------
    rom : PoleResidueROM
    fell_back : bool
        True when the linear fallback was taken.
    """
    rom = interpolate_at(repo, p, preferred)
    if InterpolationScheme(preferred) is InterpolationScheme.LINEAR:
        return rom, False
    if stability_margin(rom) < 0:
        return rom, False
    params = np.asarray(repo.params)
    k = min(int(np.searchsorted(params, p, side="right")) - 1, len(params) - 2)
    k = max(k, 0)
    left, right = repo.roms[k], repo.roms[min(k + 1, len(repo) - 1)]
    if stability_margin(left) < 0 and stability_margin(right) < 0:
        return interpolate_at(repo, p, InterpolationScheme.LINEAR), True
    return rom, False


@dataclass(frozen=True)
class RegressedPROM:
    """Entrywise polynomial fit of a repository.

    Coefficients are in the monomial basis of ``x = (2p - (lo + hi)) / (hi - lo)``,
    lowest degree first along the last axis.
    """

    q: int
    domain: tuple
    d_coeffs: np.ndarray
    s_coeffs: np.ndarray
    residuals: dict = None

    @property
    def sizes(self):
        return (self.d_coeffs.shape[0], self.s_coeffs.shape[0])

    @property
    def storage(self):
        return int(self.d_coeffs.size + self.s_coeffs.size)

    def to_dict(self):
        return {
            "q": int(self.q),
            "domain": [float(self.domain[0]), float(self.domain[1])],
            "d_coeffs": self.d_coeffs.tolist(),
            "s_coeffs": self.s_coeffs.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        q = int(data["q"])
        d = np.array(data["d_coeffs"], dtype=float).reshape(-1, 4, q + 1)
        s = np.array(data["s_coeffs"], dtype=float).reshape(-1, 2, q + 1)
        return cls(q, tuple(data["domain"]), d, s)


def _to_unit(p, domain):
    lo, hi = domain
    return (2.0 * np.asarray(p, dtype=float) - (lo + hi)) / (hi - lo)


def regress(repo, q):
    """Least-squares fit of a degree-``q`` polynomial to every entry.

    The fit is carried out in a Legendre basis on the repository's parameter
    range mapped to ``[-1, 1]``.

    Raises
    ------
    Underdetermined
        Fewer than ``q + 1`` repository entries.
    IllConditioned
        The Legendre design matrix is numerically rank deficient.
    """
    _require_validated(repo)
    q = int(q)
    n = len(repo)
    if q < 0:
        raise ValueError("q must be nonnegative")
    if n < q + 1:
        raise Underdetermined(f"{n} entries cannot determine degree {q}")
    params = np.asarray(repo.params, dtype=float)
    domain = (float(params[0]), float(params[-1]))
    x = _to_unit(params, domain)
    vander = legendre.legvander(x, q)
    if np.linalg.cond(vander) > MAX_CONDITION:
        raise IllConditioned("Legendre design matrix is rank deficient")

    D, S = _stack(repo.roms)
    n_d, n_s = D.shape[1], S.shape[1]
    Y = np.concatenate([D.reshape(n, -1), S.reshape(n, -1)], axis=1)
    leg = np.linalg.lstsq(vander, Y, rcond=None)[0]
    fitted = vander @ leg
    # column k holds the monomial coefficients of the k-th Legendre polynomial
    basis = np.zeros((q + 1, q + 1))
    for k in range(q + 1):
        c = legendre.leg2poly(np.eye(q + 1)[k])
        basis[: c.size, k] = c
    mono = (basis @ leg).T
    d_coeffs = mono[: 4 * n_d].reshape(n_d, 4, q + 1)
    s_coeffs = mono[4 * n_d :].reshape(n_s, 2, q + 1)
    resid = np.abs(Y - fitted).max(axis=0)
    residuals = {
        "D": resid[: 4 * n_d].reshape(n_d, 4),
        "S": resid[4 * n_d :].reshape(n_s, 2),
    }
    return RegressedPROM(q, domain, d_coeffs, s_coeffs, residuals)


def evaluate_regressed(rp, p):
    """Evaluate the regressed pROM at a scalar ``p`` inside its domain."""
    lo, hi = rp.domain
    if not lo <= p <= hi:
        raise OutOfDomain(f"p={p!r} outside [{lo!r}, {hi!r}]")
    x = float(_to_unit(p, rp.domain))
    # polyval wants the coefficient axis first
    D = poly.polyval(x, np.moveaxis(rp.d_coeffs, -1, 0))
    S = poly.polyval(x, np.moveaxis(rp.s_coeffs, -1, 0))
    return PoleResidueROM(D.reshape(-1, 4), S.reshape(-1, 2), p)


def regression_disagreement(repo, rp, grid, w=Weights(), scheme=InterpolationScheme.LINEAR):
    """Relative error between interpolated and regressed ROMs along ``grid``.

    Returns the per-point errors as an array.
    """
    errs = [
        relative_error(interpolate_at(repo, p, scheme), evaluate_regressed(rp, p), w)
        for p in grid
    ]
    return np.asarray(errs, dtype=float)
