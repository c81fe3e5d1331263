"""Pole matching between two ROMs of equal size.

Mapping vectors are 0-based integer arrays: ``v[i] = k`` means row ``k`` of
the source matrix is placed at position ``i``.
"""

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .errors import LengthMismatch, ShapeMismatch, SizeMismatch, TooLarge, ZeroNorm
from .rom import PoleResidueROM, Weights

__all__ = [
    "MatchResult",
    "BlockMatch",
    "RomDistance",
    "apply_mapping",
    "objective",
    "objective_d",
    "objective_s",
    "cost_matrix",
    "branch_and_bound",
    "brute_force",
    "match_blocks",
    "match",
    "distance",
    "relative_error",
]

BRUTE_FORCE_MAX = 9


@dataclass(frozen=True)
class BlockMatch:
    """Outcome of matching one block (``D`` or ``S``).

    ``history`` holds the incumbent objective after every accepted swap,
    starting with the objective of the identity mapping.
    """

    v: np.ndarray
    objective: float
    evaluations: int
    low_confidence: bool = False
    history: tuple = ()


@dataclass(frozen=True)
class MatchResult:
    v_d: np.ndarray
    v_s: np.ndarray
    objective: float
    evaluations: int
    low_confidence: bool = False

    def to_dict(self):
        return {
            "v_d": [int(x) for x in self.v_d],
            "v_s": [int(x) for x in self.v_s],
            "objective": float(self.objective),
            "evaluations": int(self.evaluations),
            "low_confidence": bool(self.low_confidence),
        }


@dataclass(frozen=True)
class RomDistance:
    distance: float
    relative_error: float


def apply_mapping(v, M):
    """Return ``M`` with row ``i`` replaced by row ``v[i]``."""
    M = np.asarray(M)
    v = np.asarray(v, dtype=int)
    if v.shape != (M.shape[0],):
        raise LengthMismatch(f"mapping of length {v.size} for {M.shape[0]} rows")
    return M[v]


def _block_objective(M1, M2, v, w):
    M1 = np.asarray(M1, dtype=float)
    M2 = np.asarray(M2, dtype=float)
    if M1.shape != M2.shape:
        raise ShapeMismatch(f"blocks differ in shape: {M1.shape} vs {M2.shape}")
    diff = (M1 - apply_mapping(v, M2)) * w
    return float(np.sum(diff * diff))


def objective_d(D1, D2, v_d, w=Weights()):
    """Squared weighted Frobenius mismatch of ``D1`` and the permuted ``D2``."""
    return _block_objective(D1, D2, v_d, w.d)


def objective_s(S1, S2, v_s, w=Weights()):
    return _block_objective(S1, S2, v_s, w.s)


def objective(rom1, rom2, v_d, v_s, w=Weights()):
    """Total matching objective ``f = f_d + f_s``."""
    return objective_d(rom1.D, rom2.D, v_d, w) + objective_s(rom1.S, rom2.S, v_s, w)


def cost_matrix(M1, M2, w):
    """``cost[i, k]`` is the weighted squared distance of ``M1[i]`` and ``M2[k]``."""
    M1 = np.asarray(M1, dtype=float)
    M2 = np.asarray(M2, dtype=float)
    w = np.broadcast_to(np.asarray(w, dtype=float), (M1.shape[1],))
    cost = np.zeros((M1.shape[0], M2.shape[0]))
    # one column at a time avoids an n x n x width temporary
    for c in range(M1.shape[1]):
        diff = np.subtract.outer(M1[:, c], M2[:, c])
        diff *= w[c]
        diff *= diff
        cost += diff
    return cost


def _weights_for(M, w):
    if isinstance(w, Weights):
        return w.d if M.shape[1] == 4 else w.s
    return np.asarray(w, dtype=float)


def branch_and_bound(M1, M2, w=Weights(), budget=None, reset_on_accept=True):
    """Match the rows of ``M2`` to ``M1`` with the swap-based branch and bound.

    Starting from the identity mapping, every swap ``(i, j)`` allowed by the
    feasibility table is tried in row-major order. A swap that does not
    strictly lower the incumbent is branched out; the first strictly improving
    swap is accepted and the scan restarts. The search ends once the table is
    empty.

    Parameters
    ----------
    M1, M2 : ndarray, shape (n, 4) or (n, 2)
        Reference and source blocks.
    w : Weights or array_like
        Weights; a :class:`Weights` is expanded according to the block width.
    budget : int, optional
        Maximum number of swap evaluations, default ``50 * n**2``. When it is
        exhausted the incumbent is returned with ``low_confidence=True``.
    reset_on_accept : bool
        Restore the feasibility table after each accepted swap. Entries are
        keyed by row values, not positions, so keeping them after the mapping
        changes can prune the true optimum; ``False`` keeps them anyway.

    Returns
    -------
    BlockMatch
    """
    M1 = np.asarray(M1, dtype=float)
    M2 = np.asarray(M2, dtype=float)
    if M1.shape != M2.shape or M1.ndim != 2:
        raise ShapeMismatch(f"blocks differ in shape: {M1.shape} vs {M2.shape}")
    n = M1.shape[0]
    wv = _weights_for(M1, w)
    v = np.arange(n)
    if n < 2:
        f0 = _block_objective(M1, M2, v, wv)
        return BlockMatch(v, f0, 0, False, (f0,))
    if budget is None:
        budget = 50 * n * n

    cost = cost_matrix(M1, M2, wv)
    offdiag = ~np.eye(n, dtype=bool)
    F = offdiag.copy()
    incumbent = _block_objective(M1, M2, v, wv)
    history = [incumbent]
    evaluations = 0
    low_confidence = False

    identity = True
    while F.any():
        cv = cost if identity else cost[:, v]
        current = np.diagonal(cv).copy()
        # objective change of swapping entries i and j of v
        delta = cv + cv.T
        delta -= current[:, None]
        delta -= current[None, :]
        # feasibility in position coordinates
        feasible = F.copy() if identity else F[np.ix_(v, v)]
        flat = feasible.ravel()
        improving = flat & (delta.ravel() < 0)
        hit = int(np.argmax(improving)) if improving.any() else None

        # row-major scan up to and including the first improving swap
        end = flat.size if hit is None else hit + 1
        scanned = np.cumsum(flat[:end]) if end else np.zeros(0, dtype=int)
        n_scanned = int(scanned[-1]) if end else 0
        if evaluations + n_scanned > budget:
            allowed = max(budget - evaluations, 0)
            end = int(np.searchsorted(scanned, allowed, side="right"))
            hit = None
            n_scanned = allowed
            low_confidence = True

        evaluations += n_scanned
        rejected = feasible
        rejected.ravel()[end - (hit is not None):] = False
        if identity:
            F &= ~rejected
        else:
            F[np.ix_(v, v)] &= ~rejected
        if hit is None:
            break

        i, j = divmod(hit, n)
        trial = v.copy()
        trial[i], trial[j] = trial[j], trial[i]
        value = _block_objective(M1, M2, trial, wv)
        if not value < incumbent:
            # rounding in the swap delta; the recomputed objective decides
            F[v[i], v[j]] = False
            continue
        v, incumbent, identity = trial, value, False
        history.append(incumbent)
        if reset_on_accept:
            F = offdiag.copy()

    return BlockMatch(v, incumbent, evaluations, low_confidence, tuple(history))


def brute_force(M1, M2, w=Weights()):
    """Exhaustive minimizer over all row permutations (at most nine rows).

    Ties go to the lexicographically smallest mapping.
    """
    M1 = np.asarray(M1, dtype=float)
    M2 = np.asarray(M2, dtype=float)
    if M1.shape != M2.shape or M1.ndim != 2:
        raise ShapeMismatch(f"blocks differ in shape: {M1.shape} vs {M2.shape}")
    n = M1.shape[0]
    if n > BRUTE_FORCE_MAX:
        raise TooLarge(f"brute force limited to {BRUTE_FORCE_MAX} rows, got {n}")
    wv = _weights_for(M1, w)
    perms = np.array(list(permutations(range(n))), dtype=int).reshape(-1, n)
    diff = (M1[None, :, :] - M2[perms]) * wv
    values = np.sum(diff * diff, axis=(1, 2))
    # permutations() is lexicographic and argmin returns the first minimum
    return perms[int(np.argmin(values))]


def _check_sizes(rom1, rom2):
    if rom1.sizes != rom2.sizes:
        raise SizeMismatch(f"pole counts differ: {rom1.sizes} vs {rom2.sizes}")


def match_blocks(target, source, w=Weights(), budget=None):
    """Solve the decoupled ``D`` and ``S`` matching problems."""
    _check_sizes(target, source)
    bd = branch_and_bound(target.D, source.D, w.d, budget=budget)
    bs = branch_and_bound(target.S, source.S, w.s, budget=budget)
    return MatchResult(
        bd.v,
        bs.v,
        bd.objective + bs.objective,
        bd.evaluations + bs.evaluations,
        bd.low_confidence or bs.low_confidence,
    )


def match(target, source, w=Weights(), budget=None, return_result=False):
    """Reorder the rows of ``source`` so its poles line up with ``target``."""
    res = match_blocks(target, source, w, budget)
    out = PoleResidueROM(source.D[res.v_d], source.S[res.v_s], source.param)
    return (out, res) if return_result else out


def _block_distances(rom1, rom2, w, budget=None):
    matched, res = match(rom1, rom2, w, budget=budget, return_result=True)
    rd = np.linalg.norm((rom1.D - matched.D) * w.d)
    rs = np.linalg.norm((rom1.S - matched.S) * w.s)
    return rd, rs, matched, res


def distance(rom1, rom2, w=Weights(), budget=None):
    """Distance and relative error between two ROMs after optimal matching.

    Raises
    ------
    SizeMismatch
    ZeroNorm
        A nonempty block of ``rom1`` has zero Frobenius norm.
    """
    rd, rs, _, _ = _block_distances(rom1, rom2, w, budget)
    nd = np.linalg.norm(rom1.D)
    ns = np.linalg.norm(rom1.S)
    rel = 0.0
    for num, den, size in ((rd, nd, rom1.n_d), (rs, ns, rom1.n_s)):
        if size == 0:
            continue
        if den == 0:
            raise ZeroNorm("reference block has zero norm")
        rel += num / den
    return RomDistance(float(rd + rs), float(rel))


def relative_error(rom1, rom2, w=Weights(), budget=None):
    return distance(rom1, rom2, w, budget).relative_error
