"""ROM representations and the state-space to pole-residue conversion.

A single-input single-output ROM ``(A, B, C)`` with simple eigenvalues is
stored as two real matrices:

* ``D`` (``n_d x 4``), one row ``(a, b, c1, c2)`` per complex pair
  ``a +/- i b`` with ``b > 0``, contributing
  ``(c1 (s - a) - c2 b) / ((s - a)**2 + b**2)``;
* ``S`` (``n_s x 2``), one row ``(lam, c)`` per real pole, contributing
  ``c / (s - lam)``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DefectiveMatrix,
    NonSimpleEigenvalue,
    PoleEvaluation,
    ShapeMismatch,
    SingularSystem,
)

__all__ = [
    "StateSpaceROM",
    "PoleResidueROM",
    "Weights",
    "to_pole_residue",
    "transfer_function",
    "state_space_transfer",
    "canonicalize",
]

#: An eigenvalue is treated as real when ``|Im| < REAL_TOL * (1 + |Re|)``.
REAL_TOL = 1e-9
#: Eigenvalues closer than ``SIMPLE_TOL * spectral_radius`` are not simple.
SIMPLE_TOL = 1e-7
#: Eigenvector matrices with a larger condition number count as defective.
DEFECTIVE_COND = 1e12


def _frozen(x, shape_tail, name):
    arr = np.array(x, dtype=float)
    if arr.size == 0:
        arr = arr.reshape((0,) + shape_tail)
    elif arr.ndim == 1 and arr.size == shape_tail[0]:
        arr = arr.reshape((1,) + shape_tail)
    if arr.ndim != 1 + len(shape_tail) or arr.shape[1:] != shape_tail:
        raise ShapeMismatch(f"{name} must have shape (n, {shape_tail[0]}), got {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class StateSpaceROM:
    """Single-input single-output state-space ROM ``C (sI - A)^-1 B``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.array(self.A, dtype=float))
        k = A.shape[0]
        if A.ndim != 2 or A.shape != (k, k) or k == 0:
            raise ShapeMismatch(f"A must be square and nonempty, got {A.shape}")
        B = np.array(self.B, dtype=float).reshape(-1)
        C = np.array(self.C, dtype=float).reshape(-1)
        if B.shape != (k,):
            raise ShapeMismatch(f"B must have {k} rows, got {B.size}")
        if C.shape != (k,):
            raise ShapeMismatch(f"C must have {k} columns, got {C.size}")
        for name, arr in (("A", A), ("B", B.reshape(k, 1)), ("C", C.reshape(1, k))):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def k(self):
        return self.A.shape[0]

    def to_dict(self):
        return {
            "A": self.A.tolist(),
            "B": self.B.reshape(-1).tolist(),
            "C": self.C.reshape(-1).tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(data["A"], data["B"], data["C"])


@dataclass(frozen=True)
class PoleResidueROM:
    """Pole-residue realization of a ROM built at parameter value ``param``."""

    D: np.ndarray
    S: np.ndarray
    param: float = 0.0

    def __post_init__(self):
        D = _frozen(self.D, (4,), "D")
        S = _frozen(self.S, (2,), "S")
        if D.shape[0] == 0 and S.shape[0] == 0:
            raise ShapeMismatch("a ROM needs at least one pole")
        if np.any(D[:, 1] <= 0):
            raise ValueError("every complex pair must be stored with b > 0")
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "param", float(self.param))

    @property
    def n_d(self):
        return self.D.shape[0]

    @property
    def n_s(self):
        return self.S.shape[0]

    @property
    def sizes(self):
        return (self.n_d, self.n_s)

    @property
    def order(self):
        return 2 * self.n_d + self.n_s

    def poles(self):
        """All poles as a complex array (both members of each pair)."""
        a, b = self.D[:, 0], self.D[:, 1]
        return np.concatenate([a + 1j * b, a - 1j * b, self.S[:, 0].astype(complex)])

    def replace(self, D=None, S=None, param=None):
        return PoleResidueROM(
            self.D if D is None else D,
            self.S if S is None else S,
            self.param if param is None else param,
        )

    def __eq__(self, other):
        if not isinstance(other, PoleResidueROM):
            return NotImplemented
        return (
            self.param == other.param
            and np.array_equal(self.D, other.D)
            and np.array_equal(self.S, other.S)
        )

    __hash__ = None

    def to_dict(self):
        return {"param": self.param, "D": self.D.tolist(), "S": self.S.tolist()}

    @classmethod
    def from_dict(cls, data):
        return cls(data.get("D", []), data.get("S", []), data.get("param", 0.0))


@dataclass(frozen=True)
class Weights:
    """Weights for pole positions (``w_p``) and residues (``w_r``)."""

    w_p: float = 1.0
    w_r: float = 1.0
    _d: np.ndarray = field(init=False, repr=False, compare=False)
    _s: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.w_p < 0 or self.w_r < 0 or self.w_p + self.w_r <= 0:
            raise ValueError("weights must be nonnegative and not both zero")
        object.__setattr__(self, "_d", np.array([self.w_p, self.w_p, self.w_r, self.w_r]))
        object.__setattr__(self, "_s", np.array([self.w_p, self.w_r]))

    @property
    def d(self):
        """Diagonal of the weighting matrix for ``D`` rows."""
        return self._d

    @property
    def s(self):
        """Diagonal of the weighting matrix for ``S`` rows."""
        return self._s


def canonicalize(prom):
    """Sort ``D`` rows by ``(b, a)`` and ``S`` rows by ``lambda``.

    Only the row order changes, so the transfer function is untouched.
    """
    D, S = prom.D, prom.S
    d_order = np.lexsort((D[:, 0], D[:, 1]))
    s_order = np.argsort(S[:, 0], kind="stable")
    return PoleResidueROM(D[d_order], S[s_order], prom.param)


def to_pole_residue(rom, p=0.0, real_tol=REAL_TOL, simple_tol=SIMPLE_TOL):
    """Convert a state-space ROM to its canonical pole-residue realization.

    Parameters
    ----------
    rom : StateSpaceROM
    p : float
        Parameter value recorded on the result.
    real_tol, simple_tol : float
        Thresholds for the real/complex split and for the simplicity check.

    Returns
    -------
    PoleResidueROM

    Raises
    ------
    NonSimpleEigenvalue
        Two eigenvalues are closer than ``simple_tol`` times the spectral radius.
    DefectiveMatrix
        The eigenvector matrix is numerically singular.
    """
    lam, V = np.linalg.eig(rom.A)
    k = lam.size
    radius = np.max(np.abs(lam))
    if k > 1:
        gaps = np.abs(lam[:, None] - lam[None, :])
        gaps[np.diag_indices(k)] = np.inf
        if gaps.min() <= simple_tol * max(radius, np.finfo(float).tiny):
            raise NonSimpleEigenvalue(f"eigenvalues not simple (min gap {gaps.min():.3e})")
    if np.linalg.cond(V) > DEFECTIVE_COND:
        raise DefectiveMatrix("eigenvector matrix is numerically singular")

    # residue of the term r_k / (s - lam_k)
    left = rom.C.reshape(-1) @ V
    right = np.linalg.solve(V, rom.B.reshape(-1))
    res = left * right

    is_real = np.abs(lam.imag) < real_tol * (1.0 + np.abs(lam.real))
    upper = ~is_real & (lam.imag > 0)
    lower = ~is_real & (lam.imag < 0)
    if upper.sum() != lower.sum():
        raise DefectiveMatrix("complex eigenvalues do not come in conjugate pairs")

    S = np.column_stack([lam.real[is_real], res.real[is_real]])
    # r/(s-l) + conj(r)/(s-conj(l)) = (2Re r (s-a) - 2Im r b) / ((s-a)^2 + b^2)
    lu, ru = lam[upper], res[upper]
    D = np.column_stack([lu.real, lu.imag, 2.0 * ru.real, 2.0 * ru.imag])
    return canonicalize(PoleResidueROM(D.reshape(-1, 4), S.reshape(-1, 2), p))


def _near(s, poles, tol_scale):
    """True where ``s`` lies within rounding distance of one of ``poles``."""
    if poles.size == 0:
        return np.zeros(s.shape, dtype=bool)
    order = np.argsort(poles.real, kind="stable")
    sorted_poles = poles[order]
    idx = np.searchsorted(sorted_poles.real, s.real)
    hit = np.zeros(s.shape, dtype=bool)
    for shift in (-1, 0):
        k = np.clip(idx + shift, 0, poles.size - 1)
        near = sorted_poles[k]
        hit |= np.abs(s - near) <= tol_scale * (1.0 + np.abs(near))
    return hit


def _check_poles(prom, s):
    s_arr = np.asarray(s, dtype=complex).reshape(-1)
    tol = 8 * np.finfo(float).eps
    hit = _near(s_arr, prom.S[:, 0].astype(complex), tol)
    if prom.n_d:
        pairs = prom.poles()[: 2 * prom.n_d]
        gap = np.abs(s_arr[:, None] - pairs[None, :])
        hit |= np.any(gap <= tol * (1.0 + np.abs(pairs)), axis=1)
    if np.any(hit):
        raise PoleEvaluation("s coincides with a pole")


def transfer_function(prom, s):
    """Evaluate the pole-residue transfer function at ``s``.

    ``s`` may be a scalar or an array; the result has the same shape.
    """
    _check_poles(prom, s)
    s_arr = np.asarray(s, dtype=complex)
    x = s_arr.reshape(-1, 1)
    a, b, c1, c2 = prom.D.T
    lam, c = prom.S.T
    h = (c / (x - lam)).sum(axis=1)
    sa = x - a
    h = h + ((c1 * sa - c2 * b) / (sa * sa + b * b)).sum(axis=1)
    h = h.reshape(s_arr.shape)
    return complex(h) if h.ndim == 0 else h


def state_space_transfer(rom, s):
    """Evaluate ``C (sI - A)^-1 B`` by a dense solve (scalar ``s``)."""
    s = complex(s)
    M = s * np.eye(rom.k) - rom.A
    try:
        x = np.linalg.solve(M, rom.B.reshape(-1).astype(complex))
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"sI - A is singular at s={s}") from exc
    if not np.all(np.isfinite(x)) or np.linalg.cond(M) > 1 / np.finfo(float).eps:
        raise SingularSystem(f"sI - A is singular at s={s}")
    return complex(rom.C.reshape(-1) @ x)
