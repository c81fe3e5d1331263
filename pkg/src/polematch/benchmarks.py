"""The parametric order-1008 "FOM" benchmark and the frequency-sweep error.

The model is block diagonal: four parametric 2x2 blocks

    [[a(p),  b(p)],
     [-b(p), a(p)]]

with input/output weights 100 on each of their states, followed by the real
poles 1, 2, ..., 1000 with unit weights. Every 2x2 block therefore
contributes ``20000 (s - a) / ((s - a)**2 + b**2)`` to the transfer function.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import PoleEvaluation, PoleOnGrid, TooManyPoles
from .rom import PoleResidueROM, StateSpaceROM, canonicalize, transfer_function

__all__ = [
    "P_RANGE",
    "N_TAIL",
    "fom_tracks",
    "fom_state_space",
    "fom_pole_residue",
    "fom_transfer",
    "TruncationConfig",
    "dominance",
    "mor_oracle",
    "FomOracle",
    "default_omega",
    "frf_relative_error",
    "select_n_real",
    "SweepResult",
    "sweep",
    "pole_track_rows",
]

P_RANGE = (-10.0, 10.0)
N_TAIL = 1000
BLOCK_WEIGHT = 100.0
PAIR_RESIDUE = 2 * BLOCK_WEIGHT**2


def _block_entries(p):
    """Diagonal and off-diagonal entries of the four parametric blocks."""
    return np.array(
        [
            (4 * p - 42, 8 * p + 200),
            (2 * p - 50, p * p + 4 * p + 210),
            (-25 + p, 100 + p * p),
            (-25 + 2 * p, 150 - p * p),
        ],
        dtype=float,
    )


def fom_tracks(p):
    """Analytic pole tracks ``(a_i(p), b_i(p))`` with ``b`` made positive."""
    tr = _block_entries(p)
    tr[:, 1] = np.abs(tr[:, 1])
    return tr


def fom_state_space(p, n_tail=N_TAIL):
    """Assemble the dense ``(A, B, C)`` of the benchmark (order ``8 + n_tail``)."""
    k = 8 + n_tail
    A = np.zeros((k, k))
    for i, (a, b) in enumerate(_block_entries(p)):
        A[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = [[a, b], [-b, a]]
    A[8:, 8:] = np.diag(np.arange(1, n_tail + 1, dtype=float))
    C = np.concatenate([np.full(8, BLOCK_WEIGHT), np.ones(n_tail)])
    return StateSpaceROM(A, C, C)


def fom_pole_residue(p, n_tail=N_TAIL):
    """Exact pole-residue form of the full benchmark model."""
    tr = fom_tracks(p)
    D = np.column_stack([tr, np.full(4, PAIR_RESIDUE), np.zeros(4)])
    lam = np.arange(1, n_tail + 1, dtype=float)
    S = np.column_stack([lam, np.ones(n_tail)])
    return canonicalize(PoleResidueROM(D, S, p))


def fom_transfer(p, s):
    """Transfer function of the full model, evaluated blockwise.

    ``s`` may be scalar or an array.
    """
    s_arr = np.asarray(s, dtype=complex)
    x = s_arr.reshape(-1, 1)
    blocks = _block_entries(p)
    a, b = blocks[:, 0], blocks[:, 1]
    lam = np.arange(1, N_TAIL + 1, dtype=float)
    poles = np.concatenate([a + 1j * b, a - 1j * b, lam])
    if np.any(np.abs(x - poles) <= 8 * np.finfo(float).eps * (1 + np.abs(poles))):
        raise PoleEvaluation(f"s coincides with a pole of the model at p={p!r}")
    sa = x - a
    h = (PAIR_RESIDUE * sa / (sa * sa + b * b)).sum(axis=1)
    h = h + (1.0 / (x - lam)).sum(axis=1)
    h = h.reshape(s_arr.shape)
    return complex(h) if h.ndim == 0 else h


@dataclass(frozen=True)
class TruncationConfig:
    """How many poles modal truncation keeps, ranked by dominance.

    ``n_real=None`` asks for the smallest count meeting the accuracy target
    from :func:`select_n_real`.
    """

    n_complex_pairs: int = 4
    n_real: int = None
    rule: str = "residue_over_real_part"

    def __post_init__(self):
        if self.rule != "residue_over_real_part":
            raise ValueError(f"unknown dominance rule {self.rule!r}")
        if self.n_complex_pairs < 0 or (self.n_real is not None and self.n_real < 0):
            raise ValueError("pole counts must be nonnegative")

    @property
    def order(self):
        return 2 * self.n_complex_pairs + (self.n_real or 0)


def dominance(prom):
    """Dominance ``|residue| / |Re pole|`` of every ``D`` and ``S`` row.

    Complex pairs use the norm of their residue vector ``(c1, c2)``.
    """
    with np.errstate(divide="ignore"):
        dd = np.hypot(prom.D[:, 2], prom.D[:, 3]) / np.abs(prom.D[:, 0])
        ds = np.abs(prom.S[:, 1]) / np.abs(prom.S[:, 0])
    return dd, ds


def _keep(scores, n):
    # stable sort so equal dominance keeps the original order
    order = np.argsort(-scores, kind="stable")
    return np.sort(order[:n])


def mor_oracle(p, cfg=TruncationConfig(), full=None):
    """Modal truncation of the benchmark at ``p``, keeping dominant poles.

    Parameters
    ----------
    p : float
    cfg : TruncationConfig
        ``cfg.n_real`` must be set.
    full : PoleResidueROM, optional
        Full pole-residue model to truncate; defaults to the benchmark.
    """
    if cfg.n_real is None:
        raise ValueError("TruncationConfig.n_real must be set; see select_n_real")
    full = fom_pole_residue(p) if full is None else full
    if cfg.n_complex_pairs > full.n_d or cfg.n_real > full.n_s:
        raise TooManyPoles(
            f"requested ({cfg.n_complex_pairs}, {cfg.n_real}), available {full.sizes}"
        )
    dd, ds = dominance(full)
    D = full.D[_keep(dd, cfg.n_complex_pairs)]
    S = full.S[_keep(ds, cfg.n_real)]
    return canonicalize(PoleResidueROM(D, S, p))


class FomOracle:
    """Model oracle ``p -> ROM`` for :func:`polematch.adaptive.build_repository`."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.calls = 0

    def __call__(self, p):
        self.calls += 1
        return mor_oracle(p, self.cfg)


def default_omega(n=2000):
    """Logarithmic frequency grid on ``[1, 1000]``."""
    return np.geomspace(1.0, 1000.0, n)


_REFERENCE_CACHE = {}


def _response(source, p, s):
    if isinstance(source, PoleResidueROM):
        return transfer_function(source, s)
    if source is fom_transfer:
        # sweeps of several pROMs share the same reference grid
        key = (float(p), s.size, hash(s.tobytes()))
        if key not in _REFERENCE_CACHE:
            if len(_REFERENCE_CACHE) > 4096:
                _REFERENCE_CACHE.clear()
            _REFERENCE_CACHE[key] = fom_transfer(p, s)
        return _REFERENCE_CACHE[key]
    return source(p, s)


def frf_relative_error(full, prom, p, omega=None):
    """Relative error of the integrated frequency response over ``[1, 1000]``.

    Both responses are evaluated at ``s = i omega`` and the complex difference
    is integrated with the composite trapezoid rule before taking the modulus.

    Parameters
    ----------
    full : callable or PoleResidueROM
        Reference response ``full(p, s)``.
    prom : PoleResidueROM or callable
        Approximation, evaluated the same way.
    p : float
    omega : ndarray, optional
        Frequency grid, default :func:`default_omega`.
    """
    omega = default_omega() if omega is None else np.asarray(omega, dtype=float)
    s = 1j * omega
    try:
        ref = _response(full, p, s)
        approx = _response(prom, p, s)
    except PoleEvaluation as exc:
        raise PoleOnGrid(str(exc)) from exc
    num = np.trapezoid(ref - approx, omega)
    den = np.trapezoid(ref, omega)
    return float(abs(num) / abs(den))


def _pole_integrals(prom, omega):
    """Trapezoid integral of each pole term's response, per row."""
    s = (1j * omega).reshape(-1, 1)
    a, b, c1, c2 = prom.D.T
    sa = s - a
    pairs = np.trapezoid((c1 * sa - c2 * b) / (sa * sa + b * b), omega, axis=0)
    reals = np.trapezoid(prom.S[:, 1] / (s - prom.S[:, 0]), omega, axis=0)
    return pairs, reals


def select_n_real(tau_e, params=(-10.0, 0.0, 10.0), n_complex_pairs=4, omega=None, factor=0.1):
    """Smallest number of real poles whose truncation error is below ``factor * tau_e``.

    The error is exact-linear in the dropped terms, so it is evaluated for all
    truncation levels at once from the per-pole integrals.
    """
    omega = default_omega() if omega is None else np.asarray(omega, dtype=float)
    target = factor * tau_e
    feasible = np.ones(N_TAIL + 1, dtype=bool)
    for p in params:
        full = fom_pole_residue(p)
        dd, ds = dominance(full)
        pairs, reals = _pole_integrals(full, omega)
        total = np.trapezoid(fom_transfer(p, 1j * omega), omega)
        kept_pairs = np.zeros(full.n_d, dtype=bool)
        kept_pairs[_keep(dd, n_complex_pairs)] = True
        dropped_pairs = pairs[~kept_pairs].sum()
        ranked = reals[np.argsort(-ds, kind="stable")]
        # dropped real-pole mass when keeping the n most dominant
        tail = np.concatenate([[ranked.sum()], ranked.sum() - np.cumsum(ranked)])
        err = np.abs(dropped_pairs + tail) / abs(total)
        feasible &= err < target
    hits = np.flatnonzero(feasible)
    if hits.size == 0:
        raise TooManyPoles(f"no truncation reaches {target:.3e}")
    return int(hits[0])


@dataclass
class SweepResult:
    errors: list
    tracks: list
    frf: list

    @property
    def error_values(self):
        return np.array([e for _, e in self.errors], dtype=float)

    def write(self, out_dir, prefix=""):
        from pathlib import Path

        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / f"{prefix}errors.csv", ["p", "rel_error"], self.errors)
        _write_csv(
            out / f"{prefix}tracks.csv",
            ["p", "kind", "index", "col1", "col2", "col3", "col4"],
            self.tracks,
        )
        if self.frf:
            _write_csv(out / f"{prefix}frf.csv", ["p", "omega", "H_re", "H_im"], self.frf)


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def pole_track_rows(p, rom):
    """CSV rows ``(p, kind, index, col1..col4)``; ``S`` rows pad with blanks."""
    rows = [(p, "d", j) + tuple(float(x) for x in row) for j, row in enumerate(rom.D)]
    rows += [(p, "s", j, float(row[0]), float(row[1]), "", "") for j, row in enumerate(rom.S)]
    return rows


def sweep(source, p_grid, full=fom_transfer, omega=None, tracks=True, dump_frf=False):
    """Relative FRF error of a pROM along ``p_grid``.

    Parameters
    ----------
    source : callable
        ``source(p)`` returns the pROM's :class:`PoleResidueROM` at ``p``.
    p_grid : array_like
    full : callable
        Reference response ``full(p, s)``.
    """
    omega = default_omega() if omega is None else np.asarray(omega, dtype=float)
    errors, track_rows, frf_rows = [], [], []
    for p in np.asarray(p_grid, dtype=float):
        p = float(p)
        rom = source(p)
        errors.append((p, frf_relative_error(full, rom, p, omega)))
        if tracks:
            track_rows.extend(pole_track_rows(p, rom))
        if dump_frf:
            h = transfer_function(rom, 1j * omega)
            frf_rows.extend((p, float(w), float(v.real), float(v.imag)) for w, v in zip(omega, h))
    return SweepResult(errors, track_rows, frf_rows)
