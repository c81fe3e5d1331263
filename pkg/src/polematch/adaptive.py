"""Offline phase: build a pole-matched repository over a parameter range.

New ROMs are placed with a predictor-corrector step of fixed length ``u0``;
each new interval is then checked at its midpoint and bisected until the
interpolated ROM agrees with a freshly built one to within ``tau_e``.
"""

import logging
import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .errors import (
    EmptyRepository,
    OracleFailure,
    PoleMatchError,
    RefineDepthExceeded,
    SizeMismatch,
)
from .matching import _block_distances, distance, match
from .prom import InterpolationScheme, interpolate_entries
from .rom import PoleResidueROM, StateSpaceROM, Weights, canonicalize, to_pole_residue

__all__ = [
    "AdaptiveConfig",
    "Repository",
    "LogEntry",
    "predict",
    "corrector_step",
    "refine",
    "build_repository",
    "build_from_roms",
]

logger = logging.getLogger(__name__)

#: Floor applied to predicted imaginary parts that extrapolate to b <= 0.
B_FLOOR = 1e-12


@dataclass(frozen=True)
class AdaptiveConfig:
    p_lower: float
    p_upper: float
    u0: float
    tau_e: float
    q: int = 5
    predictor_order: int = 1
    max_refine_depth: int = 12
    weights: Weights = field(default_factory=Weights)
    scheme: InterpolationScheme = InterpolationScheme.LINEAR
    refine: bool = True
    budget: int = None

    def __post_init__(self):
        if not self.p_lower < self.p_upper:
            raise ValueError("p_lower must be smaller than p_upper")
        if not self.tau_e > 0:
            raise ValueError("tau_e must be positive")
        if not self.u0 > 0:
            raise ValueError("u0 must be positive")
        if self.q < 0 or self.predictor_order < 0 or self.max_refine_depth < 1:
            raise ValueError("q, predictor_order must be >= 0 and max_refine_depth >= 1")
        object.__setattr__(self, "scheme", InterpolationScheme(self.scheme))

    def to_dict(self):
        return {
            "p_lower": self.p_lower,
            "p_upper": self.p_upper,
            "u0": self.u0,
            "tau_e": self.tau_e,
            "q": self.q,
            "predictor_order": self.predictor_order,
            "max_refine_depth": self.max_refine_depth,
            "w_p": self.weights.w_p,
            "w_r": self.weights.w_r,
            "scheme": self.scheme.value,
            "refine": self.refine,
            "budget": self.budget,
        }

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)} - {"weights"}
        w = Weights(data.get("w_p", 1.0), data.get("w_r", 1.0))
        return cls(weights=w, **{k: v for k, v in data.items() if k in known})


@dataclass(frozen=True)
class LogEntry:
    p: float
    action: str
    evaluations: int
    error: float = math.nan
    reference: str = ""

    def format(self):
        return (
            f"p={self.p:.17g} action={self.action} evaluations={self.evaluations} "
            f"error={self.error:.6e}" + (f" reference={self.reference}" if self.reference else "")
        )


@dataclass
class Repository:
    """Pole-matched ROMs at strictly increasing parameter values.

    ``high_fidelity_index`` counts the leading entries certified by the
    midpoint test (``len(repo)`` once the build is finished).
    """

    params: list = field(default_factory=list)
    roms: list = field(default_factory=list)
    high_fidelity_index: int = 0
    config: AdaptiveConfig = None
    log: list = field(default_factory=list, repr=False, compare=False)
    low_confidence: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        if len(self.params) != len(self.roms):
            raise ValueError("params and roms differ in length")
        if any(b <= a for a, b in zip(self.params, self.params[1:])):
            raise ValueError("parameter values must be strictly increasing")
        if len({r.sizes for r in self.roms}) > 1:
            raise SizeMismatch("repository ROMs differ in pole counts")
        if not 0 <= self.high_fidelity_index <= len(self.params):
            raise ValueError("high_fidelity_index out of range")
        if len(self.low_confidence) != len(self.params):
            self.low_confidence = [False] * len(self.params)

    def __len__(self):
        return len(self.params)

    @property
    def sizes(self):
        return self.roms[0].sizes if self.roms else None

    def copy(self):
        return Repository(
            list(self.params),
            list(self.roms),
            self.high_fidelity_index,
            self.config,
            list(self.log),
            list(self.low_confidence),
        )

    def to_dict(self):
        return {
            "params": [float(p) for p in self.params],
            "roms": [r.to_dict() for r in self.roms],
            "i_h": int(self.high_fidelity_index),
            "config": None if self.config is None else self.config.to_dict(),
        }

    @classmethod
    def from_dict(cls, data):
        cfg = data.get("config")
        return cls(
            [float(p) for p in data["params"]],
            [PoleResidueROM.from_dict(r) for r in data["roms"]],
            int(data["i_h"]),
            None if cfg is None else AdaptiveConfig.from_dict(cfg),
        )


def _record(repo, entry):
    repo.log.append(entry)
    logger.info(entry.format())


def _call_oracle(model, p, sizes=None):
    try:
        rom = model(p)
    except PoleMatchError:
        raise
    except Exception as exc:
        raise OracleFailure(f"model oracle failed at p={p!r}: {exc}") from exc
    if isinstance(rom, StateSpaceROM):
        rom = to_pole_residue(rom, p)
    elif isinstance(rom, PoleResidueROM):
        rom = canonicalize(rom.replace(param=p))
    else:
        raise OracleFailure(f"model oracle returned {type(rom).__name__} at p={p!r}")
    if sizes is not None and rom.sizes != sizes:
        raise SizeMismatch(
            f"oracle returned (n_d, n_s)={rom.sizes} at p={p!r}, expected {sizes}"
        )
    return rom


def _lagrange_weights(nodes, x):
    nodes = np.asarray(nodes, dtype=float)
    w = np.ones(nodes.size)
    for k in range(nodes.size):
        others = np.delete(nodes, k)
        w[k] = np.prod((x - others) / (nodes[k] - others))
    return w


def predict(repo, p_next, order=1):
    """Extrapolate the validated entries of ``repo`` to ``p_next``.

    Every entry is extended with the polynomial through the last
    ``min(order + 1, i_h)`` validated ROMs. Predicted imaginary parts are
    floored at a tiny positive value so the result stays a valid ROM.
    """
    n_valid = repo.high_fidelity_index
    if n_valid < 1:
        raise EmptyRepository("no validated entries to predict from")
    m = min(order + 1, n_valid)
    nodes = np.asarray(repo.params[n_valid - m : n_valid], dtype=float)
    roms = repo.roms[n_valid - m : n_valid]
    if m == 1:
        return roms[0].replace(param=p_next)
    # shift to the last node for conditioning
    w = _lagrange_weights(nodes - nodes[-1], p_next - nodes[-1])
    D = sum(wk * r.D for wk, r in zip(w, roms))
    S = sum(wk * r.S for wk, r in zip(w, roms))
    D = np.array(D)
    D[:, 1] = np.maximum(D[:, 1], B_FLOOR)
    return PoleResidueROM(D, S, p_next)


@dataclass(frozen=True)
class CorrectorInfo:
    reference: str
    objective: float
    evaluations: int
    low_confidence: bool
    r_last: float
    r_pred: float = math.nan


def corrector_step(repo, candidate, cfg, return_info=False):
    """Match ``candidate`` against the last validated ROM or the prediction.

    Whichever reference is closer (in the matched distance) is used. With a
    single validated entry the last ROM is always the reference.
    """
    w = cfg.weights
    n_valid = repo.high_fidelity_index
    if n_valid < 1:
        raise EmptyRepository("no validated entries to match against")
    last = repo.roms[n_valid - 1]
    rd, rs, by_last, res_last = _block_distances(last, candidate, w, cfg.budget)
    r_last = rd + rs
    chosen, res, ref, r_pred = by_last, res_last, "last", math.nan
    if n_valid >= 2:
        pred = predict(repo, candidate.param, cfg.predictor_order)
        pd, ps, by_pred, res_pred = _block_distances(pred, candidate, w, cfg.budget)
        r_pred = pd + ps
        if r_last > r_pred:
            chosen, res, ref = by_pred, res_pred, "predicted"
    info = CorrectorInfo(ref, res.objective, res.evaluations, res.low_confidence, r_last, r_pred)
    return (chosen, info) if return_info else chosen


class _Refiner:
    """Phase-2 state over a mutable repository."""

    def __init__(self, repo, model, cfg, tolerance=None):
        self.repo = repo
        self.model = model
        self.cfg = cfg
        self.tolerance = tolerance
        self.min_width = cfg.u0 / 2.0**cfg.max_refine_depth
        # corrector evaluations of entries still awaiting their midpoint test
        self.pending = {}

    def tol(self, p):
        hook = self.tolerance or getattr(self.model, "tolerance", None)
        return self.cfg.tau_e if hook is None else float(hook(p))

    def midpoint_test(self, left):
        repo = self.repo
        right = left + 1
        pt = 0.5 * (repo.params[left] + repo.params[right])
        interp = interpolate_entries(
            repo.params[: right + 1], repo.roms[: right + 1], pt, self.cfg.scheme
        )
        truth = _call_oracle(self.model, pt, repo.sizes)
        err = distance(interp, truth, self.cfg.weights, self.cfg.budget).relative_error
        return pt, truth, err

    def run(self, stop):
        """Advance the watermark until it reaches ``stop`` entries."""
        repo = self.repo
        while repo.high_fidelity_index < stop:
            left = repo.high_fidelity_index - 1
            right = left + 1
            pt, truth, err = self.midpoint_test(left)
            if err < self.tol(pt) and not repo.low_confidence[right]:
                repo.high_fidelity_index += 1
                evals = self.pending.pop(repo.params[right], 0)
                _record(repo, LogEntry(repo.params[right], "accept", evals, err))
                continue
            width = repo.params[right] - repo.params[left]
            if width <= self.min_width:
                raise RefineDepthExceeded((repo.params[left], repo.params[right]), err)
            inserted, res = match(
                repo.roms[left], truth, self.cfg.weights, self.cfg.budget, return_result=True
            )
            repo.params.insert(right, pt)
            repo.roms.insert(right, inserted)
            repo.low_confidence.insert(right, res.low_confidence)
            stop += 1
            evaluations = res.evaluations
            for j in range(right + 1, stop):
                repo.roms[j], rj = match(
                    inserted, repo.roms[j], self.cfg.weights, self.cfg.budget, return_result=True
                )
                repo.low_confidence[j] = rj.low_confidence
                evaluations += rj.evaluations
            _record(repo, LogEntry(pt, "insert", evaluations, err))
        return stop


def refine(repo, model, interval, cfg, tolerance=None):
    """Certify the interval ``(p_i, p_{i+1})`` that starts at the watermark.

    ``interval`` is the 0-based index ``i`` of its left entry, which must be
    the last validated one. Returns an updated copy of ``repo`` whose
    watermark has moved past the right end of the interval (with any
    inserted midpoints in between).
    """
    out = repo.copy()
    if interval != out.high_fidelity_index - 1 or interval + 1 >= len(out):
        raise ValueError("interval must start at the last validated entry")
    if out.sizes is None:
        raise EmptyRepository("empty repository")
    _Refiner(out, model, cfg, tolerance).run(interval + 2)
    return out


def build_repository(model, cfg, tolerance=None):
    """Adaptively build a validated repository over ``[p_lower, p_upper]``.

    Parameters
    ----------
    model : callable
        ``model(p)`` returns a :class:`StateSpaceROM` or :class:`PoleResidueROM`
        of fixed size.
    cfg : AdaptiveConfig
    tolerance : callable, optional
        ``tolerance(p)`` overrides ``cfg.tau_e`` for the midpoint test at ``p``.
        A ``model.tolerance`` method is used when this is not given.

    Returns
    -------
    Repository
    """
    first = _call_oracle(model, cfg.p_lower)
    repo = Repository([cfg.p_lower], [first], 1, cfg)
    _record(repo, LogEntry(cfg.p_lower, "accept", 0, 0.0))
    refiner = _Refiner(repo, model, cfg, tolerance)

    while repo.params[-1] < cfg.p_upper:
        p_next = repo.params[-1] + cfg.u0
        if p_next > cfg.p_upper:
            p_next = cfg.p_upper
        candidate = _call_oracle(model, p_next, repo.sizes)
        matched, info = corrector_step(repo, candidate, cfg, return_info=True)
        repo.params.append(p_next)
        repo.roms.append(matched)
        repo.low_confidence.append(info.low_confidence)
        if info.low_confidence:
            _record(repo, LogEntry(p_next, "fallback", info.evaluations, math.nan, info.reference))
        if not cfg.refine:
            repo.high_fidelity_index = len(repo)
            _record(repo, LogEntry(p_next, "accept", info.evaluations, math.nan, info.reference))
            continue
        logger.debug("candidate at p=%.17g matched against %s", p_next, info.reference)
        refiner.pending[p_next] = info.evaluations
        refiner.run(len(repo))
    return repo


def build_from_roms(roms, cfg):
    """Chain externally built ROMs into a repository by matching alone.

    No new ROMs can be requested, so the midpoint test is skipped; every
    entry is matched with the predictor-corrector step in parameter order.
    """
    roms = sorted(roms, key=lambda r: r.param)
    if not roms:
        raise EmptyRepository("no ROMs given")
    sizes = roms[0].sizes
    first = canonicalize(roms[0])
    repo = Repository([first.param], [first], 1, replace(cfg, refine=False))
    _record(repo, LogEntry(first.param, "accept", 0, 0.0))
    for rom in roms[1:]:
        if rom.sizes != sizes:
            raise SizeMismatch(f"ROM at p={rom.param!r} has sizes {rom.sizes}, expected {sizes}")
        matched, info = corrector_step(repo, canonicalize(rom), cfg, return_info=True)
        repo.params.append(rom.param)
        repo.roms.append(matched)
        repo.low_confidence.append(info.low_confidence)
        repo.high_fidelity_index = len(repo)
        action = "fallback" if info.low_confidence else "accept"
        _record(repo, LogEntry(rom.param, action, info.evaluations, math.nan, info.reference))
    return repo
