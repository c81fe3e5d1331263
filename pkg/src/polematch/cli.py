"""Command-line front end: ``polematch build | regress | eval | sweep | match``.

Exit codes: 0 success, 2 configuration error, 3 oracle or data error,
4 refinement failure, 5 regression guard violation.
"""

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import benchmarks
from .adaptive import Repository, build_from_roms, build_repository
from .config import ConfigError, RunConfig
from .errors import PoleMatchError, RefineDepthExceeded, Underdetermined
from .matching import distance, match
from .prom import (
    RegressedPROM,
    evaluate_regressed,
    interpolate_at,
    regress,
    regression_disagreement,
)
from .rom import PoleResidueROM, StateSpaceROM, to_pole_residue, transfer_function

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_REFINE = 4
EXIT_GUARD = 5

logger = logging.getLogger("polematch")


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


# -- file helpers -------------------------------------------------------------


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_DATA) from exc


def _write_json(path, data):
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1)
        fh.write("\n")


def load_rom(path_or_data, param=None):
    """Read a ROM file holding either a pole-residue or a state-space ROM."""
    data = _read_json(path_or_data) if isinstance(path_or_data, (str, Path)) else path_or_data
    try:
        if "A" in data:
            p = data.get("param", 0.0) if param is None else param
            return to_pole_residue(StateSpaceROM.from_dict(data), p)
        rom = PoleResidueROM.from_dict(data)
    except (KeyError, TypeError, ValueError, PoleMatchError) as exc:
        raise CliError(f"invalid ROM data: {exc}", EXIT_DATA) from exc
    return rom if param is None else rom.replace(param=param)


def load_rom_directory(rom_dir, manifest="manifest.json"):
    """ROMs listed in ``<rom_dir>/<manifest>`` as ``{"roms": [{"param", "file"}]}``."""
    root = Path(rom_dir)
    entries = _read_json(root / manifest)
    try:
        items = entries["roms"]
        return [load_rom(root / item["file"], float(item["param"])) for item in items]
    except (KeyError, TypeError) as exc:
        raise CliError(f"malformed manifest {root / manifest}: {exc}", EXIT_DATA) from exc


def load_prom(path):
    """Return ``(kind, obj, meta)`` for a repository, regressed pROM or single ROM file."""
    data = _read_json(path)
    try:
        if "roms" in data:
            repo = Repository.from_dict(data)
            return "repository", repo, data.get("config") or {}
        if "d_coeffs" in data:
            return "regressed", RegressedPROM.from_dict(data), data
        return "rom", load_rom(data), data
    except (KeyError, TypeError, ValueError, PoleMatchError) as exc:
        raise CliError(f"invalid pROM file {path}: {exc}", EXIT_DATA) from exc


def _evaluator(kind, obj):
    if kind == "repository":
        return lambda p: interpolate_at(obj, p, obj.config.scheme if obj.config else "linear")
    if kind == "regressed":
        return lambda p: evaluate_regressed(obj, p)
    return lambda p: obj.replace(param=p)


def _domain(kind, obj):
    if kind == "repository":
        return obj.params[0], obj.params[-1]
    if kind == "regressed":
        return obj.domain
    return obj.param, obj.param


# -- commands -----------------------------------------------------------------


def _resolve_n_real(cfg):
    if cfg.n_real is not None:
        return cfg
    n_real = benchmarks.select_n_real(
        cfg.tau_e, n_complex_pairs=cfg.n_complex_pairs, omega=benchmarks.default_omega(cfg.omega_points)
    )
    logger.info("selected n_real=%d for tau_e=%g", n_real, cfg.tau_e)
    return cfg.updated(n_real=n_real)


def cmd_build(cfg, args):
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    log_handler = logging.FileHandler(out / "build.log", mode="w")
    log_handler.setFormatter(logging.Formatter("%(asctime)s %(message)s"))
    adaptive_logger = logging.getLogger("polematch.adaptive")
    adaptive_logger.addHandler(log_handler)
    previous = adaptive_logger.level, adaptive_logger.propagate
    adaptive_logger.setLevel(logging.INFO)
    # keep the console at the requested level; the file always gets INFO
    adaptive_logger.propagate = logger.getEffectiveLevel() <= logging.INFO
    try:
        if cfg.model == "builtin-fom":
            cfg = _resolve_n_real(cfg)
            oracle = benchmarks.FomOracle(benchmarks.TruncationConfig(cfg.n_complex_pairs, cfg.n_real))
            repo = build_repository(oracle, cfg.adaptive())
        else:
            roms = load_rom_directory(cfg.rom_dir, cfg.manifest)
            if len(roms) == 1:
                logger.warning("only one ROM in %s; repository has a single entry", cfg.rom_dir)
            logger.warning("external ROMs: midpoint refinement is not available")
            repo = build_from_roms(roms, cfg.adaptive())
    except RefineDepthExceeded as exc:
        raise CliError(str(exc), EXIT_REFINE) from exc
    except PoleMatchError as exc:
        raise CliError(str(exc), EXIT_DATA) from exc
    finally:
        adaptive_logger.removeHandler(log_handler)
        adaptive_logger.setLevel(previous[0])
        adaptive_logger.propagate = previous[1]
        log_handler.close()

    data = repo.to_dict()
    data["config"]["model"] = cfg.model
    _write_json(out / "repository.json", data)
    cfg.save(out / "config.ini")
    print(json.dumps({"repository": str(out / "repository.json"), "entries": len(repo)}))
    return EXIT_OK


def cmd_regress(cfg, args):
    kind, repo, meta = load_prom(args.repository)
    if kind != "repository":
        raise CliError(f"{args.repository} is not a repository file", EXIT_DATA)
    q = cfg.q if args.q is None else args.q
    try:
        rp = regress(repo, q)
    except Underdetermined as exc:
        raise CliError(str(exc), EXIT_DATA) from exc
    except PoleMatchError as exc:
        raise CliError(str(exc), EXIT_DATA) from exc
    weights = repo.config.weights if repo.config else cfg.weights
    tau_e = repo.config.tau_e if repo.config else cfg.tau_e
    grid = np.linspace(rp.domain[0], rp.domain[1], max(cfg.grid_points, 2))
    try:
        disagreement = regression_disagreement(repo, rp, grid, weights)
    except (PoleMatchError, ValueError) as exc:
        raise CliError(f"regressed pROM cannot be evaluated: {exc}", EXIT_GUARD) from exc
    threshold = cfg.guard_factor * tau_e
    report = {
        "q": rp.q,
        "storage": rp.storage,
        "repository_storage": len(repo) * (4 * repo.sizes[0] + 2 * repo.sizes[1]),
        "max_disagreement": float(disagreement.max()),
        "threshold": threshold,
        "accepted": bool(disagreement.max() <= threshold),
        "max_residual": float(
            max(rp.residuals["D"].max(initial=0.0), rp.residuals["S"].max(initial=0.0))
        ),
    }
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "regress_report.json", report)
    print(json.dumps(report))
    if not report["accepted"]:
        raise CliError(
            f"regressed pROM disagrees with interpolation ({report['max_disagreement']:.3e} > "
            f"{threshold:.3e}); not written",
            EXIT_GUARD,
        )
    data = rp.to_dict()
    data["source_model"] = meta.get("model", "builtin-fom")
    _write_json(out / "regressed.json", data)
    return EXIT_OK


def _parse_floats(values):
    out = []
    for v in values:
        out.extend(float(x) for x in str(v).split(",") if x.strip())
    return out


def cmd_eval(cfg, args):
    kind, obj, _ = load_prom(args.prom)
    lo, hi = _domain(kind, obj)
    if not lo <= args.p <= hi:
        raise CliError(f"p={args.p!r} outside [{lo!r}, {hi!r}]", EXIT_DATA)
    rom = _evaluator(kind, obj)(args.p)
    omegas = np.array(_parse_floats(args.omega), dtype=float)
    try:
        h = transfer_function(rom, 1j * omegas)
    except PoleMatchError as exc:
        raise CliError(str(exc), EXIT_DATA) from exc
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["p", "omega", "H_re", "H_im"])
    for w, v in zip(omegas, np.atleast_1d(h)):
        writer.writerow([format(args.p, ".17g"), format(w, ".17g"), format(v.real, ".17g"), format(v.imag, ".17g")])
    return EXIT_OK


def _read_frf(path):
    table = {}
    try:
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                p = float(row["p"])
                table.setdefault(p, []).append(
                    (float(row["omega"]), complex(float(row["H_re"]), float(row["H_im"])))
                )
    except (OSError, KeyError, ValueError) as exc:
        raise CliError(f"cannot read FRF data {path}: {exc}", EXIT_DATA) from exc
    return {p: (np.array([w for w, _ in rows]), np.array([h for _, h in rows])) for p, rows in table.items()}


def cmd_sweep(cfg, args):
    kind, obj, meta = load_prom(args.prom)
    lo, hi = _domain(kind, obj)
    source = _evaluator(kind, obj)
    model = meta.get("model", meta.get("source_model", "builtin-fom"))
    out = Path(cfg.out)
    if args.frf_data:
        table = _read_frf(args.frf_data)
        errors, tracks = [], []
        for p in sorted(table):
            if not lo <= p <= hi:
                raise CliError(f"FRF data at p={p!r} outside pROM domain", EXIT_DATA)
            omega, ref = table[p]
            rom = source(p)
            approx = transfer_function(rom, 1j * omega)
            err = abs(np.trapezoid(ref - approx, omega)) / abs(np.trapezoid(ref, omega))
            errors.append((p, float(err)))
            tracks.extend(benchmarks.pole_track_rows(p, rom))
        result = benchmarks.SweepResult(errors, tracks, [])
    else:
        if model != "builtin-fom":
            raise CliError("no ground truth: pass --frf-data for external models", EXIT_DATA)
        p_min = lo if args.p_min is None else args.p_min
        p_max = hi if args.p_max is None else args.p_max
        if p_min < lo or p_max > hi:
            raise CliError(f"grid [{p_min}, {p_max}] outside pROM domain [{lo}, {hi}]", EXIT_DATA)
        grid = np.linspace(p_min, p_max, cfg.grid_points)
        omega = benchmarks.default_omega(cfg.omega_points)
        result = benchmarks.sweep(source, grid, omega=omega, dump_frf=args.dump_frf)
    result.write(out, prefix=args.prefix)
    values = result.error_values
    summary = {
        "points": int(values.size),
        "max_error": float(values.max()) if values.size else None,
        "median_error": float(np.median(values)) if values.size else None,
    }
    print(json.dumps(summary))
    return EXIT_OK


def cmd_match(cfg, args):
    a = load_rom(args.rom_a)
    b = load_rom(args.rom_b)
    w = cfg.weights
    try:
        _, res = match(a, b, w, cfg.budget, return_result=True)
        dist = distance(a, b, w, cfg.budget)
    except PoleMatchError as exc:
        raise CliError(str(exc), EXIT_DATA) from exc
    report = res.to_dict()
    report["distance"] = dist.distance
    report["relative_error"] = dist.relative_error
    print(json.dumps(report))
    return EXIT_OK


# -- argument parsing ---------------------------------------------------------


def _global_options(parser, suppress):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=default, help="key = value config file")
    parser.add_argument("--out", default=default, help="output directory")
    parser.add_argument("--seed", type=int, default=default, help="seed for randomized runs")
    parser.add_argument("--log-level", default=default, help="DEBUG, INFO, WARNING, ...")


def _config_flags(parser):
    g = parser.add_argument_group("configuration overrides")
    g.add_argument("--p-lower", type=float)
    g.add_argument("--p-upper", type=float)
    g.add_argument("--u0", type=float)
    g.add_argument("--tau-e", type=float)
    g.add_argument("--w-p", type=float)
    g.add_argument("--w-r", type=float)
    g.add_argument("--budget", type=int)
    g.add_argument("--grid-points", type=int)
    g.add_argument("--omega-points", type=int)


def build_parser():
    parser = argparse.ArgumentParser(prog="polematch", description=__doc__.splitlines()[0])
    _global_options(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        _global_options(p, suppress=True)
        _config_flags(p)
        p.set_defaults(func=func)
        return p

    p = add("build", cmd_build, "build a pole-matched repository")
    p.add_argument("--model", choices=["builtin-fom", "rom-directory"])
    p.add_argument("--rom-dir")
    p.add_argument("--manifest")
    p.add_argument("--no-refine", action="store_true", help="skip the midpoint refinement")
    p.add_argument("--scheme", choices=["linear", "cubic-spline"])
    p.add_argument("--predictor-order", type=int)
    p.add_argument("--max-refine-depth", type=int)
    p.add_argument("--n-real", type=int)
    p.add_argument("--n-complex-pairs", type=int)

    p = add("regress", cmd_regress, "fit polynomials to a repository")
    p.add_argument("repository")
    p.add_argument("--q", type=int)
    p.add_argument("--guard-factor", type=float)

    p = add("eval", cmd_eval, "evaluate a pROM at one parameter value")
    p.add_argument("prom")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--omega", nargs="+", required=True, help="frequencies (comma or space separated)")

    p = add("sweep", cmd_sweep, "frequency-sweep error along a parameter grid")
    p.add_argument("prom")
    p.add_argument("--p-min", type=float)
    p.add_argument("--p-max", type=float)
    p.add_argument("--frf-data", help="CSV p,omega,H_re,H_im ground truth")
    p.add_argument("--dump-frf", action="store_true")
    p.add_argument("--prefix", default="")

    p = add("match", cmd_match, "match the poles of two ROM files")
    p.add_argument("rom_a")
    p.add_argument("rom_b")
    return parser


_OVERRIDES = (
    "p_lower", "p_upper", "u0", "tau_e", "w_p", "w_r", "budget", "grid_points",
    "omega_points", "model", "rom_dir", "manifest", "scheme", "predictor_order",
    "max_refine_depth", "n_real", "n_complex_pairs", "q", "guard_factor", "out",
)


def resolve_config(args):
    cfg = RunConfig.load(args.config) if getattr(args, "config", None) else RunConfig()
    overrides = {k: getattr(args, k, None) for k in _OVERRIDES}
    if getattr(args, "no_refine", False):
        overrides["refine"] = False
    return cfg.updated(**overrides)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    level = getattr(args, "log_level", None) or "WARNING"
    logging.basicConfig(level=getattr(logging, str(level).upper(), logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "seed", None) is not None:
        np.random.seed(args.seed)
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"polematch: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(cfg, args)
    except CliError as exc:
        print(f"polematch: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
