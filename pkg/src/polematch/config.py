"""Run configuration shared by the command-line tools.

The on-disk format is a single ``[polematch]`` section of ``key = value``
lines whose values are JSON literals, e.g.::

    [polematch]
    u0 = 1.0471975511965976
    tau_e = 0.001
    model = "builtin-fom"
"""

import configparser
import json
import math
from dataclasses import asdict, dataclass, fields

from .adaptive import AdaptiveConfig
from .prom import InterpolationScheme
from .rom import Weights

SECTION = "polematch"
MODELS = ("builtin-fom", "rom-directory")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    p_lower: float = -10.0
    p_upper: float = 10.0
    u0: float = math.pi / 3
    tau_e: float = 1e-3
    q: int = 5
    predictor_order: int = 1
    max_refine_depth: int = 12
    w_p: float = 1.0
    w_r: float = 1.0
    budget: int = None
    refine: bool = True
    scheme: str = "linear"
    regression: bool = True
    guard_factor: float = 1.0
    model: str = "builtin-fom"
    rom_dir: str = None
    manifest: str = "manifest.json"
    n_complex_pairs: int = 4
    n_real: int = None
    out: str = "out"
    grid_points: int = 201
    omega_points: int = 2000

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {MODELS}, got {self.model!r}")
        try:
            InterpolationScheme(self.scheme)
            self.adaptive()
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        if self.model == "rom-directory" and not self.rom_dir:
            raise ConfigError("model 'rom-directory' needs rom_dir")
        if self.grid_points < 0 or self.omega_points < 2 or self.guard_factor <= 0:
            raise ConfigError("grid_points >= 0, omega_points >= 2 and guard_factor > 0 required")

    def adaptive(self):
        return AdaptiveConfig(
            self.p_lower,
            self.p_upper,
            self.u0,
            self.tau_e,
            q=self.q,
            predictor_order=self.predictor_order,
            max_refine_depth=self.max_refine_depth,
            weights=Weights(self.w_p, self.w_r),
            scheme=self.scheme,
            refine=self.refine,
            budget=self.budget,
        )

    @property
    def weights(self):
        return Weights(self.w_p, self.w_r)

    def updated(self, **overrides):
        """Copy with every non-``None`` override applied."""
        data = asdict(self)
        data.update({k: v for k, v in overrides.items() if v is not None})
        return RunConfig(**data)

    def dumps(self):
        lines = [f"[{SECTION}]"]
        lines += [f"{f.name} = {json.dumps(getattr(self, f.name))}" for f in fields(self)]
        return "\n".join(lines) + "\n"

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.dumps())

    @classmethod
    def loads(cls, text):
        parser = configparser.ConfigParser(interpolation=None)
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(str(exc)) from exc
        if not parser.has_section(SECTION):
            raise ConfigError(f"missing [{SECTION}] section")
        known = {f.name for f in fields(cls)}
        data = {}
        for key, raw in parser.items(SECTION):
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            try:
                data[key] = json.loads(raw)
            except json.JSONDecodeError:
                # bare words such as  model = builtin-fom
                data[key] = raw.strip()
        return cls(**data)

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fh:
                return cls.loads(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
