"""Run configuration (schema version 1) read from TOML.

Every key has a default; unknown keys are rejected by their dotted name.
Layout::

    schema = 1

    [equation]            # alpha = 1.0, p = 1, start_index = 1
    alpha = 1.0
    p = 2
    a = { family = "factorial", shift = 1 }
    b = { family = "factorial", shift = 2 }
    # or, instead of a/b, an Euler-type equation with b ≡ gamma:
    # euler = { gamma = 0.2, form = "advanced" }

    [simulate]            # horizon = 100, initial = [] (required), kind = "values"
    [classify]            # eps_x, q_min, burn_in: automatic; source = "simulate"
    [criteria]            # N automatic, shifted = false, log_scale = false
    [shoot]               # x_start = 1.0, horizon = 10000, max_bisections = 60
    [fixedpoint]          # direction = "forward", seed = "upper", max_iter = 200,
                          # tol = 1e-6, damping = 0.5, anchor automatic
    [sweep]               # gammas = [], workers automatic
    [output]              # format = "json", precision = 17, path unset

Coefficient families: constant {c}, power {coef, shift, exponent},
factorial {shift}, table {start_index, values}, geometric {coef, ratio,
start_index, stop}.
"""

from __future__ import annotations

import dataclasses
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .core import EquationSpec, PhiMap, coefficient_from_dict
from .criteria import euler_spec
from .exceptions import ConfigurationError

SCHEMA_VERSION = 1


@dataclass
class EquationSection:
    alpha: float = 1.0
    p: int = 1
    start_index: int | None = None
    a: dict | None = None
    b: dict | None = None
    euler: dict | None = None

    def build(self, gamma: float | None = None) -> EquationSpec:
        if not (isinstance(self.alpha, (int, float)) and self.alpha > 0):
            raise ConfigurationError(f"equation.alpha must be positive, got {self.alpha!r}")
        if not (isinstance(self.p, int) and self.p >= 1):
            raise ConfigurationError(f"equation.p must be an integer >= 1, got {self.p!r}")
        if self.euler is not None or gamma is not None:
            opts = dict(self.euler or {})
            _reject_unknown(opts, {"gamma", "form"}, "equation.euler")
            g = opts.get("gamma") if gamma is None else gamma
            if g is None:
                raise ConfigurationError("equation.euler.gamma is required")
            return euler_spec(float(g), float(self.alpha), self.p, self.start_index, opts.get("form", "advanced"))
        if self.a is None or self.b is None:
            raise ConfigurationError("equation needs both 'a' and 'b' coefficient tables (or 'euler')")
        a = coefficient_from_dict(self.a)
        b = coefficient_from_dict(self.b)
        start = 1 if self.start_index is None else int(self.start_index)
        return EquationSpec(a, b, PhiMap(float(self.alpha)), self.p, start)


@dataclass
class SimulateSection:
    horizon: int = 100
    initial: list = field(default_factory=list)
    kind: str = "values"
    start_index: int | None = None


@dataclass
class ClassifySection:
    eps_x: float | None = None
    q_min: float | None = None
    burn_in: int | None = None
    source: str = "simulate"


@dataclass
class CriteriaSection:
    N: int | None = None
    shifted: bool = False
    log_scale: bool = False


@dataclass
class ShootSection:
    x_start: float = 1.0
    horizon: int = 10_000
    max_bisections: int = 60
    halflinear: bool = True


@dataclass
class FixedPointSection:
    direction: str = "forward"
    seed: str = "upper"
    max_iter: int = 200
    tol: float = 1e-6
    damping: float = 0.5
    anchor: int | None = None


@dataclass
class SweepSection:
    gammas: list = field(default_factory=list)
    workers: int | None = None


@dataclass
class OutputSection:
    format: str = "json"
    precision: int = 17
    path: str | None = None


@dataclass
class RunConfig:
    equation: EquationSection = field(default_factory=EquationSection)
    simulate: SimulateSection = field(default_factory=SimulateSection)
    classify: ClassifySection = field(default_factory=ClassifySection)
    criteria: CriteriaSection = field(default_factory=CriteriaSection)
    shoot: ShootSection = field(default_factory=ShootSection)
    fixedpoint: FixedPointSection = field(default_factory=FixedPointSection)
    sweep: SweepSection = field(default_factory=SweepSection)
    output: OutputSection = field(default_factory=OutputSection)
    schema: int = SCHEMA_VERSION

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


_SECTIONS = {f.name: f.default_factory for f in dataclasses.fields(RunConfig) if f.name != "schema"}


def _reject_unknown(table: dict, allowed, prefix: str):
    for key in table:
        if key not in allowed:
            raise ConfigurationError(f"unknown configuration key '{prefix}.{key}'")


def config_from_dict(raw: dict) -> RunConfig:
    raw = dict(raw)
    schema = raw.pop("schema", SCHEMA_VERSION)
    if schema != SCHEMA_VERSION:
        raise ConfigurationError(f"unsupported config schema {schema!r} (expected {SCHEMA_VERSION})")
    cfg = RunConfig()
    for key, value in raw.items():
        if key not in _SECTIONS:
            raise ConfigurationError(f"unknown configuration key '{key}'")
        if not isinstance(value, dict):
            raise ConfigurationError(f"configuration key '{key}' must be a table")
        section = _SECTIONS[key]()
        names = {f.name for f in dataclasses.fields(section)}
        _reject_unknown(value, names, key)
        setattr(cfg, key, dataclasses.replace(section, **value))
    if cfg.output.format not in ("json", "csv"):
        raise ConfigurationError(f"output.format must be 'json' or 'csv', got {cfg.output.format!r}")
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigurationError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"config file {path} is not valid TOML: {exc}") from None
    return config_from_dict(raw)
