"""JSON experiment configuration with strict key checking."""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import Any, Optional, Union

from .engine import DEFAULT_SEED, EvolveParams
from .errors import ConfigError
from .gauge import DEFAULT_MAX_DIM, GaugeGroup, build_lattice
from .hamiltonian import Couplings
from .protocol import MODES, SECTOR_GROUND


def _as_list(x):
    return list(x) if isinstance(x, (list, tuple)) else [x]


def _require(cond, key, msg):
    if not cond:
        raise ConfigError(f"{key}: {msg}")


def _is_int(x):
    return isinstance(x, int) and not isinstance(x, bool)


def _is_num(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


@dataclass
class LatticeConfig:
    dims: list = field(default_factory=lambda: [7])
    boundary: Union[str, list] = "open"

    def validate(self, key):
        _require(isinstance(self.dims, list) and all(_is_int(d) for d in self.dims),
                 f"{key}.dims", "must be a list of integers")
        try:
            build_lattice(self.dims, self.boundary)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from None


@dataclass
class GroupConfig:
    kind: str = "Z2"
    N: Optional[int] = None
    cutoff: Optional[int] = None

    def validate(self, key):
        _require(self.kind in ("Z2", "ZN", "U1"), f"{key}.kind", "must be Z2, ZN or U1")
        if self.kind == "ZN":
            _require(_is_int(self.N) and self.N >= 2, f"{key}.N", "ZN needs integer N >= 2")
        if self.kind == "U1":
            _require(_is_int(self.cutoff) and self.cutoff >= 1, f"{key}.cutoff",
                     "U1 needs integer cutoff >= 1")

    def build(self) -> GaugeGroup:
        if self.kind == "ZN":
            return GaugeGroup.zn(self.N)
        if self.kind == "U1":
            return GaugeGroup.u1(self.cutoff)
        return GaugeGroup.z2()


@dataclass
class CouplingsConfig:
    g2: Union[float, list] = 1.0
    magnetic: bool = True

    def validate(self, key):
        _require(all(_is_num(g) and g > 0 for g in _as_list(self.g2)), f"{key}.g2",
                 "must be a positive number or list of positive numbers")
        _require(isinstance(self.magnetic, bool), f"{key}.magnetic", "must be true or false")

    def build(self) -> list:
        return [Couplings(float(g), self.magnetic) for g in _as_list(self.g2)]


@dataclass
class TimesConfig:
    start: float = 0.0
    stop: Optional[float] = None  # None: four periods of the strong-coupling fringe
    count: int = 64

    def validate(self, key):
        _require(_is_num(self.start), f"{key}.start", "must be a number")
        _require(self.stop is None or (_is_num(self.stop) and self.stop > self.start),
                 f"{key}.stop", "must be a number greater than start")
        _require(_is_int(self.count) and self.count >= 1, f"{key}.count", "must be >= 1")


@dataclass
class ProtocolConfig:
    R: Union[int, list, None] = None
    L: Union[int, list, None] = None
    mode: str = SECTOR_GROUND
    anchor: Optional[list] = None
    axis: int = 0
    times: TimesConfig = field(default_factory=TimesConfig)

    def validate(self, key):
        for name in ("R", "L"):
            if getattr(self, name) is None:
                continue
            vals = _as_list(getattr(self, name))
            _require(vals and all(_is_int(v) and v >= 1 for v in vals), f"{key}.{name}",
                     "must be a positive integer or list of them")
            _require(len(set(vals)) == len(vals), f"{key}.{name}", "values must be distinct")
        _require(self.mode in MODES, f"{key}.mode", f"must be one of {list(MODES)}")
        _require(_is_int(self.axis) and self.axis >= 0, f"{key}.axis", "must be >= 0")
        _require(self.anchor is None or (isinstance(self.anchor, list)
                                         and all(_is_int(a) for a in self.anchor)),
                 f"{key}.anchor", "must be a list of site coordinates")
        self.times.validate(f"{key}.times")

    @property
    def R_list(self) -> list:
        return [] if self.R is None else _as_list(self.R)

    @property
    def L_list(self) -> list:
        return [] if self.L is None else _as_list(self.L)

    def require(self, *names):
        for name in names:
            if getattr(self, name) is None:
                raise ConfigError(f"protocol.{name}: required for this command")


@dataclass
class EngineConfig:
    method: str = "auto"
    tol: float = 1e-10
    dense_threshold: int = 4096
    krylov_dim: int = 30
    dt_max: float = 1.0
    seed: int = DEFAULT_SEED
    max_dim: int = DEFAULT_MAX_DIM

    def validate(self, key):
        _require(self.method in ("auto", "exact", "krylov"), f"{key}.method",
                 "must be auto, exact or krylov")
        _require(_is_num(self.tol) and self.tol > 0, f"{key}.tol", "must be positive")
        _require(_is_num(self.dt_max) and self.dt_max > 0, f"{key}.dt_max", "must be positive")
        _require(_is_int(self.dense_threshold) and self.dense_threshold >= 0,
                 f"{key}.dense_threshold", "must be a non-negative integer")
        _require(_is_int(self.krylov_dim) and self.krylov_dim >= 2, f"{key}.krylov_dim",
                 "must be an integer >= 2")
        _require(_is_int(self.seed) and self.seed >= 0, f"{key}.seed",
                 "must be a non-negative integer")
        _require(_is_int(self.max_dim) and self.max_dim >= 1, f"{key}.max_dim",
                 "must be a positive integer")

    def evolve_params(self) -> EvolveParams:
        return EvolveParams(self.method, self.dt_max, self.krylov_dim, self.tol,
                            self.dense_threshold)


@dataclass
class AnalysisConfig:
    area_law_threshold: float = 0.02
    ambiguity: float = 0.9
    max_iter: int = 100
    step_tol: float = 1e-12

    def validate(self, key):
        _require(_is_num(self.area_law_threshold) and self.area_law_threshold > 0,
                 f"{key}.area_law_threshold", "must be positive")
        _require(_is_num(self.ambiguity) and 0 < self.ambiguity <= 1, f"{key}.ambiguity",
                 "must lie in (0, 1]")
        _require(_is_int(self.max_iter) and self.max_iter >= 1, f"{key}.max_iter",
                 "must be a positive integer")
        _require(_is_num(self.step_tol) and self.step_tol > 0, f"{key}.step_tol",
                 "must be positive")


@dataclass
class ToyConfig:
    gamma: float = 1.0
    beta: Union[float, list] = 1.0

    def validate(self, key):
        _require(_is_num(self.gamma) and self.gamma > 0, f"{key}.gamma", "must be positive")
        _require(all(_is_num(b) and b > 0 for b in _as_list(self.beta)), f"{key}.beta",
                 "must be a positive number or list of them")


@dataclass
class OutputConfig:
    directory: str = "out"
    svg: bool = False
    basis_dump: int = 10

    def validate(self, key):
        _require(isinstance(self.directory, str), f"{key}.directory", "must be a string")
        _require(isinstance(self.svg, bool), f"{key}.svg", "must be true or false")
        _require(_is_int(self.basis_dump) and self.basis_dump >= 0, f"{key}.basis_dump",
                 "must be a non-negative integer")


@dataclass
class ExperimentConfig:
    lattice: Optional[LatticeConfig] = None
    group: Optional[GroupConfig] = None
    couplings: CouplingsConfig = field(default_factory=CouplingsConfig)
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)
    engine: EngineConfig = field(default_factory=EngineConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    toy: Optional[ToyConfig] = None
    output: OutputConfig = field(default_factory=OutputConfig)

    def validate(self):
        for f in dataclasses.fields(self):
            sub = getattr(self, f.name)
            if sub is not None:
                sub.validate(f.name)

    def require_lattice(self):
        if self.lattice is None or self.group is None:
            raise ConfigError("lattice/group: both sections are required for this command")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_NESTED = {
    ExperimentConfig: {"lattice": LatticeConfig, "group": GroupConfig,
                       "couplings": CouplingsConfig, "protocol": ProtocolConfig,
                       "engine": EngineConfig, "analysis": AnalysisConfig, "toy": ToyConfig,
                       "output": OutputConfig},
    ProtocolConfig: {"times": TimesConfig},
}


def _build(cls, data: Any, key: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{key or 'config'}: expected a JSON object")
    names = {f.name for f in dataclasses.fields(cls)}
    for k in data:
        if k not in names:
            raise ConfigError(f"unknown key '{key + '.' if key else ''}{k}'")
    kwargs = {}
    nested = _NESTED.get(cls, {})
    for k, v in data.items():
        path = f"{key}.{k}" if key else k
        kwargs[k] = _build(nested[k], v, path) if k in nested and v is not None else v
    return cls(**kwargs)


def load_config(data: dict) -> ExperimentConfig:
    cfg = _build(ExperimentConfig, data, "")
    cfg.validate()
    return cfg


def read_config(source) -> ExperimentConfig:
    """Read from an open text stream or a file path."""
    try:
        if hasattr(source, "read"):
            data = json.load(source)
        else:
            with open(source) as fh:
                data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return load_config(data)
