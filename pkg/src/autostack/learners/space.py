"""Hyperparameter domains, random/grid config generation and override files."""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Union

import numpy as np

from ..errors import ConfigError

LR, RF, GBM, DL = "LR", "RF", "GBM", "DL"
FAMILIES = (LR, RF, GBM, DL)
GRID_CAP = 10_000


@dataclass(frozen=True)
class FloatRange:
    low: float
    high: float
    log: bool = False

    def __post_init__(self):
        if not self.low <= self.high:
            raise ConfigError(f"empty interval [{self.low}, {self.high}]")
        if self.log and self.low <= 0:
            raise ConfigError("log-scaled intervals need a positive lower bound")

    def sample(self, rng: np.random.Generator) -> float:
        if self.log:
            return float(math.exp(rng.uniform(math.log(self.low), math.log(self.high))))
        return float(rng.uniform(self.low, self.high))

    def grid(self, n: int) -> list[float]:
        if n == 1:
            mid = math.sqrt(self.low * self.high) if self.log else (self.low + self.high) / 2
            return [float(mid)]
        pts = np.geomspace(self.low, self.high, n) if self.log else np.linspace(self.low, self.high, n)
        pts[0], pts[-1] = self.low, self.high
        return [float(v) for v in pts]

    def contains(self, value) -> bool:
        return isinstance(value, (int, float)) and self.low <= value <= self.high


@dataclass(frozen=True)
class IntRange:
    low: int
    high: int
    log: bool = False

    def __post_init__(self):
        if not self.low <= self.high:
            raise ConfigError(f"empty integer range {{{self.low}..{self.high}}}")
        if self.log and self.low <= 0:
            raise ConfigError("log-scaled ranges need a positive lower bound")

    def sample(self, rng: np.random.Generator) -> int:
        if self.log:
            x = math.exp(rng.uniform(math.log(self.low), math.log(self.high + 1)))
            return int(min(self.high, max(self.low, math.floor(x))))
        return int(rng.integers(self.low, self.high + 1))

    def grid(self, n: int) -> list[int]:
        values = FloatRange(self.low, self.high, self.log).grid(n)
        return list(dict.fromkeys(int(round(v)) for v in values))

    def contains(self, value) -> bool:
        return isinstance(value, (int, np.integer)) and self.low <= value <= self.high


@dataclass(frozen=True)
class Choice:
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if not self.values:
            raise ConfigError("empty choice set")

    def sample(self, rng: np.random.Generator):
        return self.values[int(rng.integers(len(self.values)))]

    def grid(self, n: int) -> list:
        if n >= len(self.values):
            return list(self.values)
        picks = np.linspace(0, len(self.values) - 1, n) if n > 1 else [(len(self.values) - 1) / 2]
        return list(dict.fromkeys(self.values[int(round(i))] for i in picks))

    def contains(self, value) -> bool:
        return value in self.values


Domain = Union[FloatRange, IntRange, Choice]


@dataclass(frozen=True)
class ModelConfig:
    family: str
    params: Mapping[str, Any] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}")
        object.__setattr__(self, "params", dict(self.params))

    def __getitem__(self, key):
        return self.params[key]

    def get(self, key, default=None):
        return self.params.get(key, default)

    def with_seed(self, seed: int) -> "ModelConfig":
        return replace(self, seed=int(seed))

    def describe(self) -> str:
        inner = ", ".join(f"{k}={_fmt(v)}" for k, v in self.params.items())
        return f"{self.family}({inner})"


def _fmt(v):
    return f"{v:.4g}" if isinstance(v, float) else str(v)


@dataclass(frozen=True)
class HyperparameterSpace:
    family: str
    domains: Mapping[str, Domain]

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}")
        object.__setattr__(self, "domains", dict(self.domains))

    def contains(self, config: ModelConfig) -> bool:
        if config.family != self.family:
            return False
        return all(name in config.params and dom.contains(config.params[name])
                   for name, dom in self.domains.items())


def default_space(family: str) -> HyperparameterSpace:
    if family == LR:
        domains = {"l2_lambda": FloatRange(1e-6, 10.0, log=True)}
    elif family == RF:
        domains = {
            "n_trees": IntRange(50, 500),
            "max_depth": IntRange(4, 20),
            "min_rows": IntRange(1, 10),
            "mtry_fraction": FloatRange(0.3, 1.0),
        }
    elif family == GBM:
        domains = {
            "n_trees": IntRange(50, 500),
            "learning_rate": FloatRange(0.01, 0.3, log=True),
            "max_depth": IntRange(2, 8),
            "row_subsample": FloatRange(0.5, 1.0),
        }
    elif family == DL:
        domains = {
            "hidden_layers": Choice((1, 2, 3)),
            "units": IntRange(16, 256, log=True),
            "epochs": IntRange(10, 100),
            "learning_rate": FloatRange(1e-4, 1e-1, log=True),
            "dropout": FloatRange(0.0, 0.5),
        }
    else:
        raise ConfigError(f"unknown family {family!r}")
    return HyperparameterSpace(family, domains)


def sample_config(space: HyperparameterSpace, seed: int) -> ModelConfig:
    """Draw one config: uniform on linear axes, log-uniform on log axes."""
    rng = np.random.default_rng(seed)
    params = {name: dom.sample(rng) for name, dom in space.domains.items()}
    return ModelConfig(space.family, params, seed=int(seed))


def enumerate_grid(
    space: HyperparameterSpace, points_per_axis: int, *, seed: int = 0, cap: int = GRID_CAP
) -> list[ModelConfig]:
    if points_per_axis < 1:
        raise ConfigError("points_per_axis must be at least 1")
    names = list(space.domains)
    axes = [space.domains[n].grid(points_per_axis) for n in names]
    size = math.prod(len(a) for a in axes)
    if size > cap:
        raise ConfigError(f"grid has {size} points, above the cap of {cap}")
    return [ModelConfig(space.family, dict(zip(names, combo)), seed=seed)
            for combo in itertools.product(*axes)]


def _parse_value(token: str):
    token = token.strip()
    for cast in (int, float):
        try:
            return cast(token)
        except ValueError:
            pass
    return token


def parse_space_overrides(text: str, base: Mapping[str, HyperparameterSpace] | None = None
                          ) -> dict[str, HyperparameterSpace]:
    """Apply ``family.param.{min,max,choices,scale} = value`` lines to the defaults.

    Blank lines and ``#`` comments are ignored. Overriding an axis's kind is
    allowed: giving ``.choices`` turns it into a choice set, giving
    ``.min``/``.max`` on a choice axis turns it into a range.
    """
    spaces = dict(base) if base is not None else {f: default_space(f) for f in FAMILIES}
    edits: dict[tuple[str, str], dict[str, str]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"override line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        parts = key.split(".")
        if len(parts) != 3 or parts[2] not in ("min", "max", "choices", "scale"):
            raise ConfigError(f"override line {lineno}: bad key {key!r}")
        family, param, attr = parts
        if family not in FAMILIES:
            raise ConfigError(f"override line {lineno}: unknown family {family!r}")
        edits.setdefault((family, param), {})[attr] = value

    for (family, param), attrs in edits.items():
        domains = dict(spaces[family].domains)
        old = domains.get(param)
        if "choices" in attrs:
            domains[param] = Choice(tuple(_parse_value(v) for v in attrs["choices"].split(",")))
        else:
            low = _parse_value(attrs["min"]) if "min" in attrs else getattr(old, "low", None)
            high = _parse_value(attrs["max"]) if "max" in attrs else getattr(old, "high", None)
            if low is None or high is None:
                raise ConfigError(f"override for {family}.{param} needs both min and max")
            scale = attrs.get("scale", "log" if getattr(old, "log", False) else "linear")
            if scale not in ("log", "linear"):
                raise ConfigError(f"scale for {family}.{param} must be log or linear")
            integral = (isinstance(old, IntRange) or old is None) and isinstance(low, int) and isinstance(high, int)
            cls = IntRange if integral else FloatRange
            domains[param] = cls(low, high, log=scale == "log")
        spaces[family] = HyperparameterSpace(family, domains)
    return spaces


def load_space_overrides(path) -> dict[str, HyperparameterSpace]:
    with open(os.fspath(path), encoding="utf-8") as fh:
        return parse_space_overrides(fh.read())
