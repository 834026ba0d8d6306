"""Scenario files: ``key = value`` lines, ``#`` comments, SI units.

Lists are comma separated.  A sweep is written ``sweep_<name> = min, max, count``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .model import CraneParams, LoadState, TransportTask

SWEEPABLE = ("m", "M", "l", "gamma", "g", "d", "t_f", "eta")
COMMANDS = ("design", "simulate", "power", "consumption", "energy-map", "optimal", "bounds",
            "excitation-scan", "optimize-angles")


class ConfigError(ValueError):
    def __init__(self, message, line=None, key=None, source="<config>"):
        where = source if line is None else f"{source}:{line}"
        prefix = f"{where}: " + (f"key {key!r}: " if key else "")
        super().__init__(prefix + message)
        self.line = line
        self.key = key


@dataclass(frozen=True)
class Sweep:
    start: float
    stop: float
    count: int

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class ScenarioConfig:
    m: float = 10.0
    M: float = 0.0
    l: float = 5.0
    gamma: float = 0.0
    g: float = 9.8
    d: float = 10.0
    t_f: float = 7.0
    eta: float = 1.0
    q0: float = 0.0
    qdot0: float = 0.0
    theta0_deg: float | None = None
    model: str = "harmonic"
    protocol: str = "sta"
    free_values: tuple[float, ...] = ()
    free_basis: str = "scaled"
    steps: int | None = None
    samples: int | None = None
    theta_targets_deg: tuple[float, ...] = ()
    scan_deg: tuple[float, float, int] = (0.0, 45.0, 46)
    init_scale: float = 0.25
    command: str | None = None
    sweeps: dict = field(default_factory=dict)

    def params(self) -> CraneParams:
        return CraneParams(m=self.m, M=self.M, l=self.l, gamma=self.gamma, g=self.g)

    def task(self) -> TransportTask:
        return TransportTask(d=self.d, t_f=self.t_f)

    def initial_state(self) -> LoadState:
        params = self.params()
        if self.theta0_deg is not None:
            return LoadState.from_angle(0.0, math.radians(self.theta0_deg), 0.0, params)
        return LoadState.from_deviation(0.0, self.q0, self.qdot0, params)

    def with_values(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)


_FLOAT_KEYS = {"m", "M", "l", "gamma", "g", "d", "t_f", "eta", "q0", "qdot0", "theta0_deg",
               "init_scale"}
_INT_KEYS = {"steps", "samples"}
_CHOICES = {"model": ("exact", "harmonic"), "protocol": ("sta", "oct"),
            "free_basis": ("scaled", "physical"), "command": COMMANDS}
_LIST_KEYS = {"free_values", "theta_targets_deg"}
_KNOWN = {f.name for f in fields(ScenarioConfig)} - {"sweeps"}


def _number(text, key, line, source, kind=float):
    try:
        value = kind(text)
    except ValueError:
        raise ConfigError(f"expected {'an integer' if kind is int else 'a number'}, got {text!r}",
                          line, key, source) from None
    if kind is float and not math.isfinite(value):
        raise ConfigError(f"value must be finite, got {text!r}", line, key, source)
    return value


def _parse_value(key, raw, line, source):
    if key in _FLOAT_KEYS:
        return _number(raw, key, line, source)
    if key in _INT_KEYS:
        return _number(raw, key, line, source, int)
    if key in _CHOICES:
        if raw not in _CHOICES[key]:
            raise ConfigError(f"must be one of {', '.join(_CHOICES[key])}; got {raw!r}", line, key, source)
        return raw
    parts = [p.strip() for p in raw.split(",")] if raw else []
    if key in _LIST_KEYS:
        return tuple(_number(p, key, line, source) for p in parts if p)
    if key == "scan_deg" or key.startswith("sweep_"):
        if len(parts) != 3:
            raise ConfigError("expected 'min, max, count'", line, key, source)
        lo, hi = _number(parts[0], key, line, source), _number(parts[1], key, line, source)
        count = _number(parts[2], key, line, source, int)
        if count < 1:
            raise ConfigError("count must be at least 1", line, key, source)
        return (lo, hi, count)
    raise ConfigError("unknown key", line, key, source)  # pragma: no cover


def parse_config(text: str, source: str = "<config>", overrides: dict | None = None) -> ScenarioConfig:
    values: dict = {}
    sweeps: dict = {}
    seen: dict = {}
    entries = []
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno, None, source)
        key, _, raw = (part.strip() for part in line.partition("="))
        entries.append((key, raw, lineno))
    for key, raw in (overrides or {}).items():
        entries.append((key, raw, None))

    for key, raw, lineno in entries:
        if key.startswith("sweep_"):
            name = key[len("sweep_"):]
            if name not in SWEEPABLE:
                raise ConfigError(f"cannot sweep {name!r}; sweepable: {', '.join(SWEEPABLE)}",
                                  lineno, key, source)
        elif key not in _KNOWN:
            raise ConfigError("unknown key", lineno, key, source)
        if key in seen and lineno is not None:
            raise ConfigError(f"duplicate key (first set on line {seen[key]})", lineno, key, source)
        seen[key] = lineno
        value = _parse_value(key, raw, lineno, source)
        if key.startswith("sweep_"):
            sweeps[key[len("sweep_"):]] = Sweep(*value)
        else:
            values[key] = value

    if "theta0_deg" in values and ({"q0", "qdot0"} & values.keys()):
        raise ConfigError("give either theta0_deg or q0/qdot0, not both", seen["theta0_deg"],
                          "theta0_deg", source)
    cfg = ScenarioConfig(**values, sweeps=sweeps)
    try:
        cfg.params()
        cfg.task()
        cfg.initial_state()
    except ValueError as exc:
        raise ConfigError(str(exc), None, None, source) from None
    if not -1.0 <= cfg.eta <= 1.0:
        raise ConfigError("eta must lie in [-1, 1]", seen.get("eta"), "eta", source)
    if cfg.theta0_deg is not None and not abs(cfg.theta0_deg) < 90:
        raise ConfigError("theta0_deg must lie in (-90, 90)", seen.get("theta0_deg"), "theta0_deg", source)
    return cfg


def load_config(path, overrides: dict | None = None) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", None, None, str(path)) from None
    return parse_config(text, str(path), overrides)
