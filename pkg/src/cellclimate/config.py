"""Run configuration: paper presets, YAML loading and ``key=value`` overrides.

A config file is a flat YAML mapping. Every model constant is a top-level key,
so switching to the warmed climate is the single line ``eps: 0.8408``::

    eps: 0.8408
    region: [269, 273, 287, 291]
    divisions: [64, 64]
    tau: 31557600        # one year, s
    substeps: 360
    initial: [271.8, 290.3]
    target: [269.7, 288.2]
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

import yaml

from .cellspace import OFFSET_REGION, REGULATOR_REGION, CellGrid, Region
from .integrator import QUARTER, YEAR, TimeStep
from .model import WARMED_EPS, ClimateState, ModelParams, check_state
from .synthesis import control_levels

MODEL_KEYS = tuple(f.name for f in fields(ModelParams))


class ConfigError(ValueError):
    """Invalid configuration; ``key`` and ``line`` locate the offending entry."""

    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        where = ""
        if key is not None:
            where = f"key '{key}'"
            if line is not None:
                where += f" (line {line})"
            where += ": "
        super().__init__(where + message)
        self.key = key
        self.line = line


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams = field(default_factory=ModelParams)
    region: Region = REGULATOR_REGION
    n_a: int = 64
    n_s: int = 64
    u_max: float = 0.03
    segments: int = 8
    tau: float = QUARTER
    substeps: int = 90
    initial: ClimateState = ClimateState(274.0, 292.0)
    target: ClimateState = ClimateState(270.2, 288.0)
    target_radius: int = 0
    max_steps: int = 120
    hold: int = 20
    out: str = "out"

    def __post_init__(self):
        object.__setattr__(self, "initial", check_state(self.initial))
        object.__setattr__(self, "target", check_state(self.target))

    @classmethod
    def regulator(cls) -> "RunConfig":
        return cls()

    @classmethod
    def offset(cls) -> "RunConfig":
        return cls(
            params=ModelParams(eps=WARMED_EPS),
            region=OFFSET_REGION,
            tau=YEAR,
            substeps=360,
            initial=ClimateState(271.8, 290.3),
            target=ClimateState(269.7, 288.2),
            max_steps=60,
            hold=50,
        )

    @classmethod
    def preset(cls, name: str) -> "RunConfig":
        try:
            return {"regulator": cls.regulator, "offset": cls.offset}[name]()
        except KeyError:
            raise ConfigError(f"unknown preset {name!r}") from None

    @property
    def grid(self) -> CellGrid:
        return CellGrid(self.region, self.n_a, self.n_s)

    @property
    def step(self) -> TimeStep:
        return TimeStep(self.tau, self.substeps)

    @property
    def levels(self) -> tuple[float, ...]:
        # u_max = 0 degenerates to the single "no control" level
        if self.u_max == 0:
            return (0.0,)
        return control_levels(self.u_max, self.segments)

    def with_(self, **changes) -> "RunConfig":
        return replace(self, **changes)

    def to_flat(self) -> dict[str, Any]:
        flat: dict[str, Any] = asdict(self.params)
        r = self.region
        flat.update(
            region=[r.t_a_min, r.t_a_max, r.t_s_min, r.t_s_max],
            divisions=[self.n_a, self.n_s],
            u_max=self.u_max,
            segments=self.segments,
            tau=self.tau,
            substeps=self.substeps,
            initial=list(self.initial),
            target=list(self.target),
            target_radius=self.target_radius,
            max_steps=self.max_steps,
            hold=self.hold,
            out=self.out,
        )
        return flat


FLAT_KEYS = tuple(RunConfig().to_flat())


def _number(key, v, line):
    if isinstance(v, str):
        # YAML 1.1 reads "3.15576e7" (unsigned exponent) as a string
        try:
            v = float(v)
        except ValueError:
            pass
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"expected a number, got {v!r}", key, line)
    if not math.isfinite(v):
        raise ConfigError(f"expected a finite number, got {v!r}", key, line)
    return float(v)


def _integer(key, v, line, minimum):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"expected an integer, got {v!r}", key, line)
    if v < minimum:
        raise ConfigError(f"must be >= {minimum}, got {v}", key, line)
    return v


def _numbers(key, v, n, line):
    if not isinstance(v, (list, tuple)) or len(v) != n:
        raise ConfigError(f"expected a list of {n} numbers, got {v!r}", key, line)
    return [_number(key, x, line) for x in v]


def apply_flat(base: RunConfig, data: Mapping[str, Any], lines: Mapping[str, int] | None = None) -> RunConfig:
    """Return ``base`` updated with flat ``data``; every value is revalidated."""
    lines = lines or {}
    unknown = [k for k in data if k not in FLAT_KEYS]
    if unknown:
        k = unknown[0]
        raise ConfigError(f"unknown key (allowed: {', '.join(FLAT_KEYS)})", k, lines.get(k))

    model = asdict(base.params)
    changes: dict[str, Any] = {}
    for key, v in data.items():
        line = lines.get(key)
        if key in MODEL_KEYS:
            model[key] = _number(key, v, line)
            try:
                ModelParams(**{key: model[key]})
            except ValueError as e:
                raise ConfigError(str(e), key, line) from None
        elif key == "region":
            try:
                changes["region"] = Region(*_numbers(key, v, 4, line))
            except ValueError as e:
                raise ConfigError(str(e), key, line) from None
        elif key == "divisions":
            pair = [v, v] if isinstance(v, int) and not isinstance(v, bool) else v
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise ConfigError(f"expected an integer or [n_a, n_s], got {v!r}", key, line)
            changes["n_a"], changes["n_s"] = (_integer(key, n, line, 1) for n in pair)
        elif key in ("initial", "target"):
            try:
                changes[key] = check_state(_numbers(key, v, 2, line))
            except ValueError as e:
                raise ConfigError(str(e), key, line) from None
        elif key == "u_max":
            u = _number(key, v, line)
            if not 0 <= u < 1:
                raise ConfigError(f"must lie in [0, 1), got {u}", key, line)
            changes[key] = u
        elif key == "tau":
            tau = _number(key, v, line)
            if tau <= 0:
                raise ConfigError(f"must be > 0, got {tau}", key, line)
            changes[key] = tau
        elif key in ("segments", "substeps"):
            changes[key] = _integer(key, v, line, 1)
        elif key in ("target_radius", "max_steps", "hold"):
            changes[key] = _integer(key, v, line, 0)
        elif key == "out":
            if not isinstance(v, str) or not v:
                raise ConfigError(f"expected a non-empty path string, got {v!r}", key, line)
            changes[key] = v
    cfg = replace(base, params=ModelParams(**model), **changes)
    try:
        cfg.step
    except ValueError as e:
        raise ConfigError(str(e), "substeps", lines.get("substeps", lines.get("tau"))) from None
    return cfg


def _key_lines(text: str) -> dict[str, int]:
    node = yaml.compose(text)
    if node is None or not isinstance(node, yaml.MappingNode):
        return {}
    return {k.value: k.start_mark.line + 1 for k, _ in node.value}


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    base = base or RunConfig()
    try:
        data = yaml.safe_load(text)
        lines = _key_lines(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigError(f"YAML parse error: {e}", None, line) from None
    if data is None:
        return base
    if not isinstance(data, dict):
        raise ConfigError("top level must be a mapping of keys to values")
    return apply_flat(base, data, lines)


def load_config(path: str | Path, base: RunConfig | None = None) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from None
    return parse_config(text, base)


def parse_overrides(items: list[str]) -> dict[str, Any]:
    """Parse ``key=value`` strings; values are read as YAML scalars/lists."""
    out: dict[str, Any] = {}
    for item in items:
        key, sep, raw = item.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        try:
            out[key] = yaml.safe_load(raw)
        except yaml.YAMLError:
            raise ConfigError(f"cannot parse value {raw!r}", key) from None
    return out


def dump_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(cfg.to_flat(), sort_keys=False)
