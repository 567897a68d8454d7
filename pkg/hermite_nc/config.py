"""
config.py
Load, validate and serialize experiment configurations (TOML, tomllib).
Search order:
  1) explicit config path
  2) adjacent DEFAULT_CONFIG_PATH (bundle root / 'hermite_nc.toml')
  3) /etc/hermite_nc.toml

Top-level keys are ExperimentConfig field names; an optional [runtime] table
holds workers and log_level. Anything else is a ConfigError.
"""

from __future__ import annotations
import dataclasses, json, math

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, List

from .bundle import DEFAULT_CONFIG_PATH
from .errors import ConfigError
from .experiments import KINDS
from .types import ExperimentConfig

_INT = {"d", "matrix_size", "degree_cap", "node_count", "seed", "samples", "k", "time_points", "order", "n_max", "workers"}
_FLOAT = {"threshold", "alpha", "t_min", "t_max", "t0"}
_STR = {"kind", "out_dir", "multiplier", "log_level"}
_BOOL = {"plots"}
_FLOAT_LIST = {"p_values", "radii", "r_values", "t_values", "x_values", "y_values", "kernel_exponents", "deltas"}
_INT_LIST = {"degree_caps"}
_RUNTIME = ("workers", "log_level")
FIELDS = [f.name for f in dataclasses.fields(ExperimentConfig)]


def _load_toml(path: Path) -> Dict[str, Any]:
    with open(path, "rb") as f:
        return tomllib.load(f)


def find_config(path_arg: str | None) -> Path:
    """Pick the best config path based on CLI arg and availability."""
    if path_arg:
        p = Path(path_arg)
        if not p.exists():
            raise FileNotFoundError(f"Specified config file does not exist: {path_arg}")
        return p
    p = Path(DEFAULT_CONFIG_PATH)
    if p.exists():
        return p
    return Path("/etc/hermite_nc.toml")


def _number(name: str, v: Any, integral: bool):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"expected a number, got {v!r}", name)
    if integral:
        if isinstance(v, float) and not v.is_integer():
            raise ConfigError(f"expected an integer, got {v!r}", name)
        return int(v)
    if not math.isfinite(float(v)):
        raise ConfigError(f"expected a finite number, got {v!r}", name)
    return float(v)


def _coerce(name: str, v: Any) -> Any:
    if name in _INT:
        return _number(name, v, True)
    if name in _FLOAT:
        return _number(name, v, False)
    if name in _STR:
        if not isinstance(v, str):
            raise ConfigError(f"expected a string, got {v!r}", name)
        return v
    if name in _BOOL:
        if not isinstance(v, bool):
            raise ConfigError(f"expected true or false, got {v!r}", name)
        return v
    if name in _FLOAT_LIST or name in _INT_LIST:
        if not isinstance(v, list):
            raise ConfigError(f"expected a list, got {v!r}", name)
        return [_number(name, x, name in _INT_LIST) for x in v]
    raise ConfigError("unknown key", name)


def _positive(cfg: ExperimentConfig, name: str) -> None:
    values = getattr(cfg, name)
    values = values if isinstance(values, list) else [values]
    if any(v <= 0 for v in values):
        raise ConfigError(f"values must be positive, got {getattr(cfg, name)}", name)


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    if cfg.kind not in KINDS:
        raise ConfigError(f"unknown experiment kind {cfg.kind!r}; known: {', '.join(KINDS)}", "kind")
    for name in sorted(_FLOAT_LIST | _INT_LIST):
        if not getattr(cfg, name):
            raise ConfigError("range must not be empty", name)
    for name in ("d", "matrix_size", "samples", "order", "k", "radii", "r_values", "t_values", "deltas", "degree_caps", "alpha", "t_min", "t0"):
        _positive(cfg, name)
    if cfg.degree_cap < 0:
        raise ConfigError(f"must be >= 0, got {cfg.degree_cap}", "degree_cap")
    if cfg.node_count < 0:
        raise ConfigError(f"must be >= 0 (0 picks 2 * degree_cap + 8), got {cfg.node_count}", "node_count")
    if any(p < 1 for p in cfg.p_values):
        raise ConfigError(f"exponents must be >= 1, got {cfg.p_values}", "p_values")
    if not cfg.t_min < cfg.t_max:
        raise ConfigError(f"t_min must be below t_max, got {cfg.t_min} >= {cfg.t_max}", "t_max")
    if cfg.time_points < 16:
        raise ConfigError(f"time grid needs at least 16 points, got {cfg.time_points}", "time_points")
    if cfg.n_max < 4:
        raise ConfigError(f"must be >= 4, got {cfg.n_max}", "n_max")
    if any(e not in (-0.5, -1.0) for e in cfg.kernel_exponents):
        raise ConfigError(f"kernel exponents must be -0.5 or -1, got {cfg.kernel_exponents}", "kernel_exponents")
    if cfg.workers < 0:
        raise ConfigError(f"must be >= 0 (0 picks automatically), got {cfg.workers}", "workers")
    if cfg.log_level.upper() not in ("DEBUG", "INFO", "WARN", "WARNING", "ERROR"):
        raise ConfigError(f"unknown log level {cfg.log_level!r}", "log_level")
    return cfg


def config_from_dict(raw: Dict[str, Any]) -> ExperimentConfig:
    values: Dict[str, Any] = {}
    for key, v in raw.items():
        if key == "runtime":
            if not isinstance(v, dict):
                raise ConfigError("expected a table", "runtime")
            for rk, rv in v.items():
                if rk not in _RUNTIME:
                    raise ConfigError("unknown key", f"runtime.{rk}")
                values[rk] = _coerce(rk, rv)
            continue
        if key not in FIELDS:
            raise ConfigError("unknown key", key)
        values[key] = _coerce(key, v)
    if "kind" not in values:
        raise ConfigError("missing required key", "kind")
    return validate(ExperimentConfig(**values))


def load_config(path: Path) -> ExperimentConfig:
    try:
        raw = _load_toml(path)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}")
    return config_from_dict(raw)


def _toml_value(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    return json.dumps(str(v))


def dump_config(cfg: ExperimentConfig) -> str:
    """TOML text that load_config parses back to an equal config."""
    data = cfg.to_dict()
    lines: List[str] = [f"{name} = {_toml_value(data[name])}" for name in FIELDS if name not in _RUNTIME]
    lines.append("")
    lines.append("[runtime]")
    lines += [f"{name} = {_toml_value(data[name])}" for name in _RUNTIME]
    return "\n".join(lines) + "\n"


def parse_config_text(text: str) -> ExperimentConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(str(e))
    return config_from_dict(raw)
