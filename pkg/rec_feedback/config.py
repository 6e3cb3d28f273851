"""Run configuration files and their merge with command-line flags.

Precedence is CLI flag > config file > built-in default. A run config is a
JSON document such as

    {
      "rewiring": {"theta": 0.0, "p": 1.0, "list_length": 20, "seed": 42},
      "split": {"probe_fraction": 0.1, "n_divisions": 10},
      "density": {"mode": "user_removal"},
      "grids": {"theta": [0, 0.5, 1], "p": [1.0], "density": [1, 0.8]},
      "methods": {"CN": 0, "LHN": 1},
      "replicas": 5,
      "jobs": 4,
      "output": "results/run1"
    }

Unknown keys at any level are rejected.
"""
from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence, TypeVar

import attr
import funcy as fn

from rec_feedback.datasets import PathLike
from rec_feedback.recommender import SimilarityParams


T = TypeVar('T')
OUTPUT_ENV = 'REC_FEEDBACK_OUTPUT'
DEFAULT_OUTPUT = 'results'
DEFAULT_METHODS = {'CN': 0.0, 'COS': 0.5, 'LHN': 1.0}


class ConfigError(ValueError):
    pass


def _mapping(_, attribute, value):
    if not isinstance(value, Mapping):
        raise ConfigError(f"'{attribute.name}' must be an object.")


@attr.s(auto_detect=True, auto_attribs=True, frozen=True, kw_only=True)
class Grids:
    theta: Optional[tuple[float, ...]] = attr.ib(
        default=None, converter=attr.converters.optional(tuple))
    p: Optional[tuple[float, ...]] = attr.ib(
        default=None, converter=attr.converters.optional(tuple))
    density: Optional[tuple[float, ...]] = attr.ib(
        default=None, converter=attr.converters.optional(tuple))


@attr.s(auto_detect=True, auto_attribs=True, frozen=True, kw_only=True)
class RunConfigFile:
    """Sections are kept raw and validated when merged into their class."""
    rewiring: dict = attr.ib(factory=dict, validator=_mapping)
    split: dict = attr.ib(factory=dict, validator=_mapping)
    density: dict = attr.ib(factory=dict, validator=_mapping)
    grids: Grids = attr.ib(factory=Grids)
    methods: Optional[dict] = None
    replicas: Optional[int] = None
    jobs: Optional[int] = None
    output: Optional[str] = None


def _build(cls: type[T], data: Mapping[str, Any], where: str) -> T:
    try:
        return cls(**data)
    except TypeError as err:  # Unknown or missing keys.
        raise ConfigError(f"{where}: {err}") from err
    except ValueError as err:
        raise ConfigError(f"{where}: {err}") from err


def load_config(path: Optional[PathLike]) -> RunConfigFile:
    if path is None:
        return RunConfigFile()
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as err:
        raise ConfigError(f"Cannot read config {path}: {err}") from err
    if not isinstance(data, Mapping):
        raise ConfigError("Config root must be an object.")

    data = dict(data)
    if 'grids' in data:
        if not isinstance(data['grids'], Mapping):
            raise ConfigError("'grids' must be an object.")
        data['grids'] = _build(Grids, data['grids'], 'grids')
    return _build(RunConfigFile, data, str(path))


def merge(cls: type[T], section: Mapping[str, Any],
          flags: Mapping[str, Any], where: str = '') -> T:
    """Build `cls` from defaults, then `section`, then non-None flags."""
    given = fn.select_values(lambda v: v is not None, dict(flags))
    return _build(cls, fn.merge(dict(section), given), where or cls.__name__)


def pick(*values: T) -> Optional[T]:
    """First value that is not None."""
    return fn.first(v for v in values if v is not None)


def default_output() -> str:
    return os.environ.get(OUTPUT_ENV, DEFAULT_OUTPUT)


# ------------------------------- Parsing ---------------------------------


def parse_grid(text: str) -> tuple[float, ...]:
    """'0:1:0.25' (inclusive range) or '0,0.5,1' (explicit values)."""
    try:
        if ':' in text:
            start, stop, step = map(float, text.split(':'))
            if step <= 0 or stop < start:
                raise ConfigError(f"Bad grid range {text!r}.")
            count = int(round((stop - start) / step))
            return tuple(round(start + k * step, 10)
                         for k in range(count + 1))
        return tuple(float(x) for x in text.split(',') if x.strip())
    except ValueError as err:
        if isinstance(err, ConfigError):
            raise
        raise ConfigError(f"Bad grid {text!r}.") from err


def parse_pairs(items: Sequence[str]) -> dict[str, str]:
    """['users=10', 'items=5,links=20'] -> {'users': '10', ...}."""
    pairs = fn.lcat(x.split(',') for x in items)
    result = {}
    for pair in filter(None, pairs):
        key, sep, value = pair.partition('=')
        if not sep:
            raise ConfigError(f"Expected key=value, got {pair!r}.")
        result[key.strip()] = value.strip()
    return result


def parse_methods(spec: Optional[Mapping[str, Any]]
                  ) -> dict[str, SimilarityParams]:
    if spec is None:
        spec = DEFAULT_METHODS
    try:
        return {name: SimilarityParams(float(theta))
                for name, theta in spec.items()}
    except ValueError as err:
        raise ConfigError(f"Bad method set: {err}") from err


__all__ = ['ConfigError', 'DEFAULT_METHODS', 'Grids', 'OUTPUT_ENV',
           'RunConfigFile', 'default_output', 'load_config', 'merge',
           'parse_grid', 'parse_methods', 'parse_pairs', 'pick']
