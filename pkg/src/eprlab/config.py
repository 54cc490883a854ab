"""Strict JSON configuration loading shared by the CLI commands.

Schema::

    {"epsilon": 0.3, "P": 1.0, "a": 1.0, "t_final": 2.0,
     "grid": {"n": 1024, "x_min": -13.0, "dx": 0.025},   # optional
     "envelope": "gaussian",                              # optional
     "potential": "gaussian"}                             # optional

Unknown keys anywhere are rejected.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

from .errors import ConfigError
from .fields import Grid
from .model import (
    EnvelopeSpec,
    PhysParams,
    PotentialSpec,
    default_grid,
    gaussian_envelope,
    gaussian_potential,
    zero_potential,
)

_TOP_KEYS = {"epsilon", "P", "a", "t_final", "grid", "envelope", "potential"}
_GRID_KEYS = {"n", "x_min", "dx"}
_ENVELOPES = {"gaussian": gaussian_envelope}
_POTENTIALS = {"gaussian": gaussian_potential, "zero": zero_potential}


@dataclass(frozen=True)
class RunConfig:
    params: PhysParams
    grid: Grid | None
    envelope: EnvelopeSpec
    potential: PotentialSpec
    echo: dict

    def build_grid(self) -> Grid:
        return self.grid if self.grid is not None else default_grid(self.params)


def parse_config(raw: dict) -> RunConfig:
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    missing = {"epsilon", "P", "a", "t_final"} - set(raw)
    if missing:
        raise ConfigError(f"missing config keys: {sorted(missing)}")
    try:
        params = PhysParams(
            epsilon=float(raw["epsilon"]),
            momentum=float(raw["P"]),
            spin_pos=float(raw["a"]),
            t_final=float(raw["t_final"]),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad physical parameters: {exc}") from exc

    grid = None
    if "grid" in raw:
        g = raw["grid"]
        if not isinstance(g, dict):
            raise ConfigError("'grid' must be an object")
        unknown = set(g) - _GRID_KEYS
        if unknown:
            raise ConfigError(f"unknown grid keys: {sorted(unknown)}")
        missing = _GRID_KEYS - set(g)
        if missing:
            raise ConfigError(f"missing grid keys: {sorted(missing)}")
        try:
            grid = Grid(x_min=float(g["x_min"]), dx=float(g["dx"]), n=int(g["n"]))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad grid: {exc}") from exc

    env_name = raw.get("envelope", "gaussian")
    if env_name not in _ENVELOPES:
        raise ConfigError(f"unknown envelope '{env_name}' (have: {sorted(_ENVELOPES)})")
    pot_name = raw.get("potential", "gaussian")
    if pot_name not in _POTENTIALS:
        raise ConfigError(f"unknown potential '{pot_name}' (have: {sorted(_POTENTIALS)})")

    return RunConfig(
        params=params,
        grid=grid,
        envelope=_ENVELOPES[env_name](),
        potential=_POTENTIALS[pot_name](),
        echo=raw,
    )


def load_config(path: str) -> RunConfig:
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    return parse_config(raw)
