"""Toolkit configuration: one YAML file with a section per module.

Every section is a frozen dataclass; loading validates types and values and
rejects unknown keys with their dotted location. ``dump_config`` writes a
file that loads back to an equal config.
"""

from __future__ import annotations

import dataclasses
import types
import typing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Union, get_args, get_origin, get_type_hints

import yaml

from pgtt.curriculum import GateConfig
from pgtt.elevation import HeightmapSpec
from pgtt.harness import (CommandSampler, DomainRandomization, HarnessConfig,
                          PerturbationSchedule, RobotModel)
from pgtt.phase import GaitRanges
from pgtt.rewards import RewardWeights
from pgtt.swing import FootTrajectoryParams
from pgtt.terrain import ObstacleParams, TerrainParams


class ConfigError(ValueError):
    def __init__(self, location: str, message: str):
        super().__init__(f"{location or '<root>'}: {message}")
        self.location = location


@dataclass(frozen=True)
class TerrainConfig:
    kind: str = "stairs"
    params: TerrainParams = TerrainParams()
    resolution: float = 0.05
    obstacles: ObstacleParams = ObstacleParams()

    def __post_init__(self):
        if self.kind not in ("stairs", "obstacles"):
            raise ValueError(f"terrain kind must be 'stairs' or 'obstacles', got {self.kind!r}")


@dataclass(frozen=True)
class RewardConfig:
    weights: RewardWeights = RewardWeights()
    sign_profile: str = "printed"

    def __post_init__(self):
        if self.sign_profile not in ("printed", "corrected"):
            raise ValueError("sign_profile must be 'printed' or 'corrected'")

    def effective(self) -> RewardWeights:
        return self.weights.sign_corrected() if self.sign_profile == "corrected" else self.weights


@dataclass(frozen=True)
class ElevationConfig:
    r_hole: int = 2
    leg_window: float = 0.2


@dataclass(frozen=True)
class SeedConfig:
    terrain: int = 0
    rollout: int = 0


@dataclass(frozen=True)
class ToolkitConfig:
    gait: GaitRanges = GaitRanges()
    trajectory: FootTrajectoryParams = FootTrajectoryParams()
    rewards: RewardConfig = RewardConfig()
    heightmap: HeightmapSpec = HeightmapSpec()
    elevation: ElevationConfig = ElevationConfig()
    terrain: TerrainConfig = TerrainConfig()
    curriculum: GateConfig = GateConfig()
    robot: RobotModel = RobotModel()
    commands: CommandSampler = CommandSampler()
    randomization: DomainRandomization = DomainRandomization()
    perturbation: PerturbationSchedule = PerturbationSchedule()
    harness: HarnessConfig = HarnessConfig()
    seeds: SeedConfig = SeedConfig()


def _convert(tp, value, loc: str):
    origin = get_origin(tp)
    if dataclasses.is_dataclass(tp):
        return from_dict(tp, value, loc)
    if origin in (Union, types.UnionType):
        args = get_args(tp)
        if value is None and type(None) in args:
            return None
        for arg in args:
            if arg is type(None):
                continue
            return _convert(arg, value, loc)
    if origin is tuple:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(loc, f"expected a list, got {type(value).__name__}")
        args = get_args(tp)
        if len(args) == 2 and args[1] is Ellipsis:
            return tuple(_convert(args[0], v, f"{loc}[{i}]") for i, v in enumerate(value))
        if len(value) != len(args):
            raise ConfigError(loc, f"expected {len(args)} entries, got {len(value)}")
        return tuple(_convert(a, v, f"{loc}[{i}]") for i, (a, v) in enumerate(zip(args, value)))
    if tp is dict or origin is dict:
        if not isinstance(value, dict):
            raise ConfigError(loc, f"expected a mapping, got {type(value).__name__}")
        return dict(value)
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(loc, f"expected true/false, got {value!r}")
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(loc, f"expected an integer, got {value!r}")
        return value
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(loc, f"expected a number, got {value!r}")
        return float(value)
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(loc, f"expected a string, got {value!r}")
        return value
    return value


def from_dict(cls, data, loc: str = ""):
    """Build dataclass ``cls`` from nested plain data, filling defaults."""
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(loc, f"expected a mapping, got {type(data).__name__}")
    hints = get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls) if f.init}
    for key in data:
        if key not in names:
            where = f"{loc}.{key}" if loc else str(key)
            raise ConfigError(where, f"unknown key (allowed: {', '.join(sorted(names))})")
    kwargs = {}
    for key, value in data.items():
        where = f"{loc}.{key}" if loc else key
        kwargs[key] = _convert(hints[key], value, where)
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(loc, str(e)) from None


def to_dict(obj) -> Any:
    if dataclasses.is_dataclass(obj):
        return {f.name: to_dict(getattr(obj, f.name)) for f in dataclasses.fields(obj) if f.init}
    if isinstance(obj, (tuple, list)):
        return [to_dict(v) for v in obj]
    if isinstance(obj, dict):
        return {k: to_dict(v) for k, v in obj.items()}
    return obj


def load_config(path=None) -> ToolkitConfig:
    if path is None:
        return ToolkitConfig()
    try:
        data = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as e:
        raise ConfigError("", f"invalid YAML in {path}: {e}") from None
    return from_dict(ToolkitConfig, data)


def dump_config(cfg: ToolkitConfig) -> str:
    return yaml.safe_dump(to_dict(cfg), sort_keys=False)
