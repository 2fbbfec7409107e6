"""Bundled runtime parameters and YAML overrides for the CLI and harness."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import yaml

from .dqn import TrainConfig
from .queueing import ServingSpec
from .radio import RadioParams
from .rl_env import EnvParams
from .scenario import ArenaConfig, TaskProfile


@dataclass
class Settings:
    arena: ArenaConfig = field(default_factory=ArenaConfig)
    task: TaskProfile = field(default_factory=TaskProfile)
    radio: RadioParams = field(default_factory=RadioParams)
    serving: ServingSpec = field(default_factory=ServingSpec)
    train: TrainConfig = field(default_factory=TrainConfig)
    env: EnvParams = field(default_factory=EnvParams)


def default_settings() -> Settings:
    return Settings()


def load_settings(path) -> Settings:
    """Defaults overridden by a YAML file with sections named like Settings fields.

    Example:

        task:
          arrival_rate: 0.5
        train:
          learning_rate: 0.0005
    """
    with open(path) as f:
        raw = yaml.safe_load(f) or {}
    if not isinstance(raw, dict):
        raise ValueError(f"config root must be a mapping, got {type(raw).__name__}")
    settings = Settings()
    for section, overrides in raw.items():
        if not hasattr(settings, section):
            raise ValueError(f"unknown config section {section!r}")
        if not isinstance(overrides, dict):
            raise ValueError(f"config section {section!r} must be a mapping")
        current = getattr(settings, section)
        valid = {f.name for f in dataclasses.fields(current)}
        unknown = set(overrides) - valid
        if unknown:
            raise ValueError(f"unknown keys in section {section!r}: {sorted(unknown)}")
        setattr(settings, section, dataclasses.replace(current, **overrides))
    return settings
