"""Pipeline configuration: target frequency, gravity filter, windowing."""

from __future__ import annotations

from dataclasses import dataclass, asdict
from pathlib import Path

import yaml


@dataclass(frozen=True)
class PipelineConfig:
    """Knobs for the homogenization pipeline.

    Defaults reproduce the standard configuration: resample to 50 Hz and
    detrend every sensor with a fifth-order 0.5 Hz low-pass Butterworth.
    """

    target_freq: float = 50.0
    filter_order: int = 5
    filter_cutoff_hz: float = 0.5
    filter_all_sensors: bool = True
    jitter_cv_max: float = 0.2

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        known = {f: data[f] for f in cls.__dataclass_fields__ if f in data}
        return cls(**known)


DEFAULT_CONFIG = PipelineConfig()


def load_config(path: str | Path) -> PipelineConfig:
    """Read a PipelineConfig from a YAML file of config keys."""
    with open(path, "r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise ValueError(f"config file {path} must hold a mapping")
    unknown = set(data) - set(PipelineConfig.__dataclass_fields__)
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return PipelineConfig.from_dict(data)
