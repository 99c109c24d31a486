"""Canonical data model shared by every imported dataset.

All signals are standardized into these types: 3-axis streams with explicit
unit and frequency metadata, grouped into per-trial recordings. A recording is
*canonical* once every stream is at the canonical frequency (50 Hz), in its
kind's canonical unit, with timestamps regenerated from 0.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "SensorKind",
    "UnitKind",
    "SensorStream",
    "SubjectInfo",
    "CanonicalRecording",
    "DatasetManifest",
    "ValidationIssue",
    "ValidationReport",
    "CANONICAL_FREQ_HZ",
    "canonical_unit",
    "validate_recording",
]

#: Target sampling frequency for every canonical stream.
CANONICAL_FREQ_HZ = 50.0

#: Conversion constant between g and m/s^2.
STANDARD_GRAVITY = 9.80665

#: Timestamps are compared to the exact canonical grid with this slack.
_GRID_TOL = 1e-9


class SensorKind(enum.Enum):
    ACCELEROMETER = "accelerometer"
    GYROSCOPE = "gyroscope"
    MAGNETOMETER = "magnetometer"

    def __str__(self) -> str:
        return self.value


class UnitKind(enum.Enum):
    """Units of measure with their conversion factor to the canonical unit.

    `factor` is the multiplier that expresses one source unit in the
    canonical unit of its sensor kind (g -> m/s^2 multiplies by 9.80665).
    """

    METERS_PER_SECOND_SQUARED = ("m/s^2", SensorKind.ACCELEROMETER, 1.0)
    G = ("g", SensorKind.ACCELEROMETER, STANDARD_GRAVITY)
    RADIANS_PER_SECOND = ("rad/s", SensorKind.GYROSCOPE, 1.0)
    DEGREES_PER_SECOND = ("deg/s", SensorKind.GYROSCOPE, math.pi / 180.0)
    MICROTESLA = ("uT", SensorKind.MAGNETOMETER, 1.0)
    GAUSS = ("gauss", SensorKind.MAGNETOMETER, 100.0)

    def __init__(self, text: str, kind: SensorKind, factor: float):
        self.text = text
        self.kind = kind
        self.factor = factor

    def __str__(self) -> str:
        return self.text


_UNIT_ALIASES = {
    "m/s^2": UnitKind.METERS_PER_SECOND_SQUARED,
    "m/s2": UnitKind.METERS_PER_SECOND_SQUARED,
    "ms2": UnitKind.METERS_PER_SECOND_SQUARED,
    "g": UnitKind.G,
    "rad/s": UnitKind.RADIANS_PER_SECOND,
    "rads": UnitKind.RADIANS_PER_SECOND,
    "deg/s": UnitKind.DEGREES_PER_SECOND,
    "degs": UnitKind.DEGREES_PER_SECOND,
    "dps": UnitKind.DEGREES_PER_SECOND,
    "ut": UnitKind.MICROTESLA,
    "microtesla": UnitKind.MICROTESLA,
    "gauss": UnitKind.GAUSS,
}

_CANONICAL_UNIT = {
    SensorKind.ACCELEROMETER: UnitKind.METERS_PER_SECOND_SQUARED,
    SensorKind.GYROSCOPE: UnitKind.RADIANS_PER_SECOND,
    SensorKind.MAGNETOMETER: UnitKind.MICROTESLA,
}


def canonical_unit(kind: SensorKind) -> UnitKind:
    """Canonical unit for a sensor kind (m/s^2, rad/s, microtesla)."""
    return _CANONICAL_UNIT[kind]


def parse_unit(text: str) -> UnitKind:
    key = text.strip().lower()
    if key not in _UNIT_ALIASES:
        raise ValueError(f"unknown unit {text!r}")
    return _UNIT_ALIASES[key]


def parse_sensor_kind(text: str) -> SensorKind:
    key = text.strip().lower()
    for kind in SensorKind:
        if kind.value == key:
            return kind
    raise ValueError(f"unknown sensor kind {text!r}")


@dataclass(frozen=True)
class SensorStream:
    """One 3-axis time series with its unit and frequency metadata.

    `t` holds timestamps in seconds, `values` is an (n, 3) array in `unit`.
    Construction normalizes dtypes and freezes the arrays; operations return
    new streams instead of mutating. Timestamp monotonicity is *reported* by
    validate_recording rather than enforced here so that defective imports
    can still be inspected.
    """

    kind: SensorKind
    unit: UnitKind | None
    t: np.ndarray
    values: np.ndarray
    declared_freq: float | None = None
    gravity_included: bool | None = None

    def __post_init__(self):
        t = np.ascontiguousarray(np.asarray(self.t, dtype=np.float64))
        values = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        if t.ndim != 1:
            raise ValueError("timestamps must be a 1-D array")
        if values.shape != (t.size, 3):
            raise ValueError(f"values must have shape (n, 3), got {values.shape}")
        if t.size == 0:
            raise ValueError("stream must contain at least one sample")
        if self.declared_freq is not None and not self.declared_freq > 0:
            raise ValueError("declared_freq must be > 0")
        t.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", values)

    @property
    def n_samples(self) -> int:
        return self.t.size

    @property
    def duration_s(self) -> float:
        """Nominal covered time: samples / rate when a rate is known."""
        if self.declared_freq:
            return self.n_samples / self.declared_freq
        return float(self.t[-1] - self.t[0])

    def axis(self, index: int) -> np.ndarray:
        return self.values[:, index]

    def with_values(self, values: np.ndarray, **meta) -> "SensorStream":
        """Copy of this stream with replaced sample values and metadata."""
        fields = dict(
            kind=self.kind,
            unit=self.unit,
            t=self.t,
            values=values,
            declared_freq=self.declared_freq,
            gravity_included=self.gravity_included,
        )
        fields.update(meta)
        return SensorStream(**fields)


@dataclass(frozen=True)
class SubjectInfo:
    """Context information about the person performing the trial."""

    subject_id: str
    age: float | None = None
    sex: str | None = None
    height_cm: float | None = None
    weight_kg: float | None = None
    device_position: str | None = None

    def __post_init__(self):
        for name in ("age", "height_cm", "weight_kg"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ValueError(f"{name} must be positive when present")


@dataclass(frozen=True)
class CanonicalRecording:
    """One trial of one subject: streams keyed by sensor kind plus its label."""

    dataset_id: str
    trial_id: str
    subject: SubjectInfo
    label: str
    streams: dict[SensorKind, SensorStream]

    def relabeled(self, label: str) -> "CanonicalRecording":
        return replace(self, label=label)

    @property
    def duration_s(self) -> float:
        return max((s.duration_s for s in self.streams.values()), default=0.0)


@dataclass
class DatasetManifest:
    """Dataset-level metadata captured at import time."""

    dataset_id: str
    name: str
    source_labels: set[str] = field(default_factory=set)
    sensors: set[SensorKind] = field(default_factory=set)
    declared_freq: dict[SensorKind, float] = field(default_factory=dict)
    declared_units: dict[SensorKind, UnitKind] = field(default_factory=dict)
    gravity_included: bool | None = None
    subject_count: int = 0
    trial_count: int = 0


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


@dataclass
class ValidationReport:
    issues: list[ValidationIssue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def add(self, code: str, message: str) -> None:
        self.issues.append(ValidationIssue(code, message))

    def __iter__(self):
        return iter(self.issues)

    def __len__(self) -> int:
        return len(self.issues)


def _validate_stream(
    report: ValidationReport,
    kind: SensorKind,
    stream: SensorStream,
    target_freq: float,
) -> None:
    where = kind.value
    if stream.kind is not kind:
        report.add("stream-kind-mismatch",
                   f"{where}: stream declares kind {stream.kind.value}")
    if stream.unit is not canonical_unit(stream.kind):
        got = stream.unit.text if stream.unit else "none"
        report.add("unit-mismatch",
                   f"{where}: unit is {got}, canonical is "
                   f"{canonical_unit(stream.kind).text}")
    deltas = np.diff(stream.t)
    if deltas.size and not np.all(deltas > 0):
        report.add("non-monotone-timestamps",
                   f"{where}: timestamps are not strictly increasing")
    else:
        grid = np.arange(stream.n_samples, dtype=np.float64) / target_freq
        if not np.allclose(stream.t, grid, rtol=0.0, atol=_GRID_TOL):
            report.add("frequency-mismatch",
                       f"{where}: timestamps deviate from the exact "
                       f"1/{target_freq:g} s grid starting at 0")
    if stream.declared_freq != target_freq:
        report.add("frequency-mismatch",
                   f"{where}: declared frequency is "
                   f"{stream.declared_freq}, expected {target_freq:g}")
    if not np.all(np.isfinite(stream.values)):
        report.add("non-finite-values", f"{where}: stream contains NaN/inf")


def validate_recording(
    rec: CanonicalRecording, target_freq: float = CANONICAL_FREQ_HZ
) -> ValidationReport:
    """Check a recording against the canonical invariants.

    Violations become report entries, never exceptions: an empty report means
    the recording is canonical.
    """
    report = ValidationReport()
    if not rec.streams:
        report.add("no-streams", "recording has no streams")
    for kind, stream in rec.streams.items():
        _validate_stream(report, kind, stream, target_freq)
    return report
