"""Signal homogenization pipeline.

Brings every stream to a common shape: estimate or trust the sampling
frequency, resample to the target rate by linear interpolation, convert values
to the canonical unit, and remove the gravity component by subtracting a
zero-phase fifth-order 0.5 Hz low-pass Butterworth estimate.

All operations are pure functions; callers may parallelize freely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.signal import lfilter

from .canonical import (
    CANONICAL_FREQ_HZ,
    DatasetManifest,
    SensorKind,
    SensorStream,
    UnitKind,
    canonical_unit,
)
from .config import DEFAULT_CONFIG, PipelineConfig
from .errors import (
    EmptyResult,
    FrequencyTooLow,
    InvalidSpec,
    JitterTooHigh,
    MissingUnit,
    SeriesTooShort,
    TooFewSamples,
    UnitKindMismatch,
)

__all__ = [
    "ResampleSpec",
    "FilterSpec",
    "IirCoefficients",
    "estimate_frequency",
    "estimate_frequency_from_timestamps",
    "num_resampled",
    "resample",
    "convert_units",
    "design_butterworth_lowpass",
    "filtfilt",
    "remove_gravity",
    "magnitude",
    "homogenize",
]


@dataclass(frozen=True)
class ResampleSpec:
    original_freq: float
    new_freq: float
    num_original_samples: int

    def __post_init__(self):
        if not (self.original_freq > 0 and self.new_freq > 0
                and self.num_original_samples > 0):
            raise InvalidSpec("resample spec fields must all be > 0")


@dataclass(frozen=True)
class FilterSpec:
    order: int = 5
    cutoff_hz: float = 0.5
    sample_rate_hz: float = CANONICAL_FREQ_HZ

    def __post_init__(self):
        if self.order < 1:
            raise InvalidSpec("filter order must be >= 1")
        if not 0 < self.cutoff_hz < self.sample_rate_hz / 2:
            raise InvalidSpec(
                f"cutoff {self.cutoff_hz} Hz must lie in (0, Nyquist "
                f"{self.sample_rate_hz / 2:g} Hz)")


@dataclass(frozen=True)
class IirCoefficients:
    """Digital IIR filter as feedforward b and feedback a, a[0] = 1."""

    b: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.b, dtype=np.float64)
        a = np.asarray(self.a, dtype=np.float64)
        if b.shape != a.shape or b.ndim != 1:
            raise InvalidSpec("b and a must be 1-D arrays of equal length")
        if abs(a[0] - 1.0) > 1e-12:
            raise InvalidSpec("a[0] must be normalized to 1")
        b.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "a", a)

    @property
    def order(self) -> int:
        return self.a.size - 1

    @property
    def dc_gain(self) -> float:
        return float(np.sum(self.b) / np.sum(self.a))


def estimate_frequency_from_timestamps(
    t: np.ndarray, config: PipelineConfig = DEFAULT_CONFIG
) -> float:
    """Estimate an integer sampling rate from a timestamp array (seconds)."""
    t = np.asarray(t, dtype=np.float64)
    if t.size < 2:
        raise TooFewSamples("frequency estimation needs at least 2 samples")
    deltas = np.diff(t)
    if not np.all(deltas > 0):
        raise JitterTooHigh("timestamps are not strictly increasing")
    mean_dt = float(np.mean(deltas))
    cv = float(np.std(deltas)) / mean_dt
    if cv > config.jitter_cv_max:
        raise JitterTooHigh(
            f"timestamp spacing CV {cv:.3f} exceeds {config.jitter_cv_max}")
    median_rate = float(np.median(1.0 / deltas))
    freq = math.floor(median_rate + 0.5)
    if freq < 1:
        raise FrequencyTooLow(
            f"median rate {median_rate:.4f} Hz rounds to 0 Hz")
    return float(freq)


def estimate_frequency(
    stream: SensorStream, config: PipelineConfig = DEFAULT_CONFIG
) -> float:
    """Estimate the sampling rate from a stream's timestamps.

    Returns the median of 1/dt over consecutive deltas, rounded to the
    nearest integer Hz. A declared frequency on the stream takes precedence
    over estimation and callers should consult it first (`resolve_frequency`).
    """
    return estimate_frequency_from_timestamps(stream.t, config)


def resolve_frequency(
    stream: SensorStream, config: PipelineConfig = DEFAULT_CONFIG
) -> float:
    """Declared frequency if present, else the timestamp-based estimate."""
    if stream.declared_freq is not None:
        return stream.declared_freq
    return estimate_frequency(stream, config)


def num_resampled(spec: ResampleSpec) -> int:
    """Sample count after resampling: floor(n * new_freq / original_freq)."""
    f0, f1 = spec.original_freq, spec.new_freq
    if float(f0).is_integer() and float(f1).is_integer():
        n = (spec.num_original_samples * int(f1)) // int(f0)
    else:
        n = math.floor(spec.num_original_samples * f1 / f0 + 1e-9)
    if n < 1:
        raise EmptyResult(
            f"{spec.num_original_samples} samples at {f0:g} Hz resample to "
            f"0 samples at {f1:g} Hz")
    return n


def resample(
    stream: SensorStream,
    target_freq: float,
    config: PipelineConfig = DEFAULT_CONFIG,
) -> SensorStream:
    """Resample a stream to `target_freq` by linear interpolation.

    New timestamps run from 0 in exact 1/target_freq steps; values are
    interpolated on the original (possibly irregular) time axis, clamping to
    the last sample beyond the recorded interval.
    """
    if target_freq <= 0:
        raise InvalidSpec("target frequency must be > 0")
    freq = resolve_frequency(stream, config)
    n_new = num_resampled(ResampleSpec(freq, target_freq, stream.n_samples))
    t_new = np.arange(n_new, dtype=np.float64) / target_freq
    t_query = stream.t[0] + t_new
    values = np.column_stack(
        [np.interp(t_query, stream.t, stream.values[:, i]) for i in range(3)]
    )
    return stream.with_values(values, t=t_new, declared_freq=float(target_freq))


def convert_units(stream: SensorStream, target: UnitKind) -> SensorStream:
    """Re-express sample values in `target`, which must fit the stream's kind."""
    if stream.unit is None:
        raise MissingUnit(
            f"{stream.kind.value} stream has no declared unit; the unit of "
            "measurement must always be provided")
    if stream.unit.kind is not stream.kind:
        raise UnitKindMismatch(
            f"stream unit {stream.unit.text} does not measure "
            f"{stream.kind.value}")
    if target.kind is not stream.kind:
        raise UnitKindMismatch(
            f"target unit {target.text} does not measure {stream.kind.value}")
    ratio = stream.unit.factor / target.factor
    return stream.with_values(stream.values * ratio, unit=target)


def design_butterworth_lowpass(spec: FilterSpec) -> IirCoefficients:
    """Digital Butterworth low-pass via bilinear transform with prewarping.

    The analog prototype's poles are scaled to the prewarped cutoff and mapped
    with s = 2*fs*(z-1)/(z+1); the n zeros land at z = -1. Unit DC gain and
    -3.01 dB at the cutoff follow by construction.
    """
    nyquist = spec.sample_rate_hz / 2.0
    if not 0 < spec.cutoff_hz < nyquist:
        raise InvalidSpec(
            f"cutoff {spec.cutoff_hz} Hz must lie below Nyquist {nyquist:g} Hz")
    n = spec.order
    fs2 = 2.0 * spec.sample_rate_hz
    warped = fs2 * math.tan(math.pi * spec.cutoff_hz / spec.sample_rate_hz)

    k = np.arange(1, n + 1)
    theta = np.pi * (2 * k + n - 1) / (2 * n)
    analog_poles = warped * np.exp(1j * theta)

    digital_poles = (fs2 + analog_poles) / (fs2 - analog_poles)
    gain = warped**n / float(np.real(np.prod(fs2 - analog_poles)))

    b = gain * np.real(np.poly(np.full(n, -1.0 + 0j)))
    a = np.real(np.poly(digital_poles))
    coeffs = IirCoefficients(b=b, a=a / a[0])
    # The rounded coefficients themselves carry ~1e-9 of DC error at this
    # cutoff ratio (sum(a) cancels five orders of magnitude), so the self
    # check is against coefficient corruption, not numerical dust.
    if abs(coeffs.dc_gain - 1.0) > 1e-6:
        raise InvalidSpec("designed filter failed the unit DC gain check")
    return coeffs


def _steady_state(coeffs: IirCoefficients) -> np.ndarray:
    """Initial filter state that starts the IIR in steady state for a unit
    step, so constant inputs pass through with no transient."""
    b, a = coeffs.b, coeffs.a
    n = coeffs.order
    companion = np.zeros((n, n))
    companion[:, 0] = -a[1:]
    if n > 1:
        companion[:-1, 1:] = np.eye(n - 1)
    rhs = b[1:] - a[1:] * b[0]
    return np.linalg.solve(np.eye(n) - companion, rhs)


def filtfilt(coeffs: IirCoefficients, series: np.ndarray) -> np.ndarray:
    """Zero-phase filtering: forward and backward IIR passes.

    The series is extended on both sides by 3*order samples reflected (odd,
    about the end values) so edge transients fall on the padding, and the
    filter state is initialized to steady state at the first padded value.
    Output length equals input length.
    """
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1:
        raise InvalidSpec("filtfilt expects a 1-D series")
    pad = 3 * coeffs.order
    if x.size <= pad:
        raise SeriesTooShort(
            f"series of {x.size} samples is too short; need more than {pad}")
    left = 2.0 * x[0] - x[pad:0:-1]
    right = 2.0 * x[-1] - x[-2:-pad - 2:-1]
    ext = np.concatenate([left, x, right])

    zi = _steady_state(coeffs)
    y, _ = lfilter(coeffs.b, coeffs.a, ext, zi=zi * ext[0])
    y = y[::-1]
    y, _ = lfilter(coeffs.b, coeffs.a, y, zi=zi * y[0])
    y = y[::-1]
    return y[pad:-pad]


@lru_cache(maxsize=16)
def _cached_lowpass(order: int, cutoff_hz: float, rate_hz: float) -> IirCoefficients:
    return design_butterworth_lowpass(FilterSpec(order, cutoff_hz, rate_hz))


def remove_gravity(
    stream: SensorStream, config: PipelineConfig = DEFAULT_CONFIG
) -> SensorStream:
    """Subtract the per-axis low-pass gravity estimate from a stream.

    The stream must already be at the target rate in its canonical unit. The
    same detrending is reused for gyroscope/magnetometer streams when the
    pipeline is configured to filter every sensor.
    """
    if stream.unit is not canonical_unit(stream.kind):
        raise UnitKindMismatch(
            f"gravity removal expects the canonical unit "
            f"{canonical_unit(stream.kind).text}")
    if stream.declared_freq != config.target_freq:
        raise InvalidSpec(
            f"gravity removal expects a {config.target_freq:g} Hz stream")
    coeffs = _cached_lowpass(
        config.filter_order, config.filter_cutoff_hz, config.target_freq)
    estimate = np.column_stack(
        [filtfilt(coeffs, stream.values[:, i]) for i in range(3)])
    return stream.with_values(stream.values - estimate, gravity_included=False)


def magnitude(stream: SensorStream) -> np.ndarray:
    """Per-sample Euclidean norm sqrt(x^2 + y^2 + z^2)."""
    return np.sqrt(np.sum(stream.values * stream.values, axis=1))


def homogenize(
    stream: SensorStream,
    manifest: DatasetManifest | None = None,
    config: PipelineConfig = DEFAULT_CONFIG,
) -> SensorStream:
    """Full per-stream homogenization.

    Resolves frequency (stream metadata, else manifest, else timestamp
    estimate) and unit (stream, else manifest), resamples to the target rate,
    converts to the canonical unit, and detrends: accelerometers always get
    gravity removal; other kinds get the same filter when
    `config.filter_all_sensors` is set (the default).
    """
    unit = stream.unit
    declared = stream.declared_freq
    gravity = stream.gravity_included
    if manifest is not None:
        if unit is None:
            unit = manifest.declared_units.get(stream.kind)
        if declared is None:
            declared = manifest.declared_freq.get(stream.kind)
        if gravity is None:
            gravity = manifest.gravity_included
    if unit is None:
        raise MissingUnit(
            f"{stream.kind.value} stream has no declared unit; the unit of "
            "measurement must always be provided")
    stream = stream.with_values(
        stream.values, unit=unit, declared_freq=declared,
        gravity_included=gravity)

    stream = resample(stream, config.target_freq, config)
    stream = convert_units(stream, canonical_unit(stream.kind))
    if stream.kind is SensorKind.ACCELEROMETER or config.filter_all_sensors:
        stream = remove_gravity(stream, config)
    return stream
