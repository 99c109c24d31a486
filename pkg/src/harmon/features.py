"""Windowing and the 21-feature descriptor over magnitude signals.

Fourteen time-domain and seven frequency-domain features are computed per
sliding window; averaging a label's window vectors gives its ActivityProfile,
the signature used for signal-based label comparison and the baseline
classifier.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .canonical import CANONICAL_FREQ_HZ, CanonicalRecording, SensorKind
from .errors import NormalizationNotFitted, WindowTooShort
from . import signals

__all__ = [
    "WindowSpec",
    "FeatureVector",
    "FEATURE_NAMES",
    "ActivityProfile",
    "FeatureNormalization",
    "windows",
    "extract_features",
    "build_profiles",
    "profiles_table",
]


@dataclass(frozen=True)
class WindowSpec:
    """Sliding window geometry: 128 samples / 50% overlap = 2.56 s at 50 Hz."""

    length: int = 128
    overlap: float = 0.5

    def __post_init__(self):
        if self.length < 16:
            raise ValueError("window length must be >= 16 samples")
        if not 0.0 <= self.overlap < 1.0:
            raise ValueError("overlap must lie in [0, 1)")

    @property
    def hop(self) -> int:
        return max(1, int(round(self.length * (1.0 - self.overlap))))

    def to_dict(self) -> dict:
        return {"length": self.length, "overlap": self.overlap}

    @classmethod
    def from_dict(cls, data: dict) -> "WindowSpec":
        return cls(length=int(data["length"]), overlap=float(data["overlap"]))


class FeatureVector(NamedTuple):
    """The 21 window features, in fixed order."""

    mean: float
    std: float
    variance: float
    min: float
    max: float
    range: float
    median: float
    mad: float
    iqr: float
    rms: float
    energy: float
    skewness: float
    kurtosis: float
    zero_crossing_rate: float
    signal_magnitude_area: float
    autocorr_lag1: float
    dominant_freq_hz: float
    dominant_power: float
    spectral_energy: float
    spectral_entropy: float
    spectral_centroid_hz: float

    def as_array(self) -> np.ndarray:
        return np.asarray(self, dtype=np.float64)

    @classmethod
    def from_array(cls, arr: Sequence[float]) -> "FeatureVector":
        values = [float(v) for v in arr]
        if len(values) != len(cls._fields):
            raise ValueError(f"expected {len(cls._fields)} components")
        return cls(*values)


FEATURE_NAMES: tuple[str, ...] = FeatureVector._fields


@dataclass(frozen=True)
class ActivityProfile:
    """Mean feature vector of one label within one dataset."""

    dataset_id: str
    label: str
    vector: FeatureVector
    window_count: int

    def __post_init__(self):
        if self.window_count < 1:
            raise ValueError("a profile needs at least one window")


def windows(series: np.ndarray, spec: WindowSpec = WindowSpec()) -> np.ndarray:
    """Sliding windows fully contained in the series, shape (k, length).

    A series shorter than one window yields an empty (0, length) array.
    """
    x = np.asarray(series, dtype=np.float64)
    if x.size < spec.length:
        return np.empty((0, spec.length))
    view = np.lib.stride_tricks.sliding_window_view(x, spec.length)
    return view[:: spec.hop].copy()


def extract_features(
    window: np.ndarray, sample_rate_hz: float = CANONICAL_FREQ_HZ
) -> FeatureVector:
    """Compute the 21 features of one window.

    Frequency-domain features use the magnitude spectrum of the mean-removed,
    unwindowed FFT. Constant windows take the degenerate conventions
    (skewness = kurtosis = 0, zero spectrum -> all spectral features 0) so
    profiles never contain NaN.
    """
    x = np.asarray(window, dtype=np.float64)
    if x.ndim != 1 or x.size < 16:
        raise WindowTooShort("feature windows need at least 16 samples")
    n = x.size
    mu = float(np.mean(x))
    centered = x - mu

    variance = float(np.mean(centered * centered))
    std = float(np.sqrt(variance))
    mn = float(np.min(x))
    mx = float(np.max(x))
    median = float(np.median(x))
    mad = float(np.median(np.abs(x - median)))
    q75, q25 = np.percentile(x, [75.0, 25.0])
    rms = float(np.sqrt(np.mean(x * x)))
    energy = variance  # mean square of the mean-removed window

    if std > 0.0:
        skewness = float(np.mean(centered**3) / std**3)
        kurtosis = float(np.mean(centered**4) / std**4 - 3.0)  # excess
        autocorr = float(np.dot(centered[:-1], centered[1:])
                         / np.dot(centered, centered))
    else:
        skewness = kurtosis = autocorr = 0.0

    nonneg = centered >= 0.0
    zcr = float(np.count_nonzero(nonneg[1:] != nonneg[:-1])) / (n - 1)
    sma = float(np.mean(np.abs(x)))

    spectrum = np.fft.rfft(centered)
    freqs = np.fft.rfftfreq(n, d=1.0 / sample_rate_hz)
    scale = np.full(spectrum.size, 2.0)
    scale[0] = 1.0
    if n % 2 == 0:
        scale[-1] = 1.0
    power = scale * np.abs(spectrum) ** 2 / (n * n)
    total = float(np.sum(power))

    if total > 0.0:
        peak = int(np.argmax(power[1:])) + 1  # exclude DC
        dominant_freq = float(freqs[peak])
        dominant_power = float(power[peak])
        p = power / total
        nz = p[p > 0.0]
        entropy = float(-np.sum(nz * np.log(nz)) / np.log(p.size))
        centroid = float(np.sum(freqs * power) / total)
    else:
        dominant_freq = dominant_power = entropy = centroid = 0.0

    return FeatureVector(
        mean=mu,
        std=std,
        variance=variance,
        min=mn,
        max=mx,
        range=mx - mn,
        median=median,
        mad=mad,
        iqr=float(q75 - q25),
        rms=rms,
        energy=energy,
        skewness=skewness,
        kurtosis=kurtosis,
        zero_crossing_rate=zcr,
        signal_magnitude_area=sma,
        autocorr_lag1=autocorr,
        dominant_freq_hz=dominant_freq,
        dominant_power=dominant_power,
        spectral_energy=total,
        spectral_entropy=entropy,
        spectral_centroid_hz=centroid,
    )


@dataclass
class ProfileBuildResult:
    profiles: list[ActivityProfile]
    shortfalls: list[tuple[str, str]]  # (dataset_id, label) with zero windows


def build_profiles(
    recordings: Iterable[CanonicalRecording],
    spec: WindowSpec = WindowSpec(),
    sensor: SensorKind = SensorKind.ACCELEROMETER,
    sample_rate_hz: float = CANONICAL_FREQ_HZ,
    group_by_dataset: bool = True,
) -> ProfileBuildResult:
    """Average window features per (dataset, label) into ActivityProfiles.

    Labels whose recordings yield no windows are returned as shortfalls
    rather than silently dropped. With group_by_dataset=False all recordings
    pool into per-label profiles under the pseudo dataset id "merged".
    """
    ordered = sorted(recordings,
                     key=lambda r: (r.dataset_id, r.label, r.trial_id))
    groups: dict[tuple[str, str], list[np.ndarray]] = {}
    for rec in ordered:
        key = (rec.dataset_id if group_by_dataset else "merged", rec.label)
        bucket = groups.setdefault(key, [])
        stream = rec.streams.get(sensor)
        if stream is None:
            continue
        wins = windows(signals.magnitude(stream), spec)
        bucket.extend(wins)

    profiles: list[ActivityProfile] = []
    shortfalls: list[tuple[str, str]] = []
    for (dataset_id, label), wins in sorted(groups.items()):
        if not wins:
            shortfalls.append((dataset_id, label))
            continue
        vectors = np.stack(
            [extract_features(w, sample_rate_hz).as_array() for w in wins])
        profiles.append(ActivityProfile(
            dataset_id=dataset_id,
            label=label,
            vector=FeatureVector.from_array(vectors.mean(axis=0)),
            window_count=len(wins),
        ))
    return ProfileBuildResult(profiles=profiles, shortfalls=shortfalls)


def profiles_table(profiles: Iterable[ActivityProfile]) -> str:
    """Render profiles as tabular text: one row per dataset+label."""
    lines = ["dataset_id,label," + ",".join(FEATURE_NAMES)]
    for p in sorted(profiles, key=lambda p: (p.dataset_id, p.label)):
        cells = [f"{v:.9g}" for v in p.vector]
        lines.append(f"{p.dataset_id},{p.label}," + ",".join(cells))
    return "\n".join(lines) + "\n"


class FeatureNormalization:
    """Per-feature z-score fitted over a pooled vector set.

    Features with zero pooled standard deviation transform to 0 so they
    contribute nothing to distances.
    """

    def __init__(self):
        self.mean: np.ndarray | None = None
        self.std: np.ndarray | None = None

    @property
    def fitted(self) -> bool:
        return self.mean is not None

    def fit(self, vectors: Iterable[FeatureVector | np.ndarray]) -> "FeatureNormalization":
        matrix = np.stack([np.asarray(v, dtype=np.float64) for v in vectors])
        if matrix.ndim != 2 or matrix.shape[1] != len(FEATURE_NAMES):
            raise ValueError(f"expected (n, {len(FEATURE_NAMES)}) vectors")
        self.mean = matrix.mean(axis=0)
        self.std = matrix.std(axis=0)
        return self

    def transform(self, vector: FeatureVector | np.ndarray) -> np.ndarray:
        if not self.fitted:
            raise NormalizationNotFitted("call fit() before transform()")
        v = np.asarray(vector, dtype=np.float64)
        out = np.zeros_like(v)
        np.divide(v - self.mean, self.std, out=out, where=self.std > 0)
        return out
