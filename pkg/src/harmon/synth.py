"""Synthetic motion generators for tests, demos, and benchmarks.

Real HAR corpora are too heavy to ship with the test suite, so activities
are faked as sums of sinusoids plus noise: each "activity" gets a distinct
dominant frequency and amplitude, which is exactly the structure the
feature extractor keys on. The emitters at the bottom write such signals
back out as raw CSV datasets to exercise the full ingest path.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .canonical import (
    CANONICAL_FREQ_HZ,
    STANDARD_GRAVITY,
    CanonicalRecording,
    SensorKind,
    SensorStream,
    SubjectInfo,
    UnitKind,
)

__all__ = [
    "Tone",
    "band_limited_tones",
    "evaluate_tones",
    "activity_recording",
    "make_corpus",
    "twin_datasets",
    "DRIVER_A_YAML",
    "DRIVER_B_YAML",
]


@dataclass(frozen=True)
class Tone:
    freq_hz: float
    amplitude: float
    phase: float = 0.0


def evaluate_tones(tones: list[list[Tone]], t: np.ndarray) -> np.ndarray:
    """Evaluate per-axis tone stacks on a time axis, shape (n, 3)."""
    out = np.zeros((t.size, 3))
    for axis, stack in enumerate(tones):
        for tone in stack:
            out[:, axis] += tone.amplitude * np.sin(
                2.0 * np.pi * tone.freq_hz * t + tone.phase)
    return out


def band_limited_tones(
    seed: int,
    n_tones: int = 3,
    freq_range: tuple[float, float] = (0.8, 1.5),
    amplitude: float = 1.0,
) -> list[list[Tone]]:
    """Three independent axes of smooth band-limited motion.

    The band sits above the 0.5 Hz gravity cutoff so zero-phase filtering
    leaves the content essentially untouched, and below 2 Hz so a 25 Hz
    raw stream still represents it faithfully.
    """
    rng = np.random.default_rng(seed)
    lo, hi = freq_range
    tones = []
    for _ in range(3):
        stack = []
        for k in range(n_tones):
            stack.append(Tone(
                freq_hz=float(rng.uniform(lo, hi)),
                amplitude=amplitude * float(rng.uniform(0.5, 1.0)) / (k + 1),
                phase=float(rng.uniform(0, 2 * np.pi)),
            ))
        tones.append(stack)
    return tones


def activity_recording(
    dataset_id: str,
    trial_id: str,
    subject: SubjectInfo,
    label: str,
    freq_hz: float,
    amplitude: float,
    duration_s: float = 10.0,
    rate_hz: float = CANONICAL_FREQ_HZ,
    noise: float = 0.0,
    seed: int = 0,
) -> CanonicalRecording:
    """One already-canonical trial: a single-tone activity at the target
    rate in m/s², gravity-free. Goes straight into profile/classifier tests
    without touching the ingest pipeline."""
    rng = np.random.default_rng(seed)
    n = int(round(duration_s * rate_hz))
    t = np.arange(n) / rate_hz
    phases = rng.uniform(0, 2 * np.pi, size=3)
    gains = np.array([1.0, 0.7, 0.4]) * amplitude
    values = np.stack([
        g * np.sin(2 * np.pi * freq_hz * t + p)
        for g, p in zip(gains, phases)
    ], axis=1)
    if noise > 0:
        values = values + rng.normal(0.0, noise, size=values.shape)
    stream = SensorStream(
        kind=SensorKind.ACCELEROMETER,
        unit=UnitKind.METERS_PER_SECOND_SQUARED,
        t=t,
        values=values,
        declared_freq=rate_hz,
        gravity_included=False,
    )
    return CanonicalRecording(
        dataset_id=dataset_id,
        trial_id=trial_id,
        subject=subject,
        label=label,
        streams={SensorKind.ACCELEROMETER: stream},
    )


def make_corpus(
    dataset_id: str,
    classes: dict[str, tuple[float, float]],
    subjects: int = 4,
    trials_per_subject: int = 2,
    duration_s: float = 10.0,
    rate_hz: float = CANONICAL_FREQ_HZ,
    noise: float = 0.15,
    seed: int = 0,
) -> list[CanonicalRecording]:
    """A labeled corpus of canonical trials.

    classes maps label -> (dominant frequency Hz, amplitude m/s²). Each
    subject perturbs frequency and amplitude by a few percent so that
    subject-wise train/test splits are meaningful but classes stay apart.
    """
    rng = np.random.default_rng(seed)
    recordings = []
    for s in range(1, subjects + 1):
        subject = SubjectInfo(subject_id=f"s{s:02d}",
                              age=20.0 + 2.0 * s,
                              sex="f" if s % 2 else "m")
        f_jitter = 1.0 + rng.uniform(-0.03, 0.03)
        a_jitter = 1.0 + rng.uniform(-0.05, 0.05)
        for label, (freq, amp) in sorted(classes.items()):
            for k in range(1, trials_per_subject + 1):
                recordings.append(activity_recording(
                    dataset_id=dataset_id,
                    trial_id=f"{subject.subject_id}-{label.replace(' ', '_')}"
                             f"-{k:02d}",
                    subject=subject,
                    label=label,
                    freq_hz=freq * f_jitter,
                    amplitude=amp * a_jitter,
                    duration_s=duration_s,
                    rate_hz=rate_hz,
                    noise=noise,
                    seed=int(rng.integers(0, 2**31)),
                ))
    return recordings


# --- raw CSV emitters ---------------------------------------------------
#
# Two deliberately different file layouts so ingest is exercised on both:
#   A: comma, header row, timestamps in milliseconds, values in g with
#      gravity on z, label and subject encoded in the filename.
#   B: semicolon, no header, timestamps in seconds, values in m/s² already
#      gravity-free, label and subject as trailing columns.

DRIVER_A_YAML = """\
name: layout-a
files: ["**/*.csv"]
delimiter: comma
header: true
timestamp:
  column: t_ms
  unit: milliseconds
sensors:
  accelerometer:
    x: ax
    y: ay
    z: az
    unit: g
label:
  filename_pattern: "(?P<subject>s[0-9]+)_(?P<label>[a-z]+)_[0-9]+\\\\.csv"
subject:
  filename_pattern: "(?P<subject>s[0-9]+)_[a-z]+_[0-9]+\\\\.csv"
frequency_hz: 100
gravity_included: true
"""

DRIVER_B_YAML = """\
name: layout-b
files: ["*.txt"]
delimiter: semicolon
header: false
timestamp:
  column: 0
  unit: seconds
sensors:
  accelerometer:
    x: 1
    y: 2
    z: 3
    unit: m/s^2
label:
  column: 4
subject:
  column: 5
frequency_hz: 25
gravity_included: false
"""


def _fmt_rows(columns: list[np.ndarray], delimiter: str,
              extra: list[str] | None = None) -> str:
    lines = []
    n = columns[0].size
    for i in range(n):
        parts = ["%.9g" % c[i] for c in columns]
        if extra:
            parts.extend(extra)
        lines.append(delimiter.join(parts))
    return "\n".join(lines) + "\n"


def twin_datasets(
    dir_a: str | Path,
    dir_b: str | Path,
    duration_s: float = 20.0,
    seed: int = 7,
    label: str = "motion",
    subject: str = "s01",
) -> tuple[str, str]:
    """Emit one continuous motion as two raw datasets.

    Dataset A samples it at 100 Hz in g with gravity on the z axis; dataset
    B samples the gravity-free signal at 25 Hz in m/s². After import and
    homogenization the two must agree up to interpolation error.

    Returns the two driver YAML documents.
    """
    tones = band_limited_tones(seed)
    gravity = np.array([0.0, 0.0, STANDARD_GRAVITY])

    dir_a = Path(dir_a)
    dir_a.mkdir(parents=True, exist_ok=True)
    n_a = int(round(duration_s * 100.0))
    t_a = np.arange(n_a) / 100.0
    sig_a = (evaluate_tones(tones, t_a) + gravity) / STANDARD_GRAVITY
    body = "t_ms,ax,ay,az\n" + _fmt_rows(
        [t_a * 1000.0, sig_a[:, 0], sig_a[:, 1], sig_a[:, 2]], ",")
    (dir_a / f"{subject}_{label}_001.csv").write_text(body, encoding="utf-8")

    dir_b = Path(dir_b)
    dir_b.mkdir(parents=True, exist_ok=True)
    n_b = int(round(duration_s * 25.0))
    t_b = np.arange(n_b) / 25.0
    sig_b = evaluate_tones(tones, t_b)
    body = _fmt_rows([t_b, sig_b[:, 0], sig_b[:, 1], sig_b[:, 2]], ";",
                     extra=[label, subject])
    (dir_b / "trial1.txt").write_text(body, encoding="utf-8")

    return DRIVER_A_YAML, DRIVER_B_YAML
