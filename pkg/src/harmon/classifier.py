"""Nearest-centroid activity classification over the 21-feature windows.

A deliberately simple baseline: each canonical label gets one centroid, the
mean of its training windows' z-score-normalized feature vectors. A raw
stream is homogenized with the model's own pipeline snapshot, windowed,
and each window votes for its nearest centroid; the majority wins the
recording.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from . import signals
from .canonical import CanonicalRecording, SensorKind, SensorStream
from .config import PipelineConfig
from .errors import (
    EmptyResult,
    InsufficientClasses,
    InsufficientWindows,
    SeriesTooShort,
    StreamTooShort,
    TooFewSamples,
)
from .features import (
    FEATURE_NAMES,
    FeatureNormalization,
    WindowSpec,
    extract_features,
    windows,
)

__all__ = ["CentroidModel", "Prediction", "train", "classify"]


@dataclass(frozen=True)
class Prediction:
    label: str
    votes: dict[str, int]
    confidence: float

    def to_dict(self) -> dict:
        return {"label": self.label, "votes": dict(self.votes),
                "confidence": self.confidence}


@dataclass
class CentroidModel:
    """Per-label centroids in normalized feature space plus everything
    needed to reproduce the preprocessing at prediction time."""

    model_id: str
    labels: tuple[str, ...]
    centroids: np.ndarray            # (n_labels, 21), normalized space
    norm_mean: np.ndarray            # (21,)
    norm_std: np.ndarray             # (21,)
    window: WindowSpec
    config: PipelineConfig
    query: dict | None = None
    training_windows: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.labels) < 2:
            raise InsufficientClasses("a model needs at least two labels")
        if not (np.all(np.isfinite(self.centroids))
                and np.all(np.isfinite(self.norm_mean))
                and np.all(np.isfinite(self.norm_std))):
            raise ValueError("model parameters must be finite")

    @property
    def normalization(self) -> FeatureNormalization:
        norm = FeatureNormalization()
        norm.mean = self.norm_mean
        norm.std = self.norm_std
        return norm

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "labels": list(self.labels),
            "centroids": self.centroids.tolist(),
            "norm_mean": self.norm_mean.tolist(),
            "norm_std": self.norm_std.tolist(),
            "window": self.window.to_dict(),
            "config": self.config.to_dict(),
            "query": self.query,
            "training_windows": dict(self.training_windows),
            "feature_names": list(FEATURE_NAMES),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CentroidModel":
        return cls(
            model_id=d["model_id"],
            labels=tuple(d["labels"]),
            centroids=np.asarray(d["centroids"], dtype=np.float64),
            norm_mean=np.asarray(d["norm_mean"], dtype=np.float64),
            norm_std=np.asarray(d["norm_std"], dtype=np.float64),
            window=WindowSpec.from_dict(d["window"]),
            config=PipelineConfig.from_dict(d["config"]),
            query=d.get("query"),
            training_windows=dict(d.get("training_windows", {})),
        )


def _window_vectors(
    rec: CanonicalRecording, spec: WindowSpec, rate: float
) -> np.ndarray:
    """Feature vectors of every accelerometer-magnitude window, (k, 21)."""
    stream = rec.streams.get(SensorKind.ACCELEROMETER)
    if stream is None:
        return np.empty((0, len(FEATURE_NAMES)))
    series = signals.magnitude(stream)
    frames = windows(series, spec)
    if not len(frames):
        return np.empty((0, len(FEATURE_NAMES)))
    return np.stack([np.asarray(extract_features(f, rate), dtype=np.float64)
                     for f in frames])


def train(
    recordings: list[CanonicalRecording],
    window: WindowSpec = WindowSpec(),
    config: PipelineConfig = PipelineConfig(),
    query: dict | None = None,
) -> CentroidModel:
    """Fit centroids from homogenized recordings.

    Raises InsufficientClasses with fewer than two labels and
    InsufficientWindows naming any label whose recordings are all shorter
    than one window.
    """
    by_label: dict[str, list[np.ndarray]] = {}
    for rec in sorted(recordings, key=lambda r: (r.dataset_id, r.trial_id)):
        by_label.setdefault(rec.label, []).append(
            _window_vectors(rec, window, config.target_freq))

    if len(by_label) < 2:
        raise InsufficientClasses(
            f"training needs >= 2 labels, got {sorted(by_label)}")

    stacked: dict[str, np.ndarray] = {}
    for label in sorted(by_label):
        matrix = np.vstack(by_label[label])
        if matrix.shape[0] == 0:
            raise InsufficientWindows(label)
        stacked[label] = matrix

    norm = FeatureNormalization().fit(np.vstack(list(stacked.values())))
    labels = tuple(sorted(stacked))
    centroids = np.stack([
        norm.transform(stacked[label]).mean(axis=0) for label in labels])

    payload = {
        "labels": list(labels),
        "centroids": centroids.tolist(),
        "norm_mean": norm.mean.tolist(),
        "norm_std": norm.std.tolist(),
        "window": window.to_dict(),
        "config": config.to_dict(),
    }
    blob = json.dumps(payload, sort_keys=True).encode()
    model_id = hashlib.sha256(blob).hexdigest()[:12]

    return CentroidModel(
        model_id=model_id,
        labels=labels,
        centroids=centroids,
        norm_mean=norm.mean,
        norm_std=norm.std,
        window=window,
        config=config,
        query=query,
        training_windows={k: int(v.shape[0]) for k, v in stacked.items()},
    )


def nearest_centroid(model: CentroidModel,
                     vectors: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(assignment indices, full distance matrix) for normalized vectors."""
    diff = vectors[:, None, :] - model.centroids[None, :, :]
    distances = np.sqrt(np.sum(diff * diff, axis=2))
    return distances.argmin(axis=1), distances


def classify(
    model: CentroidModel,
    stream: SensorStream,
) -> Prediction:
    """Predict the activity of one raw accelerometer stream.

    The stream is homogenized with the model's pipeline snapshot, so callers
    only declare what they know about it (unit, frequency, gravity flag) on
    the stream itself. Ties in the window vote go to the label with the
    smaller mean distance across all windows.
    """
    try:
        canonical = signals.homogenize(stream, config=model.config)
    except (EmptyResult, TooFewSamples, SeriesTooShort) as exc:
        raise StreamTooShort(str(exc)) from exc

    series = signals.magnitude(canonical)
    frames = windows(series, model.window)
    if not len(frames):
        raise StreamTooShort(
            f"{series.size} canonical samples < one {model.window.length}-"
            "sample window")

    norm = model.normalization
    vectors = np.stack([
        norm.transform(np.asarray(extract_features(
            f, model.config.target_freq), dtype=np.float64))
        for f in frames])
    assigned, distances = nearest_centroid(model, vectors)

    votes = {label: 0 for label in model.labels}
    for idx in assigned:
        votes[model.labels[idx]] += 1
    best = max(votes.values())
    tied = [i for i, label in enumerate(model.labels)
            if votes[label] == best]
    if len(tied) > 1:
        mean_dist = distances[:, tied].mean(axis=0)
        winner = model.labels[tied[int(np.argmin(mean_dist))]]
    else:
        winner = model.labels[tied[0]]

    return Prediction(
        label=winner,
        votes={k: v for k, v in votes.items() if v},
        confidence=best / len(frames),
    )
