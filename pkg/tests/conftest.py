import dataclasses

import numpy as np
import pytest

from harmon.canonical import (
    CanonicalRecording,
    DatasetManifest,
    SensorKind,
    SensorStream,
    SubjectInfo,
    UnitKind,
)
from harmon.catalog import Catalog, CatalogEntry, Stage
from harmon.synth import make_corpus


CLASSES = {
    "walking": (1.2, 2.0),
    "running": (2.6, 5.0),
    "resting": (0.3, 0.4),
}


def accel_stream(values, t=None, freq=50.0, unit=UnitKind.METERS_PER_SECOND_SQUARED,
                 gravity_included=False, declared_freq="auto"):
    """Build an accelerometer stream from an (n, 3) or (n,) array."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        values = np.stack([values, values, values], axis=1)
    if t is None:
        t = np.arange(values.shape[0]) / freq
    if declared_freq == "auto":
        declared_freq = freq
    return SensorStream(
        kind=SensorKind.ACCELEROMETER,
        unit=unit,
        t=np.asarray(t, dtype=np.float64),
        values=values,
        declared_freq=declared_freq,
        gravity_included=gravity_included,
    )


def make_recording(dataset_id="ds", trial_id="t1", label="walking",
                   subject=None, **stream_kwargs):
    stream = accel_stream(**stream_kwargs) if stream_kwargs else accel_stream(
        np.sin(2 * np.pi * 1.0 * np.arange(500) / 50.0))
    return CanonicalRecording(
        dataset_id=dataset_id,
        trial_id=trial_id,
        subject=subject or SubjectInfo(subject_id="s01"),
        label=label,
        streams={SensorKind.ACCELEROMETER: stream},
    )


@pytest.fixture
def catalog(tmp_path):
    return Catalog(tmp_path / "catalog")


def seed_dataset(catalog, tmp_path, name="demo", classes=CLASSES,
                 subjects=4, trials_per_subject=2, seed=3, labels_map=None,
                 harmonized=True, duration_s=10.0):
    """Register a synthetic corpus and persist it at the imported (and
    optionally homogenized) stage; returns the dataset id."""
    src = tmp_path / f"src-{name}"
    src.mkdir(exist_ok=True)
    (src / "placeholder.txt").write_text(name)
    dataset_id = catalog.register_dataset(src, name)

    recordings = make_corpus(dataset_id, classes, subjects=subjects,
                             trials_per_subject=trials_per_subject,
                             seed=seed, duration_s=duration_s)
    if labels_map:
        recordings = [dataclasses.replace(r, label=labels_map[r.label])
                      for r in recordings]
    manifest = DatasetManifest(
        dataset_id=dataset_id,
        name=name,
        source_labels={r.label for r in recordings},
        sensors={SensorKind.ACCELEROMETER},
        declared_freq={SensorKind.ACCELEROMETER: 50.0},
        declared_units={
            SensorKind.ACCELEROMETER: UnitKind.METERS_PER_SECOND_SQUARED},
        gravity_included=False,
        subject_count=subjects,
        trial_count=len(recordings),
    )
    catalog.persist(
        CatalogEntry(dataset_id=dataset_id, name=name, stage=Stage.IMPORTED,
                     manifest=manifest),
        recordings)
    if harmonized:
        from harmon import pipeline
        pipeline.harmonize_dataset(catalog, dataset_id)
    return dataset_id


def merge_all_new(catalog, dataset_id, decided_by="tests"):
    """Merge a dataset by declaring every source label canonical as-is."""
    from harmon import pipeline
    from harmon.labels import MappingDecision

    manifest = catalog.manifest(dataset_id)
    decisions = [
        MappingDecision(dataset_id=dataset_id, source_label=label,
                        action="new", target=label, decided_by=decided_by)
        for label in sorted(manifest.source_labels)
    ]
    return pipeline.apply_decisions(catalog, dataset_id, decisions)
