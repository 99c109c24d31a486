"""File-backed catalog: raw uploads, staged corpora, drivers, vocabulary,
models, queries, and the external export format.

Everything lives in a plain directory tree so the store is inspectable and
diffable:

    <root>/
      vocabulary.json
      drivers/<driver_id>.yaml
      models/<model_id>.json
      datasets/<dataset_id>/
        entry.json          current stage, per-stage directory names, config
        raw/                the uploaded bytes, verbatim
        imported-v1/        manifest.json + trials/<dataset>/<trial>/<sensor>.csv
        homogenized-v1/
        merged-v1/

Stage directories are immutable once written: a writer builds the next
version under a temporary name, renames it into place, then flips
entry.json with an atomic replace. Readers resolve entry.json first, so
they see either the old state or the new one, never a mix. Per-dataset
writes are serialized with a file lock.
"""

from __future__ import annotations

import hashlib
import json
import os
import shutil
import zipfile
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import IntEnum
from pathlib import Path

import numpy as np
from filelock import FileLock

from .canonical import (
    CanonicalRecording,
    DatasetManifest,
    SensorKind,
    SensorStream,
    SubjectInfo,
    parse_sensor_kind,
    parse_unit,
    validate_recording,
)
from .errors import (
    EmptyDataset,
    IoFailure,
    MissingStage,
    StageRegression,
    UnknownDataset,
    UnknownDriver,
    UnknownLabelInQuery,
    UnknownModel,
    UnreadablePath,
    ValidationFailed,
)
from .ingest import DriverSpec, driver_content_id, parse_driver_spec

__all__ = [
    "Stage",
    "CatalogEntry",
    "QuerySpec",
    "Catalog",
    "export_recordings",
    "read_export",
]

_FLOAT_FMT = "%.9g"
EXPORT_FORMAT = "export-v1"


class Stage(IntEnum):
    RAW = 0
    IMPORTED = 1
    HOMOGENIZED = 2
    MERGED = 3

    @property
    def dirbase(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, name: str) -> "Stage":
        try:
            return cls[name.upper()]
        except KeyError:
            raise ValueError(f"unknown stage {name!r}")


@dataclass
class CatalogEntry:
    dataset_id: str
    name: str
    stage: Stage
    manifest: DatasetManifest | None = None
    created_at: str = ""
    config: dict | None = None
    stages: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class QuerySpec:
    """Conjunctive filters over the merged corpus; empty means everything."""

    activities: frozenset[str] | None = None
    datasets: frozenset[str] | None = None
    sensors: frozenset[SensorKind] | None = None
    sex: str | None = None
    age_min: float | None = None
    age_max: float | None = None
    min_duration_s: float | None = None

    def matches(self, rec: CanonicalRecording) -> bool:
        if self.activities is not None and rec.label not in self.activities:
            return False
        if self.datasets is not None and rec.dataset_id not in self.datasets:
            return False
        if self.sensors is not None \
                and not self.sensors <= set(rec.streams):
            return False
        if self.sex is not None and rec.subject.sex != self.sex:
            return False
        if self.age_min is not None:
            if rec.subject.age is None or rec.subject.age < self.age_min:
                return False
        if self.age_max is not None:
            if rec.subject.age is None or rec.subject.age > self.age_max:
                return False
        if self.min_duration_s is not None \
                and rec.duration_s < self.min_duration_s:
            return False
        return True

    def to_dict(self) -> dict:
        return {
            "activities": sorted(self.activities)
            if self.activities is not None else None,
            "datasets": sorted(self.datasets)
            if self.datasets is not None else None,
            "sensors": sorted(k.value for k in self.sensors)
            if self.sensors is not None else None,
            "sex": self.sex,
            "age_min": self.age_min,
            "age_max": self.age_max,
            "min_duration_s": self.min_duration_s,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "QuerySpec":
        def fset(key, conv=lambda x: x):
            v = d.get(key)
            return frozenset(conv(x) for x in v) if v is not None else None

        return cls(
            activities=fset("activities"),
            datasets=fset("datasets"),
            sensors=fset("sensors", parse_sensor_kind),
            sex=d.get("sex"),
            age_min=d.get("age_min"),
            age_max=d.get("age_max"),
            min_duration_s=d.get("min_duration_s"),
        )


# --- json codecs -------------------------------------------------------------

def _subject_to_dict(s: SubjectInfo) -> dict:
    d = {"subject_id": s.subject_id}
    for key in ("age", "sex", "height_cm", "weight_kg", "device_position"):
        value = getattr(s, key)
        if value is not None:
            d[key] = value
    return d


def _subject_from_dict(d: dict) -> SubjectInfo:
    return SubjectInfo(**d)


def _manifest_to_dict(m: DatasetManifest) -> dict:
    return {
        "dataset_id": m.dataset_id,
        "name": m.name,
        "source_labels": sorted(m.source_labels),
        "sensors": sorted(k.value for k in m.sensors),
        "declared_freq": {k.value: v for k, v in sorted(
            m.declared_freq.items(), key=lambda kv: kv[0].value)},
        "declared_units": {k.value: u.text for k, u in sorted(
            m.declared_units.items(), key=lambda kv: kv[0].value)},
        "gravity_included": m.gravity_included,
        "subject_count": m.subject_count,
        "trial_count": m.trial_count,
    }


def _manifest_from_dict(d: dict) -> DatasetManifest:
    return DatasetManifest(
        dataset_id=d["dataset_id"],
        name=d["name"],
        source_labels=set(d.get("source_labels", [])),
        sensors={parse_sensor_kind(k) for k in d.get("sensors", [])},
        declared_freq={parse_sensor_kind(k): float(v)
                       for k, v in d.get("declared_freq", {}).items()},
        declared_units={parse_sensor_kind(k): parse_unit(u)
                        for k, u in d.get("declared_units", {}).items()},
        gravity_included=d.get("gravity_included"),
        subject_count=int(d.get("subject_count", 0)),
        trial_count=int(d.get("trial_count", 0)),
    )


def _atomic_write_json(path: Path, payload: dict) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                   encoding="utf-8")
    os.replace(tmp, path)


# --- trial file io -----------------------------------------------------------

def _write_stream_csv(path: Path, stream: SensorStream) -> None:
    lines = ["t,x,y,z"]
    v = stream.values
    for i in range(stream.n_samples):
        lines.append(",".join(_FLOAT_FMT % x
                              for x in (stream.t[i], v[i, 0], v[i, 1],
                                        v[i, 2])))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _read_stream_csv(path: Path) -> tuple[np.ndarray, np.ndarray]:
    raw = np.loadtxt(path, delimiter=",", skiprows=1, dtype=np.float64,
                     ndmin=2)
    return raw[:, 0].copy(), raw[:, 1:4].copy()


def _write_recordings(dest: Path, recordings: list[CanonicalRecording],
                      extra: dict) -> dict:
    """Write the shared trial layout under dest and return its manifest."""
    trials = []
    for rec in sorted(recordings,
                      key=lambda r: (r.dataset_id, r.trial_id)):
        trial_dir = dest / "trials" / rec.dataset_id / rec.trial_id
        trial_dir.mkdir(parents=True, exist_ok=True)
        files = []
        for kind in sorted(rec.streams, key=lambda k: k.value):
            stream = rec.streams[kind]
            rel = f"trials/{rec.dataset_id}/{rec.trial_id}/{kind.value}.csv"
            _write_stream_csv(dest / rel, stream)
            files.append({
                "path": rel,
                "sensor": kind.value,
                "unit": stream.unit.text if stream.unit else None,
                "frequency_hz": stream.declared_freq,
                "gravity_included": stream.gravity_included,
                "samples": stream.n_samples,
            })
        trials.append({
            "dataset_id": rec.dataset_id,
            "trial_id": rec.trial_id,
            "label": rec.label,
            "subject": _subject_to_dict(rec.subject),
            "files": files,
        })
    manifest = dict(extra)
    manifest["trials"] = trials
    _atomic_write_json(dest / "manifest.json", manifest)
    return manifest


def _read_recordings(src: Path) -> tuple[dict, list[CanonicalRecording]]:
    manifest_path = src / "manifest.json"
    if not manifest_path.is_file():
        raise MissingStage(f"no manifest under {src}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    recordings = []
    for trial in manifest.get("trials", []):
        streams = {}
        for entry in trial["files"]:
            kind = parse_sensor_kind(entry["sensor"])
            t, values = _read_stream_csv(src / entry["path"])
            streams[kind] = SensorStream(
                kind=kind,
                unit=parse_unit(entry["unit"]) if entry.get("unit") else None,
                t=t,
                values=values,
                declared_freq=entry.get("frequency_hz"),
                gravity_included=entry.get("gravity_included"),
            )
        recordings.append(CanonicalRecording(
            dataset_id=trial["dataset_id"],
            trial_id=trial["trial_id"],
            subject=_subject_from_dict(trial["subject"]),
            label=trial["label"],
            streams=streams,
        ))
    return manifest, recordings


# --- the catalog ---------------------------------------------------------

class Catalog:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        for sub in ("datasets", "drivers", "models"):
            (self.root / sub).mkdir(parents=True, exist_ok=True)
        vocab = self.root / "vocabulary.json"
        if not vocab.exists():
            _atomic_write_json(vocab, {"labels": []})

    # -- locking

    def _lock(self, dataset_id: str) -> FileLock:
        d = self.root / "datasets" / dataset_id
        d.mkdir(parents=True, exist_ok=True)
        return FileLock(str(d / ".lock"))

    def _vocab_lock(self) -> FileLock:
        return FileLock(str(self.root / ".vocabulary.lock"))

    # -- datasets

    def register_dataset(self, path: str | Path, name: str) -> str:
        """Copy raw bytes into the store under a content-addressed id.

        Accepts a directory or a zip archive; registering identical content
        twice returns the same id without rewriting anything.
        """
        src = Path(path)
        if not src.exists():
            raise UnreadablePath(str(src))
        files = self._collect_source(src)
        if not files:
            raise EmptyDataset(f"nothing to register under {src}")

        digest = hashlib.sha256()
        for rel, data in files:
            digest.update(rel.encode())
            digest.update(b"\x00")
            digest.update(data)
            digest.update(b"\x00")
        dataset_id = digest.hexdigest()[:16]

        dataset_dir = self.root / "datasets" / dataset_id
        with self._lock(dataset_id):
            if (dataset_dir / "entry.json").exists():
                return dataset_id
            raw = dataset_dir / "raw"
            if raw.exists():
                shutil.rmtree(raw)
            for rel, data in files:
                target = raw / rel
                target.parent.mkdir(parents=True, exist_ok=True)
                target.write_bytes(data)
            self._write_entry(CatalogEntry(
                dataset_id=dataset_id,
                name=name,
                stage=Stage.RAW,
                created_at=_now(),
            ))
        return dataset_id

    @staticmethod
    def _collect_source(src: Path) -> list[tuple[str, bytes]]:
        files = []
        if src.is_dir():
            for p in sorted(src.rglob("*")):
                if p.is_file():
                    rel = p.relative_to(src).as_posix()
                    try:
                        files.append((rel, p.read_bytes()))
                    except OSError as exc:
                        raise UnreadablePath(f"{p}: {exc}")
        elif zipfile.is_zipfile(src):
            with zipfile.ZipFile(src) as zf:
                for info in sorted(zf.infolist(), key=lambda i: i.filename):
                    if not info.is_dir():
                        files.append((info.filename, zf.read(info)))
        elif src.is_file():
            files.append((src.name, src.read_bytes()))
        else:
            raise UnreadablePath(str(src))
        return files

    def dataset_ids(self) -> list[str]:
        base = self.root / "datasets"
        return sorted(p.name for p in base.iterdir()
                      if (p / "entry.json").is_file())

    def entry(self, dataset_id: str) -> CatalogEntry:
        path = self.root / "datasets" / dataset_id / "entry.json"
        if not path.is_file():
            raise UnknownDataset(dataset_id)
        d = json.loads(path.read_text(encoding="utf-8"))
        return CatalogEntry(
            dataset_id=d["dataset_id"],
            name=d["name"],
            stage=Stage.parse(d["stage"]),
            manifest=_manifest_from_dict(d["manifest"])
            if d.get("manifest") else None,
            created_at=d.get("created_at", ""),
            config=d.get("config"),
            stages=dict(d.get("stages", {})),
        )

    def _write_entry(self, entry: CatalogEntry) -> None:
        payload = {
            "dataset_id": entry.dataset_id,
            "name": entry.name,
            "stage": entry.stage.name.lower(),
            "manifest": _manifest_to_dict(entry.manifest)
            if entry.manifest else None,
            "created_at": entry.created_at or _now(),
            "config": entry.config,
            "stages": entry.stages,
        }
        _atomic_write_json(
            self.root / "datasets" / entry.dataset_id / "entry.json", payload)

    def raw_dir(self, dataset_id: str) -> Path:
        d = self.root / "datasets" / dataset_id / "raw"
        if not d.is_dir():
            raise UnknownDataset(dataset_id)
        return d

    def persist(self, entry: CatalogEntry,
                recordings: list[CanonicalRecording]) -> None:
        """Write one stage atomically: all validation happens before the
        first byte lands, and readers flip from old to new state on the
        single entry.json replace."""
        if entry.stage >= Stage.HOMOGENIZED:
            if not entry.config:
                raise ValidationFailed(
                    "config snapshot required from the homogenized stage on",
                    [])
            target = float(entry.config.get("target_freq", 0) or 0)
            issues = []
            for rec in recordings:
                report = validate_recording(rec, target_freq=target)
                issues.extend(
                    f"{rec.trial_id}: {issue}" for issue in report)
            if issues:
                raise ValidationFailed(
                    f"{len(issues)} validation issue(s)", issues)

        with self._lock(entry.dataset_id):
            current = self.entry(entry.dataset_id)
            if entry.stage < current.stage:
                raise StageRegression(
                    f"{entry.dataset_id}: {current.stage.name} -> "
                    f"{entry.stage.name}")

            base = self.root / "datasets" / entry.dataset_id
            version = 1 + max(
                (int(p.name.rsplit("-v", 1)[1])
                 for p in base.glob(f"{entry.stage.dirbase}-v*")
                 if p.name.rsplit("-v", 1)[1].isdigit()),
                default=0)
            dirname = f"{entry.stage.dirbase}-v{version}"
            tmp = base / f".tmp-{dirname}"
            if tmp.exists():
                shutil.rmtree(tmp)
            tmp.mkdir(parents=True)
            extra = {
                "dataset_id": entry.dataset_id,
                "stage": entry.stage.name.lower(),
                "manifest": _manifest_to_dict(entry.manifest)
                if entry.manifest else None,
                "config": entry.config,
            }
            _write_recordings(tmp, recordings, extra)
            os.rename(tmp, base / dirname)

            stages = dict(current.stages)
            old = stages.get(entry.stage.dirbase)
            stages[entry.stage.dirbase] = dirname
            merged_entry = replace(
                entry,
                name=entry.name or current.name,
                created_at=current.created_at,
                stages=stages,
                stage=max(entry.stage, current.stage),
            )
            self._write_entry(merged_entry)
            if old and old != dirname and (base / old).exists():
                shutil.rmtree(base / old, ignore_errors=True)

    def stage_dir(self, dataset_id: str, stage: Stage) -> Path:
        entry = self.entry(dataset_id)
        dirname = entry.stages.get(stage.dirbase)
        if not dirname:
            raise MissingStage(
                f"{dataset_id} has no {stage.name.lower()} stage")
        return self.root / "datasets" / dataset_id / dirname

    def load(self, dataset_id: str,
             stage: Stage) -> list[CanonicalRecording]:
        _, recordings = _read_recordings(self.stage_dir(dataset_id, stage))
        return recordings

    def stage_manifest(self, dataset_id: str, stage: Stage) -> dict:
        manifest, _ = _read_recordings(self.stage_dir(dataset_id, stage))
        return manifest

    def manifest(self, dataset_id: str) -> DatasetManifest:
        entry = self.entry(dataset_id)
        if entry.manifest is None:
            raise MissingStage(f"{dataset_id} has not been imported")
        return entry.manifest

    # -- drivers

    def register_driver(self, text: str) -> str:
        spec = parse_driver_spec(text)
        driver_id = driver_content_id(spec)
        path = self.root / "drivers" / f"{driver_id}.yaml"
        if not path.exists():
            path.write_text(text, encoding="utf-8")
        return driver_id

    def driver(self, driver_id: str) -> DriverSpec:
        path = self.root / "drivers" / f"{driver_id}.yaml"
        if not path.is_file():
            raise UnknownDriver(driver_id)
        return parse_driver_spec(path.read_text(encoding="utf-8"))

    def driver_ids(self) -> list[str]:
        return sorted(p.stem for p in
                      (self.root / "drivers").glob("*.yaml"))

    # -- vocabulary

    def vocabulary(self) -> list[str]:
        d = json.loads(
            (self.root / "vocabulary.json").read_text(encoding="utf-8"))
        return sorted(d.get("labels", []))

    def add_vocabulary(self, labels) -> list[str]:
        with self._vocab_lock():
            current = set(self.vocabulary())
            current.update(labels)
            _atomic_write_json(self.root / "vocabulary.json",
                               {"labels": sorted(current)})
        return sorted(current)

    # -- queries over the merged corpus

    def merged_recordings(self) -> list[CanonicalRecording]:
        out = []
        for dataset_id in self.dataset_ids():
            entry = self.entry(dataset_id)
            if "merged" in entry.stages:
                out.extend(self.load(dataset_id, Stage.MERGED))
        out.sort(key=lambda r: (r.dataset_id, r.subject.subject_id,
                                r.trial_id))
        return out

    def query(self, spec: QuerySpec) -> list[CanonicalRecording]:
        if spec.activities is not None:
            unknown = set(spec.activities) - set(self.vocabulary())
            if unknown:
                raise UnknownLabelInQuery(
                    "not in the canonical vocabulary: "
                    + ", ".join(sorted(unknown)))
        return [r for r in self.merged_recordings() if spec.matches(r)]

    # -- models

    def save_model(self, model_id: str, payload: dict) -> None:
        _atomic_write_json(self.root / "models" / f"{model_id}.json",
                           payload)

    def load_model(self, model_id: str) -> dict:
        path = self.root / "models" / f"{model_id}.json"
        if not path.is_file():
            raise UnknownModel(model_id)
        return json.loads(path.read_text(encoding="utf-8"))

    def model_ids(self) -> list[str]:
        return sorted(p.stem for p in (self.root / "models").glob("*.json"))


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


# --- external export ----------------------------------------------------

def export_recordings(recordings: list[CanonicalRecording],
                      destination: str | Path) -> dict:
    """Write recordings in the external format; returns the manifest."""
    dest = Path(destination)
    try:
        dest.mkdir(parents=True, exist_ok=True)
        probe = dest / ".write-probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise IoFailure(f"{dest}: {exc}") from exc
    extra = {"format": EXPORT_FORMAT, "exported_at": _now(),
             "trial_count": len(recordings)}
    try:
        return _write_recordings(dest, recordings, extra)
    except OSError as exc:
        raise IoFailure(f"{dest}: {exc}") from exc


def read_export(path: str | Path) -> list[CanonicalRecording]:
    """Re-import a directory written by export_recordings."""
    src = Path(path)
    if not src.is_dir():
        raise UnreadablePath(str(src))
    _, recordings = _read_recordings(src)
    return recordings
