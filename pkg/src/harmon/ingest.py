"""Dataset ingestion: declarative driver specs and the import pass.

A driver is a small YAML document describing how one dataset's files map
onto the canonical model: which files to read, the delimiter, where the
timestamp / axis columns live, where labels and subject ids come from, and
what units the numbers are in. Running a driver over a registered dataset
produces raw trials in the shared structure with original units and
frequency preserved; homogenization happens later.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path, PurePosixPath

import numpy as np
import yaml

from . import signals
from .canonical import (
    CanonicalRecording,
    DatasetManifest,
    SensorKind,
    SensorStream,
    SubjectInfo,
    UnitKind,
    parse_sensor_kind,
    parse_unit,
)
from .errors import (
    DriverDatasetMismatch,
    FrequencyTooLow,
    InvalidDriverSpec,
    JitterTooHigh,
    ParseFailure,
    TooFewSamples,
)

__all__ = [
    "DriverSpec",
    "SensorBinding",
    "ImportReport",
    "parse_driver_spec",
    "load_driver_spec",
    "driver_content_id",
    "run_import",
]

_DELIMITERS = {"comma": ",", "semicolon": ";", "tab": "\t",
               ",": ",", ";": ";", "\t": "\t"}

_TIMESTAMP_UNITS = {
    "seconds": 1.0, "s": 1.0,
    "milliseconds": 1e-3, "ms": 1e-3,
    "nanoseconds": 1e-9, "ns": 1e-9,
}

#: A trial breaks when consecutive timestamps are further apart than this
#: many nominal sample periods.
GAP_FACTOR = 10.0


@dataclass(frozen=True)
class SensorBinding:
    """Column bindings for one sensor: x/y/z plus the declared unit."""

    x: int | str
    y: int | str
    z: int | str
    unit: UnitKind


@dataclass(frozen=True)
class DriverSpec:
    name: str
    files: tuple[str, ...]
    delimiter: str
    header: bool
    sensors: dict[SensorKind, SensorBinding]
    # exactly one of (timestamp_column, rate_hz) is set
    timestamp_column: int | str | None
    timestamp_scale: float  # seconds per timestamp unit
    rate_hz: float | None
    label_column: int | str | None
    label_pattern: str | None
    label_sidecar: str | None
    subject_column: int | str | None
    subject_pattern: str | None
    frequency_hz: float | None
    gravity_included: bool | None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "files": list(self.files),
            "delimiter": self.delimiter,
            "header": self.header,
            "sensors": {
                kind.value: {"x": b.x, "y": b.y, "z": b.z,
                             "unit": b.unit.text}
                for kind, b in sorted(self.sensors.items(),
                                      key=lambda kv: kv[0].value)
            },
            "timestamp_column": self.timestamp_column,
            "timestamp_scale": self.timestamp_scale,
            "rate_hz": self.rate_hz,
            "label_column": self.label_column,
            "label_pattern": self.label_pattern,
            "label_sidecar": self.label_sidecar,
            "subject_column": self.subject_column,
            "subject_pattern": self.subject_pattern,
            "frequency_hz": self.frequency_hz,
            "gravity_included": self.gravity_included,
        }


def driver_content_id(spec: DriverSpec) -> str:
    """Deterministic id over the parsed spec content, so re-registering an
    identical driver yields the same id."""
    blob = json.dumps(spec.to_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _column(value, problems: list, where: str):
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        problems.append(f"{where}: column must be an index or header name")
        return None
    if isinstance(value, int) and value < 0:
        problems.append(f"{where}: column index must be >= 0")
        return None
    return value


def parse_driver_spec(doc: dict | str) -> DriverSpec:
    """Validate a driver document, collecting every problem found.

    Accepts the YAML text or the already-parsed mapping. Raises
    InvalidDriverSpec listing field-level diagnostics when anything is
    missing or malformed.
    """
    if isinstance(doc, str):
        try:
            doc = yaml.safe_load(doc)
        except yaml.YAMLError as exc:
            raise InvalidDriverSpec([f"unparseable document: {exc}"])
    if not isinstance(doc, dict):
        raise InvalidDriverSpec(["document must be a mapping"])

    problems: list[str] = []
    known = {"name", "files", "delimiter", "header", "sensors", "timestamp",
             "label", "subject", "frequency_hz", "gravity_included"}
    for key in doc:
        if key not in known:
            problems.append(f"unknown key {key!r}")

    name = doc.get("name", "")
    if not isinstance(name, str):
        problems.append("name: must be a string")
        name = ""

    raw_files = doc.get("files", [])
    if isinstance(raw_files, str):
        raw_files = [raw_files]
    files = tuple(f for f in raw_files if isinstance(f, str) and f)
    if not files:
        problems.append("files: at least one glob pattern required")

    delim_key = str(doc.get("delimiter", "comma"))
    delimiter = _DELIMITERS.get(delim_key)
    if delimiter is None:
        problems.append(
            f"delimiter: {delim_key!r} not one of comma/semicolon/tab")
        delimiter = ","

    header = doc.get("header", False)
    if not isinstance(header, bool):
        problems.append("header: must be true or false")
        header = False

    sensors: dict[SensorKind, SensorBinding] = {}
    raw_sensors = doc.get("sensors")
    if not isinstance(raw_sensors, dict) or not raw_sensors:
        problems.append("sensors: at least one sensor block required")
    else:
        for key, block in raw_sensors.items():
            try:
                kind = parse_sensor_kind(str(key))
            except ValueError:
                problems.append(f"sensors.{key}: unknown sensor kind")
                continue
            if not isinstance(block, dict):
                problems.append(f"sensors.{key}: must be a mapping")
                continue
            axes = {}
            for axis in ("x", "y", "z"):
                if axis not in block:
                    problems.append(f"sensors.{key}: {axis} binding missing")
                else:
                    axes[axis] = _column(block[axis], problems,
                                         f"sensors.{key}.{axis}")
            try:
                unit = parse_unit(str(block.get("unit", "")))
            except ValueError:
                problems.append(f"sensors.{key}: unit missing or unknown")
                unit = None
            if len(axes) == 3 and unit is not None:
                if unit.kind is not kind:
                    problems.append(
                        f"sensors.{key}: unit {unit.text!r} is not a "
                        f"{kind.value} unit")
                else:
                    sensors[kind] = SensorBinding(
                        x=axes["x"], y=axes["y"], z=axes["z"], unit=unit)

    ts = doc.get("timestamp")
    timestamp_column = None
    timestamp_scale = 1.0
    rate_hz = None
    if isinstance(ts, dict):
        if "column" in ts and "rate_hz" in ts:
            problems.append("timestamp: give either column or rate_hz")
        elif "column" in ts:
            timestamp_column = _column(ts["column"], problems,
                                       "timestamp.column")
            unit_key = str(ts.get("unit", "seconds"))
            if unit_key not in _TIMESTAMP_UNITS:
                problems.append(
                    f"timestamp.unit: {unit_key!r} not one of "
                    "seconds/milliseconds/nanoseconds")
            else:
                timestamp_scale = _TIMESTAMP_UNITS[unit_key]
        elif "rate_hz" in ts:
            try:
                rate_hz = float(ts["rate_hz"])
            except (TypeError, ValueError):
                rate_hz = 0.0
            if not rate_hz > 0:
                problems.append("timestamp.rate_hz: must be > 0")
                rate_hz = None
        else:
            problems.append("timestamp: needs column or rate_hz")
    else:
        problems.append("timestamp: block required (column or rate_hz)")

    label = doc.get("label")
    label_column = label_pattern = label_sidecar = None
    if isinstance(label, dict):
        forms = [k for k in ("column", "filename_pattern", "sidecar")
                 if k in label]
        if len(forms) != 1:
            problems.append(
                "label: exactly one of column/filename_pattern/sidecar")
        elif "column" in label:
            label_column = _column(label["column"], problems, "label.column")
        elif "filename_pattern" in label:
            label_pattern = _named_pattern(
                label["filename_pattern"], "label", problems)
        else:
            label_sidecar = str(label["sidecar"])
    else:
        problems.append("label: source block required")

    subject = doc.get("subject")
    subject_column = subject_pattern = None
    if isinstance(subject, dict):
        if "column" in subject:
            subject_column = _column(subject["column"], problems,
                                     "subject.column")
        elif "filename_pattern" in subject:
            subject_pattern = _named_pattern(
                subject["filename_pattern"], "subject", problems)
        else:
            problems.append("subject: needs column or filename_pattern")
    elif subject is not None:
        problems.append("subject: must be a mapping")

    frequency_hz = doc.get("frequency_hz")
    if frequency_hz is not None:
        try:
            frequency_hz = float(frequency_hz)
        except (TypeError, ValueError):
            frequency_hz = 0.0
        if not frequency_hz > 0:
            problems.append("frequency_hz: must be > 0")
            frequency_hz = None

    gravity_included = doc.get("gravity_included")
    if gravity_included is not None and not isinstance(gravity_included, bool):
        problems.append("gravity_included: must be true or false")
        gravity_included = None

    if rate_hz is not None and frequency_hz is not None \
            and rate_hz != frequency_hz:
        problems.append("timestamp.rate_hz and frequency_hz disagree")

    # Header-name bindings only make sense when a header row exists.
    if not header:
        named = [c for c in
                 [timestamp_column, label_column, subject_column]
                 + [ax for b in sensors.values() for ax in (b.x, b.y, b.z)]
                 if isinstance(c, str)]
        if named:
            problems.append(
                "header: false but named columns used: "
                + ", ".join(sorted(set(named))))

    if problems:
        raise InvalidDriverSpec(problems)

    return DriverSpec(
        name=name or "driver",
        files=files,
        delimiter=delimiter,
        header=header,
        sensors=sensors,
        timestamp_column=timestamp_column,
        timestamp_scale=timestamp_scale,
        rate_hz=rate_hz,
        label_column=label_column,
        label_pattern=label_pattern,
        label_sidecar=label_sidecar,
        subject_column=subject_column,
        subject_pattern=subject_pattern,
        frequency_hz=frequency_hz or rate_hz,
        gravity_included=gravity_included,
    )


def _named_pattern(value, group: str, problems: list) -> str | None:
    try:
        compiled = re.compile(str(value))
    except re.error as exc:
        problems.append(f"{group}.filename_pattern: bad regex ({exc})")
        return None
    if group not in compiled.groupindex:
        problems.append(
            f"{group}.filename_pattern: needs a (?P<{group}>...) group")
        return None
    return str(value)


def load_driver_spec(path: str | Path) -> DriverSpec:
    return parse_driver_spec(Path(path).read_text(encoding="utf-8"))


@dataclass
class ImportReport:
    dataset_id: str
    driver_id: str
    files_matched: int = 0
    rows_parsed: int = 0
    rows_imported: int = 0
    rows_skipped: dict[str, int] = field(default_factory=dict)
    trials_discovered: int = 0
    trials_imported: int = 0
    trials_skipped: int = 0
    frequency: dict[str, dict] = field(default_factory=dict)
    label_histogram: dict[str, int] = field(default_factory=dict)

    @property
    def skipped_rows(self) -> int:
        return sum(self.rows_skipped.values())

    def reconciles(self) -> bool:
        return (self.rows_imported + self.skipped_rows == self.rows_parsed
                and self.trials_imported + self.trials_skipped
                == self.trials_discovered)

    def to_dict(self) -> dict:
        return {
            "dataset_id": self.dataset_id,
            "driver_id": self.driver_id,
            "files_matched": self.files_matched,
            "rows_parsed": self.rows_parsed,
            "rows_imported": self.rows_imported,
            "rows_skipped": dict(self.rows_skipped),
            "trials_discovered": self.trials_discovered,
            "trials_imported": self.trials_imported,
            "trials_skipped": self.trials_skipped,
            "frequency": self.frequency,
            "label_histogram": dict(self.label_histogram),
        }


def _sanitize_label(text: str) -> str:
    return " ".join(text.split())


def _safe_id(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", text)


class _Resolver:
    """Maps column bindings to per-row field indices for one file."""

    def __init__(self, spec: DriverSpec, header_row: list[str] | None,
                 path: str):
        self._names = {}
        if header_row is not None:
            self._names = {name.strip(): i
                           for i, name in enumerate(header_row)}
        self._path = path

    def index(self, column: int | str, what: str) -> int:
        if isinstance(column, int):
            return column
        if column not in self._names:
            raise ParseFailure(
                f"{self._path}: header has no column {column!r} ({what})")
        return self._names[column]


def _row_value(fields: list[str], idx: int) -> str | None:
    if idx >= len(fields):
        return None
    return fields[idx].strip()


def run_import(
    dataset_root: str | Path,
    spec: DriverSpec,
    dataset_id: str,
    driver_id: str = "",
) -> tuple[list[CanonicalRecording], ImportReport, DatasetManifest]:
    """Run a driver over a dataset directory.

    Files are visited in sorted order and rows in file order, so the result
    is deterministic. Malformed rows are skipped and counted by reason;
    trials split whenever subject or label changes or the timestamp jumps
    by more than GAP_FACTOR nominal periods.
    """
    root = Path(dataset_root)
    matched: list[Path] = []
    seen = set()
    for pattern in spec.files:
        for p in sorted(root.glob(pattern)):
            if p.is_file() and p not in seen:
                seen.add(p)
                matched.append(p)
    matched.sort()
    if not matched:
        raise DriverDatasetMismatch(
            f"no files under {root} match {list(spec.files)}")

    report = ImportReport(dataset_id=dataset_id, driver_id=driver_id,
                          files_matched=len(matched))
    sidecar = _load_sidecar(root, spec) if spec.label_sidecar else None
    label_re = re.compile(spec.label_pattern) if spec.label_pattern else None
    subject_re = (re.compile(spec.subject_pattern)
                  if spec.subject_pattern else None)

    nominal_period = (1.0 / spec.frequency_hz) if spec.frequency_hz else None
    recordings: list[CanonicalRecording] = []
    estimates: list[float] = []

    for path in matched:
        rel = PurePosixPath(path.relative_to(root).as_posix())
        try:
            text = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            raise ParseFailure(f"{rel}: unreadable ({exc})") from exc

        lines = text.splitlines()
        header_row = None
        start = 0
        if spec.header:
            if not lines:
                raise ParseFailure(f"{rel}: empty file where header expected")
            header_row = lines[0].split(spec.delimiter)
            start = 1
        resolver = _Resolver(spec, header_row, str(rel))

        ts_idx = (resolver.index(spec.timestamp_column, "timestamp")
                  if spec.timestamp_column is not None else None)
        label_idx = (resolver.index(spec.label_column, "label")
                     if spec.label_column is not None else None)
        subj_idx = (resolver.index(spec.subject_column, "subject")
                    if spec.subject_column is not None else None)
        sensor_idx = {
            kind: (resolver.index(b.x, "x"), resolver.index(b.y, "y"),
                   resolver.index(b.z, "z"))
            for kind, b in spec.sensors.items()
        }

        file_label = _file_scoped(rel, label_re, "label", sidecar)
        file_subject = _file_scoped(rel, subject_re, "subject", None)

        segment_rows: list[tuple] = []   # (t, {kind: (x,y,z)})
        segment_key: tuple | None = None  # (subject, label)
        file_segments = 0

        def flush():
            nonlocal segment_rows, file_segments
            if segment_rows:
                report.trials_discovered += 1
                file_segments += 1
                rec = _build_recording(
                    spec, dataset_id, rel, file_segments, segment_key,
                    segment_rows, report, estimates)
                if rec is not None:
                    recordings.append(rec)
            segment_rows = []

        row_index = 0  # synthesized-timestamp counter, per segment
        for lineno, line in enumerate(lines[start:], start=start + 1):
            if not line.strip():
                continue
            report.rows_parsed += 1
            fields = line.split(spec.delimiter)

            label = file_label
            if label_idx is not None:
                label = _row_value(fields, label_idx)
            subject = file_subject
            if subj_idx is not None:
                subject = _row_value(fields, subj_idx)
            if label is None or label == "":
                report.rows_skipped["missing-label"] = \
                    report.rows_skipped.get("missing-label", 0) + 1
                continue
            label = _sanitize_label(label)
            subject = (subject or "unknown").strip() or "unknown"

            if ts_idx is not None:
                raw_t = _row_value(fields, ts_idx)
                try:
                    t = float(raw_t) * spec.timestamp_scale
                except (TypeError, ValueError):
                    report.rows_skipped["bad-timestamp"] = \
                        report.rows_skipped.get("bad-timestamp", 0) + 1
                    continue
            else:
                t = None  # synthesized below, once the segment is known

            values = {}
            ok = True
            for kind, (xi, yi, zi) in sensor_idx.items():
                try:
                    values[kind] = (float(fields[xi]), float(fields[yi]),
                                    float(fields[zi]))
                except (IndexError, ValueError):
                    ok = False
                    break
            if not ok:
                report.rows_skipped["bad-axis-value"] = \
                    report.rows_skipped.get("bad-axis-value", 0) + 1
                continue

            key = (subject, label)
            boundary = segment_key is not None and key != segment_key
            if not boundary and t is not None and segment_rows:
                prev_t = segment_rows[-1][0]
                if t <= prev_t:
                    report.rows_skipped["non-monotone-timestamp"] = \
                        report.rows_skipped.get("non-monotone-timestamp", 0) + 1
                    continue
                period = nominal_period
                if period is None and len(segment_rows) >= 2:
                    period = (segment_rows[-1][0] - segment_rows[0][0]) \
                        / (len(segment_rows) - 1)
                if period is not None and t - prev_t > GAP_FACTOR * period:
                    boundary = True
            if boundary:
                flush()
                row_index = 0
            segment_key = key
            if t is None:
                t = row_index / spec.rate_hz
                row_index += 1
            segment_rows.append((t, values))
            report.rows_imported += 1
        flush()

    manifest = DatasetManifest(
        dataset_id=dataset_id,
        name=spec.name,
        source_labels=set(report.label_histogram),
        sensors=set(spec.sensors),
        declared_freq={k: spec.frequency_hz for k in spec.sensors}
        if spec.frequency_hz else {},
        declared_units={k: b.unit for k, b in spec.sensors.items()},
        gravity_included=spec.gravity_included,
        subject_count=len({r.subject.subject_id for r in recordings}),
        trial_count=len(recordings),
    )
    if spec.frequency_hz or estimates:
        for kind in spec.sensors:
            report.frequency[kind.value] = {
                "declared": spec.frequency_hz,
                "estimated": float(np.median(estimates)) if estimates else None,
            }
    return recordings, report, manifest


def _file_scoped(rel: PurePosixPath, pattern, group: str, sidecar):
    """Label/subject value fixed for a whole file, if the driver says so."""
    if sidecar is not None:
        value = sidecar.get(str(rel))
        if value is None:
            raise ParseFailure(f"{rel}: no sidecar label entry")
        return value
    if pattern is not None:
        m = pattern.search(str(rel))
        if m is None or m.group(group) is None:
            raise ParseFailure(
                f"{rel}: filename does not match the {group} pattern")
        return m.group(group)
    return None


def _load_sidecar(root: Path, spec: DriverSpec) -> dict[str, str]:
    path = root / spec.label_sidecar
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseFailure(f"sidecar {spec.label_sidecar}: unreadable ({exc})")
    mapping = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        parts = line.split(spec.delimiter)
        if len(parts) < 2:
            raise ParseFailure(
                f"sidecar {spec.label_sidecar}: expected "
                "filename<delim>label rows")
        mapping[parts[0].strip()] = parts[1].strip()
    return mapping


def _build_recording(spec, dataset_id, rel, seq, key, rows, report,
                     estimates):
    """Turn one contiguous segment of rows into a raw-trial recording."""
    if len(rows) < 2:
        report.trials_skipped += 1
        return None
    report.trials_imported += 1
    subject, label = key
    report.label_histogram[label] = report.label_histogram.get(label, 0) + 1

    t = np.array([r[0] for r in rows], dtype=np.float64)
    t -= t[0]
    if spec.timestamp_column is not None:
        try:
            estimates.append(signals.estimate_frequency_from_timestamps(t))
        except (TooFewSamples, JitterTooHigh, FrequencyTooLow):
            pass  # jittery trials import fine; the estimate is advisory

    streams = {}
    for kind, binding in spec.sensors.items():
        values = np.array([r[1][kind] for r in rows], dtype=np.float64)
        streams[kind] = SensorStream(
            kind=kind,
            unit=binding.unit,
            t=t.copy(),
            values=values,
            declared_freq=spec.frequency_hz,
            gravity_included=spec.gravity_included,
        )

    stem = _safe_id(str(rel))
    for suffix in (".csv", ".txt", ".tsv", ".dat"):
        if stem.endswith(suffix):
            stem = stem[: -len(suffix)]
            break
    trial_id = f"{stem}-{seq:03d}"
    return CanonicalRecording(
        dataset_id=dataset_id,
        trial_id=trial_id,
        subject=SubjectInfo(subject_id=subject),
        label=label,
        streams=streams,
    )
