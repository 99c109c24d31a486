"""HTTP service exposing the platform over JSON.

Thin by design: every endpoint delegates to the same pipeline functions the
CLI uses, translates domain errors into status codes, and (for the two
long-running operations, import and harmonize) runs the work on a small
thread pool behind a polled job record.
"""

from __future__ import annotations

import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from fastapi import Body, FastAPI, Query, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import classifier, pipeline
from .canonical import SensorStream, parse_sensor_kind, parse_unit
from .catalog import Catalog, QuerySpec, export_recordings
from .config import DEFAULT_CONFIG, PipelineConfig
from .errors import (
    BindFailure,
    DriverDatasetMismatch,
    EmptyDataset,
    HarmonError,
    IncompleteDecisions,
    InsufficientWindows,
    InvalidDecisionsDocument,
    InvalidDriverSpec,
    InvalidSpec,
    IoFailure,
    MissingStage,
    ParseFailure,
    StageRegression,
    UnknownDataset,
    UnknownDriver,
    UnknownLabel,
    UnknownModel,
    UnreadablePath,
    ValidationFailed,
)
from .features import WindowSpec
from .labels import parse_decisions

__all__ = ["create_app", "serve"]

_NOT_FOUND = (UnknownDataset, UnknownDriver, UnknownModel, UnknownLabel,
              MissingStage)
_CONFLICT = (StageRegression,)
_BAD_REQUEST = (UnreadablePath, EmptyDataset, DriverDatasetMismatch,
                ParseFailure, InvalidSpec)


def _status_for(exc: HarmonError) -> int:
    if isinstance(exc, _NOT_FOUND):
        return 404
    if isinstance(exc, _CONFLICT):
        return 409
    if isinstance(exc, _BAD_REQUEST):
        return 400
    if isinstance(exc, IoFailure):
        return 500
    return 422


def _error_body(exc: HarmonError) -> dict:
    body: dict[str, Any] = {
        "error": type(exc).__name__,
        "detail": str(exc),
    }
    if isinstance(exc, IncompleteDecisions):
        body["missing"] = exc.missing
    if isinstance(exc, InvalidDriverSpec):
        body["problems"] = exc.problems
    if isinstance(exc, ValidationFailed):
        body["issues"] = exc.issues
    if isinstance(exc, InsufficientWindows):
        body["label"] = exc.label
    return body


@dataclass
class Job:
    job_id: str
    kind: str
    state: str = "queued"    # queued | running | done | failed
    result: Any = None
    error: dict | None = None

    def to_dict(self) -> dict:
        return {"job_id": self.job_id, "kind": self.kind,
                "state": self.state, "result": self.result,
                "error": self.error}


class JobRunner:
    def __init__(self, workers: int = 4):
        self._pool = ThreadPoolExecutor(max_workers=workers)
        self._jobs: dict[str, Job] = {}
        self._lock = threading.Lock()

    def submit(self, kind: str, fn) -> Job:
        job = Job(job_id=uuid.uuid4().hex[:12], kind=kind)
        with self._lock:
            self._jobs[job.job_id] = job

        def run():
            job.state = "running"
            try:
                job.result = fn()
                job.state = "done"
            except HarmonError as exc:
                job.error = _error_body(exc)
                job.state = "failed"
            except Exception as exc:  # pragma: no cover - defensive
                job.error = {"error": type(exc).__name__, "detail": str(exc)}
                job.state = "failed"

        self._pool.submit(run)
        return job

    def get(self, job_id: str) -> Job | None:
        with self._lock:
            return self._jobs.get(job_id)


def _suggestion_payload(suggestions) -> list[dict]:
    return [
        {
            "source_label": s.source_label,
            "recommended": s.recommended,
            "candidates": [
                {
                    "candidate_label": c.candidate_label,
                    "lss": c.lss,
                    "lss_normalized": c.lss_normalized,
                    "lssd": c.lssd,
                    "recommended": s.recommended == c.candidate_label,
                }
                for c in s.candidates
            ],
        }
        for s in suggestions
    ]


def _trial_summary(rec) -> dict:
    return {
        "dataset_id": rec.dataset_id,
        "trial_id": rec.trial_id,
        "label": rec.label,
        "subject": rec.subject.subject_id,
        "sex": rec.subject.sex,
        "age": rec.subject.age,
        "duration_s": rec.duration_s,
        "sensors": sorted(k.value for k in rec.streams),
    }


def _csv_set(value: str | None) -> frozenset[str] | None:
    if value is None or value == "":
        return None
    return frozenset(x.strip() for x in value.split(",") if x.strip())


def _query_from_params(activities, datasets, sensors, sex, age_min,
                       age_max, min_duration_s) -> QuerySpec:
    kinds = _csv_set(sensors)
    return QuerySpec(
        activities=_csv_set(activities),
        datasets=_csv_set(datasets),
        sensors=frozenset(parse_sensor_kind(k) for k in kinds)
        if kinds is not None else None,
        sex=sex,
        age_min=age_min,
        age_max=age_max,
        min_duration_s=min_duration_s,
    )


def _stream_from_payload(payload: dict) -> SensorStream:
    kind = parse_sensor_kind(str(payload.get("sensor", "accelerometer")))
    unit = payload.get("unit")
    freq = payload.get("frequency_hz")
    x = payload.get("x")
    y = payload.get("y")
    z = payload.get("z")
    if not (isinstance(x, list) and isinstance(y, list)
            and isinstance(z, list)) or not len(x) == len(y) == len(z):
        raise InvalidSpec("x, y, z must be equal-length arrays")
    t = payload.get("t")
    if t is None:
        if not freq:
            raise InvalidSpec("either t or frequency_hz is required")
        t = (np.arange(len(x)) / float(freq)).tolist()
    if len(t) != len(x):
        raise InvalidSpec("t must match the axis arrays in length")
    values = np.column_stack([
        np.asarray(x, dtype=np.float64),
        np.asarray(y, dtype=np.float64),
        np.asarray(z, dtype=np.float64),
    ])
    return SensorStream(
        kind=kind,
        unit=parse_unit(str(unit)) if unit else None,
        t=np.asarray(t, dtype=np.float64),
        values=values,
        declared_freq=float(freq) if freq else None,
        gravity_included=payload.get("gravity_included"),
    )


def create_app(catalog_root: str | Path,
               console_dir: str | Path | None = None) -> FastAPI:
    from . import __version__

    app = FastAPI(title="harmon", version=__version__)
    catalog = Catalog(catalog_root)
    jobs = JobRunner()
    app.state.catalog = catalog
    app.state.jobs = jobs

    @app.exception_handler(HarmonError)
    async def _harmon_error(request: Request, exc: HarmonError):
        return JSONResponse(status_code=_status_for(exc),
                            content=_error_body(exc))

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return JSONResponse(status_code=422,
                            content={"error": "ValueError",
                                     "detail": str(exc)})

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    # -- registration and ingestion

    @app.post("/datasets", status_code=201)
    def register_dataset(payload: dict = Body(...)):
        path = payload.get("path")
        name = payload.get("name") or "dataset"
        if not path:
            raise InvalidSpec("body must carry a dataset 'path'")
        dataset_id = catalog.register_dataset(path, name)
        return {"dataset_id": dataset_id}

    @app.get("/datasets")
    def list_datasets():
        out = []
        for dataset_id in catalog.dataset_ids():
            entry = catalog.entry(dataset_id)
            out.append({
                "dataset_id": dataset_id,
                "name": entry.name,
                "stage": entry.stage.name.lower(),
                "source_labels": sorted(entry.manifest.source_labels)
                if entry.manifest else [],
                "trial_count": entry.manifest.trial_count
                if entry.manifest else 0,
            })
        return {"datasets": out}

    @app.post("/drivers", status_code=201)
    def register_driver(payload: dict = Body(...)):
        text = payload.get("spec")
        if not isinstance(text, str) or not text.strip():
            raise InvalidDriverSpec(["body must carry the spec text under "
                                     "'spec'"])
        return {"driver_id": catalog.register_driver(text)}

    @app.post("/datasets/{dataset_id}/import", status_code=202)
    def import_dataset(dataset_id: str, driver: str = Query(...)):
        catalog.entry(dataset_id)   # 404 before queueing
        catalog.driver(driver)
        job = jobs.submit(
            "import",
            lambda: pipeline.import_dataset(catalog, dataset_id,
                                            driver).to_dict())
        return {"job_id": job.job_id}

    @app.post("/datasets/{dataset_id}/harmonize", status_code=202)
    def harmonize(dataset_id: str, payload: dict | None = Body(None)):
        catalog.entry(dataset_id)
        config = DEFAULT_CONFIG
        if payload:
            base = DEFAULT_CONFIG.to_dict()
            base.update({k: v for k, v in payload.items()
                         if k in base and v is not None})
            config = PipelineConfig.from_dict(base)
        job = jobs.submit(
            "harmonize",
            lambda: pipeline.harmonize_dataset(catalog, dataset_id, config))
        return {"job_id": job.job_id}

    @app.get("/jobs/{job_id}")
    def job_status(job_id: str):
        job = jobs.get(job_id)
        if job is None:
            return JSONResponse(status_code=404,
                                content={"error": "UnknownJob",
                                         "detail": job_id})
        return job.to_dict()

    # -- label harmonization

    @app.get("/datasets/{dataset_id}/mappings/suggestions")
    def suggestions(dataset_id: str, k: int = Query(3, ge=1, le=50)):
        suggs = pipeline.dataset_suggestions(catalog, dataset_id, k=k)
        return {"dataset_id": dataset_id, "k": k,
                "suggestions": _suggestion_payload(suggs)}

    @app.get("/datasets/{dataset_id}/labels/{label}/magnitude")
    def magnitude(dataset_id: str, label: str, seed: int = Query(0)):
        return pipeline.magnitude_for_label(catalog, dataset_id, label, seed)

    @app.post("/datasets/{dataset_id}/mappings")
    def apply_mappings(dataset_id: str, payload: dict = Body(...)):
        document = payload.get("document")
        if not isinstance(document, str):
            raise InvalidDecisionsDocument(
                "body must carry the decisions document under 'document'")
        decisions = parse_decisions(document)
        for d in decisions:
            if d.dataset_id != dataset_id:
                raise InvalidDecisionsDocument(
                    f"decision for {d.source_label!r} addresses dataset "
                    f"{d.dataset_id!r}, endpoint is {dataset_id!r}")
        report = pipeline.apply_decisions(catalog, dataset_id, decisions)
        return report.to_dict()

    @app.get("/labels")
    def labels_endpoint():
        return {"labels": catalog.vocabulary()}

    # -- query and export

    @app.get("/query")
    def query(activities: str | None = None, datasets: str | None = None,
              sensors: str | None = None, sex: str | None = None,
              age_min: float | None = None, age_max: float | None = None,
              min_duration_s: float | None = None):
        spec = _query_from_params(activities, datasets, sensors, sex,
                                  age_min, age_max, min_duration_s)
        recordings = catalog.query(spec)
        return {"count": len(recordings),
                "query": spec.to_dict(),
                "trials": [_trial_summary(r) for r in recordings]}

    @app.get("/export")
    def export(dest: str, activities: str | None = None,
               datasets: str | None = None, sensors: str | None = None,
               sex: str | None = None, age_min: float | None = None,
               age_max: float | None = None,
               min_duration_s: float | None = None):
        spec = _query_from_params(activities, datasets, sensors, sex,
                                  age_min, age_max, min_duration_s)
        recordings = catalog.query(spec)
        manifest = export_recordings(recordings, dest)
        return {"destination": dest,
                "trial_count": len(manifest["trials"]),
                "format": manifest["format"]}

    # -- models

    @app.post("/models", status_code=201)
    def train(payload: dict = Body(...)):
        spec = QuerySpec.from_dict(payload.get("query") or {})
        window_d = payload.get("window") or {}
        window = WindowSpec(length=int(window_d.get("length", 128)),
                            overlap=float(window_d.get("overlap", 0.5)))
        config = DEFAULT_CONFIG
        if payload.get("config"):
            base = DEFAULT_CONFIG.to_dict()
            base.update(payload["config"])
            config = PipelineConfig.from_dict(base)
        model = pipeline.train_model(catalog, spec, window, config)
        return {"model_id": model.model_id,
                "labels": list(model.labels),
                "training_windows": model.training_windows}

    @app.get("/models/{model_id}")
    def get_model(model_id: str):
        return catalog.load_model(model_id)

    @app.post("/classify")
    def classify_endpoint(model: str = Query(...),
                          payload: dict = Body(...)):
        loaded = pipeline.load_model(catalog, model)
        stream = _stream_from_payload(payload)
        prediction = classifier.classify(loaded, stream)
        return prediction.to_dict()

    if console_dir is not None and Path(console_dir).is_dir():
        app.mount("/console",
                  StaticFiles(directory=str(console_dir), html=True),
                  name="console")

    return app


def serve(catalog_root: str | Path, host: str = "127.0.0.1",
          port: int = 8080, console_dir: str | Path | None = None) -> None:
    """Run the service until interrupted."""
    import uvicorn

    app = create_app(catalog_root, console_dir=console_dir)
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    except OSError as exc:
        raise BindFailure(f"{host}:{port}: {exc}") from exc
