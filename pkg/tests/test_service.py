import time

import pytest
from fastapi.testclient import TestClient

from harmon.service import create_app
from harmon.synth import twin_datasets

from conftest import merge_all_new, seed_dataset

DRIVER_TEXT = """
name: columns
files: ["*.txt"]
delimiter: semicolon
header: false
sensors:
  accelerometer: {x: 1, y: 2, z: 3, unit: m/s^2}
timestamp: {column: 0, unit: seconds}
label: {column: 4}
frequency_hz: 50
"""


def _wait(client, job_id, timeout=10.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        job = client.get(f"/jobs/{job_id}").json()
        if job["state"] in ("done", "failed"):
            return job
        time.sleep(0.02)
    raise AssertionError(f"job {job_id} did not finish")


@pytest.fixture(scope="module")
def seeded(tmp_path_factory):
    """One merged dataset plus a pending one, behind a live app."""
    root = tmp_path_factory.mktemp("svc")
    app = create_app(root / "catalog")
    catalog = app.state.catalog
    merged_ds = seed_dataset(catalog, root, name="merged-src")
    merge_all_new(catalog, merged_ds)
    pending_ds = seed_dataset(
        catalog, root, name="pending-src", seed=11,
        labels_map={"walking": "walk", "running": "jog",
                    "resting": "rest"})
    client = TestClient(app)
    return {"client": client, "catalog": catalog,
            "merged": merged_ds, "pending": pending_ds}


class TestHealthAndErrors:
    def test_health(self, seeded):
        body = seeded["client"].get("/health").json()
        assert body["status"] == "ok"
        assert "version" in body

    def test_unknown_dataset_404(self, seeded):
        r = seeded["client"].get(
            "/datasets/feedbeef00000000/mappings/suggestions")
        assert r.status_code == 404
        assert r.json()["error"] == "UnknownDataset"

    def test_unknown_job_404(self, seeded):
        r = seeded["client"].get("/jobs/nope")
        assert r.status_code == 404
        assert r.json()["error"] == "UnknownJob"

    def test_missing_path_400(self, seeded):
        r = seeded["client"].post("/datasets", json={"name": "x"})
        assert r.status_code == 400
        assert r.json()["error"] == "InvalidSpec"

    def test_bad_driver_spec_422_with_problems(self, seeded):
        r = seeded["client"].post("/drivers", json={"spec": "name: x"})
        assert r.status_code == 422
        assert r.json()["error"] == "InvalidDriverSpec"
        assert r.json()["problems"]


class TestIngestFlow:
    @pytest.fixture()
    def app(self, tmp_path):
        return create_app(tmp_path / "catalog")

    def test_full_import_harmonize_flow(self, app, tmp_path):
        client = TestClient(app)
        src_a = tmp_path / "raw-a"
        src_b = tmp_path / "raw-b"
        src_a.mkdir()
        src_b.mkdir()
        yaml_a, _ = twin_datasets(src_a, src_b, seed=4)

        r = client.post("/datasets", json={"path": str(src_a),
                                           "name": "layout-a"})
        assert r.status_code == 201
        ds = r.json()["dataset_id"]

        r = client.post("/drivers", json={"spec": yaml_a})
        assert r.status_code == 201
        drv = r.json()["driver_id"]

        r = client.post(f"/datasets/{ds}/import", params={"driver": drv})
        assert r.status_code == 202
        job = _wait(client, r.json()["job_id"])
        assert job["state"] == "done"
        assert job["kind"] == "import"
        report = job["result"]
        assert report["rows_imported"] > 0
        assert report["trials_imported"] >= 1

        r = client.post(f"/datasets/{ds}/harmonize")
        assert r.status_code == 202
        job = _wait(client, r.json()["job_id"])
        assert job["state"] == "done"
        assert job["result"]["target_freq"] == 50.0

        listing = client.get("/datasets").json()["datasets"]
        entry = next(e for e in listing if e["dataset_id"] == ds)
        assert entry["stage"] == "homogenized"
        assert entry["source_labels"] == ["motion"]

    def test_harmonize_config_override(self, app, tmp_path):
        client = TestClient(app)
        ds = seed_dataset(app.state.catalog, tmp_path, harmonized=False)
        r = client.post(f"/datasets/{ds}/harmonize",
                        json={"target_freq": 25.0})
        job = _wait(client, r.json()["job_id"])
        assert job["state"] == "done"
        assert job["result"]["target_freq"] == 25.0

    def test_import_validates_ids_before_queueing(self, app, tmp_path):
        client = TestClient(app)
        r = client.post("/datasets/0000000000000000/import",
                        params={"driver": "also-unknown"})
        assert r.status_code == 404

    def test_unknown_driver_404(self, app, tmp_path):
        client = TestClient(app)
        ds = seed_dataset(app.state.catalog, tmp_path, harmonized=False)
        r = client.post(f"/datasets/{ds}/import",
                        params={"driver": "ffffffffffffffff"})
        assert r.status_code == 404
        assert r.json()["error"] == "UnknownDriver"

    def test_failed_job_reports_error(self, app, tmp_path):
        client = TestClient(app)
        src = tmp_path / "empty-src"
        src.mkdir()
        (src / "readme.md").write_text("no data files here")
        r = client.post("/datasets", json={"path": str(src), "name": "mt"})
        ds = r.json()["dataset_id"]
        drv = client.post("/drivers",
                          json={"spec": DRIVER_TEXT}).json()["driver_id"]
        r = client.post(f"/datasets/{ds}/import", params={"driver": drv})
        job = _wait(client, r.json()["job_id"])
        assert job["state"] == "failed"
        assert job["error"]["error"] == "DriverDatasetMismatch"


class TestMappings:
    def test_suggestions_for_pending_dataset(self, seeded):
        client, ds = seeded["client"], seeded["pending"]
        r = client.get(f"/datasets/{ds}/mappings/suggestions")
        assert r.status_code == 200
        body = r.json()
        assert body["dataset_id"] == ds
        by_label = {s["source_label"]: s for s in body["suggestions"]}
        assert set(by_label) == {"walk", "jog", "rest"}
        walk = by_label["walk"]
        assert walk["recommended"] == "walking"
        top = walk["candidates"][0]
        assert top["candidate_label"] == "walking"
        assert top["recommended"] is True
        assert set(top) == {"candidate_label", "lss", "lss_normalized",
                            "lssd", "recommended"}

    def test_k_bounds_enforced(self, seeded):
        client, ds = seeded["client"], seeded["pending"]
        assert client.get(f"/datasets/{ds}/mappings/suggestions",
                          params={"k": 0}).status_code == 422
        assert client.get(f"/datasets/{ds}/mappings/suggestions",
                          params={"k": 51}).status_code == 422

    def test_magnitude_endpoint(self, seeded):
        client, ds = seeded["client"], seeded["pending"]
        r = client.get(f"/datasets/{ds}/labels/walk/magnitude",
                       params={"seed": 3})
        assert r.status_code == 200
        body = r.json()
        assert body["label"] == "walk"
        assert body["sample_rate_hz"] == 50.0
        assert len(body["magnitude"]) == 500
        again = client.get(f"/datasets/{ds}/labels/walk/magnitude",
                           params={"seed": 3}).json()
        assert again["trial_id"] == body["trial_id"]

    def test_magnitude_merged_pseudo_dataset(self, seeded):
        client = seeded["client"]
        r = client.get("/datasets/merged/labels/walking/magnitude")
        assert r.status_code == 200
        assert r.json()["dataset_id"] == "merged"

    def test_magnitude_unknown_label_404(self, seeded):
        client, ds = seeded["client"], seeded["pending"]
        r = client.get(f"/datasets/{ds}/labels/flying/magnitude")
        assert r.status_code == 404
        assert r.json()["error"] == "UnknownLabel"

    def test_incomplete_document_422_lists_missing(self, seeded):
        client, ds = seeded["client"], seeded["pending"]
        doc = f"#decisions\tv1\n{ds}\twalk\taccept\twalking\tkim\n"
        r = client.post(f"/datasets/{ds}/mappings", json={"document": doc})
        assert r.status_code == 422
        body = r.json()
        assert body["error"] == "IncompleteDecisions"
        assert body["missing"] == ["jog", "rest"]

    def test_document_dataset_mismatch_422(self, seeded):
        client, ds = seeded["client"], seeded["pending"]
        doc = "#decisions\tv1\nsomewhere-else\twalk\taccept\twalking\tk\n"
        r = client.post(f"/datasets/{ds}/mappings", json={"document": doc})
        assert r.status_code == 422
        assert r.json()["error"] == "InvalidDecisionsDocument"

    def test_document_must_be_string(self, seeded):
        client, ds = seeded["client"], seeded["pending"]
        r = client.post(f"/datasets/{ds}/mappings",
                        json={"document": ["not", "text"]})
        assert r.status_code == 422

    def test_apply_mappings_round_trip(self, tmp_path):
        app = create_app(tmp_path / "catalog")
        client = TestClient(app)
        catalog = app.state.catalog
        first = seed_dataset(catalog, tmp_path, name="first")
        merge_all_new(catalog, first)
        second = seed_dataset(
            catalog, tmp_path, name="second", seed=7,
            labels_map={"walking": "walk", "running": "jog",
                        "resting": "rest"})
        doc = (
            "#decisions\tv1\n"
            f"{second}\tjog\taccept\trunning\tkim\n"
            f"{second}\trest\treject\t\tkim\n"
            f"{second}\twalk\taccept\twalking\tkim\n"
        )
        r = client.post(f"/datasets/{second}/mappings",
                        json={"document": doc})
        assert r.status_code == 200
        report = r.json()
        assert report["dataset_id"] == second
        assert report["merged_trials"] == 16
        assert report["rejected_trials"] == 8
        assert report["vocabulary_added"] == []
        labels = client.get("/labels").json()["labels"]
        assert labels == ["resting", "running", "walking"]


class TestQueryExportModels:
    def test_query_counts(self, seeded):
        client = seeded["client"]
        body = client.get("/query").json()
        assert body["count"] == 24
        assert len(body["trials"]) == 24
        trial = body["trials"][0]
        assert set(trial) == {"dataset_id", "trial_id", "label", "subject",
                              "sex", "age", "duration_s", "sensors"}

    def test_query_filters(self, seeded):
        client = seeded["client"]
        body = client.get("/query", params={"activities": "walking",
                                            "sex": "f"}).json()
        assert body["count"] > 0
        assert all(t["label"] == "walking" and t["sex"] == "f"
                   for t in body["trials"])

    def test_query_unknown_activity_422(self, seeded):
        r = seeded["client"].get("/query", params={"activities": "flying"})
        assert r.status_code == 422
        assert r.json()["error"] == "UnknownLabelInQuery"

    def test_export_writes_directory(self, seeded, tmp_path):
        client = seeded["client"]
        dest = tmp_path / "exported"
        r = client.get("/export", params={"dest": str(dest),
                                          "activities": "walking"})
        assert r.status_code == 200
        body = r.json()
        assert body["trial_count"] == 8
        assert body["format"] == "export-v1"
        assert (dest / "manifest.json").exists()

    def test_train_classify_loop(self, seeded):
        client = seeded["client"]
        r = client.post("/models", json={})
        assert r.status_code == 201
        body = r.json()
        model_id = body["model_id"]
        assert body["labels"] == ["resting", "running", "walking"]

        r = client.get(f"/models/{model_id}")
        assert r.status_code == 200
        assert r.json()["model_id"] == model_id

        from harmon.synth import make_corpus
        from harmon.canonical import SensorKind
        from conftest import CLASSES
        rec = make_corpus("probe", CLASSES, subjects=1, trials_per_subject=1,
                          seed=21)[0]
        stream = rec.streams[SensorKind.ACCELEROMETER]
        payload = {
            "sensor": "accelerometer",
            "unit": "m/s^2",
            "frequency_hz": 50.0,
            "gravity_included": False,
            "x": stream.axis(0).tolist(),
            "y": stream.axis(1).tolist(),
            "z": stream.axis(2).tolist(),
        }
        r = client.post("/classify", params={"model": model_id},
                        json=payload)
        assert r.status_code == 200
        pred = r.json()
        assert pred["label"] == rec.label
        assert 0.0 < pred["confidence"] <= 1.0
        assert sum(pred["votes"].values()) >= 1

    def test_train_insufficient_classes_422(self, seeded):
        r = seeded["client"].post(
            "/models", json={"query": {"activities": ["walking"]}})
        assert r.status_code == 422
        assert r.json()["error"] == "InsufficientClasses"

    def test_unknown_model_404(self, seeded):
        r = seeded["client"].get("/models/000000000000")
        assert r.status_code == 404

    def test_classify_short_stream_422(self, seeded):
        client = seeded["client"]
        model_id = client.post("/models", json={}).json()["model_id"]
        payload = {"unit": "m/s^2", "frequency_hz": 50.0,
                   "x": [0.0, 1.0], "y": [0.0, 1.0], "z": [0.0, 1.0]}
        r = client.post("/classify", params={"model": model_id},
                        json=payload)
        assert r.status_code == 422
        assert r.json()["error"] == "StreamTooShort"

    def test_classify_shape_errors_400(self, seeded):
        client = seeded["client"]
        model_id = client.post("/models", json={}).json()["model_id"]
        payload = {"unit": "m/s^2", "frequency_hz": 50.0,
                   "x": [0.0, 1.0], "y": [0.0], "z": [0.0, 1.0]}
        r = client.post("/classify", params={"model": model_id},
                        json=payload)
        assert r.status_code == 400
        assert r.json()["error"] == "InvalidSpec"

    def test_classify_needs_time_reference(self, seeded):
        client = seeded["client"]
        model_id = client.post("/models", json={}).json()["model_id"]
        payload = {"unit": "m/s^2",
                   "x": [0.0] * 300, "y": [0.0] * 300, "z": [0.0] * 300}
        r = client.post("/classify", params={"model": model_id},
                        json=payload)
        assert r.status_code == 400


class TestConsoleMount:
    def test_static_console_served(self, tmp_path):
        console = tmp_path / "dist"
        console.mkdir()
        (console / "index.html").write_text("<h1>mapping console</h1>")
        app = create_app(tmp_path / "catalog", console_dir=console)
        client = TestClient(app)
        r = client.get("/console/")
        assert r.status_code == 200
        assert "mapping console" in r.text

    def test_missing_console_dir_not_mounted(self, tmp_path):
        app = create_app(tmp_path / "catalog",
                         console_dir=tmp_path / "absent")
        client = TestClient(app)
        assert client.get("/console/").status_code == 404
