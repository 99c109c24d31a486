"""Command-line front end.

Mirrors the HTTP service one-to-one but runs in-process against the
catalog directory, so a server is only needed when the web console or
remote clients come into play.
"""

from __future__ import annotations

import functools
import json
from pathlib import Path

import click
import numpy as np

from . import classifier, pipeline
from .canonical import SensorStream, parse_sensor_kind, parse_unit
from .catalog import Catalog, QuerySpec, export_recordings
from .config import DEFAULT_CONFIG, load_config
from .errors import HarmonError
from .features import WindowSpec
from .labels import parse_decisions

__all__ = ["main"]


def _friendly(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except HarmonError as exc:
            raise click.ClickException(f"{type(exc).__name__}: {exc}")
    return wrapper


def _catalog(ctx) -> Catalog:
    return Catalog(ctx.obj)


def _query_options(fn):
    options = [
        click.option("--activities", default=None,
                     help="Comma-separated canonical labels."),
        click.option("--datasets", default=None,
                     help="Comma-separated dataset ids."),
        click.option("--sensors", default=None,
                     help="Comma-separated sensor kinds."),
        click.option("--sex", default=None),
        click.option("--age-min", type=float, default=None),
        click.option("--age-max", type=float, default=None),
        click.option("--min-duration", type=float, default=None,
                     help="Minimum trial duration in seconds."),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _csv_set(value):
    if not value:
        return None
    return frozenset(x.strip() for x in value.split(",") if x.strip())


def _build_query(activities, datasets, sensors, sex, age_min, age_max,
                 min_duration) -> QuerySpec:
    kinds = _csv_set(sensors)
    return QuerySpec(
        activities=_csv_set(activities),
        datasets=_csv_set(datasets),
        sensors=frozenset(parse_sensor_kind(k) for k in kinds)
        if kinds else None,
        sex=sex,
        age_min=age_min,
        age_max=age_max,
        min_duration_s=min_duration,
    )


@click.group()
@click.option("--catalog", "catalog_root", envvar="HARMON_CATALOG",
              default="catalog", show_default=True,
              help="Catalog directory (env: HARMON_CATALOG).")
@click.pass_context
def main(ctx, catalog_root):
    """Homogenize wearable-sensor datasets into one canonical corpus."""
    ctx.obj = catalog_root


@main.command()
@click.option("--path", required=True,
              type=click.Path(exists=True, path_type=Path),
              help="Dataset directory or zip archive.")
@click.option("--name", default=None, help="Human-readable dataset name.")
@click.pass_context
@_friendly
def register(ctx, path, name):
    """Copy a raw dataset into the catalog under a content-addressed id."""
    dataset_id = _catalog(ctx).register_dataset(path, name or path.stem)
    click.echo(dataset_id)


@main.group()
def driver():
    """Manage dataset drivers."""


@driver.command("add")
@click.argument("spec_file", type=click.Path(exists=True, path_type=Path))
@click.pass_context
@_friendly
def driver_add(ctx, spec_file):
    """Validate and register a driver spec file."""
    driver_id = _catalog(ctx).register_driver(
        spec_file.read_text(encoding="utf-8"))
    click.echo(driver_id)


def _resolve_dataset(catalog: Catalog, ref: str, name=None) -> str:
    """Accept a registered id or a filesystem path (registered on the fly)."""
    if Path(ref).exists():
        return catalog.register_dataset(
            ref, name or Path(ref).stem or "dataset")
    return ref


def _resolve_driver(catalog: Catalog, ref: str) -> str:
    if Path(ref).is_file():
        return catalog.register_driver(
            Path(ref).read_text(encoding="utf-8"))
    return ref


@main.command("import")
@click.option("--dataset", "dataset_ref", required=True,
              help="Dataset id, directory, or zip archive.")
@click.option("--driver", "driver_ref", required=True,
              help="Driver id or spec file.")
@click.pass_context
@_friendly
def import_cmd(ctx, dataset_ref, driver_ref):
    """Run a driver over a dataset, producing raw trials."""
    catalog = _catalog(ctx)
    dataset_id = _resolve_dataset(catalog, dataset_ref)
    driver_id = _resolve_driver(catalog, driver_ref)
    report = pipeline.import_dataset(catalog, dataset_id, driver_id)
    click.echo(f"dataset {dataset_id}")
    click.echo(f"  trials imported: {report.trials_imported}"
               f" (skipped {report.trials_skipped})")
    click.echo(f"  rows imported:   {report.rows_imported}"
               f" (skipped {report.skipped_rows})")
    for label, count in sorted(report.label_histogram.items()):
        click.echo(f"  label {label!r}: {count} trial(s)")


@main.command()
@click.option("--dataset", "dataset_id", required=True)
@click.option("--config", "config_file", default=None,
              type=click.Path(exists=True, path_type=Path),
              help="Pipeline config YAML (defaults apply otherwise).")
@click.pass_context
@_friendly
def harmonize(ctx, dataset_id, config_file):
    """Resample, convert units, and remove gravity for one dataset."""
    config = load_config(config_file) if config_file else DEFAULT_CONFIG
    summary = pipeline.harmonize_dataset(_catalog(ctx), dataset_id, config)
    click.echo(f"homogenized {summary['trials']} trial(s) at "
               f"{summary['target_freq']:g} Hz")


@main.command()
@click.option("--dataset", "dataset_id", required=True)
@click.option("-k", "k", default=3, show_default=True)
@click.option("--json", "as_json", is_flag=True,
              help="Emit the JSON payload instead of a table.")
@click.pass_context
@_friendly
def suggest(ctx, dataset_id, k, as_json):
    """Rank label-mapping suggestions against the merged corpus."""
    suggestions = pipeline.dataset_suggestions(_catalog(ctx), dataset_id,
                                               k=k)
    if as_json:
        from .service import _suggestion_payload
        click.echo(json.dumps(
            {"dataset_id": dataset_id,
             "suggestions": _suggestion_payload(suggestions)}, indent=2))
        return
    for s in suggestions:
        click.echo(f"{s.source_label}:")
        if not s.candidates:
            click.echo("  (no merged corpus yet; decide with 'new')")
        for c in s.candidates:
            marker = " *" if s.recommended == c.candidate_label else ""
            click.echo(f"  {c.candidate_label:<24} lssd={c.lssd:7.3f}  "
                       f"lss={c.lss:>2}  "
                       f"lss_norm={c.lss_normalized:5.3f}{marker}")


@main.command("apply-mappings")
@click.option("--dataset", "dataset_id", required=True)
@click.option("--decisions", "decisions_file", required=True,
              type=click.Path(exists=True, path_type=Path),
              help="Decisions document (see docs for the format).")
@click.pass_context
@_friendly
def apply_mappings(ctx, dataset_id, decisions_file):
    """Apply human mapping decisions and merge the dataset."""
    decisions = parse_decisions(
        decisions_file.read_text(encoding="utf-8"))
    report = pipeline.apply_decisions(_catalog(ctx), dataset_id, decisions)
    click.echo(f"merged {report.merged_trials} trial(s), rejected "
               f"{report.rejected_trials}")
    if report.vocabulary_added:
        click.echo("new canonical labels: "
                   + ", ".join(report.vocabulary_added))


@main.command()
@_query_options
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
@_friendly
def query(ctx, activities, datasets, sensors, sex, age_min, age_max,
          min_duration, as_json):
    """List merged recordings matching the filters."""
    spec = _build_query(activities, datasets, sensors, sex, age_min,
                        age_max, min_duration)
    recordings = _catalog(ctx).query(spec)
    if as_json:
        from .service import _trial_summary
        click.echo(json.dumps(
            {"count": len(recordings),
             "trials": [_trial_summary(r) for r in recordings]}, indent=2))
        return
    for r in recordings:
        click.echo(f"{r.dataset_id}  {r.trial_id:<32} {r.label:<16} "
                   f"subject={r.subject.subject_id}  "
                   f"{r.duration_s:6.1f}s")
    click.echo(f"{len(recordings)} recording(s)")


@main.command()
@click.option("--dest", required=True, type=click.Path(path_type=Path))
@_query_options
@click.pass_context
@_friendly
def export(ctx, dest, activities, datasets, sensors, sex, age_min, age_max,
           min_duration):
    """Export matching recordings as portable CSV + manifest."""
    spec = _build_query(activities, datasets, sensors, sex, age_min,
                        age_max, min_duration)
    recordings = _catalog(ctx).query(spec)
    manifest = export_recordings(recordings, dest)
    click.echo(f"wrote {len(manifest['trials'])} trial(s) to {dest}")


@main.command()
@click.option("--window-length", default=128, show_default=True)
@click.option("--overlap", default=0.5, show_default=True)
@_query_options
@click.pass_context
@_friendly
def train(ctx, window_length, overlap, activities, datasets, sensors, sex,
          age_min, age_max, min_duration):
    """Train a nearest-centroid model on merged recordings."""
    spec = _build_query(activities, datasets, sensors, sex, age_min,
                        age_max, min_duration)
    window = WindowSpec(length=window_length, overlap=overlap)
    model = pipeline.train_model(_catalog(ctx), spec, window)
    click.echo(model.model_id)
    for label in model.labels:
        click.echo(f"  {label}: {model.training_windows.get(label, 0)} "
                   "window(s)", err=True)


@main.command()
@click.option("--model", "model_id", required=True)
@click.option("--input", "input_file", required=True,
              type=click.Path(exists=True, path_type=Path),
              help="CSV with t,x,y,z or x,y,z columns.")
@click.option("--unit", default="m/s^2", show_default=True)
@click.option("--freq", type=float, default=None,
              help="Declared sample rate; required without a t column.")
@click.option("--gravity-included/--no-gravity-included", default=None)
@click.option("--sensor", default="accelerometer", show_default=True)
@click.pass_context
@_friendly
def classify(ctx, model_id, input_file, unit, freq, gravity_included,
             sensor):
    """Classify one raw trace with a trained model."""
    catalog = _catalog(ctx)
    model = pipeline.load_model(catalog, model_id)
    data = _read_trace(input_file)
    if data.shape[1] >= 4:
        t, values = data[:, 0], data[:, 1:4]
    else:
        if freq is None:
            raise click.ClickException(
                "3-column input needs --freq to synthesize timestamps")
        t, values = np.arange(data.shape[0]) / freq, data[:, 0:3]
    stream = SensorStream(
        kind=parse_sensor_kind(sensor),
        unit=parse_unit(unit) if unit else None,
        t=np.asarray(t, dtype=np.float64),
        values=np.asarray(values, dtype=np.float64),
        declared_freq=freq,
        gravity_included=gravity_included,
    )
    prediction = classifier.classify(model, stream)
    click.echo(json.dumps(prediction.to_dict(), indent=2))


def _read_trace(path: Path) -> np.ndarray:
    """Load a delimited numeric trace, tolerating one header line."""
    for skip in (0, 1):
        try:
            data = np.loadtxt(path, delimiter=",", skiprows=skip, ndmin=2)
            if data.shape[1] < 3:
                raise click.ClickException(
                    f"{path}: expected at least 3 columns")
            return data
        except ValueError:
            continue
    raise click.ClickException(f"{path}: not a numeric CSV trace")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8080, show_default=True)
@click.option("--console", "console_dir", default=None,
              type=click.Path(path_type=Path),
              help="Static console bundle to serve under /console.")
@click.pass_context
@_friendly
def serve(ctx, host, port, console_dir):
    """Run the HTTP service."""
    from .service import serve as run_service

    if console_dir is None and Path("frontend/dist").is_dir():
        console_dir = Path("frontend/dist")
    run_service(ctx.obj, host=host, port=port, console_dir=console_dir)


if __name__ == "__main__":
    main(prog_name="harmon")
