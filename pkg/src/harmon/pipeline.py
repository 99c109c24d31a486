"""End-to-end dataset operations against a catalog.

Each function here is one user-visible step of the platform: import a
registered dataset with a driver, homogenize it, score label-mapping
suggestions, apply human decisions into the merged corpus, and train or
look up classifiers. The HTTP service and the CLI both call exactly these
functions, so the two front ends cannot drift apart.
"""

from __future__ import annotations

from dataclasses import replace

from . import classifier, ingest, labels, signals
from .canonical import CanonicalRecording, canonical_unit
from .catalog import Catalog, CatalogEntry, QuerySpec, Stage
from .config import DEFAULT_CONFIG, PipelineConfig
from .errors import UnknownLabel
from .features import WindowSpec, build_profiles
from .labels import MappingDecision, MergeReport, check_decisions

__all__ = [
    "import_dataset",
    "harmonize_dataset",
    "dataset_suggestions",
    "magnitude_for_label",
    "apply_decisions",
    "train_model",
]

#: Pseudo dataset id addressing the merged canonical corpus.
MERGED_ID = "merged"


def import_dataset(catalog: Catalog, dataset_id: str,
                   driver_id: str) -> ingest.ImportReport:
    """Run a registered driver over a registered dataset and persist the
    result as the imported stage."""
    spec = catalog.driver(driver_id)
    raw = catalog.raw_dir(dataset_id)
    recordings, report, manifest = ingest.run_import(
        raw, spec, dataset_id, driver_id)
    entry = catalog.entry(dataset_id)
    catalog.persist(
        CatalogEntry(dataset_id=dataset_id, name=entry.name,
                     stage=Stage.IMPORTED, manifest=manifest),
        recordings)
    return report


def harmonize_dataset(
    catalog: Catalog, dataset_id: str,
    config: PipelineConfig = DEFAULT_CONFIG,
) -> dict:
    """Homogenize every imported stream and persist the homogenized stage
    with the config snapshot that produced it."""
    manifest = catalog.manifest(dataset_id)
    recordings = catalog.load(dataset_id, Stage.IMPORTED)
    out = []
    for rec in recordings:
        streams = {
            kind: signals.homogenize(stream, manifest, config)
            for kind, stream in rec.streams.items()
        }
        out.append(replace(rec, streams=streams))

    new_manifest = replace(
        manifest,
        declared_freq={k: config.target_freq for k in manifest.sensors},
        declared_units={k: canonical_unit(k) for k in manifest.sensors},
        gravity_included=False,
    )
    entry = catalog.entry(dataset_id)
    catalog.persist(
        CatalogEntry(dataset_id=dataset_id, name=entry.name,
                     stage=Stage.HOMOGENIZED, manifest=new_manifest,
                     config=config.to_dict()),
        out)
    return {
        "dataset_id": dataset_id,
        "trials": len(out),
        "target_freq": config.target_freq,
    }


def _merged_profiles(catalog: Catalog, spec: WindowSpec,
                     rate: float) -> list:
    merged = catalog.merged_recordings()
    if not merged:
        return []
    return build_profiles(merged, spec, sample_rate_hz=rate,
                          group_by_dataset=False).profiles


def dataset_suggestions(
    catalog: Catalog, dataset_id: str, k: int = 3,
    window: WindowSpec = WindowSpec(),
) -> list[labels.MappingSuggestion]:
    """Mapping suggestions for a homogenized dataset against the merged
    corpus. With no merged corpus yet there is nothing to map onto, so every
    source label comes back with an empty candidate list (first dataset
    bootstraps the vocabulary through "new" decisions).
    """
    entry = catalog.entry(dataset_id)
    config = PipelineConfig.from_dict(entry.config) if entry.config \
        else DEFAULT_CONFIG
    recordings = catalog.load(dataset_id, Stage.HOMOGENIZED)
    source = build_profiles(recordings, window,
                            sample_rate_hz=config.target_freq).profiles
    reference = _merged_profiles(catalog, window, config.target_freq)
    if not reference:
        return [labels.MappingSuggestion(source_label=p.label, candidates=())
                for p in sorted(source, key=lambda p: p.label)]
    return labels.suggest_mappings(source, reference, k=k)


def magnitude_for_label(
    catalog: Catalog, dataset_id: str, label: str, seed: int,
) -> dict:
    """One seeded random trial's magnitude series for comparison graphs.

    dataset_id may be the pseudo id "merged" to sample from the canonical
    corpus side.
    """
    if dataset_id == MERGED_ID:
        recordings = catalog.merged_recordings()
        rate = DEFAULT_CONFIG.target_freq
    else:
        entry = catalog.entry(dataset_id)
        recordings = catalog.load(dataset_id, Stage.HOMOGENIZED)
        rate = (PipelineConfig.from_dict(entry.config).target_freq
                if entry.config else DEFAULT_CONFIG.target_freq)
    trial_id, series = labels.magnitude_sample(recordings, label, seed)
    return {
        "dataset_id": dataset_id,
        "label": label,
        "seed": seed,
        "trial_id": trial_id,
        "sample_rate_hz": rate,
        "magnitude": [float(x) for x in series],
    }


def apply_decisions(
    catalog: Catalog, dataset_id: str, decisions: list[MappingDecision],
) -> MergeReport:
    """Relabel a homogenized dataset per the human decisions and persist it
    as the merged stage.

    Every source label needs exactly one decision. "accept" targets must
    already be canonical vocabulary; "new" targets extend it; "reject"
    keeps the trials out of the merged corpus (the raw and homogenized
    stages are untouched either way).
    """
    manifest = catalog.manifest(dataset_id)
    check_decisions(decisions, set(manifest.source_labels))

    vocabulary = set(catalog.vocabulary())
    new_labels = []
    mapping: dict[str, str | None] = {}
    for d in decisions:
        if d.action == "reject":
            mapping[d.source_label] = None
        elif d.action == "new":
            mapping[d.source_label] = d.target
            if d.target not in vocabulary:
                new_labels.append(d.target)
        else:
            if d.target not in vocabulary:
                raise UnknownLabel(
                    f"accept target {d.target!r} is not canonical; use a "
                    "\"new\" decision to extend the vocabulary")
            mapping[d.source_label] = d.target

    recordings = catalog.load(dataset_id, Stage.HOMOGENIZED)
    report = MergeReport(dataset_id=dataset_id)
    merged: list[CanonicalRecording] = []
    for rec in recordings:
        target = mapping[rec.label]
        stats = report.per_label.setdefault(
            rec.label, {"target": target, "merged": 0, "rejected": 0})
        if target is None:
            report.rejected_trials += 1
            stats["rejected"] += 1
        else:
            merged.append(rec.relabeled(target))
            report.merged_trials += 1
            stats["merged"] += 1

    entry = catalog.entry(dataset_id)
    merged_labels = {r.label for r in merged}
    new_manifest = replace(
        manifest,
        source_labels=merged_labels,
        trial_count=len(merged),
        subject_count=len({r.subject.subject_id for r in merged}),
    )
    if new_labels:
        catalog.add_vocabulary(new_labels)
        report.vocabulary_added = sorted(set(new_labels))
    catalog.persist(
        CatalogEntry(dataset_id=dataset_id, name=entry.name,
                     stage=Stage.MERGED, manifest=new_manifest,
                     config=entry.config),
        merged)
    return report


def train_model(
    catalog: Catalog, query: QuerySpec, window: WindowSpec = WindowSpec(),
    config: PipelineConfig = DEFAULT_CONFIG,
) -> classifier.CentroidModel:
    """Train a centroid model on the merged recordings a query selects and
    store it in the catalog."""
    recordings = catalog.query(query)
    model = classifier.train(recordings, window, config,
                             query=query.to_dict())
    catalog.save_model(model.model_id, model.to_dict())
    return model


def load_model(catalog: Catalog, model_id: str) -> classifier.CentroidModel:
    return classifier.CentroidModel.from_dict(catalog.load_model(model_id))
