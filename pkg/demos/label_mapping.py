"""Merging vocabularies: what should "ambulation" map to?

Every HAR corpus invents its own activity names. Mapping them by string
similarity alone fails as soon as someone writes "locomotion" for walking,
so candidate targets are ranked by signal similarity first (Euclidean
distance between normalized per-label feature profiles, LSSD) with edit
distance as the tie breaker. A human still signs off on every mapping; the
engine just puts the likely answer at the top of the list.

This script seeds a merged corpus with a walking/running/resting vocabulary,
then brings in a second dataset that calls the same motions "ambulation",
"sprint phase" and "quiet sitting", prints the suggestion table, and applies
the reviewed decisions.

Run from the repository root:

    python3 demos/label_mapping.py
"""

import dataclasses
import tempfile
from pathlib import Path

from harmon.canonical import (
    DatasetManifest,
    SensorKind,
    UnitKind,
)
from harmon.catalog import Catalog, CatalogEntry, Stage
from harmon.labels import MappingDecision, serialize_decisions
from harmon.pipeline import apply_decisions, dataset_suggestions, harmonize_dataset
from harmon.synth import make_corpus

CLASSES = {
    "walking": (1.2, 2.0),
    "running": (2.6, 5.0),
    "resting": (0.8, 0.4),
}
RENAMES = {
    "walking": "ambulation",
    "running": "sprint phase",
    "resting": "quiet sitting",
}


def seed(catalog, work, name, rename=None, seed_value=7):
    """Register and persist one synthetic corpus, homogenized."""
    src = work / name
    src.mkdir()
    (src / "about.txt").write_text(name)
    dataset_id = catalog.register_dataset(src, name)
    recordings = make_corpus(dataset_id, CLASSES, subjects=3, seed=seed_value)
    if rename:
        recordings = [dataclasses.replace(r, label=rename[r.label])
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
        subject_count=3,
        trial_count=len(recordings),
    )
    catalog.persist(
        CatalogEntry(dataset_id=dataset_id, name=name, stage=Stage.IMPORTED,
                     manifest=manifest),
        recordings)
    harmonize_dataset(catalog, dataset_id)
    return dataset_id


work = Path(tempfile.mkdtemp(prefix="harmon-demo-"))
catalog = Catalog(work / "catalog")

# --- 1. an established corpus defines the canonical vocabulary -----------

first = seed(catalog, work, "veteran-corpus")
apply_decisions(catalog, first, [
    MappingDecision(first, label, "new", label, decided_by="curator")
    for label in sorted(CLASSES)
])
print("canonical vocabulary:", ", ".join(catalog.vocabulary()))

# --- 2. a newcomer with its own names asks for suggestions ---------------

second = seed(catalog, work, "newcomer", rename=RENAMES, seed_value=8)
print(f"newcomer labels: {', '.join(sorted(RENAMES.values()))}\n")

suggestions = dataset_suggestions(catalog, second)
print(f"{'source label':18} {'candidate':10} {'lssd':>7} {'lss':>4}  flag")
for s in suggestions:
    for rank, c in enumerate(s.candidates):
        marker = "  <- recommended" if (
            rank == 0 and s.recommended == c.candidate_label) else ""
        print(f"{s.source_label if rank == 0 else '':18} "
              f"{c.candidate_label:10} {c.lssd:7.3f} {c.lss:4d}{marker}")

# --- 3. the reviewer signs off ------------------------------------------
#
# Where the engine is confident it marks a recommendation; where it is not
# (distinct cohorts do drift apart in feature space) it stays quiet and the
# reviewer decides from the ranked list. Either way a human owns the call.

decisions = []
for s in suggestions:
    target = s.recommended or s.candidates[0].candidate_label
    if s.recommended is None:
        print(f"no recommendation for {s.source_label!r}; "
              f"reviewer picks the top candidate {target!r}")
    decisions.append(MappingDecision(second, s.source_label, "accept",
                                     target, decided_by="curator"))
print("\nsigned decisions document:")
print(serialize_decisions(decisions))

report = apply_decisions(catalog, second, decisions)
print(f"merged {report.merged_trials} trial(s); vocabulary still "
      f"{', '.join(catalog.vocabulary())}")
print("\nNote the recommendations came from the signals: none of the "
      "renamed labels\nis a close string match to its target.")
