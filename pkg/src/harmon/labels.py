"""Label harmonization: syntax distance, signal distance, suggestions,
and application of human mapping decisions.

Two complementary distances rank candidate mappings: the Levenshtein edit
distance between label strings, and the Euclidean distance between per-label
averaged feature vectors in z-score space. The final decision is always a
human one; this module only scores, suggests, and applies.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from .features import ActivityProfile, FeatureNormalization
from .canonical import CanonicalRecording, SensorKind
from .errors import (
    ConflictingDecisions,
    InvalidDecisionsDocument,
    UnknownLabel,
)
from . import signals

__all__ = [
    "MappingScore",
    "MappingSuggestion",
    "MappingDecision",
    "MergeReport",
    "DECISION_ACTIONS",
    "normalize_label",
    "levenshtein",
    "lssd",
    "suggest_mappings",
    "magnitude_sample",
    "serialize_decisions",
    "parse_decisions",
]

#: Threshold on the best candidate's signal distance to mark it recommended.
DEFAULT_SIGNAL_THRESHOLD = 1.5
#: Threshold on the best candidate's normalized edit distance.
DEFAULT_SYNTAX_THRESHOLD = 0.5

DECISION_ACTIONS = ("accept", "new", "reject")


@dataclass(frozen=True)
class MappingScore:
    source_label: str
    candidate_label: str
    lss: int
    lss_normalized: float
    lssd: float


@dataclass(frozen=True)
class MappingSuggestion:
    source_label: str
    candidates: tuple[MappingScore, ...]
    recommended: str | None = None


@dataclass(frozen=True)
class MappingDecision:
    """One human decision for one source label.

    action is "accept" (map onto an existing canonical label), "new"
    (introduce target as a canonical label), or "reject" (exclude the trials
    from the merged corpus).
    """

    dataset_id: str
    source_label: str
    action: str
    target: str | None = None
    decided_by: str = ""
    scores: MappingScore | None = None

    def __post_init__(self):
        if self.action not in DECISION_ACTIONS:
            raise ValueError(f"action must be one of {DECISION_ACTIONS}")
        if self.action == "reject":
            if self.target:
                raise ValueError("reject decisions carry no target")
        elif not self.target:
            raise ValueError(f"{self.action} decisions need a target label")


@dataclass
class MergeReport:
    dataset_id: str
    merged_trials: int = 0
    rejected_trials: int = 0
    vocabulary_added: list[str] = field(default_factory=list)
    per_label: dict[str, dict] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "dataset_id": self.dataset_id,
            "merged_trials": self.merged_trials,
            "rejected_trials": self.rejected_trials,
            "vocabulary_added": self.vocabulary_added,
            "per_label": self.per_label,
        }


def normalize_label(label: str) -> str:
    """Case-fold and unify separators (space/underscore/hyphen runs -> one
    space) so formatting differences cost no edit distance."""
    out = []
    last_sep = True  # strips leading separators
    for ch in label.casefold():
        if ch.isspace() or ch in "_-":
            if not last_sep:
                out.append(" ")
            last_sep = True
        else:
            out.append(ch)
            last_sep = False
    return "".join(out).rstrip()


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance over normalized labels (two-row DP)."""
    a = normalize_label(a)
    b = normalize_label(b)
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(
                prev[j] + 1,          # delete from a
                cur[j - 1] + 1,       # insert into a
                prev[j - 1] + (ca != cb),
            ))
        prev = cur
    return prev[-1]


def syntax_scores(a: str, b: str) -> tuple[int, float]:
    """(edit distance, distance normalized by the longer label)."""
    dist = levenshtein(a, b)
    longest = max(len(normalize_label(a)), len(normalize_label(b)))
    return dist, (dist / longest if longest else 0.0)


def lssd(
    p: ActivityProfile, q: ActivityProfile, norm: FeatureNormalization
) -> float:
    """Euclidean distance between z-score-normalized profile vectors."""
    return float(np.linalg.norm(norm.transform(p.vector) -
                                norm.transform(q.vector)))


def suggest_mappings(
    source: list[ActivityProfile],
    reference: list[ActivityProfile],
    k: int = 3,
    signal_threshold: float = DEFAULT_SIGNAL_THRESHOLD,
    syntax_threshold: float = DEFAULT_SYNTAX_THRESHOLD,
) -> list[MappingSuggestion]:
    """Rank reference candidates for each source label.

    Candidates sort by signal distance, then normalized edit distance, then
    lexicographically. The best candidate is recommended when its signal
    distance is below `signal_threshold` or its normalized edit distance is
    at most `syntax_threshold`; the human decision still rules either way.
    """
    norm = FeatureNormalization().fit(
        [p.vector for p in source] + [p.vector for p in reference])
    suggestions = []
    for sp in sorted(source, key=lambda p: p.label):
        scores = []
        for rp in reference:
            lss, lss_norm = syntax_scores(sp.label, rp.label)
            scores.append(MappingScore(
                source_label=sp.label,
                candidate_label=rp.label,
                lss=lss,
                lss_normalized=lss_norm,
                lssd=lssd(sp, rp, norm),
            ))
        scores.sort(key=lambda s: (s.lssd, s.lss_normalized, s.candidate_label))
        top = tuple(scores[:k])
        recommended = None
        if top and (top[0].lssd < signal_threshold
                    or top[0].lss_normalized <= syntax_threshold):
            recommended = top[0].candidate_label
        suggestions.append(MappingSuggestion(
            source_label=sp.label, candidates=top, recommended=recommended))
    return suggestions


def magnitude_sample(
    recordings: list[CanonicalRecording],
    label: str,
    seed: int,
    sensor: SensorKind = SensorKind.ACCELEROMETER,
) -> tuple[str, np.ndarray]:
    """Magnitude series of one label trial picked by the seeded generator.

    Returns (trial_id, series). The same seed always selects the same trial,
    so comparison graphs are reproducible.
    """
    trials = sorted(
        (r for r in recordings if r.label == label and sensor in r.streams),
        key=lambda r: (r.dataset_id, r.trial_id))
    if not trials:
        raise UnknownLabel(f"no trials labeled {label!r}")
    pick = trials[random.Random(seed).randrange(len(trials))]
    return pick.trial_id, signals.magnitude(pick.streams[sensor])


# --- decisions document ------------------------------------------------------
#
# Line-oriented, tab-separated, one row per source label:
#   dataset_id <TAB> source_label <TAB> action <TAB> target <TAB> decided_by
# Rows sorted by source label, LF endings, UTF-8. The HTTP endpoint and the
# CLI exchange exactly this document, so the two are interchangeable.

DECISIONS_HEADER = "#decisions\tv1"


def serialize_decisions(decisions: list[MappingDecision]) -> str:
    lines = [DECISIONS_HEADER]
    for d in sorted(decisions, key=lambda d: d.source_label):
        target = d.target or ""
        for name, value in (("label", d.source_label), ("target", target),
                            ("decided_by", d.decided_by)):
            if "\t" in value or "\n" in value:
                raise ValueError(f"{name} may not contain tabs or newlines")
        lines.append("\t".join(
            [d.dataset_id, d.source_label, d.action, target, d.decided_by]))
    return "\n".join(lines) + "\n"


def parse_decisions(text: str) -> list[MappingDecision]:
    lines = text.splitlines()
    if not lines or lines[0].strip() != DECISIONS_HEADER.strip():
        raise InvalidDecisionsDocument(
            f"first line must be {DECISIONS_HEADER!r}")
    decisions = []
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 5:
            raise InvalidDecisionsDocument(
                f"line {i}: expected 5 tab-separated fields, got {len(parts)}")
        dataset_id, source_label, action, target, decided_by = parts
        if action not in DECISION_ACTIONS:
            raise InvalidDecisionsDocument(
                f"line {i}: unknown action {action!r}")
        try:
            decisions.append(MappingDecision(
                dataset_id=dataset_id,
                source_label=source_label,
                action=action,
                target=target or None,
                decided_by=decided_by,
            ))
        except ValueError as exc:
            raise InvalidDecisionsDocument(f"line {i}: {exc}") from exc
    return decisions


def check_decisions(
    decisions: list[MappingDecision], source_labels: set[str]
) -> None:
    """Validate that decisions cover each source label exactly once."""
    seen: set[str] = set()
    for d in decisions:
        if d.source_label in seen:
            raise ConflictingDecisions(
                f"label {d.source_label!r} decided more than once")
        seen.add(d.source_label)
        if d.source_label not in source_labels:
            raise UnknownLabel(
                f"decision names unknown source label {d.source_label!r}")
    missing = source_labels - seen
    if missing:
        from .errors import IncompleteDecisions
        raise IncompleteDecisions(sorted(missing))
