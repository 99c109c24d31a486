"""Exception hierarchy for the harmon package.

Every failure mode raised by the library derives from HarmonError so callers
(CLI, HTTP service) can map them to diagnostics uniformly.
"""

from __future__ import annotations


class HarmonError(Exception):
    """Base class for all harmon errors."""


# --- signal pipeline -------------------------------------------------------

class TooFewSamples(HarmonError):
    """Frequency estimation needs at least two samples."""


class JitterTooHigh(HarmonError):
    """Timestamp spacing is too irregular to trust a frequency estimate."""


class FrequencyTooLow(HarmonError):
    """Estimated frequency rounds to 0 Hz; the stream is unusably slow."""


class EmptyResult(HarmonError):
    """Resampling would produce zero samples (trial too short)."""


class UnitKindMismatch(HarmonError):
    """A unit was used with a sensor kind it does not belong to."""


class MissingUnit(HarmonError):
    """The stream declares no unit of measurement; units must always be provided."""


class InvalidSpec(HarmonError):
    """A filter/resample specification violates its invariants."""


class SeriesTooShort(HarmonError):
    """Series is too short for zero-phase filtering (needs > 3 * order samples)."""


# --- feature extraction ----------------------------------------------------

class WindowTooShort(HarmonError):
    """Feature extraction requires windows of at least 16 samples."""


# --- label harmonization ---------------------------------------------------

class NormalizationNotFitted(HarmonError):
    """Feature normalization must be fitted before transforming vectors."""


class UnknownLabel(HarmonError):
    """A label was referenced that does not exist in the addressed scope."""


class IncompleteDecisions(HarmonError):
    """Some source labels have no mapping decision."""

    def __init__(self, missing: list[str]):
        self.missing = sorted(missing)
        super().__init__(f"undecided source labels: {', '.join(self.missing)}")


class ConflictingDecisions(HarmonError):
    """A source label appears in more than one decision."""


class InvalidDecisionsDocument(HarmonError):
    """The decisions document could not be parsed."""


# --- ingestion -------------------------------------------------------------

class UnreadablePath(HarmonError):
    """Dataset path does not exist or cannot be read."""


class EmptyDataset(HarmonError):
    """Registered path contains no files."""


class InvalidDriverSpec(HarmonError):
    """Driver specification failed validation.

    `problems` holds one "field: message" entry per defect.
    """

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid driver spec: " + "; ".join(self.problems))


class DriverDatasetMismatch(HarmonError):
    """The driver's file patterns match nothing in the dataset."""


class ParseFailure(HarmonError):
    """A dataset file is structurally unreadable."""


# --- catalog ---------------------------------------------------------------

class UnknownDataset(HarmonError):
    """No dataset with this id is registered."""


class UnknownDriver(HarmonError):
    """No driver with this id is registered."""


class UnknownModel(HarmonError):
    """No model with this id is stored."""


class StageRegression(HarmonError):
    """Attempted to persist a stage below the dataset's current stage."""


class MissingStage(HarmonError):
    """The dataset has no data at the requested stage."""


class ValidationFailed(HarmonError):
    """Recordings failed canonical validation; nothing was persisted."""

    def __init__(self, message: str, issues: list[str] | None = None):
        self.issues = issues or []
        super().__init__(message)


class UnknownLabelInQuery(HarmonError):
    """Query names an activity absent from the canonical vocabulary."""


class IoFailure(HarmonError):
    """Filesystem operation failed (unwritable destination, disk error)."""


# --- distribution ----------------------------------------------------------

class InsufficientClasses(HarmonError):
    """Training requires at least two labels."""


class InsufficientWindows(HarmonError):
    """A training label yields no feature windows."""

    def __init__(self, label: str):
        self.label = label
        super().__init__(f"label {label!r} yields no windows")


class StreamTooShort(HarmonError):
    """Input stream too short to classify after homogenization."""


class BindFailure(HarmonError):
    """The HTTP service could not bind its address."""
