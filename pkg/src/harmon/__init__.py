"""harmon: homogenize heterogeneous wearable-sensor datasets into one
canonical corpus and serve queries and baseline activity classification
over it.

The pipeline, end to end: register raw datasets, import them through
declarative drivers, homogenize signals (50 Hz, SI units, gravity removed)
and labels (edit-distance and signal-distance assisted, human decided),
persist the merged corpus, and train/serve a nearest-centroid classifier.
"""

from .canonical import (
    CANONICAL_FREQ_HZ,
    STANDARD_GRAVITY,
    CanonicalRecording,
    DatasetManifest,
    SensorKind,
    SensorStream,
    SubjectInfo,
    UnitKind,
    canonical_unit,
    parse_sensor_kind,
    parse_unit,
    validate_recording,
)
from .catalog import Catalog, CatalogEntry, QuerySpec, Stage
from .classifier import CentroidModel, Prediction
from .config import DEFAULT_CONFIG, PipelineConfig, load_config
from .errors import HarmonError
from .features import (
    FEATURE_NAMES,
    ActivityProfile,
    FeatureNormalization,
    FeatureVector,
    WindowSpec,
    build_profiles,
    extract_features,
    windows,
)
from .ingest import DriverSpec, ImportReport
from .labels import (
    MappingDecision,
    MappingScore,
    MappingSuggestion,
    MergeReport,
    levenshtein,
    lssd,
    parse_decisions,
    serialize_decisions,
    suggest_mappings,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "CANONICAL_FREQ_HZ",
    "STANDARD_GRAVITY",
    "ActivityProfile",
    "Catalog",
    "CatalogEntry",
    "CanonicalRecording",
    "CentroidModel",
    "DEFAULT_CONFIG",
    "DatasetManifest",
    "DriverSpec",
    "FEATURE_NAMES",
    "FeatureNormalization",
    "FeatureVector",
    "HarmonError",
    "ImportReport",
    "MappingDecision",
    "MappingScore",
    "MappingSuggestion",
    "MergeReport",
    "PipelineConfig",
    "Prediction",
    "QuerySpec",
    "SensorKind",
    "SensorStream",
    "Stage",
    "SubjectInfo",
    "UnitKind",
    "WindowSpec",
    "build_profiles",
    "canonical_unit",
    "extract_features",
    "levenshtein",
    "load_config",
    "lssd",
    "parse_decisions",
    "parse_sensor_kind",
    "parse_unit",
    "serialize_decisions",
    "suggest_mappings",
    "validate_recording",
    "windows",
]
