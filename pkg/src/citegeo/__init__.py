"""Citation-weighted city mapping.

Parse a bibliographic export, keep the most-cited slice (ties included),
geocode the affiliation cities, agglomerate nearby name variants into
clusters, rank them into percentile color classes, and emit map files.
"""

from .agglomerate import (
    DETAILED,
    INTERMEDIATE,
    METROPOLITAN,
    CityCluster,
    MergeRadius,
    chebyshev,
    fold_name_variants,
    merge_occurrences,
)
from .classify import (
    CLASS_ORDER,
    ClassifiedCircle,
    PercentileClass,
    build_circles,
    classify_percentile,
    display_radius,
    percentile_ranks,
)
from .config import PipelineConfig
from .emit import MapDocument, emit_geojson, emit_gps_text, emit_html, emit_kml
from .errors import (
    AlignmentError,
    FormatError,
    IntegrityError,
    PipelineError,
    RowError,
    SourceError,
    StageError,
    TransportError,
)
from .geocode import (
    Gazetteer,
    GeoCache,
    GeocodeEntry,
    GeoPoint,
    RemoteBackend,
    attach_coordinates,
    geocode_batch,
    reconcile_sources,
)
from .ingest import (
    AddressRecord,
    CityOccurrence,
    ExtractReport,
    PaperRecord,
    extract_occurrences,
    normalize_place,
    parse_address,
    parse_corpus,
)
from .pipeline import PipelineResult, run_pipeline
from .topslice import SliceResult, select_top_slice
from .verify import VerificationReport, build_report

__version__ = "0.1.0"

__all__ = [
    "AddressRecord",
    "AlignmentError",
    "CityCluster",
    "CityOccurrence",
    "CLASS_ORDER",
    "ClassifiedCircle",
    "DETAILED",
    "ExtractReport",
    "FormatError",
    "Gazetteer",
    "GeoCache",
    "GeocodeEntry",
    "GeoPoint",
    "INTERMEDIATE",
    "IntegrityError",
    "MapDocument",
    "MergeRadius",
    "METROPOLITAN",
    "PaperRecord",
    "PercentileClass",
    "PipelineConfig",
    "PipelineError",
    "PipelineResult",
    "RemoteBackend",
    "RowError",
    "SliceResult",
    "SourceError",
    "StageError",
    "TransportError",
    "VerificationReport",
    "attach_coordinates",
    "build_circles",
    "build_report",
    "chebyshev",
    "classify_percentile",
    "display_radius",
    "emit_geojson",
    "emit_gps_text",
    "emit_html",
    "emit_kml",
    "extract_occurrences",
    "fold_name_variants",
    "geocode_batch",
    "merge_occurrences",
    "normalize_place",
    "parse_address",
    "parse_corpus",
    "percentile_ranks",
    "reconcile_sources",
    "run_pipeline",
    "select_top_slice",
]
