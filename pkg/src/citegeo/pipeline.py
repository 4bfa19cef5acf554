"""End-to-end orchestration and the stage-file formats the CLI shares.

Every stage writes its output under the run directory, so each subcommand
can pick up where the previous one stopped. All stage files are plain text
(JSON lines or the tab/comma formats defined by their modules).
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from . import fileio
from .agglomerate import CityCluster, merge_occurrences
from .classify import ClassifiedCircle, PercentileClass, build_circles
from .config import PipelineConfig
from .emit import MapDocument, emit_geojson, emit_gps_text, emit_html, emit_kml
from .errors import PipelineError, StageError
from .geocode import (
    Gazetteer,
    GeoCache,
    GeocodeEntry,
    GeoPoint,
    RemoteBackend,
    attach_coordinates,
    geocode_batch,
    read_geo_txt,
    write_geo_txt,
)
from .ingest import (
    CityOccurrence,
    PaperRecord,
    extract_occurrences,
    parse_corpus,
    write_cities_txt,
)
from .topslice import SliceResult, select_top_slice
from .verify import VerificationReport, build_report

logger = logging.getLogger(__name__)

# canonical stage-file names inside a run directory
PAPERS_FILE = "papers.jsonl"
SELECTED_FILE = "selected.jsonl"
SLICE_FILE = "slice.json"
OCCURRENCES_FILE = "occurrences.jsonl"
CITIES_FILE = "cities.txt"
EXTRACT_FILE = "extract.json"
GEO_FILE = "geo.txt"
GEOCODE_FILE = "geocode.json"
CLUSTERS_FILE = "clusters.jsonl"
MERGE_FILE = "merge.json"
CIRCLES_FILE = "circles.jsonl"
CONFIG_ECHO_FILE = "run.cfg"
REPORT_TEXT_FILE = "verify.txt"
REPORT_JSONL_FILE = "verify.jsonl"

EMIT_FILES = {
    "gps": "ucities.txt",
    "geojson": "map.geojson",
    "kml": "map.kml",
    "html": "map.html",
    "png": "map.png",
}


# ---------------------------------------------------------------------------
# stage-file row codecs

def paper_to_row(record: PaperRecord) -> dict:
    return {
        "paper_id": record.paper_id,
        "citation_count": record.citation_count,
        "publication_year": record.publication_year,
        "affiliations_raw": record.affiliations_raw,
    }


def paper_from_row(row: dict) -> PaperRecord:
    return PaperRecord(
        paper_id=row["paper_id"],
        citation_count=row["citation_count"],
        publication_year=row["publication_year"],
        affiliations_raw=list(row["affiliations_raw"]),
    )


def occurrence_to_row(occ: CityOccurrence) -> dict:
    row: dict[str, Any] = {"paper_id": occ.paper_id, "city": occ.city, "country": occ.country}
    if occ.coordinate is not None:
        row["latitude"] = occ.coordinate.latitude
        row["longitude"] = occ.coordinate.longitude
    return row


def occurrence_from_row(row: dict) -> CityOccurrence:
    coordinate = None
    if "latitude" in row:
        coordinate = GeoPoint(row["latitude"], row["longitude"])
    return CityOccurrence(
        paper_id=row["paper_id"], city=row["city"], country=row["country"], coordinate=coordinate
    )


def cluster_to_row(cluster: CityCluster) -> dict:
    return {
        "canonical_name": cluster.canonical_name,
        "country": cluster.country,
        "anchor": [cluster.anchor.latitude, cluster.anchor.longitude],
        "count": cluster.count,
        "members": [occurrence_to_row(m) for m in cluster.members],
    }


def cluster_from_row(row: dict) -> CityCluster:
    return CityCluster(
        canonical_name=row["canonical_name"],
        country=row["country"],
        anchor=GeoPoint(row["anchor"][0], row["anchor"][1]),
        count=row["count"],
        members=tuple(occurrence_from_row(m) for m in row["members"]),
    )


def circle_to_row(circle: ClassifiedCircle) -> dict:
    return {
        "cluster": cluster_to_row(circle.cluster),
        "percentile": circle.percentile,
        "class": circle.cls.value,
        "display_radius": circle.display_radius,
    }


def circle_from_row(row: dict) -> ClassifiedCircle:
    return ClassifiedCircle(
        cluster=cluster_from_row(row["cluster"]),
        percentile=row["percentile"],
        cls=PercentileClass(row["class"]),
        display_radius=row["display_radius"],
    )


# ---------------------------------------------------------------------------
# emission helper shared by `run` and the `emit` subcommand

def emit_format(doc: MapDocument, fmt: str) -> bytes:
    if fmt == "gps":
        return emit_gps_text(doc)
    if fmt == "geojson":
        return emit_geojson(doc)
    if fmt == "kml":
        return emit_kml(doc)
    if fmt == "html":
        return emit_html(doc)
    if fmt == "png":
        from .figures import render_png  # deferred: pulls in matplotlib

        return render_png(doc)
    raise ValueError(f"unknown output format: {fmt}")


# ---------------------------------------------------------------------------
# full pipeline

@dataclass
class PipelineResult:
    document: MapDocument
    report: VerificationReport | None
    out_dir: Path
    slice_result: SliceResult
    elapsed_s: float


def _stage(name: str, hint: str):
    class _StageContext:
        def __enter__(self):
            logger.info("stage: %s", name)
            return self

        def __exit__(self, exc_type, exc, tb):
            if exc is not None and not isinstance(exc, StageError):
                raise StageError(name, str(exc), hint) from exc
            return False

    return _StageContext()


def run_pipeline(config: PipelineConfig) -> PipelineResult:
    """Execute every stage and write the full artifact set under out_dir."""
    started = time.perf_counter()
    config.validate()
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    fileio.write_text(out_dir / CONFIG_ECHO_FILE, config.to_lines())

    with _stage("ingest", "check that the input path and --format match the export"):
        row_errors: list[str] = []
        records = parse_corpus(config.input, config.format, row_errors=row_errors)
        if not records:
            raise PipelineError("no records parsed from input")
        fileio.write_jsonl(out_dir / PAPERS_FILE, (paper_to_row(r) for r in records))

    with _stage("slice", "fraction must be in (0, 1]"):
        slice_result = select_top_slice(
            records, config.top_fraction, max_slice_warn=config.max_slice_warn
        )
        fileio.write_jsonl(out_dir / SELECTED_FILE, (paper_to_row(r) for r in slice_result.selected))
        fileio.write_json(
            out_dir / SLICE_FILE,
            {
                "fraction": slice_result.fraction,
                "corpus_size": slice_result.corpus_size,
                "nominal_k": slice_result.nominal_k,
                "threshold_citations": slice_result.threshold_citations,
                "selected_count": len(slice_result.selected),
            },
        )
        logger.info(
            "slice: corpus %d, nominal k %d, threshold %d, selected %d",
            slice_result.corpus_size,
            slice_result.nominal_k,
            slice_result.threshold_citations,
            len(slice_result.selected),
        )

    with _stage("extract", "addresses need at least 'city, country'"):
        occurrences, extract_report = extract_occurrences(slice_result.selected)
        write_cities_txt(occurrences, out_dir / CITIES_FILE)
        fileio.write_jsonl(out_dir / OCCURRENCES_FILE, (occurrence_to_row(o) for o in occurrences))
        fileio.write_json(
            out_dir / EXTRACT_FILE,
            {
                "occurrences": len(occurrences),
                "raw_addresses": extract_report.raw_addresses,
                "duplicates_collapsed": extract_report.duplicates_collapsed,
                "unparseable": extract_report.unparseable,
                "unparseable_samples": extract_report.unparseable_samples,
            },
        )

    with _stage("geocode", "check --gazetteer/--geo-cache paths or the remote endpoint"):
        backend = build_backend(config)
        cache_path = config.geo_cache or str(out_dir / "geocache.tsv")
        cache = GeoCache(cache_path)
        queries = [occ.query for occ in occurrences]
        entries = geocode_batch(
            queries, backend, cache=cache, max_in_flight=config.max_in_flight
        )
        write_geo_txt(entries, out_dir / GEO_FILE)
        fileio.write_json(
            out_dir / GEOCODE_FILE,
            {
                "queries": len(queries),
                "unique_queries": len(set(queries)),
                "unresolved": sum(1 for e in entries if not e.resolved),
                "source": backend.source_name,
            },
        )

    with _stage("merge", "occurrence and coordinate files must stay aligned"):
        located, drop_report = attach_coordinates(occurrences, entries)
        radius = config.merge_radius_value()
        clusters = merge_occurrences(located, radius)
        fileio.write_jsonl(out_dir / CLUSTERS_FILE, (cluster_to_row(c) for c in clusters))
        fileio.write_json(
            out_dir / MERGE_FILE,
            {
                "radius_deg": radius.degrees,
                "option": radius.option,
                "dropped_unresolved": drop_report.count,
                "dropped_queries": drop_report.dropped_queries,
                "clusters": len(clusters),
                "occurrences_kept": len(located),
            },
        )

    with _stage("classify", "counts must be positive"):
        circles = build_circles(
            clusters, radius_base=config.radius_base, log_base=config.log_base_value()
        )
        fileio.write_jsonl(out_dir / CIRCLES_FILE, (circle_to_row(c) for c in circles))

    with _stage("emit", "unknown formats: pick from gps, geojson, kml, html, png"):
        doc = MapDocument(
            circles=circles,
            title=config.title,
            generated_at=config.run_timestamp or None,
            parameters=config.parameter_echo(),
        )
        for fmt in config.format_list():
            data = emit_format(doc, fmt)
            fileio.write_bytes(out_dir / EMIT_FILES[fmt], data)

    report: VerificationReport | None = None
    if not config.no_verify:
        with _stage("verify", "see the report files for the failing checks"):
            gazetteer = Gazetteer.load(config.gazetteer) if config.gazetteer else None
            report = build_report(
                clusters,
                slice_result,
                gazetteer,
                tolerance_deg=config.consistency_tol,
                dropped_unresolved=drop_report.count,
                unparseable_addresses=extract_report.unparseable,
            )
            fileio.write_text(out_dir / REPORT_TEXT_FILE, report.to_text())
            fileio.write_text(out_dir / REPORT_JSONL_FILE, report.to_jsonl())

    elapsed = time.perf_counter() - started
    logger.info("pipeline finished in %.2fs", elapsed)
    return PipelineResult(
        document=doc,
        report=report,
        out_dir=out_dir,
        slice_result=slice_result,
        elapsed_s=elapsed,
    )


def build_backend(config: PipelineConfig):
    if config.geocoder == "gazetteer":
        if not config.gazetteer:
            raise PipelineError("geocoder=gazetteer needs a --gazetteer path")
        return Gazetteer.load(config.gazetteer)
    if not config.remote_endpoint:
        raise PipelineError("geocoder=remote needs a remote_endpoint")
    return RemoteBackend(config.remote_endpoint)
