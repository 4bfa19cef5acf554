"""Command-line entry point: one subcommand per pipeline stage plus `run`.

Each stage reads the previous stage's files from the run directory, so the
whole chain can be driven step by step:

    citegeo ingest corpus.csv --format scopus_csv --workdir out
    citegeo slice --workdir out --top-fraction 0.01
    citegeo extract --workdir out
    citegeo geocode --workdir out --geocoder gazetteer --gazetteer places.tsv
    citegeo merge --workdir out --merge 2
    citegeo classify --workdir out
    citegeo emit --workdir out --format geojson
    citegeo verify --workdir out --gazetteer places.tsv

or in one shot with `citegeo run`. Exit codes: 0 ok, 1 pipeline error,
2 usage error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import fileio, pipeline
from .config import PipelineConfig
from .emit import MapDocument
from .errors import PipelineError
from .geocode import (
    Gazetteer,
    GeoCache,
    attach_coordinates,
    geocode_batch,
    read_geo_txt,
    reconcile_sources,
    write_geo_txt,
)
from .ingest import extract_occurrences, parse_corpus, read_cities_txt, write_cities_txt
from .topslice import select_top_slice
from .agglomerate import MergeRadius, merge_occurrences
from .classify import build_circles
from .verify import build_report

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VERIFY_FAILED = 3


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.handler(args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    # shared by the root parser and every subcommand so the flag is accepted
    # on either side of the subcommand; argparse keeps a value the root
    # already set, so both spellings behave the same
    quiet = argparse.ArgumentParser(add_help=False)
    quiet.add_argument("--quiet", "-q", action="store_true", help="warnings only")

    parser = argparse.ArgumentParser(
        prog="citegeo",
        description="Map the cities behind a corpus's most-cited papers.",
        parents=[quiet],
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute the full pipeline", parents=[quiet])
    run.add_argument("--config", help="flat key=value config file; flags override it")
    run.add_argument("--input", help="corpus export path")
    run.add_argument("--format", choices=("scopus_csv", "wos_tagged"))
    run.add_argument("--top-fraction", type=float, dest="top_fraction")
    run.add_argument("--geocoder", choices=("gazetteer", "remote"))
    run.add_argument("--gazetteer", help="reference TSV: name, country, lat, lon")
    run.add_argument("--geo-cache", dest="geo_cache", help="append-only geocode cache path")
    run.add_argument("--remote-endpoint", dest="remote_endpoint")
    run.add_argument("--consistency-tol", type=float, dest="consistency_tol")
    run.add_argument("--merge", type=int, choices=(1, 2, 3))
    run.add_argument("--merge-radius", type=float, dest="merge_radius")
    run.add_argument("--radius-base", type=float, dest="radius_base")
    run.add_argument("--log-base", choices=("10", "e"), dest="log_base")
    run.add_argument("--formats", help="comma list from gps,geojson,kml,html,png")
    run.add_argument("--out", dest="out_dir", help="run directory for all outputs")
    run.add_argument("--title")
    run.add_argument("--no-verify", action="store_const", const=True, dest="no_verify")
    run.set_defaults(handler=cmd_run)

    ingest = sub.add_parser("ingest", help="parse a corpus export into paper records", parents=[quiet])
    ingest.add_argument("input", help="corpus export path")
    ingest.add_argument("--format", choices=("scopus_csv", "wos_tagged"), default="scopus_csv")
    _add_workdir(ingest)
    ingest.set_defaults(handler=cmd_ingest)

    slice_cmd = sub.add_parser("slice", help="select the top-cited fraction, ties included", parents=[quiet])
    slice_cmd.add_argument("--top-fraction", type=float, default=0.01, dest="top_fraction")
    slice_cmd.add_argument("--max-slice-warn", type=int, default=2000, dest="max_slice_warn")
    _add_workdir(slice_cmd)
    slice_cmd.set_defaults(handler=cmd_slice)

    extract = sub.add_parser("extract", help="extract city occurrences from the slice", parents=[quiet])
    _add_workdir(extract)
    extract.set_defaults(handler=cmd_extract)

    geocode_cmd = sub.add_parser("geocode", help="resolve occurrence coordinates", parents=[quiet])
    geocode_cmd.add_argument("--geocoder", choices=("gazetteer", "remote"), default="gazetteer")
    geocode_cmd.add_argument("--gazetteer", help="reference TSV path")
    geocode_cmd.add_argument("--remote-endpoint", dest="remote_endpoint")
    geocode_cmd.add_argument("--geo-cache", dest="geo_cache")
    geocode_cmd.add_argument("--consistency-tol", type=float, default=0.5, dest="consistency_tol")
    geocode_cmd.add_argument(
        "--cross-check",
        action="store_true",
        help="resolve with both sources and reconcile (needs gazetteer and remote endpoint)",
    )
    _add_workdir(geocode_cmd)
    geocode_cmd.set_defaults(handler=cmd_geocode)

    merge = sub.add_parser("merge", help="agglomerate occurrences into city clusters", parents=[quiet])
    merge.add_argument("--merge", type=int, choices=(1, 2, 3), default=2)
    merge.add_argument("--merge-radius", type=float, default=0.0, dest="merge_radius")
    _add_workdir(merge)
    merge.set_defaults(handler=cmd_merge)

    classify_cmd = sub.add_parser("classify", help="percentiles, classes and radii", parents=[quiet])
    classify_cmd.add_argument("--radius-base", type=float, default=4.0, dest="radius_base")
    classify_cmd.add_argument("--log-base", choices=("10", "e"), default="10", dest="log_base")
    _add_workdir(classify_cmd)
    classify_cmd.set_defaults(handler=cmd_classify)

    emit = sub.add_parser("emit", help="write a map file from classified circles", parents=[quiet])
    emit.add_argument("--format", choices=("gps", "geojson", "kml", "html", "png"), default="gps")
    emit.add_argument("--out", help="output path (defaults inside the workdir)")
    emit.add_argument("--title", default="top-cited city map")
    _add_workdir(emit)
    emit.set_defaults(handler=cmd_emit)

    verify = sub.add_parser("verify", help="recount and position-check the clusters", parents=[quiet])
    verify.add_argument("--gazetteer", help="reference TSV for position checks")
    verify.add_argument("--consistency-tol", type=float, default=0.5, dest="consistency_tol")
    _add_workdir(verify)
    verify.set_defaults(handler=cmd_verify)

    return parser


def _add_workdir(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--workdir", default=".", help="run directory shared by the stages")


# ---------------------------------------------------------------------------
# handlers

def cmd_run(args: argparse.Namespace) -> int:
    config = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    overrides = {
        key: getattr(args, key)
        for key in (
            "input",
            "format",
            "top_fraction",
            "geocoder",
            "gazetteer",
            "geo_cache",
            "remote_endpoint",
            "consistency_tol",
            "merge",
            "merge_radius",
            "radius_base",
            "log_base",
            "formats",
            "out_dir",
            "title",
            "no_verify",
        )
        if getattr(args, key, None) is not None
    }
    config.apply(overrides)
    if not config.input:
        raise PipelineError("no input: pass --input or set input= in the config")
    result = pipeline.run_pipeline(config)
    print(f"wrote {result.out_dir}/ ({len(result.document.circles)} circles)")
    if result.report is not None:
        print(
            f"verification: {'PASS' if result.report.passed else 'FAIL'} "
            f"({len(result.report.failures)} failures)"
        )
        if not result.report.passed:
            return EXIT_VERIFY_FAILED
    return EXIT_OK


def cmd_ingest(args: argparse.Namespace) -> int:
    workdir = Path(args.workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    row_errors: list[str] = []
    records = parse_corpus(args.input, args.format, row_errors=row_errors)
    if not records:
        raise PipelineError("no records parsed from input")
    fileio.write_jsonl(workdir / pipeline.PAPERS_FILE, (pipeline.paper_to_row(r) for r in records))
    print(f"parsed {len(records)} records ({len(row_errors)} rows skipped)")
    return EXIT_OK


def cmd_slice(args: argparse.Namespace) -> int:
    workdir = Path(args.workdir)
    records = [pipeline.paper_from_row(r) for r in fileio.read_jsonl(workdir / pipeline.PAPERS_FILE)]
    result = select_top_slice(records, args.top_fraction, max_slice_warn=args.max_slice_warn)
    fileio.write_jsonl(
        workdir / pipeline.SELECTED_FILE, (pipeline.paper_to_row(r) for r in result.selected)
    )
    fileio.write_json(
        workdir / pipeline.SLICE_FILE,
        {
            "fraction": result.fraction,
            "corpus_size": result.corpus_size,
            "nominal_k": result.nominal_k,
            "threshold_citations": result.threshold_citations,
            "selected_count": len(result.selected),
        },
    )
    print(
        f"corpus_size={result.corpus_size} nominal_k={result.nominal_k} "
        f"threshold={result.threshold_citations} selected={len(result.selected)}"
    )
    return EXIT_OK


def cmd_extract(args: argparse.Namespace) -> int:
    workdir = Path(args.workdir)
    records = [pipeline.paper_from_row(r) for r in fileio.read_jsonl(workdir / pipeline.SELECTED_FILE)]
    occurrences, report = extract_occurrences(records)
    write_cities_txt(occurrences, workdir / pipeline.CITIES_FILE)
    fileio.write_jsonl(
        workdir / pipeline.OCCURRENCES_FILE, (pipeline.occurrence_to_row(o) for o in occurrences)
    )
    fileio.write_json(
        workdir / pipeline.EXTRACT_FILE,
        {
            "occurrences": len(occurrences),
            "raw_addresses": report.raw_addresses,
            "duplicates_collapsed": report.duplicates_collapsed,
            "unparseable": report.unparseable,
            "unparseable_samples": report.unparseable_samples,
        },
    )
    print(f"{len(occurrences)} occurrences ({report.unparseable} unparseable addresses)")
    return EXIT_OK


def cmd_geocode(args: argparse.Namespace) -> int:
    workdir = Path(args.workdir)
    queries = read_cities_txt(workdir / pipeline.CITIES_FILE)
    cache = GeoCache(args.geo_cache or workdir / "geocache.tsv")

    gazetteer = Gazetteer.load(args.gazetteer) if args.gazetteer else None
    if args.geocoder == "gazetteer":
        if gazetteer is None:
            raise PipelineError("geocoder=gazetteer needs a --gazetteer path")
        backend = gazetteer
    else:
        if not args.remote_endpoint:
            raise PipelineError("geocoder=remote needs --remote-endpoint")
        from .geocode import RemoteBackend

        backend = RemoteBackend(args.remote_endpoint)

    entries = geocode_batch(queries, backend, cache=cache)

    if args.cross_check:
        if gazetteer is None or args.geocoder != "remote":
            raise PipelineError("--cross-check needs geocoder=remote plus a --gazetteer")
        alt = geocode_batch(queries, gazetteer, cache=cache)
        comparisons = reconcile_sources(entries, alt, args.consistency_tol)
        fileio.write_jsonl(
            workdir / "reconcile.jsonl",
            (
                {"query": c.query, "status": c.status, "adopted": list(c.adopted) if c.adopted else None}
                for c in comparisons
            ),
        )
        disagreements = sum(1 for c in comparisons if c.status == "disagree")
        print(f"cross-check: {disagreements} disagreements over {len(comparisons)} queries")

    write_geo_txt(entries, workdir / pipeline.GEO_FILE)
    unresolved = sum(1 for e in entries if not e.resolved)
    fileio.write_json(
        workdir / pipeline.GEOCODE_FILE,
        {
            "queries": len(queries),
            "unique_queries": len(set(queries)),
            "unresolved": unresolved,
            "source": backend.source_name,
        },
    )
    print(f"geocoded {len(queries)} queries ({unresolved} unresolved)")
    return EXIT_OK


def cmd_merge(args: argparse.Namespace) -> int:
    workdir = Path(args.workdir)
    occurrences = [
        pipeline.occurrence_from_row(r)
        for r in fileio.read_jsonl(workdir / pipeline.OCCURRENCES_FILE)
    ]
    entries = read_geo_txt(workdir / pipeline.GEO_FILE)
    located, drop_report = attach_coordinates(occurrences, entries)
    radius = (
        MergeRadius(degrees=args.merge_radius)
        if args.merge_radius > 0
        else MergeRadius.from_option(args.merge)
    )
    clusters = merge_occurrences(located, radius)
    fileio.write_jsonl(workdir / pipeline.CLUSTERS_FILE, (pipeline.cluster_to_row(c) for c in clusters))
    fileio.write_json(
        workdir / pipeline.MERGE_FILE,
        {
            "radius_deg": radius.degrees,
            "option": radius.option,
            "dropped_unresolved": drop_report.count,
            "dropped_queries": drop_report.dropped_queries,
            "clusters": len(clusters),
            "occurrences_kept": len(located),
        },
    )
    print(f"{len(clusters)} clusters from {len(located)} occurrences ({drop_report.count} dropped)")
    return EXIT_OK


def cmd_classify(args: argparse.Namespace) -> int:
    workdir = Path(args.workdir)
    clusters = [pipeline.cluster_from_row(r) for r in fileio.read_jsonl(workdir / pipeline.CLUSTERS_FILE)]
    import math

    log_base = math.e if args.log_base == "e" else 10.0
    circles = build_circles(clusters, radius_base=args.radius_base, log_base=log_base)
    fileio.write_jsonl(workdir / pipeline.CIRCLES_FILE, (pipeline.circle_to_row(c) for c in circles))
    print(f"classified {len(circles)} circles")
    return EXIT_OK


def cmd_emit(args: argparse.Namespace) -> int:
    workdir = Path(args.workdir)
    circles = [pipeline.circle_from_row(r) for r in fileio.read_jsonl(workdir / pipeline.CIRCLES_FILE)]
    doc = MapDocument(circles=circles, title=args.title)
    data = pipeline.emit_format(doc, args.format)
    out = Path(args.out) if args.out else workdir / pipeline.EMIT_FILES[args.format]
    fileio.write_bytes(out, data)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    workdir = Path(args.workdir)
    clusters = [pipeline.cluster_from_row(r) for r in fileio.read_jsonl(workdir / pipeline.CLUSTERS_FILE)]
    selected = [pipeline.paper_from_row(r) for r in fileio.read_jsonl(workdir / pipeline.SELECTED_FILE)]
    slice_meta = fileio.read_json(workdir / pipeline.SLICE_FILE)
    from .topslice import SliceResult

    corpus = SliceResult(
        fraction=slice_meta["fraction"],
        threshold_citations=slice_meta["threshold_citations"],
        selected=selected,
        corpus_size=slice_meta["corpus_size"],
        nominal_k=slice_meta["nominal_k"],
    )
    dropped = 0
    unparseable = 0
    merge_meta_path = workdir / pipeline.MERGE_FILE
    if merge_meta_path.exists():
        dropped = fileio.read_json(merge_meta_path).get("dropped_unresolved", 0)
    extract_meta_path = workdir / pipeline.EXTRACT_FILE
    if extract_meta_path.exists():
        unparseable = fileio.read_json(extract_meta_path).get("unparseable", 0)

    gazetteer = Gazetteer.load(args.gazetteer) if args.gazetteer else None
    report = build_report(
        clusters,
        corpus,
        gazetteer,
        tolerance_deg=args.consistency_tol,
        dropped_unresolved=dropped,
        unparseable_addresses=unparseable,
    )
    fileio.write_text(workdir / pipeline.REPORT_TEXT_FILE, report.to_text())
    fileio.write_text(workdir / pipeline.REPORT_JSONL_FILE, report.to_jsonl())
    print(report.to_text(), end="")
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


if __name__ == "__main__":
    sys.exit(main())
